//! Bounded-degree complex polynomials.
//!
//! A [`BoundedPoly`] lives in the space of polynomials of degree at most `D`
//! and is stored as its coefficient vector `a[0..=D]` in ascending powers
//! (`a[n]` multiplies `z^n`). The bound `D` is part of the value: trailing
//! zero coefficients are kept, because each one stands for a root at
//! infinity, and arithmetic never trims them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance used by [`BoundedPoly::approx_eq_default`].
pub const EQ_REL_TOL: f64 = 1e-9;
/// Absolute floor used by [`BoundedPoly::approx_eq_default`].
pub const EQ_ABS_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct BoundedPoly {
    coeffs: Vec<Complex64>,
}

impl BoundedPoly {
    /// Builds a polynomial from ascending coefficients. The degree bound is
    /// `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial(
                "coefficient vector must have at least one entry".into(),
            ));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidPolynomial(
                "coefficients must be finite".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_vec_unchecked(coeffs: Vec<Complex64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn zero(degree_bound: usize) -> Self {
        Self {
            coeffs: vec![ZERO; degree_bound + 1],
        }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![ONE] }
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// The factor `(z - inf)` in `C_{<=1}[z]`, i.e. `0*z + 1`.
    pub fn infinity_factor() -> Self {
        Self {
            coeffs: vec![ONE, ZERO],
        }
    }

    /// The monic linear factor `z - root`.
    pub fn linear_factor(root: Complex64) -> Self {
        Self {
            coeffs: vec![-root, ONE],
        }
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs[n]
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// True when every coefficient has modulus at most `tol`.
    pub fn is_negligible(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.norm() <= tol)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.degree_bound() != other.degree_bound() {
            return Err(Error::IncompatibleSpaces {
                left: self.degree_bound(),
                right: other.degree_bound(),
            });
        }
        Ok(())
    }

    /// Product as a map `C_{<=D1} x C_{<=D2} -> C_{<=D1+D2}`: the full
    /// convolution of the coefficient vectors.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Conjugate reversal `z^D * conj(A(1/conj(z)))`: `out[n] = conj(a[D-n])`.
    pub fn conj_reverse(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
    }

    /// The `(D+L+1) x (L+1)` banded Toeplitz matrix `M` with
    /// `M * b = coeffs(self * b)` for every `b` in `C_{<=L}[z]`.
    pub fn mult_matrix(&self, cols_bound: usize) -> DMatrix<Complex64> {
        let d = self.degree_bound();
        let rows = d + cols_bound + 1;
        let cols = cols_bound + 1;
        DMatrix::from_fn(rows, cols, |r, c| {
            if r >= c && r - c <= d {
                self.coeffs[r - c]
            } else {
                ZERO
            }
        })
    }

    /// `sum_n x[n] * conj(y[n])`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.check_same_space(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x * y.conj())
            .sum())
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
    }

    /// Coefficients of the formal derivative, in `C_{<=D-1}` (or the zero
    /// constant for `D = 0`).
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(0);
        }
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, c)| c * n as f64)
                .collect(),
        }
    }

    /// Max-norm difference, `None` if the degree bounds differ.
    pub fn max_diff(&self, other: &Self) -> Option<f64> {
        if self.degree_bound() != other.degree_bound() {
            return None;
        }
        Some(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        )
    }

    /// Equal bounds and `max|a-b| <= max(rel * max(|a|,|b|), abs)`.
    pub fn approx_eq(&self, other: &Self, rel: f64, abs: f64) -> bool {
        match self.max_diff(other) {
            Some(d) => d <= (rel * self.max_abs().max(other.max_abs())).max(abs),
            None => false,
        }
    }

    pub fn approx_eq_default(&self, other: &Self) -> bool {
        self.approx_eq(other, EQ_REL_TOL, EQ_ABS_TOL)
    }

    /// Least-squares solution `c` of `self = divisor * c` with `c` in
    /// `C_{<=Da-Db}`. Returns the quotient and the relative max-norm residual
    /// `max|self - divisor*c| / max|self|` (absolute when `self` is zero).
    pub fn div_lstsq(&self, divisor: &Self) -> Result<(Self, f64)> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let da = self.degree_bound();
        let db = divisor.degree_bound();
        if db > da {
            return Err(Error::IncompatibleSpaces {
                left: db,
                right: da,
            });
        }
        let quotient_bound = da - db;
        let m = divisor.mult_matrix(quotient_bound);
        let rhs = DVector::from_column_slice(&self.coeffs);
        let svd = m.svd(true, true);
        let sol = svd
            .solve(&rhs, 0.0)
            .map_err(|e| Error::InconsistentData(format!("least-squares division failed: {e}")))?;
        let quotient = Self::from_vec_unchecked(sol.iter().copied().collect());
        let recon = divisor.mul(&quotient);
        let diff = recon.max_diff(self).unwrap_or(f64::INFINITY);
        let scale = self.max_abs();
        let residual = if scale > 0.0 { diff / scale } else { diff };
        Ok((quotient, residual))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `A(z) = 1/2 z^3 + 1/2 z^2 - z` in `C_{<=5}[z]`.
    fn example_a() -> BoundedPoly {
        BoundedPoly::from_real(&[0.0, -1.0, 0.5, 0.5, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(BoundedPoly::new(vec![]).is_err());
        assert!(BoundedPoly::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(BoundedPoly::new(vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn infinity_factors_build_example() {
        let inf = BoundedPoly::infinity_factor();
        let core = BoundedPoly::from_real(&[0.0, -1.0, 0.5, 0.5]).unwrap();
        let a = inf.mul(&inf).mul(&core);
        assert_eq!(a, example_a());
        assert_eq!(a.degree_bound(), 5);
    }

    #[test]
    fn mul_by_one_is_identity() {
        let b = BoundedPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)]).unwrap();
        assert_eq!(BoundedPoly::one().mul(&b), b);
    }

    #[test]
    fn conj_reverse_example() {
        let at = example_a().conj_reverse();
        assert_eq!(
            at,
            BoundedPoly::from_real(&[0.0, 0.0, 0.5, 0.5, -1.0, 0.0]).unwrap()
        );
        assert_eq!(at.conj_reverse(), example_a());
    }

    #[test]
    fn mult_matrix_small() {
        let a = BoundedPoly::from_real(&[1.0, 2.0]).unwrap();
        let m = a.mult_matrix(1);
        assert_eq!(m.shape(), (3, 2));
        let expect = [[1.0, 0.0], [2.0, 1.0], [0.0, 2.0]];
        for r in 0..3 {
            for col in 0..2 {
                assert_eq!(m[(r, col)], c(expect[r][col], 0.0));
            }
        }
        let single = a.mult_matrix(0);
        assert_eq!(single.shape(), (2, 1));
        assert_eq!(single[(0, 0)], c(1.0, 0.0));
        assert_eq!(single[(1, 0)], c(2.0, 0.0));
    }

    #[test]
    fn inner_product_cases() {
        let x = BoundedPoly::from_real(&[1.0, 0.0]).unwrap();
        let y = BoundedPoly::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(x.inner_product(&y).unwrap(), c(0.0, 0.0));
        let v = BoundedPoly::new(vec![c(1.0, 1.0), c(2.0, -1.0)]).unwrap();
        let ip = v.inner_product(&v).unwrap();
        assert!((ip.re - 7.0).abs() < 1e-15 && ip.im == 0.0);
        let w = BoundedPoly::zero(2);
        assert_eq!(
            x.inner_product(&w),
            Err(Error::IncompatibleSpaces { left: 1, right: 2 })
        );
    }

    #[test]
    fn eval_example_roots() {
        let a = example_a();
        assert_eq!(a.eval(c(1.0, 0.0)), c(0.0, 0.0));
        assert_eq!(a.eval(c(-2.0, 0.0)), c(0.0, 0.0));
        let b = BoundedPoly::new(vec![c(3.0, -1.0), c(1.0, 1.0)]).unwrap();
        assert_eq!(b.eval(c(0.0, 0.0)), c(3.0, -1.0));
    }

    #[test]
    fn div_lstsq_example_divisor() {
        let f = BoundedPoly::from_real(&[2.0, 1.0, 0.0, 0.0]).unwrap();
        let (q, res) = example_a().div_lstsq(&f).unwrap();
        assert!(res < 1e-14);
        // A = F * (1/2 (z-1) z)
        let expect = BoundedPoly::from_real(&[0.0, -0.5, 0.5]).unwrap();
        assert!(q.approx_eq_default(&expect));
        assert_eq!(
            example_a().div_lstsq(&BoundedPoly::zero(2)),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn approx_eq_respects_bounds() {
        let a = BoundedPoly::from_real(&[1.0, 2.0]).unwrap();
        let b = BoundedPoly::from_real(&[1.0, 2.0, 0.0]).unwrap();
        assert!(!a.approx_eq_default(&b));
        let a2 = BoundedPoly::from_real(&[1.0 + 1e-12, 2.0]).unwrap();
        assert!(a.approx_eq_default(&a2));
    }
}
