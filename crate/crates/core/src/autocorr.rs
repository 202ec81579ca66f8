//! The forward model: multichannel signals and their correlation matrix
//! polynomial.
//!
//! For signals `x_1..x_K` of length `N`, entry `(i, j)` of `Gamma(z)` is
//! `X_i(z) * conj_reverse(X_j)(z)` in `C_{<=2N-2}[z]`. Its coefficient at
//! `z^p` is the cross-correlation `gamma_ij[p - (N-1)]`, where
//! `gamma_ij[n] = sum_m x_i[m+n] conj(x_j[m])`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::BoundedPoly;

/// Coefficients below this fraction of the largest one are treated as zero
/// when picking the canonical phase.
const PHASE_ZERO_TOL: f64 = 1e-10;

/// `K` complex channels of common length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTuple {
    signals: Vec<Vec<Complex64>>,
}

impl SignalTuple {
    pub fn new(signals: Vec<Vec<Complex64>>) -> Result<Self> {
        let Some(first) = signals.first() else {
            return Err(Error::EmptyInput("signal tuple needs at least one channel"));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::EmptyInput("signals must have positive length"));
        }
        if let Some((k, s)) = signals.iter().enumerate().find(|(_, s)| s.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "channel {k} has length {} but channel 0 has length {n}",
                s.len()
            )));
        }
        if signals
            .iter()
            .flatten()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidPolynomial(
                "signal samples must be finite".into(),
            ));
        }
        Ok(Self { signals })
    }

    /// Channels given as polynomials of a common degree bound.
    pub fn from_polys(polys: &[BoundedPoly]) -> Result<Self> {
        Self::new(polys.iter().map(|p| p.coeffs().to_vec()).collect())
    }

    pub fn k(&self) -> usize {
        self.signals.len()
    }

    pub fn n(&self) -> usize {
        self.signals[0].len()
    }

    pub fn channel(&self, k: usize) -> &[Complex64] {
        &self.signals[k]
    }

    pub fn channels(&self) -> &[Vec<Complex64>] {
        &self.signals
    }

    pub fn poly(&self, k: usize) -> BoundedPoly {
        BoundedPoly::from_vec_unchecked(self.signals[k].clone())
    }

    pub fn polys(&self) -> Vec<BoundedPoly> {
        (0..self.k()).map(|k| self.poly(k)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.signals
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            signals: self
                .signals
                .iter()
                .map(|ch| ch.iter().map(|c| c * s).collect())
                .collect(),
        }
    }

    /// Representative of the orbit `{beta * x : |beta| = 1}` whose first
    /// non-negligible coefficient (channel-major scan) is real positive.
    pub fn canonicalize(&self) -> Self {
        let thr = PHASE_ZERO_TOL * self.max_abs();
        match self.signals.iter().flatten().find(|c| c.norm() > thr) {
            Some(c) => self.scale(c.conj() / c.norm()),
            None => self.clone(),
        }
    }

    /// Relative max-norm distance `min_{|beta|=1} |beta*self - other| / |other|`
    /// with `beta` from the least-squares phase alignment.
    pub fn phase_distance(&self, other: &Self) -> Result<f64> {
        if self.k() != other.k() || self.n() != other.n() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.k(),
                self.n(),
                other.k(),
                other.n()
            )));
        }
        let ip: Complex64 = self
            .signals
            .iter()
            .flatten()
            .zip(other.signals.iter().flatten())
            .map(|(a, b)| b * a.conj())
            .sum();
        let beta = if ip.norm() > 0.0 {
            ip / ip.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let diff = self
            .signals
            .iter()
            .flatten()
            .zip(other.signals.iter().flatten())
            .map(|(a, b)| (a * beta - b).norm())
            .fold(0.0, f64::max);
        let scale = other.max_abs().max(self.max_abs());
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }
}

/// `K x K` grid of polynomials in `C_{<=2N-2}`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrixPoly {
    k: usize,
    n: usize,
    entries: Vec<BoundedPoly>,
}

impl CorrMatrixPoly {
    pub fn new(k: usize, n: usize, entries: Vec<BoundedPoly>) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::EmptyInput("K and N must be positive"));
        }
        if entries.len() != k * k {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for K={k}, got {}",
                k * k,
                entries.len()
            )));
        }
        let bound = 2 * (n - 1);
        if let Some((idx, e)) = entries
            .iter()
            .enumerate()
            .find(|(_, e)| e.degree_bound() != bound)
        {
            return Err(Error::DimensionMismatch(format!(
                "entry ({}, {}) has degree bound {} but N={n} requires {bound}",
                idx / k,
                idx % k,
                e.degree_bound()
            )));
        }
        Ok(Self { k, n, entries })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &BoundedPoly {
        &self.entries[i * self.k + j]
    }

    pub fn entries(&self) -> &[BoundedPoly] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[BoundedPoly] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    /// Coefficient of entry `(i, j)` at `z^{N-1}` (lag 0).
    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        self.entry(i, j).coeff(self.n - 1)
    }

    /// `gamma_ij[lag]` for `lag` in `[-(N-1), N-1]`.
    pub fn lag(&self, i: usize, j: usize, lag: isize) -> Complex64 {
        let p = lag + self.n as isize - 1;
        self.entry(i, j).coeff(p as usize)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.max_abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }
}

/// `Gamma_ij = X_i * conj_reverse(X_j)`.
pub fn correlate(x: &SignalTuple) -> CorrMatrixPoly {
    let k = x.k();
    let polys = x.polys();
    let reversed: Vec<BoundedPoly> = polys.iter().map(|p| p.conj_reverse()).collect();
    let entries: Vec<BoundedPoly> = (0..k * k)
        .into_par_iter()
        .map(|idx| polys[idx / k].mul(&reversed[idx % k]))
        .collect();
    CorrMatrixPoly {
        k,
        n: x.n(),
        entries,
    }
}

/// Largest coefficient mismatch between `gamma` and the correlation of `y`,
/// relative to the largest coefficient of `gamma`.
pub fn residual(gamma: &CorrMatrixPoly, y: &SignalTuple) -> Result<f64> {
    if gamma.k() != y.k() || gamma.n() != y.n() {
        return Err(Error::DimensionMismatch(format!(
            "gamma is K={} N={}, signals are K={} N={}",
            gamma.k(),
            gamma.n(),
            y.k(),
            y.n()
        )));
    }
    let model = correlate(y);
    let diff = gamma
        .entries
        .iter()
        .zip(&model.entries)
        .map(|(a, b)| a.max_diff(b).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let scale = gamma.max_abs();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Structural check: `Gamma_ji = conj_reverse(Gamma_ij)` and each diagonal
/// center coefficient is real and nonnegative, all within `tol` relative to
/// the largest coefficient.
pub fn palindromic_check(gamma: &CorrMatrixPoly, tol: f64) -> bool {
    palindromic_violation(gamma, tol).is_none()
}

/// Like [`palindromic_check`] but describes the first violation found.
pub fn palindromic_violation(gamma: &CorrMatrixPoly, tol: f64) -> Option<String> {
    let abs_tol = tol * gamma.max_abs();
    for i in 0..gamma.k() {
        for j in i..gamma.k() {
            let flipped = gamma.entry(i, j).conj_reverse();
            let d = flipped.max_diff(gamma.entry(j, i)).unwrap_or(f64::INFINITY);
            if d > abs_tol {
                return Some(format!(
                    "entry ({j}, {i}) differs from the conjugate reversal of ({i}, {j}) by {d:e}"
                ));
            }
        }
        let c = gamma.center(i, i);
        if c.im.abs() > abs_tol || c.re < -abs_tol {
            return Some(format!(
                "diagonal entry ({i}, {i}) has center coefficient {c} (must be real and >= 0)"
            ));
        }
    }
    None
}
