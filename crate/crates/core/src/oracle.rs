//! Brute-force reference implementations for cross-checking.
//!
//! Nothing here shares code with `factorize`: the correlation is summed
//! directly, quotients come from long division and per-row root
//! intersection, and spectral factors are found by trying every subset of
//! the roots of `H` and keeping the ones that work.

use num_complex::Complex64;

use crate::autocorr::{residual, CorrMatrixPoly, SignalTuple};
use crate::error::{Error, Result};
use crate::gcd::{gcd_many, GcdOptions};
use crate::poly::BoundedPoly;
use crate::roots::{find_roots, from_roots, ExtRoot, RootFactorization, RootOptions};

/// Upper limit on the number of root subsets examined.
pub const DEFAULT_BUDGET: u128 = 100_000;

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub candidate_count: u128,
    /// Phase-canonical, duplicate-free accepted solutions.
    pub accepted: Vec<SignalTuple>,
    pub max_residual: f64,
}

/// `gamma_ij[n] = sum_m x_i[m+n] conj(x_j[m])` for `n >= 0`, and
/// `gamma_ij[-n] = conj(gamma_ji[n])`, laid out at power `n + N - 1`.
pub fn naive_correlate(x: &SignalTuple) -> CorrMatrixPoly {
    let k = x.k();
    let n = x.n();
    let lag = |i: usize, j: usize, l: usize| -> Complex64 {
        let (xi, xj) = (x.channel(i), x.channel(j));
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..n - l {
            acc += xi[m + l] * xj[m].conj();
        }
        acc
    };
    let mut entries = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
            for l in 0..n {
                coeffs[n - 1 + l] = lag(i, j, l);
                if l > 0 {
                    coeffs[n - 1 - l] = lag(j, i, l).conj();
                }
            }
            entries.push(BoundedPoly::from_vec_unchecked(coeffs));
        }
    }
    CorrMatrixPoly::new(k, n, entries).expect("shape is consistent by construction")
}

/// Coprimeness by comparing root multisets (infinity included).
pub fn coprime_by_roots(x1: &BoundedPoly, x2: &BoundedPoly, opts: &GcdOptions) -> Result<bool> {
    match (x1.is_zero(), x2.is_zero()) {
        (true, true) => return Ok(false),
        (true, false) => return Ok(x2.degree_bound() == 0),
        (false, true) => return Ok(x1.degree_bound() == 0),
        _ => {}
    }
    let f1 = find_roots(x1, &opts.roots)?;
    let f2 = find_roots(x2, &opts.roots)?;
    Ok(!f1
        .roots
        .iter()
        .any(|(a, _)| f2.roots.iter().any(|(b, _)| a.close_to(b, opts.tol_match))))
}

/// Schoolbook division of `a` by `b` in the bounded sense. Returns `None`
/// when `b` has more roots at infinity than `a`.
fn long_divide(a: &BoundedPoly, b: &BoundedPoly) -> Option<BoundedPoly> {
    let da = a.degree_bound();
    let db = b.degree_bound();
    if db > da {
        return None;
    }
    let bc = b.coeffs();
    let ac = a.coeffs();
    let b_top = (0..=db).rev().find(|&i| bc[i].norm() > 0.0)?;
    let mut rem: Vec<Complex64> = ac.to_vec();
    let qb = da - db;
    let mut q = vec![Complex64::new(0.0, 0.0); qb + 1];
    // b's zero leading coefficients must be matched by zeros at the top of a
    for i in (0..=qb).rev() {
        let pos = i + b_top;
        let coef = rem[pos] / bc[b_top];
        q[i] = coef;
        for t in 0..=b_top {
            rem[i + t] -= coef * bc[t];
        }
    }
    Some(BoundedPoly::from_vec_unchecked(q))
}

fn ext_close(a: &ExtRoot, b: &ExtRoot, tol: f64) -> bool {
    a.close_to(b, tol)
}

/// Roots common to every nonzero polynomial in `row`, multiplicity = min.
fn row_common_roots(row: &[BoundedPoly], opts: &RootOptions, tol: f64) -> Result<Vec<ExtRoot>> {
    let mut lists: Vec<Vec<ExtRoot>> = Vec::new();
    for p in row.iter().filter(|p| !p.is_zero()) {
        lists.push(find_roots(p, opts)?.expanded());
    }
    let Some(first) = lists.first() else {
        return Ok(Vec::new());
    };
    let mut common = first.clone();
    for other in &lists[1..] {
        let mut pool = other.clone();
        common.retain(|r| match pool.iter().position(|s| ext_close(r, s, tol)) {
            Some(i) => {
                pool.swap_remove(i);
                true
            }
            None => false,
        });
    }
    Ok(common)
}

fn n_choose_k(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for t in i + 1..k {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// All factorizations of `gamma` by exhaustive search over spectral-factor
/// root subsets. `tol` is the relative residual a candidate must meet.
pub fn brute_force_factorizations(
    gamma: &CorrMatrixPoly,
    tol: f64,
    budget: u128,
) -> Result<OracleReport> {
    let gopts = GcdOptions::default();
    let k = gamma.k();
    let n = gamma.n();
    let g = gcd_many(gamma.entries(), &gopts)?;
    let Some(hf) = g.factorization else {
        return Err(Error::Precondition(
            "correlation matrix is identically zero".into(),
        ));
    };
    let all_roots = hf.expanded();
    if all_roots.len() % 2 != 0 {
        return Err(Error::InvalidGcd("odd number of roots".into()));
    }
    let d = all_roots.len() / 2;
    let candidates = n_choose_k(2 * d, d);
    if candidates > budget {
        return Err(Error::BudgetExceeded {
            needed: candidates,
            budget,
        });
    }
    let h = from_roots(&RootFactorization::new(
        Complex64::new(1.0, 0.0),
        hf.roots.clone(),
    )?);
    let h_center = h.coeff(d);
    let h = h.scale(h_center.conj() / h_center.norm());

    // quotient matrix G = Gamma / H
    let mut gq = Vec::with_capacity(k * k);
    for e in gamma.entries() {
        gq.push(long_divide(e, &h).ok_or_else(|| {
            Error::InvalidGcd("gcd has more roots at infinity than an entry".into())
        })?);
    }
    let nq = n - d;
    let center = |i: usize, j: usize| gq[i * k + j].coeff(nq - 1);

    // quotient polynomials R_k from row-wise common roots, then scaled
    let mut monic = Vec::with_capacity(k);
    for i in 0..k {
        let row = &gq[i * k..(i + 1) * k];
        if gamma.row(i).iter().all(|p| p.is_zero()) {
            monic.push(None);
            continue;
        }
        let roots = if k == 1 {
            Vec::new()
        } else {
            row_common_roots(row, &gopts.roots, gopts.tol_match)?
        };
        if roots.len() != nq - 1 {
            return Err(Error::InconsistentData(format!(
                "row {i} of Gamma/H shares {} roots, expected {}",
                roots.len(),
                nq - 1
            )));
        }
        let grouped: Vec<(ExtRoot, usize)> = roots.into_iter().map(|r| (r, 1)).collect();
        monic.push(Some(from_roots(&RootFactorization::new(
            Complex64::new(1.0, 0.0),
            grouped,
        )?)));
    }
    let Some(k0) = monic.iter().position(|m| m.is_some()) else {
        return Err(Error::Precondition("all channels vanish".into()));
    };
    let r0 = monic[k0].clone().unwrap();
    let c0 = (center(k0, k0).re / r0.mul(&r0.conj_reverse()).coeff(nq - 1).re).sqrt();
    let mut quotients = Vec::with_capacity(k);
    for (i, m) in monic.iter().enumerate() {
        match m {
            None => quotients.push(BoundedPoly::zero(nq - 1)),
            Some(ri) => {
                let model = ri.mul(&r0.conj_reverse());
                let target = &gq[i * k + k0];
                let (idx, _) = target
                    .coeffs()
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                    .unwrap();
                let ci = target.coeff(idx) / (model.coeff(idx) * c0);
                quotients.push(ri.scale(ci));
            }
        }
    }

    let mut accepted: Vec<SignalTuple> = Vec::new();
    let mut max_residual: f64 = 0.0;
    let hc = h.coeff(d).re;
    for_each_subset(2 * d, d, |subset| {
        let chosen: Vec<(ExtRoot, usize)> = subset.iter().map(|&i| (all_roots[i], 1)).collect();
        let s0 = from_roots(&RootFactorization::new(Complex64::new(1.0, 0.0), chosen)?);
        let p0 = s0.mul(&s0.conj_reverse());
        let pc = p0.coeff(d).re;
        if pc <= 0.0 {
            return Ok(());
        }
        let s = s0.scale(Complex64::new((hc / pc).sqrt(), 0.0));
        let ss = s.mul(&s.conj_reverse());
        if ss.max_diff(&h).unwrap_or(f64::INFINITY) > tol * h.max_abs() {
            return Ok(());
        }
        let y = SignalTuple::from_polys(&quotients.iter().map(|r| s.mul(r)).collect::<Vec<_>>())?
            .canonicalize();
        let res = residual(gamma, &y)?;
        if res > tol {
            return Ok(());
        }
        let scale = y.max_abs();
        let duplicate = accepted.iter().any(|a| {
            a.channels()
                .iter()
                .flatten()
                .zip(y.channels().iter().flatten())
                .all(|(p, q)| (p - q).norm() <= 1e-6 * scale)
        });
        if !duplicate {
            max_residual = max_residual.max(res);
            accepted.push(y);
        }
        Ok(())
    })?;

    Ok(OracleReport {
        candidate_count: candidates,
        accepted,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autocorr::correlate;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn naive_correlate_pair() {
        let x = SignalTuple::new(vec![vec![c(1.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let g = naive_correlate(&x);
        assert_eq!(
            g.entry(0, 0),
            &BoundedPoly::from_real(&[1.0, 2.0, 1.0]).unwrap()
        );
    }

    #[test]
    fn naive_correlate_zero() {
        let x = SignalTuple::new(vec![vec![c(0.0, 0.0); 3], vec![c(0.0, 0.0); 3]]).unwrap();
        assert!(naive_correlate(&x).is_zero());
    }

    #[test]
    fn naive_matches_fast_path() {
        let x = SignalTuple::new(vec![
            vec![c(1.0, 0.5), c(-0.3, 2.0), c(0.7, 0.0)],
            vec![c(0.0, 1.0), c(1.5, -0.5), c(-1.0, 0.2)],
        ])
        .unwrap();
        let a = naive_correlate(&x);
        let b = correlate(&x);
        for (p, q) in a.entries().iter().zip(b.entries()) {
            assert!(p.max_diff(q).unwrap() < 1e-14);
        }
    }

    #[test]
    fn subsets_and_binomials() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 6);
        assert_eq!(n_choose_k(4, 2), 6);
        assert_eq!(n_choose_k(14, 7), 3432);
        assert_eq!(n_choose_k(3, 0), 1);
    }

    #[test]
    fn long_divide_respects_infinity() {
        let a = BoundedPoly::from_real(&[0.0, -1.0, 0.5, 0.5, 0.0, 0.0]).unwrap();
        let f = BoundedPoly::from_real(&[2.0, 1.0, 0.0, 0.0]).unwrap();
        let q = long_divide(&a, &f).unwrap();
        assert!(q.approx_eq_default(&BoundedPoly::from_real(&[0.0, -0.5, 0.5]).unwrap()));
    }

    #[test]
    fn coprime_by_roots_cases() {
        let opts = GcdOptions::default();
        let z = BoundedPoly::from_real(&[0.0, 1.0]).unwrap();
        let zp1 = BoundedPoly::from_real(&[1.0, 1.0]).unwrap();
        assert!(coprime_by_roots(&z, &zp1, &opts).unwrap());
        assert!(!coprime_by_roots(&z, &z, &opts).unwrap());
        let a = BoundedPoly::from_real(&[1.0, 0.0]).unwrap();
        let b = BoundedPoly::from_real(&[2.0, 0.0]).unwrap();
        assert!(!coprime_by_roots(&a, &b, &opts).unwrap());
    }
}
