//! Divisibility and greatest common divisors in the bounded-degree sense.
//!
//! `B` in `C_{<=Db}` divides `A` in `C_{<=Da}` when `A = B*C` for some `C` in
//! `C_{<=Da-Db}`. Compared with the usual notion this also requires `B` to
//! have no more roots at infinity than `A`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::BoundedPoly;
use crate::roots::{find_roots, from_roots, ExtRoot, RootFactorization, RootOptions};

/// Default relative residual accepted by [`divides`].
pub const DEFAULT_DIVIDES_TOL: f64 = 1e-8;
/// Default relative rank threshold for [`sylvester_coprime`].
pub const DEFAULT_TOL_RANK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GcdResult {
    /// `(z - inf)^d * g` with `g` monic, or the zero constant when every
    /// input is zero.
    pub gcd: BoundedPoly,
    /// Root factorization of `gcd`; `None` for the zero gcd.
    pub factorization: Option<RootFactorization>,
    /// Quotients `R_k` with `gcd * R_k ~ input_k`.
    pub cofactors: Vec<BoundedPoly>,
    /// Largest relative reconstruction error over the inputs.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcdOptions {
    pub roots: RootOptions,
    /// Relative distance under which roots of different inputs are identified.
    pub tol_match: f64,
}

impl Default for GcdOptions {
    fn default() -> Self {
        Self {
            roots: RootOptions::default(),
            tol_match: 1e-6,
        }
    }
}

/// Least-squares divisibility test: is there a `c` with `a ~ b*c`?
pub fn divides(b: &BoundedPoly, a: &BoundedPoly, tol: f64) -> Result<bool> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if b.degree_bound() > a.degree_bound() {
        return Ok(false);
    }
    let (_, residual) = a.div_lstsq(b)?;
    Ok(residual <= tol)
}

/// Root-multiset divisibility test: every root of `b`, infinity included,
/// must be a root of `a` with at least the same multiplicity.
pub fn divides_by_roots(b: &BoundedPoly, a: &BoundedPoly, opts: &GcdOptions) -> Result<bool> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if b.degree_bound() > a.degree_bound() {
        return Ok(false);
    }
    if a.is_zero() {
        return Ok(true);
    }
    let fb = find_roots(b, &opts.roots)?;
    let fa = find_roots(a, &opts.roots)?;
    Ok(fb.roots.iter().all(|(rb, mb)| {
        let ma: usize = fa
            .roots
            .iter()
            .filter(|(ra, _)| ra.close_to(rb, opts.tol_match))
            .map(|(_, m)| m)
            .sum();
        ma >= *mb
    }))
}

/// Intersects root multisets of `fs` (min multiplicities, matched within
/// `tol`). Matched finite roots are averaged across inputs.
pub(crate) fn intersect_roots(fs: &[RootFactorization], tol: f64) -> Vec<(ExtRoot, usize)> {
    let Some((first, rest)) = fs.split_first() else {
        return Vec::new();
    };
    let inf = fs
        .iter()
        .map(|f| f.infinity_multiplicity())
        .min()
        .unwrap_or(0);

    let mut common: Vec<(Complex64, usize, usize)> = first
        .roots
        .iter()
        .filter_map(|(r, m)| r.finite().map(|z| (z, *m, 1usize)))
        .collect();
    for f in rest {
        let mut used = vec![false; f.roots.len()];
        common.retain_mut(|(z, mult, seen)| {
            let probe = ExtRoot::Finite(*z / *seen as f64);
            let best = f
                .roots
                .iter()
                .enumerate()
                .filter(|(i, (r, _))| !used[*i] && r.close_to(&probe, tol))
                .min_by(|(_, (a, _)), (_, (b, _))| {
                    let da = (a.finite().unwrap() - probe.finite().unwrap()).norm();
                    let db = (b.finite().unwrap() - probe.finite().unwrap()).norm();
                    da.total_cmp(&db)
                });
            match best {
                Some((i, (r, m))) => {
                    used[i] = true;
                    *z += r.finite().unwrap();
                    *seen += 1;
                    *mult = (*mult).min(*m);
                    true
                }
                None => false,
            }
        });
    }

    let mut out = Vec::with_capacity(common.len() + 1);
    if inf > 0 {
        out.push((ExtRoot::Infinity, inf));
    }
    out.extend(
        common
            .into_iter()
            .map(|(sum, m, seen)| (ExtRoot::Finite(sum / seen as f64), m)),
    );
    out
}

/// Bounded-degree GCD of a nonempty list, computed by intersecting clustered
/// root multisets. Zero inputs are ignored (`gcd{A, 0} = A`); if every
/// input is zero the result is the zero constant.
pub fn gcd_many(polys: &[BoundedPoly], opts: &GcdOptions) -> Result<GcdResult> {
    if polys.is_empty() {
        return Err(Error::EmptyInput("gcd of an empty list"));
    }
    let nonzero: Vec<&BoundedPoly> = polys.iter().filter(|p| !p.is_zero()).collect();
    if nonzero.is_empty() {
        return Ok(GcdResult {
            gcd: BoundedPoly::zero(0),
            factorization: None,
            cofactors: polys
                .iter()
                .map(|p| BoundedPoly::zero(p.degree_bound()))
                .collect(),
            residual: 0.0,
        });
    }
    let factored: Vec<RootFactorization> = nonzero
        .par_iter()
        .map(|p| find_roots(p, &opts.roots))
        .collect::<Result<_>>()?;
    let common = intersect_roots(&factored, opts.tol_match);
    let factorization = RootFactorization::new(Complex64::new(1.0, 0.0), common)?;
    let gcd = from_roots(&factorization);
    finish(gcd, Some(factorization), polys)
}

/// Divides every input by an already-known gcd.
fn finish(
    gcd: BoundedPoly,
    factorization: Option<RootFactorization>,
    polys: &[BoundedPoly],
) -> Result<GcdResult> {
    let gb = gcd.degree_bound();
    let mut residual: f64 = 0.0;
    let mut cofactors = Vec::with_capacity(polys.len());
    for p in polys {
        if p.is_zero() {
            cofactors.push(BoundedPoly::zero(p.degree_bound().saturating_sub(gb)));
            continue;
        }
        let (q, r) = p.div_lstsq(&gcd)?;
        residual = residual.max(r);
        cofactors.push(q);
    }
    Ok(GcdResult {
        gcd,
        factorization,
        cofactors,
        residual,
    })
}

/// The square Sylvester matrix `[M(x1, N-2) | M(x2, N-2)]` of two
/// polynomials in `C_{<=N-1}`, of size `(2N-2) x (2N-2)`.
pub fn sylvester_matrix(x1: &BoundedPoly, x2: &BoundedPoly) -> Result<DMatrix<Complex64>> {
    if x1.degree_bound() != x2.degree_bound() {
        return Err(Error::IncompatibleSpaces {
            left: x1.degree_bound(),
            right: x2.degree_bound(),
        });
    }
    let d = x1.degree_bound();
    if d == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let a = x1.mult_matrix(d - 1);
    let b = x2.mult_matrix(d - 1);
    let mut s = DMatrix::zeros(2 * d, 2 * d);
    s.view_mut((0, 0), (2 * d, d)).copy_from(&a);
    s.view_mut((0, d), (2 * d, d)).copy_from(&b);
    Ok(s)
}

/// Coprimeness (no common root, infinity included) via the smallest singular
/// value of the Sylvester matrix: coprime iff `s_min > tol_rank * s_max`.
pub fn sylvester_coprime(x1: &BoundedPoly, x2: &BoundedPoly, tol_rank: f64) -> Result<bool> {
    let s = sylvester_matrix(x1, x2)?;
    if s.nrows() == 0 {
        // two constants
        return Ok(!(x1.is_zero() && x2.is_zero()));
    }
    let sv = s.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    Ok(smax > 0.0 && smin > tol_rank * smax)
}
