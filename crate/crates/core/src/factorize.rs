//! Rank-one factorizations `Gamma(z) = X(z) X~(z)^T`.
//!
//! Everything hinges on `H = gcd{Gamma_ij}`, which equals `Q * Q~` for
//! `Q = gcd{X_k}`. When `H` is constant the factorization is unique up to a
//! global unit scalar and is recovered directly from row gcds. Otherwise the
//! roots of `H` come in reflected pairs `(delta, 1/conj(delta))`, every
//! solution is `S * R_k` for a spectral factor `S` of `H`, and choosing how
//! many copies of `delta` go into `S` enumerates all of them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::autocorr::{palindromic_violation, residual, CorrMatrixPoly, SignalTuple};
use crate::error::{Error, Result};
use crate::gcd::{gcd_many, GcdOptions, GcdResult};
use crate::poly::BoundedPoly;
use crate::roots::{find_roots, from_roots, riemann_reflection, ExtRoot, RootFactorization};

/// Allowed relative imaginary part of the `H / (S0 S0~)` ratio.
pub const LAMBDA_RATIO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizeOptions {
    pub gcd: GcdOptions,
    /// Roots with `||z| - 1| < tol_circle` are treated as lying on the circle.
    pub tol_circle: f64,
    /// Relative residual accepted for divisions and reconstructed solutions.
    pub tol_residual: f64,
}

impl Default for FactorizeOptions {
    fn default() -> Self {
        Self {
            gcd: GcdOptions::default(),
            tol_circle: 1e-6,
            tol_residual: 1e-8,
        }
    }
}

/// A pair of roots of `H` symmetric under reflection through the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    /// Representative with `|delta| > 1`, or infinity.
    pub outer: ExtRoot,
    /// `1 / conj(outer)`.
    pub inner: ExtRoot,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootPairStructure {
    /// Sorted by modulus of `outer` descending (infinity first), then argument.
    pub offcircle_pairs: Vec<RootPair>,
    /// Unit-modulus roots with their (even) multiplicities.
    pub circle_roots: Vec<(Complex64, usize)>,
    pub leading: Complex64,
}

impl RootPairStructure {
    pub fn degree_bound(&self) -> usize {
        self.offcircle_pairs
            .iter()
            .map(|p| 2 * p.multiplicity)
            .sum::<usize>()
            + self.circle_roots.iter().map(|(_, m)| m).sum::<usize>()
    }

    /// Number of distinct factorizations, `prod (mu_i + 1)`.
    pub fn count(&self) -> u128 {
        self.offcircle_pairs
            .iter()
            .map(|p| p.multiplicity as u128 + 1)
            .product()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.offcircle_pairs
            .iter()
            .map(|p| p.multiplicity)
            .collect()
    }

    /// Roots (with repetition) of the spectral factor selected by `index`,
    /// where `index[i]` copies of `outer_i` and `mu_i - index[i]` copies of
    /// `inner_i` are taken, plus half of every circle root.
    pub fn spectral_roots(&self, index: &[usize]) -> Result<Vec<(ExtRoot, usize)>> {
        if index.len() != self.offcircle_pairs.len() {
            return Err(Error::DimensionMismatch(format!(
                "index has {} entries but there are {} root pairs",
                index.len(),
                self.offcircle_pairs.len()
            )));
        }
        let mut roots = Vec::new();
        for (pair, &l) in self.offcircle_pairs.iter().zip(index) {
            if l > pair.multiplicity {
                return Err(Error::DimensionMismatch(format!(
                    "index {l} exceeds pair multiplicity {}",
                    pair.multiplicity
                )));
            }
            if l > 0 {
                roots.push((pair.outer, l));
            }
            if pair.multiplicity - l > 0 {
                roots.push((pair.inner, pair.multiplicity - l));
            }
        }
        for (eps, nu) in &self.circle_roots {
            roots.push((ExtRoot::Finite(*eps), nu / 2));
        }
        Ok(roots)
    }
}

/// `A_j = gcd(Gamma_j1, ..., Gamma_jK)`.
pub fn row_gcd(gamma: &CorrMatrixPoly, j: usize, opts: &FactorizeOptions) -> Result<BoundedPoly> {
    check_index(gamma, j)?;
    let row = gamma.row(j);
    if row.iter().all(|p| p.is_zero()) {
        return Err(Error::ZeroChannel(j));
    }
    Ok(gcd_many(row, &opts.gcd)?.gcd)
}

/// `H = gcd{Gamma_ij}` over all entries, with the cofactors `Gamma_ij / H`.
/// The zero matrix gives the zero constant.
pub fn common_gcd_full(gamma: &CorrMatrixPoly, opts: &FactorizeOptions) -> Result<GcdResult> {
    gcd_many(gamma.entries(), &opts.gcd)
}

pub fn common_gcd(gamma: &CorrMatrixPoly, opts: &FactorizeOptions) -> Result<BoundedPoly> {
    Ok(common_gcd_full(gamma, opts)?.gcd)
}

fn check_index(gamma: &CorrMatrixPoly, j: usize) -> Result<()> {
    if j >= gamma.k() {
        return Err(Error::DimensionMismatch(format!(
            "channel index {j} out of range for K={}",
            gamma.k()
        )));
    }
    Ok(())
}

/// Coprime-case recovery from row `j`:
/// `Y_k = c_j * Gamma_kj / conj_reverse(A_j)` with
/// `c_j = |A_j| / sqrt(center(Gamma_jj))`. The result equals the generating
/// signals up to one global unit scalar.
pub fn coprime_recover(
    gamma: &CorrMatrixPoly,
    j: usize,
    opts: &FactorizeOptions,
) -> Result<SignalTuple> {
    check_index(gamma, j)?;
    let h = common_gcd(gamma, opts)?;
    if h.degree_bound() > 0 || h.is_zero() {
        if gamma.is_zero() {
            return Err(Error::ZeroChannel(j));
        }
        return Err(Error::NotCoprime {
            gcd_bound: h.degree_bound(),
        });
    }
    recover_from_row(gamma, j, opts)
}

fn recover_from_row(
    gamma: &CorrMatrixPoly,
    j: usize,
    opts: &FactorizeOptions,
) -> Result<SignalTuple> {
    let n = gamma.n();
    let a = row_gcd(gamma, j, opts)?;
    if a.degree_bound() != n - 1 {
        return Err(Error::InconsistentData(format!(
            "row gcd of channel {j} has degree bound {} but signals have length {n}",
            a.degree_bound()
        )));
    }
    let center = gamma.center(j, j);
    if center.re <= 0.0 {
        return Err(Error::InconsistentData(format!(
            "center coefficient of diagonal entry {j} is {center}"
        )));
    }
    let cj = a.norm() / center.re.sqrt();
    let a_rev = a.conj_reverse();
    let mut channels = Vec::with_capacity(gamma.k());
    for k in 0..gamma.k() {
        let entry = gamma.entry(k, j);
        let (q, r) = entry.div_lstsq(&a_rev)?;
        if r > opts.tol_residual {
            return Err(Error::InconsistentData(format!(
                "Gamma_{k}{j} is not divisible by the reversed row gcd (residual {r:e})"
            )));
        }
        channels.push(q.scale(Complex64::new(cj, 0.0)).into_coeffs());
    }
    let y = SignalTuple::new(channels)?;
    let res = residual(gamma, &y)?;
    if res > opts.tol_residual {
        return Err(Error::InconsistentData(format!(
            "recovered signals reproduce the correlation only to {res:e}"
        )));
    }
    Ok(y)
}

/// Groups the roots of `h` into reflected pairs and unit-circle roots.
pub fn root_pairs(h: &BoundedPoly, opts: &FactorizeOptions) -> Result<RootPairStructure> {
    let f = find_roots(h, &opts.gcd.roots)?;
    pair_roots(&f, opts)
}

pub(crate) fn pair_roots(
    f: &RootFactorization,
    opts: &FactorizeOptions,
) -> Result<RootPairStructure> {
    let tol = opts.gcd.tol_match;
    let mut circle: Vec<(Complex64, usize)> = Vec::new();
    let mut outer: Vec<(ExtRoot, usize)> = Vec::new();
    let mut inner: Vec<(ExtRoot, usize)> = Vec::new();
    for (r, m) in &f.roots {
        match r {
            ExtRoot::Finite(z) if (z.norm() - 1.0).abs() < opts.tol_circle => {
                let snapped = z / z.norm();
                match circle
                    .iter_mut()
                    .find(|(e, _)| ExtRoot::Finite(*e).close_to(&ExtRoot::Finite(snapped), tol))
                {
                    Some(entry) => entry.1 += m,
                    None => circle.push((snapped, *m)),
                }
            }
            ExtRoot::Finite(z) if z.norm() < 1.0 => inner.push((*r, *m)),
            _ => outer.push((*r, *m)),
        }
    }
    if let Some((eps, nu)) = circle.iter().find(|(_, nu)| nu % 2 != 0) {
        return Err(Error::InvalidGcd(format!(
            "unit-circle root {eps} has odd multiplicity {nu}"
        )));
    }

    let mut used = vec![false; inner.len()];
    let mut pairs = Vec::with_capacity(outer.len());
    for (delta, mu) in outer {
        let target = riemann_reflection(delta);
        let hit = inner
            .iter()
            .enumerate()
            .filter(|(i, (r, _))| !used[*i] && r.close_to(&target, tol))
            .min_by(|(_, (a, _)), (_, (b, _))| dist(a, &target).total_cmp(&dist(b, &target)));
        let Some((i, (partner, nu))) = hit else {
            return Err(Error::InvalidGcd(format!(
                "root {} has no reflected partner",
                fmt_root(&delta)
            )));
        };
        if *nu != mu {
            return Err(Error::InvalidGcd(format!(
                "root {} has multiplicity {mu} but its reflection has multiplicity {nu}",
                fmt_root(&delta)
            )));
        }
        used[i] = true;
        // symmetrize so the pair is exactly reflected
        let (o, inn) = match (delta, *partner) {
            (ExtRoot::Finite(d), ExtRoot::Finite(p)) => {
                let back = p / p.norm_sqr();
                let o = (d + back) / 2.0;
                (ExtRoot::Finite(o), riemann_reflection(ExtRoot::Finite(o)))
            }
            _ => (ExtRoot::Infinity, ExtRoot::Finite(Complex64::new(0.0, 0.0))),
        };
        pairs.push(RootPair {
            outer: o,
            inner: inn,
            multiplicity: mu,
        });
    }
    if let Some((i, _)) = used.iter().enumerate().find(|(_, u)| !**u) {
        return Err(Error::InvalidGcd(format!(
            "root {} has no reflected partner",
            fmt_root(&inner[i].0)
        )));
    }

    pairs.sort_by(|a, b| {
        b.outer
            .modulus()
            .total_cmp(&a.outer.modulus())
            .then_with(|| arg(&a.outer).total_cmp(&arg(&b.outer)))
    });
    circle.sort_by(|a, b| a.0.arg().total_cmp(&b.0.arg()));
    Ok(RootPairStructure {
        offcircle_pairs: pairs,
        circle_roots: circle,
        leading: f.leading,
    })
}

fn dist(a: &ExtRoot, b: &ExtRoot) -> f64 {
    match (a, b) {
        (ExtRoot::Finite(x), ExtRoot::Finite(y)) => (x - y).norm(),
        (ExtRoot::Infinity, ExtRoot::Infinity) => 0.0,
        _ => f64::INFINITY,
    }
}

fn arg(r: &ExtRoot) -> f64 {
    r.finite().map_or(0.0, |z| z.arg())
}

pub(crate) fn fmt_root(r: &ExtRoot) -> String {
    match r {
        ExtRoot::Finite(z) => format!("{z}"),
        ExtRoot::Infinity => "inf".into(),
    }
}

/// Unique up to a global unit scalar iff every root of `H` lies on the unit
/// circle (or `H` is constant).
pub fn is_unique(gamma: &CorrMatrixPoly, opts: &FactorizeOptions) -> Result<bool> {
    let g = common_gcd_full(gamma, opts)?;
    let Some(f) = g.factorization else {
        return Ok(true);
    };
    Ok(f.roots.iter().all(|(r, _)| match r {
        ExtRoot::Finite(z) => (z.norm() - 1.0).abs() < opts.tol_circle,
        ExtRoot::Infinity => false,
    }))
}

/// `prod (mu_i + 1)` over the off-circle root pairs of `H`.
pub fn count_solutions(gamma: &CorrMatrixPoly, opts: &FactorizeOptions) -> Result<u128> {
    Ok(pair_structure(gamma, opts)?.count())
}

/// Root-pair structure of `H = gcd{Gamma_ij}`; the zero matrix has none.
pub fn pair_structure(
    gamma: &CorrMatrixPoly,
    opts: &FactorizeOptions,
) -> Result<RootPairStructure> {
    let g = common_gcd_full(gamma, opts)?;
    match g.factorization {
        Some(f) => pair_roots(&f, opts),
        None => Ok(RootPairStructure {
            offcircle_pairs: Vec::new(),
            circle_roots: Vec::new(),
            leading: Complex64::new(0.0, 0.0),
        }),
    }
}

/// One enumerated solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// `(l_1, ..., l_P)`: copies of each outer root in the spectral factor.
    pub index: Vec<usize>,
    pub spectral_factor: BoundedPoly,
    /// Phase-canonical signals `S * R_k`.
    pub signals: SignalTuple,
    pub residual: f64,
}

/// Common structure shared by every factorization of a given `Gamma`.
#[derive(Debug, Clone)]
pub struct SolutionSet {
    /// `gcd{Gamma_ij}`, scaled to be a positive multiple of `Q Q~`.
    pub h: BoundedPoly,
    pub pairs: RootPairStructure,
    /// Coprime quotients `R_k` (one representative of their phase orbit).
    pub quotients: Vec<BoundedPoly>,
    pub base_count: u128,
    gamma: CorrMatrixPoly,
    opts: FactorizeOptions,
}

impl SolutionSet {
    /// All multi-indices in lexicographic order (first pair varies slowest).
    pub fn indices(&self) -> IndexIter {
        IndexIter {
            bounds: self.pairs.multiplicities(),
            next: Some(vec![0; self.pairs.offcircle_pairs.len()]),
        }
    }

    /// Spectral factor `S = lambda * S0` for `index`, with `lambda > 0`
    /// such that `S S~ = H`.
    pub fn spectral_factor(&self, index: &[usize]) -> Result<BoundedPoly> {
        let roots = self.pairs.spectral_roots(index)?;
        let s0 = from_roots(&RootFactorization::new(Complex64::new(1.0, 0.0), roots)?);
        let p0 = s0.mul(&s0.conj_reverse());
        if p0.degree_bound() != self.h.degree_bound() {
            return Err(Error::InconsistentSpectralFactor(format!(
                "spectral factor has degree bound {} but H has {}",
                s0.degree_bound(),
                self.h.degree_bound()
            )));
        }
        let idx = self
            .h
            .coeffs()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let denom = p0.coeff(idx);
        if denom.norm() == 0.0 {
            return Err(Error::InconsistentSpectralFactor(
                "S0 S0~ vanishes where H is largest".into(),
            ));
        }
        let ratio = self.h.coeff(idx) / denom;
        if ratio.re <= 0.0 || ratio.im.abs() > LAMBDA_RATIO_TOL * ratio.norm() {
            return Err(Error::InconsistentSpectralFactor(format!(
                "H / (S0 S0~) = {ratio} is not real positive"
            )));
        }
        Ok(s0.scale(Complex64::new(ratio.re.sqrt(), 0.0)))
    }

    pub fn solution(&self, index: &[usize]) -> Result<Solution> {
        let s = self.spectral_factor(index)?;
        let channels: Vec<BoundedPoly> = self.quotients.iter().map(|r| s.mul(r)).collect();
        let y = SignalTuple::from_polys(&channels)?.canonicalize();
        let res = residual(&self.gamma, &y)?;
        if res > self.opts.tol_residual {
            return Err(Error::InconsistentData(format!(
                "solution {index:?} reproduces the correlation only to {res:e}"
            )));
        }
        Ok(Solution {
            index: index.to_vec(),
            spectral_factor: s,
            signals: y,
            residual: res,
        })
    }

    /// Lazily materialized solutions in index order.
    pub fn iter(&self) -> impl Iterator<Item = Result<Solution>> + '_ {
        self.indices().map(move |idx| self.solution(&idx))
    }

    /// Every solution, built in parallel and returned in index order.
    pub fn materialize(&self) -> Result<Vec<Solution>> {
        let idx: Vec<Vec<usize>> = self.indices().collect();
        idx.par_iter().map(|i| self.solution(i)).collect()
    }
}

/// Odometer over `0..=bounds[i]`.
#[derive(Debug, Clone)]
pub struct IndexIter {
    bounds: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for IndexIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                self.next = None;
                break;
            }
            pos -= 1;
            if succ[pos] < self.bounds[pos] {
                succ[pos] += 1;
                for s in succ.iter_mut().skip(pos + 1) {
                    *s = 0;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(current)
    }
}

/// Builds the full solution structure of `gamma`.
pub fn enumerate_all(gamma: &CorrMatrixPoly, opts: &FactorizeOptions) -> Result<SolutionSet> {
    if gamma.is_zero() {
        return Err(Error::Precondition(
            "correlation matrix is identically zero".into(),
        ));
    }
    if let Some(why) = palindromic_violation(gamma, opts.tol_residual) {
        return Err(Error::NotPalindromic(why));
    }
    let g = common_gcd_full(gamma, opts)?;
    if g.residual > opts.tol_residual {
        return Err(Error::GcdEntryInconsistency(g.residual));
    }
    let f = g
        .factorization
        .ok_or_else(|| Error::Precondition("correlation matrix is identically zero".into()))?;
    let hb = g.gcd.degree_bound();
    if hb % 2 != 0 {
        return Err(Error::InvalidGcd(format!("H has odd degree bound {hb}")));
    }
    let d = hb / 2;

    // Rotate H so its center coefficient (|Q|^2 up to scale) is real positive.
    let center = g.gcd.coeff(d);
    if center.norm() == 0.0 {
        return Err(Error::InvalidGcd("center coefficient of H vanishes".into()));
    }
    let u = center.conj() / center.norm();
    let h = g.gcd.scale(u);
    let mut f = f;
    f.leading *= u;
    let pairs = pair_roots(&f, opts)?;

    let n_quot = gamma.n() - d;
    let g_entries: Vec<BoundedPoly> = g.cofactors.iter().map(|c| c.scale(u.conj())).collect();
    let gmat = CorrMatrixPoly::new(gamma.k(), n_quot, g_entries)?;
    let j = (0..gmat.k())
        .max_by(|&a, &b| gmat.center(a, a).re.total_cmp(&gmat.center(b, b).re))
        .unwrap_or(0);
    let quotients = coprime_recover(&gmat, j, opts)?.polys();

    let base_count = pairs.count();
    Ok(SolutionSet {
        h,
        pairs,
        quotients,
        base_count,
        gamma: gamma.clone(),
        opts: *opts,
    })
}

/// Explicit two-channel factorization for a chosen spectral-factor root
/// selection `beta` and quotient roots `alpha1`, `alpha2`, none of which may
/// be 0 or infinite:
///
/// `X_1 = l1 prod (z - beta_i) prod (z - alpha1_i)`,
/// `X_2 = l2 prod (z - beta_i) prod (z - alpha2_i)`,
///
/// with `|l1|^2 = |gamma_11[N-1]| / (prod|beta| prod|alpha1|)` and `l1 > 0`,
/// likewise for `|l2|`, and `arg(l1 conj(l2)) = Delta` where
/// `Delta = pi(N-1) + arg gamma_12[N-1] + sum arg beta + sum arg alpha2`.
pub fn k2_explicit(
    gamma: &CorrMatrixPoly,
    beta: &[Complex64],
    alpha1: &[Complex64],
    alpha2: &[Complex64],
    opts: &FactorizeOptions,
) -> Result<SignalTuple> {
    if gamma.k() != 2 {
        return Err(Error::Precondition(format!(
            "closed form needs K=2, got K={}",
            gamma.k()
        )));
    }
    let n = gamma.n();
    for (name, a) in [("alpha1", alpha1), ("alpha2", alpha2)] {
        if beta.len() + a.len() != n - 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} beta roots + {} {name} roots != N-1 = {}",
                beta.len(),
                a.len(),
                n - 1
            )));
        }
    }
    if let Some(b) = beta.iter().find(|b| b.norm() == 0.0 || !b.is_finite()) {
        return Err(Error::Precondition(format!(
            "degenerate spectral-factor root {b}"
        )));
    }
    if let Some(a) = alpha1
        .iter()
        .chain(alpha2)
        .find(|a| a.norm() == 0.0 || !a.is_finite())
    {
        return Err(Error::Precondition(format!(
            "quotient root {a} is 0 or infinite"
        )));
    }
    let top = (2 * n - 2) as isize - (n as isize - 1);
    let g11 = gamma.lag(0, 0, top);
    let g22 = gamma.lag(1, 1, top);
    let g12 = gamma.lag(0, 1, top);
    if g11.norm() == 0.0 || g22.norm() == 0.0 {
        return Err(Error::Precondition(
            "a channel has a root at 0 or infinity".into(),
        ));
    }
    let prod_beta: f64 = beta.iter().map(|b| b.norm()).product();
    let prod_a1: f64 = alpha1.iter().map(|a| a.norm()).product();
    let prod_a2: f64 = alpha2.iter().map(|a| a.norm()).product();
    let l1 = (g11.norm() / (prod_beta * prod_a1)).sqrt();
    let l2_mod = (g22.norm() / (prod_beta * prod_a2)).sqrt();
    let delta = PI * (n as f64 - 1.0)
        + g12.arg()
        + beta.iter().map(|b| b.arg()).sum::<f64>()
        + alpha2.iter().map(|a| a.arg()).sum::<f64>();
    let l2 = Complex64::from_polar(l2_mod, -delta);

    let build = |lead: Complex64, extra: &[Complex64]| -> BoundedPoly {
        beta.iter()
            .chain(extra)
            .fold(BoundedPoly::constant(lead), |acc, r| {
                acc.mul(&BoundedPoly::linear_factor(*r))
            })
    };
    let x1 = build(Complex64::new(l1, 0.0), alpha1);
    let x2 = build(l2, alpha2);
    let x = SignalTuple::from_polys(&[x1, x2])?;
    let res = residual(gamma, &x)?;
    if res > opts.tol_residual {
        return Err(Error::InconsistentData(format!(
            "closed-form signals reproduce the correlation only to {res:e}"
        )));
    }
    Ok(x)
}
