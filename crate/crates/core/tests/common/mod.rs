#![allow(dead_code)]

use std::f64::consts::PI;

use paf_core::{BoundedPoly, Complex64, SignalTuple};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Unit-variance circular complex Gaussian.
pub fn cgauss(rng: &mut StdRng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) / 2f64.sqrt()
}

pub fn random_poly(rng: &mut StdRng, bound: usize) -> BoundedPoly {
    BoundedPoly::new((0..=bound).map(|_| cgauss(rng)).collect()).unwrap()
}

pub fn random_signals(rng: &mut StdRng, k: usize, n: usize) -> SignalTuple {
    SignalTuple::new(
        (0..k)
            .map(|_| (0..n).map(|_| cgauss(rng)).collect())
            .collect(),
    )
    .unwrap()
}

/// `lead * prod (z - r)`, with `None` standing for a root at infinity.
pub fn poly_with_roots(lead: Complex64, roots: &[Option<Complex64>]) -> BoundedPoly {
    roots
        .iter()
        .fold(BoundedPoly::constant(lead), |acc, r| match r {
            Some(z) => acc.mul(&BoundedPoly::linear_factor(*z)),
            None => acc.mul(&BoundedPoly::infinity_factor()),
        })
}

/// `min_c |a - c b| / |a|`.
pub fn scalar_fit_err(a: &BoundedPoly, b: &BoundedPoly) -> f64 {
    let ab: Complex64 = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| x * y.conj())
        .sum();
    let bb: f64 = b.coeffs().iter().map(|y| y.norm_sqr()).sum();
    if bb == 0.0 {
        return if a.is_zero() { 0.0 } else { 1.0 };
    }
    let s = ab / bb;
    let num: f64 = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - s * y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    num / a.norm().max(f64::MIN_POSITIVE)
}

pub fn max_rel_diff(a: &BoundedPoly, b: &BoundedPoly) -> f64 {
    let scale = a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE);
    a.max_diff(b).unwrap_or(f64::INFINITY) / scale
}

/// A signal tuple `x_k = Q R_k` with a known common factor `Q`.
#[derive(Debug, Clone)]
pub struct Planted {
    pub x: SignalTuple,
    pub q: BoundedPoly,
    /// Multiplicity of each off-circle pair contributed by `Q`.
    pub multiplicities: Vec<usize>,
    pub circle_roots: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct PlantSpec {
    pub k: usize,
    /// Degree bound of each random cofactor `R_k`.
    pub cofactor_bound: usize,
    pub circle_roots: usize,
    /// Let the first pair be `(inf, 0)`.
    pub allow_zero_infinity: bool,
}

/// Plants one root per entry of `mults` with that multiplicity. Roots have
/// modulus in [1.6, 2.4] or its reflection, and are spread in angle so the
/// pairs stay well separated.
pub fn planted(rng: &mut StdRng, mults: &[usize], spec: PlantSpec) -> Planted {
    let p = mults.len();
    let base: f64 = rng.random_range(0.0..2.0 * PI);
    let mut roots: Vec<Option<Complex64>> = Vec::new();
    for (i, &mu) in mults.iter().enumerate() {
        let root = if i == 0 && spec.allow_zero_infinity && rng.random_bool(0.3) {
            if rng.random_bool(0.5) {
                None
            } else {
                Some(c(0.0, 0.0))
            }
        } else {
            let r: f64 = rng.random_range(1.6..2.4);
            let r = if rng.random_bool(0.5) { r } else { 1.0 / r };
            let theta = base + 2.0 * PI * i as f64 / p as f64 + rng.random_range(-0.3..0.3);
            Some(Complex64::from_polar(r, theta))
        };
        roots.extend(std::iter::repeat_n(root, mu));
    }
    for i in 0..spec.circle_roots {
        let phi = base + PI / 3.0 + 2.0 * PI * i as f64 / spec.circle_roots.max(1) as f64 / 2.0;
        roots.push(Some(Complex64::from_polar(1.0, phi)));
    }
    let q = poly_with_roots(c(1.0, 0.0), &roots);
    let channels: Vec<BoundedPoly> = (0..spec.k)
        .map(|_| q.mul(&random_poly(rng, spec.cofactor_bound)))
        .collect();
    Planted {
        x: SignalTuple::from_polys(&channels).unwrap(),
        q,
        multiplicities: mults.to_vec(),
        circle_roots: spec.circle_roots,
    }
}

/// Pairs every element of `a` with a distinct element of `b` within `tol`.
pub fn same_solution_sets(a: &[SignalTuple], b: &[SignalTuple], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let hit = b
            .iter()
            .enumerate()
            .position(|(i, y)| !used[i] && x.phase_distance(y).map(|d| d < tol).unwrap_or(false));
        match hit {
            Some(i) => used[i] = true,
            None => return false,
        }
    }
    true
}
