//! Root factorizations with roots at infinity.
//!
//! Every nonzero `A` in `C_{<=D}[z]` factors as `lambda * prod (z - alpha_i)^mu_i`
//! with `alpha_i` in `C u {inf}` and `sum mu_i = D`. A root at infinity of
//! multiplicity `d` is the same thing as `d` zero leading coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::BoundedPoly;

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtRoot {
    Finite(Complex64),
    Infinity,
}

impl ExtRoot {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRoot::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            ExtRoot::Finite(z) => Some(*z),
            ExtRoot::Infinity => None,
        }
    }

    /// Modulus, `+inf` for the point at infinity.
    pub fn modulus(&self) -> f64 {
        match self {
            ExtRoot::Finite(z) => z.norm(),
            ExtRoot::Infinity => f64::INFINITY,
        }
    }

    /// Whether two points are within `tol` of each other, measured relative
    /// to `max(1, |a|, |b|)`. Infinity only matches infinity.
    pub fn close_to(&self, other: &ExtRoot, tol: f64) -> bool {
        match (self, other) {
            (ExtRoot::Infinity, ExtRoot::Infinity) => true,
            (ExtRoot::Finite(a), ExtRoot::Finite(b)) => {
                (a - b).norm() <= tol * 1f64.max(a.norm()).max(b.norm())
            }
            _ => false,
        }
    }
}

/// Reflection through the unit circle, `z -> 1/conj(z)`, with `0 <-> inf`.
/// On the Riemann sphere this is the mirror through the equator.
pub fn riemann_reflection(z: ExtRoot) -> ExtRoot {
    match z {
        ExtRoot::Infinity => ExtRoot::Finite(Complex64::new(0.0, 0.0)),
        ExtRoot::Finite(w) if w.norm_sqr() == 0.0 => ExtRoot::Infinity,
        ExtRoot::Finite(w) => ExtRoot::Finite(w / w.norm_sqr()),
    }
}

/// `lambda * prod (z - alpha_i)^mu_i` over a bounded-degree space.
#[derive(Debug, Clone, PartialEq)]
pub struct RootFactorization {
    pub leading: Complex64,
    pub roots: Vec<(ExtRoot, usize)>,
    pub degree_bound: usize,
}

impl RootFactorization {
    /// Checks that multiplicities are positive and sum to the bound.
    pub fn new(leading: Complex64, roots: Vec<(ExtRoot, usize)>) -> Result<Self> {
        if leading.norm() == 0.0 || !leading.re.is_finite() || !leading.im.is_finite() {
            return Err(Error::InvalidPolynomial(
                "leading scalar must be finite and nonzero".into(),
            ));
        }
        if roots.iter().any(|(_, m)| *m == 0) {
            return Err(Error::InvalidPolynomial(
                "multiplicities must be positive".into(),
            ));
        }
        let degree_bound = roots.iter().map(|(_, m)| m).sum();
        Ok(Self {
            leading,
            roots,
            degree_bound,
        })
    }

    pub fn infinity_multiplicity(&self) -> usize {
        self.roots
            .iter()
            .filter(|(r, _)| r.is_infinite())
            .map(|(_, m)| m)
            .sum()
    }

    /// Roots repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<ExtRoot> {
        self.roots
            .iter()
            .flat_map(|(r, m)| std::iter::repeat_n(*r, *m))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Roots closer than this (relative to `max(1, |z|)`) are merged.
    pub tol_cluster: f64,
    /// `|a[k]| < tol_zero * max|a|` counts as a structural zero coefficient.
    pub tol_zero: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol_cluster: 1e-6,
            tol_zero: 1e-10,
            max_iter: 200,
        }
    }
}

/// Root factorization of a nonzero polynomial.
pub fn find_roots(a: &BoundedPoly, opts: &RootOptions) -> Result<RootFactorization> {
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let thr = opts.tol_zero * scale;
    let c = a.coeffs();
    let d = a.degree_bound();

    let top = (0..=d).rev().find(|&k| c[k].norm() >= thr).unwrap_or(0);
    let bottom = (0..=top).find(|&k| c[k].norm() >= thr).unwrap_or(top);
    let inf_mult = d - top;
    let zero_mult = bottom;
    let core = &c[bottom..=top];
    let leading = core[core.len() - 1];

    let mut roots: Vec<(ExtRoot, usize)> = Vec::new();
    if inf_mult > 0 {
        roots.push((ExtRoot::Infinity, inf_mult));
    }

    let mut zero_total = zero_mult;
    if core.len() > 1 {
        let approx = aberth(core, opts.max_iter)?;
        for (z, m) in cluster(core, &approx, opts.tol_cluster) {
            if zero_total > 0 && z.norm() <= opts.tol_cluster {
                zero_total += m;
            } else {
                roots.push((ExtRoot::Finite(z), m));
            }
        }
    }
    if zero_total > 0 {
        roots.push((ExtRoot::Finite(Complex64::new(0.0, 0.0)), zero_total));
    }

    Ok(RootFactorization {
        leading,
        roots,
        degree_bound: d,
    })
}

/// Expands `lambda * prod (z - alpha_i)^mu_i`; every infinite root contributes
/// one zero leading coefficient.
pub fn from_roots(f: &RootFactorization) -> BoundedPoly {
    let mut out = BoundedPoly::constant(f.leading);
    for (root, mult) in &f.roots {
        let factor = match root {
            ExtRoot::Finite(z) => BoundedPoly::linear_factor(*z),
            ExtRoot::Infinity => BoundedPoly::infinity_factor(),
        };
        for _ in 0..*mult {
            out = out.mul(&factor);
        }
    }
    out
}

/// Root factorization of the conjugate reversal: roots are reflected through
/// the unit circle and the leading scalar becomes
/// `conj(lambda) * prod_{alpha finite, nonzero} (-conj(alpha))^mu`.
pub fn conj_reflect(f: &RootFactorization) -> RootFactorization {
    let mut leading = f.leading.conj();
    for (root, mult) in &f.roots {
        if let ExtRoot::Finite(z) = root {
            if z.norm_sqr() > 0.0 {
                leading *= (-z.conj()).powi(*mult as i32);
            }
        }
    }
    RootFactorization {
        leading,
        roots: f
            .roots
            .iter()
            .map(|(r, m)| (riemann_reflection(*r), *m))
            .collect(),
        degree_bound: f.degree_bound,
    }
}

fn horner_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for coef in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + coef;
    }
    (p, dp)
}

/// `sum |c_k| |z|^k`, the scale of rounding error when evaluating at `z`.
fn eval_scale(c: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    c.iter().rev().fold(0.0, |acc, coef| acc * r + coef.norm())
}

/// Starting radii from the upper convex hull of `(k, log|c_k|)`.
fn newton_polygon_starts(c: &[Complex64]) -> Vec<Complex64> {
    let m = c.len() - 1;
    let pts: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(k, v)| (k, v.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (k1, y1) = hull[hull.len() - 2];
            let (k2, y2) = hull[hull.len() - 1];
            // drop the middle point if it lies on or below the chord
            let cross = (k2 as f64 - k1 as f64) * (p.1 - y1) - (y2 - y1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut starts = Vec::with_capacity(m);
    for w in hull.windows(2) {
        let (k1, y1) = w[0];
        let (k2, y2) = w[1];
        let count = k2 - k1;
        let radius = ((y1 - y2) / count as f64).exp();
        for i in 0..count {
            let angle =
                2.0 * PI * (i as f64) / (count as f64) + 2.0 * PI * (k1 as f64) / (m as f64) + 0.4;
            starts.push(Complex64::from_polar(radius, angle));
        }
    }
    starts
}

/// Aberth-Ehrlich simultaneous iteration on a polynomial with nonzero
/// constant and leading coefficients.
fn aberth(c: &[Complex64], max_iter: usize) -> Result<Vec<Complex64>> {
    let m = c.len() - 1;
    if m == 1 {
        return Ok(vec![-c[0] / c[1]]);
    }
    let lead = c[m];
    let monic: Vec<Complex64> = c.iter().map(|v| v / lead).collect();
    let mut z = newton_polygon_starts(&monic);
    debug_assert_eq!(z.len(), m);
    let mut done = vec![false; m];
    let eps = f64::EPSILON;

    for _ in 0..max_iter {
        let mut all_done = true;
        for i in 0..m {
            if done[i] {
                continue;
            }
            let (p, dp) = horner_with_derivative(&monic, z[i]);
            if p.norm() <= 4.0 * eps * eval_scale(&monic, z[i]) {
                done[i] = true;
                continue;
            }
            all_done = false;
            let ratio = p / dp;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..m {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm_sqr() > 0.0 {
                        sum += 1.0 / diff;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - ratio * sum;
            let step = if denom.norm() > 0.0 && ratio.is_finite() {
                ratio / denom
            } else {
                // degenerate; nudge off the critical point
                Complex64::new(1e-8, 1e-8) * (1.0 + z[i].norm())
            };
            let next = z[i] - step;
            if step.norm() <= 2.0 * eps * next.norm() {
                done[i] = true;
            }
            z[i] = next;
        }
        if all_done {
            break;
        }
    }

    // Accept roots whose backward error is small even if the sweep never
    // flagged them, e.g. members of a multiple-root cluster.
    let worst = z
        .iter()
        .map(|&zi| {
            let (p, _) = horner_with_derivative(&monic, zi);
            p.norm() / eval_scale(&monic, zi)
        })
        .fold(0.0, f64::max);
    if !worst.is_finite() || worst > 1e-10 {
        return Err(Error::NoConvergence {
            iterations: max_iter,
            residual: worst,
        });
    }
    Ok(z)
}

/// Single-linkage clustering of approximate roots. Two estimates are linked
/// when their distance is below `tol` (relative to `max(1, |z|)`) or below the
/// sum of their Newton inclusion radii `m |p/p'|`, which grow inside a
/// multiple-root cluster. Returns centroids with multiplicities.
fn cluster(c: &[Complex64], z: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let m = z.len();
    let radii: Vec<f64> = z
        .iter()
        .map(|&zi| {
            let (p, dp) = horner_with_derivative(c, zi);
            let r = m as f64 * p.norm() / dp.norm();
            if r.is_finite() {
                r
            } else {
                f64::INFINITY
            }
        })
        .collect();

    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut k = i;
        while parent[k] != r {
            let next = parent[k];
            parent[k] = r;
            k = next;
        }
        r
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let dist = (z[i] - z[j]).norm();
            let scale = 1f64.max(z[i].norm()).max(z[j].norm());
            if dist <= tol * scale || dist <= radii[i] + radii[j] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }

    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for (i, &zi) in z.iter().enumerate() {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += zi;
                g.2 += 1;
            }
            None => groups.push((r, zi, 1)),
        }
    }
    groups
        .into_iter()
        .map(|(_, sum, count)| {
            let centroid = sum / count as f64;
            (polish_multiple(c, centroid, count), count)
        })
        .collect()
}

/// Newton on the `(m-1)`-th derivative, where a root of multiplicity `m` is
/// simple. Falls back to `z0` if the iteration wanders off.
fn polish_multiple(c: &[Complex64], z0: Complex64, m: usize) -> Complex64 {
    if m < 2 {
        return z0;
    }
    let mut d: Vec<Complex64> = c.to_vec();
    for _ in 0..m - 1 {
        d = d
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| v * k as f64)
            .collect();
    }
    if d.len() < 2 {
        return z0;
    }
    let (p0, _) = horner_with_derivative(&d, z0);
    let start_err = p0.norm();
    let mut z = z0;
    for _ in 0..8 {
        let (p, dp) = horner_with_derivative(&d, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        z -= step;
        if step.norm() <= 2.0 * f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    let (p1, _) = horner_with_derivative(&d, z);
    let moved = (z - z0).norm();
    if z.is_finite() && p1.norm() <= start_err && moved <= 1e-3 * z0.norm().max(1.0) {
        z
    } else {
        z0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn example_a() -> BoundedPoly {
        BoundedPoly::from_real(&[0.0, -1.0, 0.5, 0.5, 0.0, 0.0]).unwrap()
    }

    fn multiplicity_near(f: &RootFactorization, target: ExtRoot) -> usize {
        f.roots
            .iter()
            .filter(|(r, _)| r.close_to(&target, 1e-9))
            .map(|(_, m)| m)
            .sum()
    }

    #[test]
    fn example_factorization() {
        let f = find_roots(&example_a(), &RootOptions::default()).unwrap();
        assert_eq!(f.degree_bound, 5);
        assert!((f.leading - c(0.5, 0.0)).norm() < 1e-12);
        assert_eq!(f.roots.len(), 4);
        assert_eq!(multiplicity_near(&f, ExtRoot::Infinity), 2);
        assert_eq!(multiplicity_near(&f, ExtRoot::Finite(c(-2.0, 0.0))), 1);
        assert_eq!(multiplicity_near(&f, ExtRoot::Finite(c(1.0, 0.0))), 1);
        assert_eq!(multiplicity_near(&f, ExtRoot::Finite(c(0.0, 0.0))), 1);
    }

    #[test]
    fn constant_has_no_roots() {
        let f = find_roots(&BoundedPoly::constant(c(3.0, 1.0)), &RootOptions::default()).unwrap();
        assert_eq!(f.leading, c(3.0, 1.0));
        assert!(f.roots.is_empty());
        assert_eq!(f.degree_bound, 0);
    }

    #[test]
    fn zero_polynomial_errors() {
        assert_eq!(
            find_roots(&BoundedPoly::zero(3), &RootOptions::default()),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn from_roots_example() {
        let f = RootFactorization::new(
            c(0.5, 0.0),
            vec![
                (ExtRoot::Infinity, 2),
                (ExtRoot::Finite(c(1.0, 0.0)), 1),
                (ExtRoot::Finite(c(-2.0, 0.0)), 1),
                (ExtRoot::Finite(c(0.0, 0.0)), 1),
            ],
        )
        .unwrap();
        assert_eq!(from_roots(&f), example_a());
        let k = RootFactorization::new(c(3.0, 0.0), vec![]).unwrap();
        assert_eq!(from_roots(&k), BoundedPoly::constant(c(3.0, 0.0)));
    }

    #[test]
    fn reflect_example() {
        let f = find_roots(&example_a(), &RootOptions::default()).unwrap();
        let g = conj_reflect(&f);
        assert!((g.leading - c(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(multiplicity_near(&g, ExtRoot::Finite(c(0.0, 0.0))), 2);
        assert_eq!(multiplicity_near(&g, ExtRoot::Finite(c(-0.5, 0.0))), 1);
        assert_eq!(multiplicity_near(&g, ExtRoot::Finite(c(1.0, 0.0))), 1);
        assert_eq!(multiplicity_near(&g, ExtRoot::Infinity), 1);
        let rebuilt = from_roots(&g);
        assert!(rebuilt.approx_eq_default(&example_a().conj_reverse()));
    }

    #[test]
    fn reflection_points() {
        assert_eq!(
            riemann_reflection(ExtRoot::Finite(c(2.0, 0.0))),
            ExtRoot::Finite(c(0.5, 0.0))
        );
        assert_eq!(
            riemann_reflection(ExtRoot::Infinity),
            ExtRoot::Finite(c(0.0, 0.0))
        );
        assert_eq!(
            riemann_reflection(ExtRoot::Finite(c(0.0, 0.0))),
            ExtRoot::Infinity
        );
        assert_eq!(
            riemann_reflection(ExtRoot::Finite(c(0.0, 1.0))),
            ExtRoot::Finite(c(0.0, 1.0))
        );
        let eps = Complex64::from_polar(1.0, 0.7);
        match riemann_reflection(ExtRoot::Finite(eps)) {
            ExtRoot::Finite(w) => assert!((w - eps).norm() < 1e-15),
            ExtRoot::Infinity => panic!(),
        }
    }

    #[test]
    fn triple_root_is_one_cluster() {
        let f = RootFactorization::new(
            c(1.0, 0.0),
            vec![
                (ExtRoot::Finite(c(-1.5, 0.8)), 3),
                (ExtRoot::Finite(c(0.3, -0.2)), 2),
                (ExtRoot::Finite(c(2.0, 1.0)), 1),
            ],
        )
        .unwrap();
        let p = from_roots(&f);
        let g = find_roots(&p, &RootOptions::default()).unwrap();
        assert_eq!(g.roots.len(), 3);
        assert_eq!(multiplicity_near(&g, ExtRoot::Finite(c(-1.5, 0.8))), 3);
        assert_eq!(multiplicity_near(&g, ExtRoot::Finite(c(0.3, -0.2))), 2);
    }
}
