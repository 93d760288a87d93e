//! Center selection for radial projection: seeded candidates near the
//! incenter, scored by singular integrals `∫ |y - b|^p dμ(y)` against the
//! mass measures of a chain and of its boundary.

use crate::chain::PLChain;
use crate::geom::AffineSimplex;
use crate::linalg::Point;
use crate::rational::{round_dyadic, sqrt_f64, to_f64, Q};
use num_traits::{One, Signed};
use rand::Rng;

/// Gauss–Legendre order used for every radial quadrature level.
pub const QUADRATURE_ORDER: usize = 8;

/// Dyadic resolution of sampled barycentric coordinates (`2^-24`).
const DYADIC_BITS: u32 = 24;

/// Rejection budget per candidate before falling back to the incenter.
const REJECTION_BUDGET: usize = 10_000;

/// A chosen center and its normalized integrals
/// `K_i = ε^{-p} ∫ |y - b|^p dμ_i / μ_i(σ)` (zero when `μ_i = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct CenterChoice {
    pub point: Point,
    pub k_chain: f64,
    pub k_boundary: f64,
    /// Both measures vanish; the point is the incenter.
    pub no_mass: bool,
    pub quadrature_order: usize,
}

/// Nodes and weights of Gauss–Legendre quadrature on `[0, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((1.0 - x) / 2.0, w / 2.0));
    }
    out
}

/// Average of `f` over a simplex, by collapsed radial coordinates from the
/// first vertex with tensor Gauss–Legendre nodes.
fn simplex_average(vs: &[Vec<f64>], f: &dyn Fn(&[f64]) -> f64, gl: &[(f64, f64)]) -> f64 {
    let k = vs.len() - 1;
    if k == 0 {
        return f(&vs[0]);
    }
    let apex = &vs[0];
    let mut total = 0.0;
    for &(r, w) in gl {
        let scaled: Vec<Vec<f64>> = vs[1..]
            .iter()
            .map(|z| apex.iter().zip(z).map(|(a, b)| a + r * (b - a)).collect())
            .collect();
        total += w * k as f64 * r.powi(k as i32 - 1) * simplex_average(&scaled, f, gl);
    }
    total
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `∫_s |y - b|^p dvol(y)` for a closed simplex `s`. When `b ∈ s` the simplex
/// is split into cones from `b` and the radial factor is integrated in closed
/// form; the result is infinite when the singularity is not integrable.
pub fn singular_integral(s: &AffineSimplex, b: &[Q], p: f64, order: usize) -> f64 {
    let gl = gauss_legendre(order);
    let k = s.dim();
    let bf: Vec<f64> = b.iter().map(to_f64).collect();
    let f = |y: &[f64]| dist(y, &bf).powf(p);
    if k == 0 {
        return f(&s.to_f64()[0]);
    }
    if !s.contains(b) {
        return s.volume() * simplex_average(&s.to_f64(), &f, &gl);
    }
    if k as f64 + p <= 0.0 {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    for j in 0..=k {
        let facet = s.facet(j);
        let mut cone = vec![b.to_vec()];
        cone.extend(facet.vertices().iter().cloned());
        let vol = sqrt_f64(&crate::geom::squared_volume_of(&cone));
        if vol == 0.0 {
            continue;
        }
        total += vol * k as f64 / (k as f64 + p) * simplex_average(&facet.to_f64(), &f, &gl);
    }
    total
}

/// `∫ |y - b|^p d‖T‖(y)` and `‖T‖` itself.
fn chain_integral(t: &PLChain, b: &[Q], p: f64, order: usize) -> (f64, f64) {
    let mut integral = 0.0;
    let mut mass = 0.0;
    for (s, c) in t.simplices() {
        let w = c.unsigned_abs() as f64;
        let vol = if s.dim() == 0 { 1.0 } else { s.volume() };
        if vol == 0.0 {
            continue;
        }
        mass += w * vol;
        integral += w * singular_integral(&s, b, p, order);
    }
    (integral, mass)
}

/// Incenter (facet-volume weights) and inradius of a nondegenerate simplex, in `f64`.
pub fn incenter(s: &AffineSimplex) -> (Vec<f64>, f64) {
    let m = s.dim();
    if m == 0 {
        return (vec![1.0], 0.0);
    }
    let fv: Vec<f64> = (0..=m).map(|j| s.facet(j).volume()).collect();
    let total: f64 = fv.iter().sum();
    (fv.iter().map(|v| v / total).collect(), m as f64 * s.volume() / total)
}

/// Dyadic barycentric point with positive coordinates summing to 1.
fn dyadic_bary(l: &[f64]) -> Option<Vec<Q>> {
    let mut out: Vec<Q> = l[1..].iter().map(|&x| round_dyadic(x, DYADIC_BITS)).collect();
    let rest = Q::one() - out.iter().sum::<Q>();
    out.insert(0, rest);
    out.iter().all(|x| x.is_positive()).then_some(out)
}

/// A uniformly distributed point of `s ∩ U(o, r/2)` (rejection from the
/// uniform distribution on `s`), rationalized to dyadic barycentrics.
pub fn sample_near_incenter<R: Rng>(s: &AffineSimplex, rng: &mut R) -> Point {
    let (o, r) = incenter(s);
    let vf = s.to_f64();
    let m = s.dim();
    for _ in 0..REJECTION_BUDGET {
        // normalized exponentials are uniform on the simplex
        let e: Vec<f64> = (0..=m).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = e.iter().sum();
        let l: Vec<f64> = e.iter().map(|x| x / total).collect();
        let d: f64 = (0..vf[0].len())
            .map(|c| (0..=m).map(|i| (l[i] - o[i]) * vf[i][c]).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt();
        if d >= r / 2.0 {
            continue;
        }
        if let Some(lq) = dyadic_bary(&l) {
            return s.point_at(&lq);
        }
    }
    s.point_at(&dyadic_bary(&o).expect("incenter has positive coordinates"))
}

/// Draws `samples` candidates and returns the one minimizing
/// `max(K_chain, K_boundary)` for the exponent `p`; earlier candidates win ties.
pub fn select_center<R: Rng>(
    s: &AffineSimplex,
    mu_chain: &PLChain,
    mu_boundary: &PLChain,
    p: f64,
    epsilon: &Q,
    samples: usize,
    rng: &mut R,
) -> CenterChoice {
    let order = QUADRATURE_ORDER;
    let scale = to_f64(epsilon).powf(-p);
    if mu_chain.is_zero() && mu_boundary.is_zero() {
        let (o, _) = incenter(s);
        let point = s.point_at(&dyadic_bary(&o).expect("incenter has positive coordinates"));
        return CenterChoice { point, k_chain: 0.0, k_boundary: 0.0, no_mass: true, quadrature_order: order };
    }
    let mut best: Option<CenterChoice> = None;
    for _ in 0..samples.max(1) {
        let b = sample_near_incenter(s, rng);
        let score = |t: &PLChain| {
            let (i, m) = chain_integral(t, &b, p, order);
            if m == 0.0 {
                0.0
            } else {
                scale * i / m
            }
        };
        let cand = CenterChoice {
            k_chain: score(mu_chain),
            k_boundary: score(mu_boundary),
            point: b,
            no_mass: false,
            quadrature_order: order,
        };
        let key = |c: &CenterChoice| c.k_chain.max(c.k_boundary);
        if best.as_ref().is_none_or(|cur| key(&cand) < key(cur)) {
            best = Some(cand);
        }
    }
    best.expect("at least one sample")
}

/// Whether `b` lies in the closed support of some term.
pub fn hits_support(t: &PLChain, b: &[Q]) -> bool {
    t.simplices().any(|(s, _)| s.contains(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tri() -> AffineSimplex {
        AffineSimplex::new(vec![vec![q(0), q(0)], vec![q(1), q(0)], vec![q(0), q(1)]]).unwrap()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre(8);
        let s: f64 = gl.iter().map(|(x, w)| w * x.powi(15)).sum();
        assert!((s - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_moments() {
        // ∫ over the unit right triangle of |y|^2 = 1/6
        let v = singular_integral(&tri(), &[q(0), q(0)], 2.0, 8);
        assert!((v - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_measures_give_incenter() {
        let s = tri();
        let z = PLChain::zero(1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = select_center(&s, &z, &PLChain::zero(0, 2), -1.0, &q(1), 4, &mut rng);
        assert!(c.no_mass);
        assert_eq!((c.k_chain, c.k_boundary), (0.0, 0.0));
        let (o, r) = incenter(&s);
        let want = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
        assert!((r - want).abs() < 1e-12);
        assert!((to_f64(&c.point[0]) - o[1]).abs() < 1e-6);
    }

    #[test]
    fn uniform_measure_matches_dense_grid() {
        let s = tri();
        let face = PLChain::from_simplices(2, 2, vec![(s.clone(), 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = select_center(&s, &face, &PLChain::zero(1, 2), -1.0, &q(1), 8, &mut rng);
        let b: Vec<f64> = c.point.iter().map(to_f64).collect();
        // dense midpoint grid oracle on the unit right triangle
        let n = 1500;
        let h = 1.0 / n as f64;
        let mut grid = 0.0;
        for i in 0..n {
            for j in 0..n - i {
                let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                if x + y > 1.0 {
                    continue;
                }
                let d = ((x - b[0]).powi(2) + (y - b[1]).powi(2)).sqrt();
                grid += h * h / d.max(h / 4.0);
            }
        }
        let achieved = c.k_chain * 0.5;
        assert!((achieved - grid).abs() / grid < 0.10, "{achieved} vs {grid}");
    }

    #[test]
    fn facet_measure_keeps_center_near_incenter() {
        let s = tri();
        let edge = PLChain::from_terms(1, 2, vec![(vec![vec![q(1), q(0)], vec![q(0), q(1)]], 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = select_center(&s, &edge, &edge.boundary(), -1.0, &q(1), 6, &mut rng);
        let (o, r) = incenter(&s);
        let b: Vec<f64> = c.point.iter().map(to_f64).collect();
        let (ox, oy) = (o[1], o[2]);
        assert!(((b[0] - ox).powi(2) + (b[1] - oy).powi(2)).sqrt() < r / 2.0);
        assert!(c.k_chain.is_finite());
        assert!(!hits_support(&edge, &c.point));
        assert!(hits_support(&edge, &[qf(1, 2), qf(1, 2)]));
    }
}
