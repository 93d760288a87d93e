//! Deformation of PL chains onto the skeleta of an embedded triangulation:
//! `T = P + R + ∂S` with `P` polyhedral, produced by radial projection from
//! sampled centers, integer snapping, and a per-simplex local mass ledger.

mod center;
mod ledger;

pub use center::{hits_support, incenter, sample_near_incenter, select_center, singular_integral, CenterChoice};
pub use ledger::{LedgerMaxima, LedgerRow, SupportChecks};

use crate::chain::{chains_equal, EqualityMode, EqualityVerdict, PLChain, PolyChain};
use crate::complex::{ComplexError, SimplicialComplex};
use crate::geom::{clip_bary, radial_project_bary, Affine, AffineSimplex, Cell, GeomError};
use crate::linalg::Point;
use crate::rational::{to_f64, Q};
use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeformError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("chain has dimension {chain}, expected {expected}")]
    DimensionMismatch { expected: usize, chain: usize },
    #[error("chain lives in dimension {chain}, complex in dimension {complex}")]
    AmbientMismatch { complex: usize, chain: usize },
    #[error("term {term} is not contained in the complex")]
    TermOutsideComplex { term: usize },
    #[error("every sampled center for simplex {simplex:?} hit the chain support")]
    CenterHit { simplex: Vec<usize> },
    #[error("every sampled generic point for simplex {simplex:?} fell on a term boundary")]
    GenericPointOnTermBoundary { simplex: Vec<usize> },
}

/// An embedded complex with its measured bilipschitz distortion `D` against
/// regular side-`ε` simplices and an optional declared quasiconvexity constant.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangulatedSpace {
    pub complex: SimplicialComplex,
    pub distortion: f64,
    pub quasiconvexity: Option<f64>,
}

impl TriangulatedSpace {
    pub fn new(complex: SimplicialComplex) -> Result<Self, DeformError> {
        if !complex.is_embedded() {
            return Err(ComplexError::EmbeddingRequired.into());
        }
        let eps = to_f64(complex.epsilon());
        let mut distortion: f64 = 1.0;
        for s in complex.maximal_simplices() {
            distortion = distortion.max(simplex_distortion(&complex.geometry(&s)?, eps));
        }
        Ok(TriangulatedSpace { complex, distortion, quasiconvexity: None })
    }

    pub fn with_quasiconvexity(mut self, c: f64) -> Self {
        self.quasiconvexity = Some(c);
        self
    }
}

/// `max(|A|, |A^{-1}|)` for the linear map `A` taking the regular side-`eps`
/// simplex onto `s`, from the generalized eigenvalues of the two Gram matrices.
fn simplex_distortion(s: &AffineSimplex, eps: f64) -> f64 {
    let m = s.dim();
    if m == 0 {
        return 1.0;
    }
    let e: Vec<Vec<f64>> = s.edges().iter().map(|v| v.iter().map(to_f64).collect()).collect();
    let g = DMatrix::from_fn(m, m, |i, j| e[i].iter().zip(&e[j]).map(|(a, b)| a * b).sum::<f64>());
    let r = DMatrix::from_fn(m, m, |i, j| if i == j { eps * eps } else { eps * eps / 2.0 });
    let l = r.cholesky().expect("regular Gram matrix is positive definite").l();
    let li = l.clone().try_inverse().expect("triangular factor is invertible");
    let sym = &li * g * li.transpose();
    let ev = sym.symmetric_eigen().eigenvalues;
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi.sqrt().max(1.0 / lo.sqrt())
}

/// Sampling, retry and certification parameters; identical configurations
/// give identical results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformConfig {
    pub seed: u64,
    pub samples: usize,
    pub retries: usize,
    /// Decision procedure for the certificate `T = P + R + ∂S`.
    pub equality: EqualityMode,
}

impl Default for DeformConfig {
    fn default() -> Self {
        DeformConfig { seed: 0, samples: 8, retries: 32, equality: EqualityMode::Exact }
    }
}

/// A center used on one simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterRecord {
    pub simplex: Vec<usize>,
    pub choice: CenterChoice,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeformationResult {
    pub k: usize,
    pub p: PolyChain,
    pub r: PLChain,
    pub s: PLChain,
    pub ledger: Vec<LedgerRow>,
    pub maxima: LedgerMaxima,
    pub centers: Vec<CenterRecord>,
    pub certificate: EqualityVerdict,
    pub supports: SupportChecks,
    pub note: Option<String>,
}

/// Output of one skeleton-descent step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub p_next: PLChain,
    pub r_inc: PLChain,
    pub s_inc: PLChain,
    pub centers: Vec<CenterRecord>,
}

/// Carrier of a term: the smallest simplex containing its centroid.
fn carrier(x: &SimplicialComplex, vs: &[Point]) -> Result<Vec<usize>, DeformError> {
    let s = AffineSimplex::from_vertices_unchecked(vs.to_vec());
    Ok(x.locate(&s.centroid())?.0)
}

fn group_by_carrier(x: &SimplicialComplex, t: &PLChain) -> Result<BTreeMap<Vec<usize>, PLChain>, DeformError> {
    let mut out: BTreeMap<Vec<usize>, PLChain> = BTreeMap::new();
    for (vs, c) in t.terms() {
        let car = carrier(x, vs)?;
        out.entry(car)
            .or_insert_with(|| PLChain::zero(t.dim(), t.ambient()))
            .add_term(vs.to_vec(), c);
    }
    Ok(out)
}

fn check_chain(x: &SimplicialComplex, t: &PLChain, k: usize) -> Result<(), DeformError> {
    if t.dim() != k {
        return Err(DeformError::DimensionMismatch { expected: k, chain: t.dim() });
    }
    let amb = x.ambient().ok_or(ComplexError::EmbeddingRequired)?;
    if t.ambient() != amb {
        return Err(DeformError::AmbientMismatch { complex: amb, chain: t.ambient() });
    }
    Ok(())
}

/// Splits every term into pieces that each lie in one closed simplex,
/// triangulated consistently across shared faces. Zero-volume terms are dropped.
pub fn refine(x: &SimplicialComplex, t: &PLChain) -> Result<PLChain, DeformError> {
    let coords = x.coords().ok_or(ComplexError::EmbeddingRequired)?;
    let maximal = x.maximal_simplices();
    let k = t.dim();
    let mut out = PLChain::zero(k, t.ambient());
    for (idx, (vs, c)) in t.terms().enumerate() {
        if k > 0 && crate::geom::squared_volume_of(vs).is_zero() {
            continue;
        }
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut covered = Q::zero();
        for m in &maximal {
            if !bbox_overlap(m.iter().map(|&v| &coords[v]), vs) {
                continue;
            }
            let g = x.geometry(m)?;
            let Some(vbary) = vs.iter().map(|v| g.barycentric(v)).collect::<Option<Vec<_>>>() else {
                continue;
            };
            let zero: Vec<bool> = (0..m.len()).map(|j| vbary.iter().all(|l| l[j].is_zero())).collect();
            let face: Vec<usize> = m.iter().zip(&zero).filter(|(_, z)| !**z).map(|(v, _)| *v).collect();
            if !seen.insert(face) {
                continue;
            }
            if k == 0 {
                if vbary[0].iter().all(|l| !l.is_negative()) {
                    out.add_term(vs.to_vec(), c);
                    covered += Q::from_integer(1.into());
                }
                continue;
            }
            let mut cell = Some(Cell::standard_simplex(k));
            for j in (0..m.len()).filter(|&j| !zero[j]) {
                let vals: Vec<Q> = vbary.iter().map(|l| l[j].clone()).collect();
                cell = cell.and_then(|cl| cl.clip(&Affine::from_vertex_values(&vals)));
            }
            let Some(cell) = cell else { continue };
            let amb: Vec<Point> = cell
                .pts
                .iter()
                .map(|mu| {
                    let mut p = vs[0].clone();
                    for (mi, v) in mu.iter().zip(&vs[1..]) {
                        for (pc, (a, b)) in p.iter_mut().zip(v.iter().zip(&vs[0])) {
                            *pc += mi * (a - b);
                        }
                    }
                    p
                })
                .collect();
            for simplex in cell.triangulate(&amb) {
                let mut idx_s = simplex.clone();
                if cell.orientation(&idx_s) < 0 {
                    let last = idx_s.len() - 1;
                    idx_s.swap(last - 1, last);
                }
                covered += cell.local_measure(&idx_s);
                out.add_term(idx_s.iter().map(|&v| amb[v].clone()).collect(), c);
            }
        }
        if covered != Q::from_integer(1.into()) {
            return Err(DeformError::TermOutsideComplex { term: idx });
        }
    }
    Ok(out.without_degenerate())
}

fn bbox_overlap<'a>(pts: impl Iterator<Item = &'a Point>, vs: &[Point]) -> bool {
    let pts: Vec<&Point> = pts.collect();
    (0..vs[0].len()).all(|c| {
        let lo = pts.iter().map(|p| &p[c]).min().unwrap();
        let hi = pts.iter().map(|p| &p[c]).max().unwrap();
        let tlo = vs.iter().map(|p| &p[c]).min().unwrap();
        let thi = vs.iter().map(|p| &p[c]).max().unwrap();
        tlo <= hi && lo <= thi
    })
}

/// PL radial projection from `b` (barycentric `beta` in `sigma`) and the
/// straight-line prism from the identity to it, over region-clipped pieces.
fn project_and_prism(sigma: &AffineSimplex, beta: &[Q], t: &PLChain) -> Result<(PLChain, PLChain), DeformError> {
    let mut image = PLChain::zero(t.dim(), t.ambient());
    let mut prism = PLChain::zero(t.dim() + 1, t.ambient());
    for (vs, c) in t.terms() {
        let vbary: Vec<Vec<Q>> =
            vs.iter().map(|v| sigma.barycentric(v).ok_or(GeomError::NotInAffineHull)).collect::<Result<_, _>>()?;
        for j in 0..=sigma.dim() {
            for piece in clip_bary(sigma, beta, j, &vbary) {
                let projected: Vec<Point> = piece
                    .bary
                    .iter()
                    .map(|l| radial_project_bary(beta, j, l).map(|p| sigma.point_at(&p)))
                    .collect::<Result<_, _>>()?;
                for i in 0..projected.len() {
                    let mut s: Vec<Point> = piece.vertices[..=i].to_vec();
                    s.extend(projected[i..].iter().cloned());
                    prism.add_term(s, if i % 2 == 0 { c } else { -c });
                }
                image.add_term(projected, c);
            }
        }
    }
    Ok((image.without_degenerate(), prism.without_degenerate()))
}

/// Radially projects a chain carried in `sigma` onto `∂sigma` from `b`.
pub fn radial_project(sigma: &AffineSimplex, b: &[Q], t: &PLChain) -> Result<PLChain, DeformError> {
    let beta = sigma.barycentric(b).ok_or(GeomError::NotInAffineHull)?;
    if beta.iter().any(|x| !x.is_positive()) {
        return Err(GeomError::ApexNotInterior.into());
    }
    if hits_support(t, b) {
        return Err(DeformError::CenterHit { simplex: Vec::new() });
    }
    Ok(project_and_prism(sigma, &beta, t)?.0)
}

/// One descent step: every part of `t` carried by an `m`-simplex is pushed to
/// the `(m-1)`-skeleton, with `t = p_next + r_inc + ∂s_inc` exactly.
pub fn deform_step(
    x: &SimplicialComplex,
    m: usize,
    t: &PLChain,
    cfg: &DeformConfig,
    rng: &mut ChaCha8Rng,
) -> Result<StepOutput, DeformError> {
    let k = t.dim();
    let amb = t.ambient();
    let mut p_next = PLChain::zero(k, amb);
    let mut r_inc = PLChain::zero(k, amb);
    let mut s_inc = PLChain::zero(k + 1, amb);
    let mut centers = Vec::new();
    for (car, part) in group_by_carrier(x, t)? {
        if car.len() != m + 1 || k >= m {
            p_next = p_next.plus(&part);
            continue;
        }
        let sigma = x.geometry(&car)?;
        let bd = part.boundary();
        let p = 1.0 - m as f64;
        let mut chosen = None;
        for attempt in 1..=cfg.retries.max(1) {
            let choice = select_center(&sigma, &part, &bd, p, x.epsilon(), cfg.samples, rng);
            if !hits_support(&part, &choice.point) {
                chosen = Some((choice, attempt));
                break;
            }
        }
        let Some((choice, attempts)) = chosen else {
            return Err(DeformError::CenterHit { simplex: car });
        };
        let beta = sigma.barycentric(&choice.point).ok_or(GeomError::NotInAffineHull)?;
        let (image, h) = project_and_prism(&sigma, &beta, &part)?;
        p_next = p_next.plus(&image);
        s_inc = s_inc.minus(&h);
        // a 0-chain has no boundary term in the homotopy formula
        if k > 0 {
            let (_, hb) = project_and_prism(&sigma, &beta, &bd)?;
            r_inc = r_inc.minus(&hb);
        }
        centers.push(CenterRecord { simplex: car, choice, attempts });
    }
    Ok(StepOutput { p_next, r_inc, s_inc, centers })
}

/// Rounds a chain carried in the `k`-skeleton to integer multiples of
/// `k`-simplices: `t = P + R` with the coefficient of each simplex read off at
/// a generic point.
pub fn snap_to_polyhedral(
    x: &SimplicialComplex,
    t: &PLChain,
    cfg: &DeformConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(PolyChain, PLChain, Vec<CenterRecord>), DeformError> {
    let k = t.dim();
    let coords = x.coords().ok_or(ComplexError::EmbeddingRequired)?;
    let mut p = PolyChain::zero(k);
    let mut records = Vec::new();
    for (car, part) in group_by_carrier(x, t)? {
        if car.len() != k + 1 {
            // zero-volume leftovers would have been dropped; anything else is off-skeleton
            return Err(DeformError::TermOutsideComplex { term: 0 });
        }
        let sigma = x.geometry(&car)?;
        let bd = part.boundary();
        let mut found = None;
        for attempt in 1..=cfg.retries.max(1) {
            let choice = if k == 0 {
                CenterChoice {
                    point: coords[car[0]].clone(),
                    k_chain: 0.0,
                    k_boundary: 0.0,
                    no_mass: false,
                    quadrature_order: 0,
                }
            } else {
                let mut c = select_center(&sigma, &PLChain::zero(k, t.ambient()), &bd, 1.0 - k as f64, x.epsilon(), cfg.samples, rng);
                if c.no_mass {
                    c.point = sample_near_incenter(&sigma, rng);
                }
                c
            };
            if let Some(mult) = crate::chain::multiplicity_at(&part, &choice.point) {
                found = Some((choice, attempt, mult));
                break;
            }
        }
        let Some((choice, attempts, mult)) = found else {
            return Err(DeformError::GenericPointOnTermBoundary { simplex: car });
        };
        let z = mult * crate::chain::flat_orientation(sigma.vertices()) as i64;
        p.add(&car, &Q::from_integer(z.into()));
        records.push(CenterRecord { simplex: car, choice, attempts });
    }
    let r = t.minus(&p.to_pl(x)?);
    Ok((p, r, records))
}

/// `T = P + R + ∂S` with `P` on the `k`-skeleton, certified exactly.
pub fn deform(space: &TriangulatedSpace, t: &PLChain, cfg: &DeformConfig) -> Result<DeformationResult, DeformError> {
    let x = &space.complex;
    let k = t.dim();
    check_chain(x, t, k)?;
    let amb = t.ambient();
    let n = x.dim();
    if k > n {
        let zero_s = PLChain::zero(k + 1, amb);
        return Ok(DeformationResult {
            k,
            p: PolyChain::zero(k),
            r: PLChain::zero(k, amb),
            certificate: chains_equal(t, &PLChain::zero(k, amb), &cfg.equality),
            s: zero_s,
            ledger: Vec::new(),
            maxima: LedgerMaxima::default(),
            centers: Vec::new(),
            supports: SupportChecks::all_true(),
            note: Some(format!(
                "chain dimension {k} exceeds complex dimension {n}: every {k}-current on the complex is zero"
            )),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let refined = refine(x, t)?;
    let mut current = refined.clone();
    let mut r = PLChain::zero(k, amb);
    let mut s = PLChain::zero(k + 1, amb);
    let mut centers = Vec::new();
    for m in (k + 1..=n).rev() {
        let step = deform_step(x, m, &current, cfg, &mut rng)?;
        current = step.p_next;
        r = r.plus(&step.r_inc);
        s = s.plus(&step.s_inc);
        centers.extend(step.centers);
    }
    let (p, r_snap, snap_centers) = snap_to_polyhedral(x, &current, cfg, &mut rng)?;
    centers.extend(snap_centers);
    let r = r.plus(&r_snap);
    let p_pl = p.to_pl(x)?;
    let recomposed = p_pl.plus(&r).plus(&s.boundary());
    let certificate = chains_equal(t, &recomposed, &cfg.equality);
    let (ledger, maxima, supports) = ledger::build(x, &refined, &p, &r, &s)?;
    Ok(DeformationResult { k, p, r, s, ledger, maxima, centers, certificate, supports, note: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::builders::{grid_2d, single_triangle};
    use crate::rational::{q, qf};

    fn pt(x: Q, y: Q) -> Point {
        vec![x, y]
    }

    fn square() -> TriangulatedSpace {
        TriangulatedSpace::new(grid_2d(1, 1, &q(1))).unwrap()
    }

    /// Inner triangle of face [0,1,3] scaled by 3/4 about its centroid, as a 1-cycle.
    pub(crate) fn concentric_cycle() -> PLChain {
        let c = pt(qf(2, 3), qf(1, 3));
        let outer = [pt(q(0), q(0)), pt(q(1), q(0)), pt(q(1), q(1))];
        let r = qf(3, 4);
        let inner: Vec<Point> = outer.iter().map(|v| crate::linalg::lerp(&c, v, &r)).collect();
        PLChain::from_terms(
            1,
            2,
            (0..3).map(|i| (vec![inner[i].clone(), inner[(i + 1) % 3].clone()], 1)),
        )
        .unwrap()
    }

    #[test]
    fn distortion_of_regular_and_right_triangles() {
        let c = SimplicialComplex::new_embedded(
            vec![pt(q(0), q(0)), pt(q(2), q(0)), pt(q(1), q(0))],
            &[vec![0, 1]],
            q(2),
        )
        .unwrap();
        assert!((TriangulatedSpace::new(c).unwrap().distortion - 1.0).abs() < 1e-12);
        let d = square().distortion;
        assert!(d > 1.0 && d.is_finite());
    }

    #[test]
    fn refine_splits_crossing_segment() {
        let x = grid_2d(2, 1, &q(1));
        let seg = PLChain::from_terms(1, 2, vec![(vec![pt(qf(1, 4), qf(1, 2)), pt(qf(7, 4), qf(1, 2))], 1)]).unwrap();
        let r = refine(&x, &seg).unwrap();
        assert!(r.len() >= 3);
        assert!(chains_equal(&r, &seg, &EqualityMode::Exact).equal);
        let along_edge = PLChain::from_terms(1, 2, vec![(vec![pt(q(1), q(0)), pt(q(1), q(1))], 1)]).unwrap();
        assert_eq!(refine(&x, &along_edge).unwrap(), along_edge);
        let outside = PLChain::from_terms(1, 2, vec![(vec![pt(q(0), q(0)), pt(q(3), q(0))], 1)]).unwrap();
        assert_eq!(refine(&x, &outside), Err(DeformError::TermOutsideComplex { term: 0 }));
    }

    #[test]
    fn point_projects_to_boundary() {
        let s = single_triangle().geometry(&[0, 1, 2]).unwrap();
        let b = s.centroid();
        let x = PLChain::from_terms(0, 2, vec![(vec![pt(qf(1, 2), qf(1, 8))], 1)]).unwrap();
        let img = radial_project(&s, &b, &x).unwrap();
        let (v, c) = img.terms().next().unwrap();
        assert_eq!(c, 1);
        let l = s.barycentric(&v[0]).unwrap();
        assert!(l.iter().any(|x| x.is_zero()));
        assert!(crate::linalg::affine_rank(&[&b, &x.vertex_set()[0], &v[0]]) <= 1);
    }

    #[test]
    fn boundary_chain_is_fixed() {
        let s = single_triangle().geometry(&[0, 1, 2]).unwrap();
        let e = PLChain::from_terms(1, 2, vec![(vec![s.vertices()[0].clone(), s.vertices()[1].clone()], 1)]).unwrap();
        assert_eq!(radial_project(&s, &s.centroid(), &e).unwrap(), e);
    }

    #[test]
    fn small_loop_projects_to_whole_boundary() {
        let s = single_triangle().geometry(&[0, 1, 2]).unwrap();
        let b = s.centroid();
        let d = qf(1, 50);
        let a = pt(&b[0] - &d, &b[1] - &d);
        let bb = pt(&b[0] + &d, &b[1] - &d);
        let c = pt(b[0].clone(), &b[1] + &d);
        let loop_ = PLChain::from_terms(1, 2, vec![(vec![a.clone(), bb.clone()], 1), (vec![bb, c.clone()], 1), (vec![c, a], 1)]).unwrap();
        let img = radial_project(&s, &b, &loop_).unwrap();
        let face = PLChain::from_simplices(2, 2, vec![(s.clone(), 1)]).unwrap();
        // winding oracle: the counterclockwise loop maps to the boundary of the positively oriented face
        let eq = |u: &PLChain, v: &PLChain| chains_equal(u, v, &EqualityMode::Exact).equal;
        assert!(eq(&img, &face.boundary()) || eq(&img, &face.boundary().scaled(-1)));
        let orient = crate::chain::flat_orientation(s.vertices());
        assert!(eq(&img, &face.boundary().scaled(orient as i64)));
    }

    #[test]
    fn polyhedral_input_is_fixed() {
        let x = square();
        let p = PolyChain::from_int_terms(1, vec![(vec![0, 1], 1), (vec![1, 3], 2)]);
        let t = p.to_pl(&x.complex).unwrap();
        let res = deform(&x, &t, &DeformConfig::default()).unwrap();
        assert_eq!(res.p, p);
        assert!(res.r.is_zero());
        assert!(res.s.is_zero());
        assert!(res.certificate.equal);
    }

    #[test]
    fn zero_chain_gives_zero() {
        let x = square();
        let res = deform(&x, &PLChain::zero(1, 2), &DeformConfig::default()).unwrap();
        assert!(res.p.is_zero() && res.r.is_zero() && res.s.is_zero());
        assert!(res.certificate.equal);
    }

    #[test]
    fn diagonal_segment_descends_to_edges() {
        let x = square();
        // from the midpoint of edge [0,1] to the midpoint of edge [1,3], inside face [0,1,3]
        let t = PLChain::from_terms(1, 2, vec![(vec![pt(qf(1, 2), q(0)), pt(q(1), qf(1, 2))], 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let step = deform_step(&x.complex, 2, &t, &DeformConfig::default(), &mut rng).unwrap();
        let recomposed = step.p_next.plus(&step.r_inc).plus(&step.s_inc.boundary());
        assert!(chains_equal(&t, &recomposed, &EqualityMode::Exact).equal);
        for (vs, _) in step.p_next.terms() {
            let car = carrier(&x.complex, vs).unwrap();
            assert!(car == vec![0, 1] || car == vec![1, 3], "{car:?}");
        }
        let res = deform(&x, &t, &DeformConfig::default()).unwrap();
        assert!(res.certificate.equal);
        assert!(res.supports.all());
        assert!(res.maxima.p_vs_t.is_finite());
    }

    #[test]
    fn concentric_cycle_snaps_to_face_boundary() {
        let x = square();
        let t = concentric_cycle();
        let res = deform(&x, &t, &DeformConfig::default()).unwrap();
        assert!(res.certificate.equal);
        let face = PolyChain::from_int_terms(2, vec![(vec![0, 1, 3], 1)]).boundary();
        assert!(res.p == face || res.p == face.scaled(&q(-1)));
        assert!(res.r.is_zero() || crate::chain::canonicalize(&res.r).is_zero());
        // S fills the annulus: area (1 - 9/16) / 2
        assert!((crate::chain::canonicalize(&res.s).mass() - 7.0 / 32.0).abs() < 1e-12);
        assert!(res.supports.all());
    }

    #[test]
    fn snap_counts_multiplicity() {
        let x = square();
        let tri = PolyChain::from_int_terms(2, vec![(vec![0, 1, 3], 1)]).to_pl(&x.complex).unwrap();
        let twice = tri.plus(&PLChain::from_terms(2, 2, tri.terms().map(|(v, c)| (v.to_vec(), c))).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (p, r, _) = snap_to_polyhedral(&x.complex, &twice, &DeformConfig::default(), &mut rng).unwrap();
        assert_eq!(p.coefficient(&[0, 1, 3]), q(2));
        assert!(r.is_zero());
        // half of the face: multiplicity depends on the side of the generic point
        let half = PLChain::from_terms(2, 2, vec![(vec![pt(q(0), q(0)), pt(q(1), q(0)), pt(q(1), qf(1, 2))], 1)]).unwrap();
        let (p, r, _) = snap_to_polyhedral(&x.complex, &half, &DeformConfig::default(), &mut rng).unwrap();
        let z = p.coefficient(&[0, 1, 3]);
        assert!(z == q(0) || z == q(1));
        assert!(chains_equal(&half, &p.to_pl(&x.complex).unwrap().plus(&r), &EqualityMode::Exact).equal);
    }

    #[test]
    fn points_descend_to_vertices() {
        let x = TriangulatedSpace::new(grid_2d(2, 2, &qf(1, 2))).unwrap();
        let t = PLChain::from_terms(0, 2, vec![(vec![pt(qf(1, 3), qf(1, 7))], 1), (vec![pt(qf(5, 6), qf(2, 3))], -1)]).unwrap();
        let res = deform(&x, &t, &DeformConfig::default()).unwrap();
        assert!(res.certificate.equal);
        assert!(res.r.is_zero());
        assert_eq!(res.p.terms().map(|(_, z)| z.clone()).sum::<Q>(), q(0));
        assert!(res.supports.all());
    }

    #[test]
    fn above_dimension_is_zero_with_note() {
        let x = square();
        let t = PLChain::from_terms(3, 2, vec![(vec![pt(q(0), q(0)), pt(q(1), q(0)), pt(q(0), q(1)), pt(q(1), q(1))], 1)]).unwrap();
        let res = deform(&x, &t, &DeformConfig::default()).unwrap();
        assert!(res.p.is_zero() && res.r.is_zero() && res.s.is_zero());
        assert!(res.note.is_some());
        assert!(res.certificate.equal);
    }

    #[test]
    fn idempotent_on_output() {
        let x = square();
        let res = deform(&x, &concentric_cycle(), &DeformConfig::default()).unwrap();
        let again = deform(&x, &res.p.to_pl(&x.complex).unwrap(), &DeformConfig { seed: 9, ..Default::default() }).unwrap();
        assert_eq!(again.p, res.p);
        assert!(again.r.is_zero() && again.s.is_zero());
    }
}
