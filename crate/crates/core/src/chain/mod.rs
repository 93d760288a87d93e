//! Integer-weighted PL chains in `Q^d`: boundary, mass, pushforward,
//! restriction, cones and prisms, plus test-form evaluation and exact equality.

mod equality;
mod form;
mod poly;
mod transport;

pub use equality::{chains_equal, canonicalize, EqualityMode, EqualityVerdict, Witness};
pub(crate) use equality::{flat_orientation, multiplicity_at};
pub use form::{Poly, TestForm};
pub use poly::PolyChain;
pub use form::evaluate;
pub use transport::{transport, TransportError, TransportReport, TransportRow};

use crate::complex::sort_with_sign;
use crate::geom::{point_simplex_dist2, AffineSimplex, Cell, Affine, GeomError};
use crate::linalg::{self, Point};
use crate::rational::{sqrt_f64, Q};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("term has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point has ambient dimension {got}, expected {expected}")]
    AmbientMismatch { expected: usize, got: usize },
    #[error("a vertex shared by several terms is mapped to different images")]
    InconsistentFaceImages,
    #[error("term {term} straddles the boundary of the region")]
    TermStraddlesRegion { term: usize },
    #[error("form of degree {form} paired with a chain of dimension {chain}")]
    DegreeMismatch { form: usize, chain: usize },
    #[error("chain is not a cycle")]
    NotACycle,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// A region for local mass: the relative interior of a simplex, or a closed ball.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    SimplexInterior(AffineSimplex),
    Ball { center: Point, radius_sq: Q },
}

/// `Σ θ_i ⟦σ_i⟧` with each simplex stored under its lexicographically sorted
/// vertex list; the sorting permutation's sign is folded into `θ_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PLChain {
    k: usize,
    ambient: usize,
    terms: BTreeMap<Vec<Point>, i64>,
}

impl PLChain {
    pub fn zero(k: usize, ambient: usize) -> Self {
        PLChain { k, ambient, terms: BTreeMap::new() }
    }

    /// Builds a chain from `(vertices, coefficient)` pairs, merging equal
    /// simplices and dropping zero coefficients and simplices with repeated vertices.
    pub fn from_terms<I>(k: usize, ambient: usize, terms: I) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = (Vec<Point>, i64)>,
    {
        let mut c = Self::zero(k, ambient);
        for (vs, coeff) in terms {
            if vs.len() != k + 1 {
                return Err(ChainError::DimensionMismatch { expected: k, got: vs.len().saturating_sub(1) });
            }
            if let Some(bad) = vs.iter().find(|v| v.len() != ambient) {
                return Err(ChainError::AmbientMismatch { expected: ambient, got: bad.len() });
            }
            c.add_term(vs, coeff);
        }
        Ok(c)
    }

    pub fn from_simplices<I>(k: usize, ambient: usize, terms: I) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = (AffineSimplex, i64)>,
    {
        Self::from_terms(k, ambient, terms.into_iter().map(|(s, c)| (s.into_vertices(), c)))
    }

    /// Adds `coeff` times the oriented simplex `vs` (no validation).
    pub(crate) fn add_term(&mut self, vs: Vec<Point>, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let (sorted, sign) = sort_with_sign(&vs);
        if sign == 0 {
            return;
        }
        let entry = self.terms.entry(sorted).or_insert(0);
        *entry += sign * coeff;
        if *entry == 0 {
            let (sorted, _) = sort_with_sign(&vs);
            self.terms.remove(&sorted);
        }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order: sorted vertices and signed coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (&[Point], i64)> {
        self.terms.iter().map(|(v, &c)| (v.as_slice(), c))
    }

    pub fn simplices(&self) -> impl Iterator<Item = (AffineSimplex, i64)> + '_ {
        self.terms
            .iter()
            .map(|(v, &c)| (AffineSimplex::from_vertices_unchecked(v.clone()), c))
    }

    /// Coefficient of the oriented simplex `vs` (sign-adjusted).
    pub fn coefficient(&self, vs: &[Point]) -> i64 {
        let (sorted, sign) = sort_with_sign(vs);
        sign * self.terms.get(&sorted).copied().unwrap_or(0)
    }

    fn check_compatible(&self, other: &PLChain) -> Result<(), ChainError> {
        if self.k != other.k {
            return Err(ChainError::DimensionMismatch { expected: self.k, got: other.k });
        }
        if self.ambient != other.ambient {
            return Err(ChainError::AmbientMismatch { expected: self.ambient, got: other.ambient });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &PLChain) -> Result<PLChain, ChainError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (vs, &c) in &other.terms {
            out.add_term(vs.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &PLChain) -> Result<PLChain, ChainError> {
        self.try_add(&other.scaled(-1))
    }

    /// `self + other`; panics on a dimension or ambient mismatch.
    pub fn plus(&self, other: &PLChain) -> PLChain {
        self.try_add(other).expect("chains of equal dimension and ambient")
    }

    /// `self - other`; panics on a dimension or ambient mismatch.
    pub fn minus(&self, other: &PLChain) -> PLChain {
        self.try_sub(other).expect("chains of equal dimension and ambient")
    }

    pub fn scaled(&self, n: i64) -> PLChain {
        if n == 0 {
            return Self::zero(self.k, self.ambient);
        }
        PLChain {
            k: self.k,
            ambient: self.ambient,
            terms: self.terms.iter().map(|(v, &c)| (v.clone(), c * n)).collect(),
        }
    }

    /// Alternating face sum. The boundary of a 0-chain is reported as the zero
    /// 0-chain; see [`PLChain::augmentation`] for the total coefficient.
    pub fn boundary(&self) -> PLChain {
        if self.k == 0 {
            return Self::zero(0, self.ambient);
        }
        let mut out = Self::zero(self.k - 1, self.ambient);
        for (vs, &c) in &self.terms {
            for i in 0..vs.len() {
                let face: Vec<Point> = vs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v.clone()).collect();
                out.add_term(face, if i % 2 == 0 { c } else { -c });
            }
        }
        out
    }

    /// Sum of coefficients (meaningful for 0-chains).
    pub fn augmentation(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn is_cycle(&self) -> bool {
        if self.k == 0 {
            self.augmentation() == 0
        } else {
            self.boundary().is_zero()
        }
    }

    /// Drops terms of zero k-volume (they are zero as currents).
    pub fn without_degenerate(&self) -> PLChain {
        PLChain {
            k: self.k,
            ambient: self.ambient,
            terms: self
                .terms
                .iter()
                .filter(|(v, _)| !squared_volume(v).is_zero())
                .map(|(v, &c)| (v.clone(), c))
                .collect(),
        }
    }

    /// `Σ |θ_i| vol(σ_i)` over the formal sum.
    pub fn mass(&self) -> f64 {
        self.terms.iter().map(|(v, &c)| c.unsigned_abs() as f64 * sqrt_f64(&squared_volume(v))).sum()
    }

    /// Mass of the terms inside `region`. Simplex regions require every term
    /// to lie inside the open simplex or to meet it in a null set.
    pub fn local_mass(&self, region: &Region) -> Result<f64, ChainError> {
        let mut total = 0.0;
        for (idx, (vs, &c)) in self.terms.iter().enumerate() {
            let inside = match region {
                Region::SimplexInterior(s) => match term_vs_simplex_interior(vs, s) {
                    Placement::Inside => true,
                    Placement::Outside => false,
                    Placement::Straddles => return Err(ChainError::TermStraddlesRegion { term: idx }),
                },
                Region::Ball { center, radius_sq } => {
                    let s = AffineSimplex::from_vertices_unchecked(vs.clone());
                    if s.max_dist2_from(center) <= *radius_sq {
                        true
                    } else if point_simplex_dist2(center, &s) >= *radius_sq {
                        false
                    } else {
                        return Err(ChainError::TermStraddlesRegion { term: idx });
                    }
                }
            };
            if inside {
                total += c.unsigned_abs() as f64 * sqrt_f64(&squared_volume(vs));
            }
        }
        Ok(total)
    }

    /// Carriers of the nonzero terms; their union is the support.
    pub fn support(&self) -> Vec<AffineSimplex> {
        self.terms.keys().map(|v| AffineSimplex::from_vertices_unchecked(v.clone())).collect()
    }

    /// All distinct vertices of the support.
    pub fn vertex_set(&self) -> Vec<Point> {
        let mut vs: Vec<Point> = self.terms.keys().flatten().cloned().collect();
        vs.sort();
        vs.dedup();
        vs
    }

    /// Pushforward by a map that is affine on every term and given by a point map.
    pub fn pushforward<F>(&self, target_ambient: usize, f: F) -> PLChain
    where
        F: Fn(&Point) -> Point,
    {
        let mut out = Self::zero(self.k, target_ambient);
        for (vs, &c) in &self.terms {
            out.add_term(vs.iter().map(&f).collect(), c);
        }
        out
    }

    /// Pushforward by per-term affine maps given by the images of each term's
    /// vertices (in canonical term order). Every vertex must have one image.
    pub fn pushforward_images(&self, target_ambient: usize, images: &[Vec<Point>]) -> Result<PLChain, ChainError> {
        if images.len() != self.terms.len() {
            return Err(ChainError::DimensionMismatch { expected: self.terms.len(), got: images.len() });
        }
        let mut seen: BTreeMap<&Point, &Point> = BTreeMap::new();
        let mut out = Self::zero(self.k, target_ambient);
        for ((vs, &c), img) in self.terms.iter().zip(images) {
            if img.len() != vs.len() {
                return Err(ChainError::DimensionMismatch { expected: self.k, got: img.len().saturating_sub(1) });
            }
            for (v, w) in vs.iter().zip(img) {
                if w.len() != target_ambient {
                    return Err(ChainError::AmbientMismatch { expected: target_ambient, got: w.len() });
                }
                if let Some(prev) = seen.insert(v, w) {
                    if prev != w {
                        return Err(ChainError::InconsistentFaceImages);
                    }
                }
            }
            out.add_term(img.clone(), c);
        }
        Ok(out)
    }

    /// Cone with apex `a`: `σ = [v_0..v_k] ↦ [a, v_0..v_k]`, so that
    /// `∂cone(a,T) = T - cone(a,∂T)`. Degenerate pieces are dropped.
    pub fn cone(&self, a: &Point) -> PLChain {
        let mut out = Self::zero(self.k + 1, self.ambient);
        for (vs, &c) in &self.terms {
            let mut s = vec![a.clone()];
            s.extend(vs.iter().cloned());
            out.add_term(s, c);
        }
        out.without_degenerate()
    }

    /// Staircase prism of the straight-line homotopy from `h0` to `h1`:
    /// `[v_0..v_k] ↦ Σ_i (-1)^i [h0 v_0 .. h0 v_i, h1 v_i .. h1 v_k]`, so that
    /// `∂prism(T) = h1_# T - h0_# T - prism(∂T)`. Degenerate pieces are dropped.
    pub fn prism<F0, F1>(&self, h0: F0, h1: F1) -> PLChain
    where
        F0: Fn(&Point) -> Point,
        F1: Fn(&Point) -> Point,
    {
        self.prism_raw(h0, h1).without_degenerate()
    }

    /// Prism without dropping zero-volume pieces.
    pub fn prism_raw<F0, F1>(&self, h0: F0, h1: F1) -> PLChain
    where
        F0: Fn(&Point) -> Point,
        F1: Fn(&Point) -> Point,
    {
        let mut out = Self::zero(self.k + 1, self.ambient);
        for (vs, &c) in &self.terms {
            let a: Vec<Point> = vs.iter().map(&h0).collect();
            let b: Vec<Point> = vs.iter().map(&h1).collect();
            for i in 0..vs.len() {
                let mut s: Vec<Point> = a[..=i].to_vec();
                s.extend(b[i..].iter().cloned());
                out.add_term(s, if i % 2 == 0 { c } else { -c });
            }
        }
        out
    }

    /// Exact check of `mass(cone(a,T)) ≤ sup_{x ∈ spt T} |x - a| · mass(T)`,
    /// certified termwise via `vol(cone σ)^2 ≤ R^2 vol(σ)^2`.
    pub fn cone_bound_holds(&self, a: &Point) -> bool {
        let r2 = self.sup_dist2(a);
        self.terms.keys().all(|vs| {
            let mut s = vec![a.clone()];
            s.extend(vs.iter().cloned());
            squared_volume(&s) <= &r2 * squared_volume(vs)
        })
    }

    /// `sup_{x ∈ spt T} |x - a|^2` (attained at a vertex).
    pub fn sup_dist2(&self, a: &Point) -> Q {
        self.terms
            .keys()
            .flatten()
            .map(|v| linalg::dist2(v, a))
            .max()
            .unwrap_or_else(Q::zero)
    }

    /// `diam(spt T)^2` (attained between vertices).
    pub fn diam2(&self) -> Q {
        let vs = self.vertex_set();
        let mut best = Q::zero();
        for (i, a) in vs.iter().enumerate() {
            for b in &vs[i + 1..] {
                let d = linalg::dist2(a, b);
                if d > best {
                    best = d;
                }
            }
        }
        best
    }
}

fn squared_volume(vs: &[Point]) -> Q {
    crate::geom::squared_volume_of(vs)
}

enum Placement {
    Inside,
    Outside,
    Straddles,
}

fn term_vs_simplex_interior(vs: &[Point], region: &AffineSimplex) -> Placement {
    let k = vs.len() - 1;
    if k > region.dim() || squared_volume(vs).is_zero() {
        return Placement::Outside;
    }
    let mut bary = Vec::with_capacity(vs.len());
    for v in vs {
        match region.barycentric(v) {
            Some(l) => bary.push(l),
            None => return Placement::Outside,
        }
    }
    let centroid_positive = |ls: &[Vec<Q>]| -> bool {
        let n = Q::from_integer((ls.len() as i64).into());
        (0..ls[0].len()).all(|i| ls.iter().map(|l| &l[i]).sum::<Q>() / &n > Q::zero())
    };
    if bary.iter().all(|l| l.iter().all(|x| !x.is_negative())) {
        return if centroid_positive(&bary) { Placement::Inside } else { Placement::Outside };
    }
    if k == 0 {
        return Placement::Outside;
    }
    let mut cell = Some(Cell::standard_simplex(k));
    for i in 0..bary[0].len() {
        let vals: Vec<Q> = bary.iter().map(|l| l[i].clone()).collect();
        cell = cell.and_then(|c| c.clip(&Affine::from_vertex_values(&vals)));
    }
    match cell {
        None => Placement::Outside,
        Some(c) => {
            let mu = c.centroid();
            let mut l = bary[0].clone();
            for (m, b) in mu.iter().zip(&bary[1..]) {
                for (li, (bi, b0)) in l.iter_mut().zip(b.iter().zip(&bary[0])) {
                    *li += m * (bi - b0);
                }
            }
            if l.iter().all(|x| x.is_positive()) {
                Placement::Straddles
            } else {
                Placement::Outside
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn p(c: &[i64]) -> Point {
        c.iter().map(|&x| q(x)).collect()
    }

    fn square_boundary() -> PLChain {
        PLChain::from_terms(
            1,
            2,
            vec![
                (vec![p(&[0, 0]), p(&[1, 0])], 1),
                (vec![p(&[1, 0]), p(&[1, 1])], 1),
                (vec![p(&[1, 1]), p(&[0, 1])], 1),
                (vec![p(&[0, 1]), p(&[0, 0])], 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn segment_boundary() {
        let s = PLChain::from_terms(1, 1, vec![(vec![p(&[0]), p(&[1])], 1)]).unwrap();
        let b = s.boundary();
        assert_eq!(b.coefficient(&[p(&[1])]), 1);
        assert_eq!(b.coefficient(&[p(&[0])]), -1);
        assert!(b.boundary().is_zero());
    }

    #[test]
    fn two_triangles_boundary_is_square() {
        let t = PLChain::from_terms(
            2,
            2,
            vec![
                (vec![p(&[0, 0]), p(&[1, 0]), p(&[1, 1])], 1),
                (vec![p(&[0, 0]), p(&[1, 1]), p(&[0, 1])], 1),
            ],
        )
        .unwrap();
        assert_eq!(t.boundary(), square_boundary());
    }

    #[test]
    fn mass_examples() {
        assert_eq!(PLChain::zero(1, 2).mass(), 0.0);
        let s = PLChain::from_terms(1, 1, vec![(vec![p(&[0]), p(&[1])], 2)]).unwrap();
        assert_eq!(s.mass(), 2.0);
        let t = PLChain::from_terms(
            2,
            2,
            vec![
                (vec![p(&[0, 0]), p(&[1, 0]), p(&[0, 1])], 1),
                (vec![p(&[2, 0]), p(&[3, 0]), p(&[2, 1])].into_iter().map(|v| v).collect(), 0),
                (vec![vec![q(5), q(0)], vec![q(6), q(0)], vec![q(5), qf(1, 2)]], -3),
            ],
        )
        .unwrap();
        assert!((t.mass() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn cone_over_square_boundary() {
        let c = square_boundary().cone(&vec![qf(1, 2), qf(1, 2)]);
        assert_eq!(c.len(), 4);
        assert!((c.mass() - 1.0).abs() < 1e-15);
        assert_eq!(c.boundary(), square_boundary());
        assert!(PLChain::zero(1, 2).cone(&p(&[0, 0])).is_zero());
        assert!(square_boundary().cone_bound_holds(&vec![qf(1, 2), qf(1, 2)]));
    }

    #[test]
    fn prism_examples() {
        let seg = PLChain::from_terms(1, 2, vec![(vec![p(&[0, 0]), p(&[1, 0])], 1)]).unwrap();
        let id = |x: &Point| x.clone();
        let up = |x: &Point| vec![x[0].clone(), &x[1] + q(1)];
        assert!(seg.prism(id, id).is_zero());
        let pr = seg.prism(id, up);
        assert_eq!(pr.len(), 2);
        assert!((pr.mass() - 1.0).abs() < 1e-15);
        let lhs = pr.boundary();
        let rhs = seg.pushforward(2, up).minus(&seg).minus(&seg.boundary().prism(id, up));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pushforward_scaling_and_projection() {
        let tri = PLChain::from_terms(2, 2, vec![(vec![p(&[0, 0]), p(&[1, 0]), p(&[0, 1])], 1)]).unwrap();
        let scaled = tri.pushforward(2, |x| x.iter().map(|c| c * q(3)).collect());
        assert!((scaled.mass() - 9.0 * tri.mass()).abs() < 1e-12);
        // slanted segment (0,0)-(3,4) projected on the x axis: |cos| * 5 = 3
        let seg = PLChain::from_terms(1, 2, vec![(vec![p(&[0, 0]), p(&[3, 4])], 1)]).unwrap();
        let proj = seg.pushforward(2, |x| vec![x[0].clone(), q(0)]);
        let gram_oracle = {
            let e = [q(3), q(0)];
            crate::linalg::dot(&e, &e)
        };
        assert_eq!(proj.mass(), sqrt_f64(&gram_oracle));
        assert_eq!(proj.mass(), 3.0);
        let identity = tri.pushforward(2, |x| x.clone());
        assert_eq!(identity, tri);
    }

    #[test]
    fn pushforward_images_consistency() {
        let chain = square_boundary();
        let good: Vec<Vec<Point>> = chain.terms().map(|(vs, _)| vs.to_vec()).collect();
        assert_eq!(chain.pushforward_images(2, &good).unwrap(), chain);
        let mut bad = good.clone();
        bad[0][0] = p(&[7, 7]);
        assert_eq!(chain.pushforward_images(2, &bad), Err(ChainError::InconsistentFaceImages));
    }

    #[test]
    fn local_mass_regions() {
        let tri = AffineSimplex::new(vec![p(&[0, 0]), p(&[4, 0]), p(&[0, 4])]).unwrap();
        let inside = PLChain::from_terms(1, 2, vec![(vec![p(&[1, 1]), p(&[2, 1])], 1)]).unwrap();
        let region = Region::SimplexInterior(tri.clone());
        assert_eq!(inside.local_mass(&region).unwrap(), 1.0);
        let on_edge = PLChain::from_terms(1, 2, vec![(vec![p(&[1, 0]), p(&[2, 0])], 1)]).unwrap();
        assert_eq!(on_edge.local_mass(&region).unwrap(), 0.0);
        let crossing = PLChain::from_terms(1, 2, vec![(vec![p(&[1, 1]), p(&[5, 1])], 1)]).unwrap();
        assert_eq!(crossing.local_mass(&region), Err(ChainError::TermStraddlesRegion { term: 0 }));
        let ball = Region::Ball { center: p(&[0, 0]), radius_sq: q(9) };
        assert_eq!(inside.local_mass(&ball).unwrap(), 1.0);
        assert!(crossing.local_mass(&ball).is_err());
    }
}
