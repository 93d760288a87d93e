//! Exact Euclidean primitives: affine simplices, their volumes, the regular
//! simplex incenter, central projection onto facets and clipping of simplices
//! by the cone regions of a radial projection.

mod cell;
mod region;

pub(crate) use cell::{Affine, Cell};
pub use region::{clip_simplex_by_region, cone_regions, radial_lipschitz_estimate, radial_projection, ConeRegion};
pub(crate) use region::{clip_bary, radial_project_bary};

use crate::linalg::{self, Point, Solution};
use crate::rational::{factorial, sqrt_f64, to_f64, Q};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("simplex has no vertices")]
    Empty,
    #[error("vertices live in different ambient dimensions")]
    AmbientMismatch,
    #[error("simplex dimension {k} exceeds ambient dimension {d}")]
    TooManyVertices { k: usize, d: usize },
    #[error("ray from the apex is parallel to the facet hyperplane")]
    RayParallel,
    #[error("input point coincides with the projection apex")]
    ApexInput,
    #[error("ray meets the facet hyperplane only behind the apex")]
    NoForwardIntersection,
    #[error("apex must lie in the interior of the parent simplex")]
    ApexNotInterior,
    #[error("point does not lie in the affine hull of the simplex")]
    NotInAffineHull,
}

/// An ordered list of `k + 1` points in `Q^d`; the order fixes the orientation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineSimplex {
    vertices: Vec<Point>,
}

impl AffineSimplex {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeomError> {
        let first = vertices.first().ok_or(GeomError::Empty)?;
        let d = first.len();
        if vertices.iter().any(|v| v.len() != d) {
            return Err(GeomError::AmbientMismatch);
        }
        if vertices.len() > d + 1 {
            return Err(GeomError::TooManyVertices { k: vertices.len() - 1, d });
        }
        Ok(Self { vertices })
    }

    pub(crate) fn from_vertices_unchecked(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn edges(&self) -> Vec<Point> {
        let o = &self.vertices[0];
        self.vertices[1..].iter().map(|v| linalg::sub(v, o)).collect()
    }

    pub fn gram(&self) -> Vec<Vec<Q>> {
        let e = self.edges();
        e.iter().map(|a| e.iter().map(|b| linalg::dot(a, b)).collect()).collect()
    }

    /// `det(G) / (k!)^2`, the exact square of the k-volume.
    pub fn squared_volume(&self) -> Q {
        let k = self.dim();
        if k == 0 {
            return Q::one();
        }
        let f = Q::from_integer(factorial(k));
        linalg::det(&self.gram()) / (&f * &f)
    }

    pub fn volume(&self) -> f64 {
        sqrt_f64(&self.squared_volume())
    }

    pub fn is_degenerate(&self) -> bool {
        self.dim() > 0 && self.squared_volume().is_zero()
    }

    pub fn centroid(&self) -> Point {
        let w = Q::new(1.into(), (self.vertices.len() as i64).into());
        let mut c = vec![Q::zero(); self.ambient()];
        for v in &self.vertices {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi * &w;
            }
        }
        c
    }

    pub fn point_at(&self, bary: &[Q]) -> Point {
        let refs: Vec<&Point> = self.vertices.iter().collect();
        linalg::combine(&refs, bary)
    }

    /// Barycentric coordinates of `x`, or `None` when `x` is off the affine hull.
    /// For degenerate simplices an arbitrary representation is returned.
    pub fn barycentric(&self, x: &[Q]) -> Option<Vec<Q>> {
        let d = self.ambient();
        let n = self.vertices.len();
        let mut a: Vec<Vec<Q>> = (0..d)
            .map(|i| self.vertices.iter().map(|v| v[i].clone()).collect())
            .collect();
        a.push(vec![Q::one(); n]);
        let mut b: Vec<Q> = x.to_vec();
        b.push(Q::one());
        match linalg::solve(&a, &b) {
            Solution::Unique(l) | Solution::Many(l) => Some(l),
            Solution::Inconsistent => None,
        }
    }

    /// Closed-simplex membership.
    pub fn contains(&self, x: &[Q]) -> bool {
        self.barycentric(x)
            .map(|l| l.iter().all(|v| !v.is_negative()))
            .unwrap_or(false)
    }

    /// Facet opposite vertex `j`, keeping the remaining vertex order.
    pub fn facet(&self, j: usize) -> AffineSimplex {
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, v)| v.clone())
            .collect();
        AffineSimplex { vertices }
    }

    /// Oriented boundary faces `(sign, face)` with sign `(-1)^j` for the face opposite vertex `j`.
    pub fn boundary_faces(&self) -> Vec<(i64, AffineSimplex)> {
        (0..self.vertices.len())
            .map(|j| (if j % 2 == 0 { 1 } else { -1 }, self.facet(j)))
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.iter().map(to_f64).collect()).collect()
    }

    /// Squared distance of the farthest vertex from `a`; equals the supremum over the closed simplex.
    pub fn max_dist2_from(&self, a: &[Q]) -> Q {
        self.vertices
            .iter()
            .map(|v| linalg::dist2(v, a))
            .max()
            .unwrap_or_else(Q::zero)
    }
}

/// `det(G)/(k!)^2` computed directly from a vertex list.
pub fn squared_volume_of(vertices: &[Point]) -> Q {
    AffineSimplex::from_vertices_unchecked(vertices.to_vec()).squared_volume()
}

/// Volume of a simplex.
pub fn simplex_volume(s: &AffineSimplex) -> f64 {
    s.volume()
}

/// Exact squared distance from `x` to the closed simplex `s`: the minimum over
/// faces whose relative interior contains the orthogonal projection of `x`.
pub fn point_simplex_dist2(x: &[Q], s: &AffineSimplex) -> Q {
    let n = s.vertices().len();
    let mut best: Option<Q> = None;
    for mask in 1u32..(1u32 << n) {
        let face: Vec<Point> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| s.vertices()[i].clone())
            .collect();
        let Some(l) = orthogonal_projection_bary(x, &face) else { continue };
        if l.iter().any(|v| !v.is_positive()) {
            continue;
        }
        let refs: Vec<&Point> = face.iter().collect();
        let p = linalg::combine(&refs, &l);
        let d = linalg::dist2(&p, x);
        if best.as_ref().is_none_or(|b| &d < b) {
            best = Some(d);
        }
    }
    best.unwrap_or_else(Q::zero)
}

/// Barycentric coordinates of the orthogonal projection of `x` onto the affine
/// hull of `face` (`None` when the face is degenerate).
fn orthogonal_projection_bary(x: &[Q], face: &[Point]) -> Option<Vec<Q>> {
    let o = &face[0];
    let edges: Vec<Point> = face[1..].iter().map(|v| linalg::sub(v, o)).collect();
    if edges.is_empty() {
        return Some(vec![Q::one()]);
    }
    let g: Vec<Vec<Q>> = edges.iter().map(|a| edges.iter().map(|b| linalg::dot(a, b)).collect()).collect();
    let rhs: Vec<Q> = edges.iter().map(|e| linalg::dot(e, &linalg::sub(x, o))).collect();
    match linalg::solve(&g, &rhs) {
        Solution::Unique(mu) => {
            let s: Q = mu.iter().sum();
            let mut l = vec![Q::one() - s];
            l.extend(mu);
            Some(l)
        }
        _ => None,
    }
}

/// Incenter and inradius of the regular unit-side `m`-simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Incenter {
    /// `1 / (2 m (m + 1))`
    pub inradius_sq: Q,
    pub inradius: f64,
    /// The barycenter, in barycentric coordinates.
    pub barycentric: Vec<Q>,
}

pub fn inradius_incenter(m: usize) -> Incenter {
    assert!(m >= 1, "inradius needs m >= 1");
    let inradius_sq = Q::new(1.into(), ((2 * m * (m + 1)) as i64).into());
    let w = Q::new(1.into(), ((m + 1) as i64).into());
    Incenter {
        inradius: sqrt_f64(&inradius_sq),
        inradius_sq,
        barycentric: vec![w; m + 1],
    }
}

/// Squared distance between two barycentric points of the regular unit-side simplex.
pub fn regular_dist2(a: &[Q], b: &[Q]) -> Q {
    linalg::dist2(a, b) / Q::from_integer(2.into())
}

/// Intersection of the ray from `b` through `x` with the affine hull of `facet`.
pub fn central_projection(b: &[Q], facet: &AffineSimplex, x: &[Q]) -> Result<Point, GeomError> {
    if b == x {
        return Err(GeomError::ApexInput);
    }
    let d = b.len();
    let dir = linalg::sub(x, b);
    let f0 = &facet.vertices()[0];
    let spans = facet.edges();
    // t * dir - sum mu_i * span_i = f0 - b
    let a: Vec<Vec<Q>> = (0..d)
        .map(|i| {
            let mut row = vec![dir[i].clone()];
            row.extend(spans.iter().map(|s| -s[i].clone()));
            row
        })
        .collect();
    let rhs = linalg::sub(f0, b);
    let t = match linalg::solve(&a, &rhs) {
        Solution::Unique(sol) => sol[0].clone(),
        Solution::Many(_) | Solution::Inconsistent => return Err(GeomError::RayParallel),
    };
    if !t.is_positive() {
        return Err(GeomError::NoForwardIntersection);
    }
    Ok(linalg::lerp(b, x, &t))
}
