//! Cone regions of the radial projection from an interior point of a simplex.
//!
//! With apex `b` of barycentric coordinates `beta` (all positive) in the parent
//! simplex, the region over the facet opposite vertex `j` is
//! `{ lambda : lambda_i beta_j - lambda_j beta_i >= 0 for all i != j }`, i.e. the
//! points whose ratio `lambda_j / beta_j` is minimal. On it the radial projection
//! is `(lambda - s beta) / (1 - s)` with `s = lambda_j / beta_j`.

use super::{AffineSimplex, Affine, Cell, GeomError};
use crate::linalg::{self, Point};
use crate::rational::{sqrt_f64, to_f64, Q};
use rand::Rng;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct ConeRegion {
    parent: AffineSimplex,
    apex: Point,
    apex_bary: Vec<Q>,
    facet_index: usize,
    facet: AffineSimplex,
    /// Half-spaces `normal . lambda + offset >= 0` in barycentric coordinates of the parent.
    halfspaces: Vec<(Vec<Q>, Q)>,
}

impl ConeRegion {
    pub fn new(parent: &AffineSimplex, apex: &[Q], facet_index: usize) -> Result<Self, GeomError> {
        let beta = parent.barycentric(apex).ok_or(GeomError::NotInAffineHull)?;
        if beta.iter().any(|x| !x.is_positive()) || parent.is_degenerate() {
            return Err(GeomError::ApexNotInterior);
        }
        Ok(Self::from_bary(parent, apex.to_vec(), beta, facet_index))
    }

    fn from_bary(parent: &AffineSimplex, apex: Point, beta: Vec<Q>, j: usize) -> Self {
        let n = beta.len();
        let mut halfspaces = Vec::with_capacity(n - 1);
        for i in 0..n {
            if i == j {
                continue;
            }
            let mut normal = vec![Q::zero(); n];
            normal[i] = beta[j].clone();
            normal[j] = -beta[i].clone();
            halfspaces.push((normal, Q::zero()));
        }
        ConeRegion {
            parent: parent.clone(),
            apex,
            apex_bary: beta,
            facet_index: j,
            facet: parent.facet(j),
            halfspaces,
        }
    }

    pub fn parent(&self) -> &AffineSimplex {
        &self.parent
    }

    pub fn apex(&self) -> &Point {
        &self.apex
    }

    pub fn apex_barycentric(&self) -> &[Q] {
        &self.apex_bary
    }

    pub fn facet_index(&self) -> usize {
        self.facet_index
    }

    pub fn facet(&self) -> &AffineSimplex {
        &self.facet
    }

    pub fn halfspaces(&self) -> &[(Vec<Q>, Q)] {
        &self.halfspaces
    }

    /// Closed-region membership of a point of the parent simplex.
    pub fn contains(&self, x: &[Q]) -> bool {
        match self.parent.barycentric(x) {
            Some(l) => self.contains_bary(&l),
            None => false,
        }
    }

    pub fn contains_bary(&self, l: &[Q]) -> bool {
        l.iter().all(|v| !v.is_negative())
            && self
                .halfspaces
                .iter()
                .all(|(n, c)| !(crate::linalg::dot(n, l) + c).is_negative())
    }

    /// Radial image, in barycentric coordinates, of a point of this region.
    pub fn project_bary(&self, l: &[Q]) -> Result<Vec<Q>, GeomError> {
        radial_project_bary(&self.apex_bary, self.facet_index, l)
    }

    pub fn project(&self, x: &[Q]) -> Result<Point, GeomError> {
        let l = self.parent.barycentric(x).ok_or(GeomError::NotInAffineHull)?;
        Ok(self.parent.point_at(&self.project_bary(&l)?))
    }
}

/// `(lambda - s beta) / (1 - s)` with `s = lambda_j / beta_j`.
pub(crate) fn radial_project_bary(beta: &[Q], j: usize, l: &[Q]) -> Result<Vec<Q>, GeomError> {
    let s = &l[j] / &beta[j];
    let denom = Q::one() - &s;
    if denom.is_zero() {
        return Err(GeomError::ApexInput);
    }
    let mut out: Vec<Q> = l
        .iter()
        .zip(beta)
        .map(|(li, bi)| (li - &s * bi) / &denom)
        .collect();
    out[j] = Q::zero();
    Ok(out)
}

/// The region over each facet of `parent`, indexed by the opposite vertex.
pub fn cone_regions(parent: &AffineSimplex, apex: &[Q]) -> Result<Vec<ConeRegion>, GeomError> {
    let first = ConeRegion::new(parent, apex, 0)?;
    let beta = first.apex_bary.clone();
    let mut out = vec![first];
    for j in 1..=parent.dim() {
        out.push(ConeRegion::from_bary(parent, apex.to_vec(), beta.clone(), j));
    }
    Ok(out)
}

/// `ρ_b(x)`: the point where the ray from `b` through `x` leaves `parent`.
pub fn radial_projection(parent: &AffineSimplex, b: &[Q], x: &[Q]) -> Result<Point, GeomError> {
    let beta = ConeRegion::new(parent, b, 0)?.apex_bary;
    let l = parent.barycentric(x).ok_or(GeomError::NotInAffineHull)?;
    let j = region_of(&beta, &l);
    Ok(parent.point_at(&radial_project_bary(&beta, j, &l)?))
}

/// Measured Lipschitz constant of `ρ_b` on `parent ∖ U(b, r)` in units of
/// `1/r`: the largest `r |ρ_b(x) - ρ_b(y)| / |x - y|` over `pairs` seeded pairs
/// of nearby points outside the ball. Returns 0 if no pair could be drawn.
pub fn radial_lipschitz_estimate<R: Rng>(
    parent: &AffineSimplex,
    b: &[Q],
    r: &Q,
    pairs: usize,
    rng: &mut R,
) -> Result<f64, GeomError> {
    let r2 = r * r;
    let outside = |x: &Point| linalg::dist2(x, b) >= r2;
    let draw = |rng: &mut R| {
        let w: Vec<i64> = (0..=parent.dim()).map(|_| rng.gen_range(1..=1000)).collect();
        let total = Q::from_integer(w.iter().sum::<i64>().into());
        let l: Vec<Q> = w.iter().map(|&wi| Q::from_integer(wi.into()) / &total).collect();
        parent.point_at(&l)
    };
    let step = Q::new(1.into(), 64.into());
    let mut best = 0.0f64;
    let mut drawn = 0;
    for _ in 0..pairs.saturating_mul(64) {
        if drawn == pairs {
            break;
        }
        let x = draw(rng);
        let y = linalg::lerp(&x, &draw(rng), &step);
        if !outside(&x) || !outside(&y) || x == y {
            continue;
        }
        drawn += 1;
        let (px, py) = (radial_projection(parent, b, &x)?, radial_projection(parent, b, &y)?);
        let ratio = sqrt_f64(&linalg::dist2(&px, &py)) / sqrt_f64(&linalg::dist2(&x, &y));
        best = best.max(to_f64(r) * ratio);
    }
    Ok(best)
}

/// A piece of a clipped simplex: ambient vertices (orientation inherited from
/// the input) and their barycentric coordinates in the region's parent.
#[derive(Debug, Clone)]
pub(crate) struct Piece {
    pub vertices: Vec<Point>,
    pub bary: Vec<Vec<Q>>,
}

/// Index of the region a barycentric point belongs to, ties to the smallest index.
pub(crate) fn region_of(beta: &[Q], l: &[Q]) -> usize {
    let mut best = 0;
    for j in 1..beta.len() {
        // l_j / beta_j < l_best / beta_best
        if &l[j] * &beta[best] < &l[best] * &beta[j] {
            best = j;
        }
    }
    best
}

/// Clips a simplex given by the barycentric coordinates of its vertices against
/// region `j`, returning a triangulation whose pieces over all regions tile it.
/// Pieces lying in a wall shared with a lower-indexed region are assigned to that region.
pub(crate) fn clip_bary(parent: &AffineSimplex, beta: &[Q], j: usize, vbary: &[Vec<Q>]) -> Vec<Piece> {
    let k = vbary.len() - 1;
    let n = beta.len();
    if k == 0 {
        if region_of(beta, &vbary[0]) == j {
            return vec![Piece {
                vertices: vec![parent.point_at(&vbary[0])],
                bary: vbary.to_vec(),
            }];
        }
        return Vec::new();
    }
    let wall = |i: usize, l: &[Q]| -> Q { &l[i] * &beta[j] - &l[j] * &beta[i] };
    let mut cells = vec![Cell::standard_simplex(k)];
    for i in 0..n {
        if i == j {
            continue;
        }
        let vals: Vec<Q> = vbary.iter().map(|l| wall(i, l)).collect();
        let h = Affine::from_vertex_values(&vals);
        cells = cells.into_iter().filter_map(|c| c.clip(&h)).collect();
        if cells.is_empty() {
            return Vec::new();
        }
    }
    let to_bary = |mu: &[Q]| -> Vec<Q> {
        let mut l = vbary[0].clone();
        for (m, vb) in mu.iter().zip(&vbary[1..]) {
            if m.is_zero() {
                continue;
            }
            for (li, (a, b)) in l.iter_mut().zip(vb.iter().zip(&vbary[0])) {
                *li += m * (a - b);
            }
        }
        l
    };
    let mut out = Vec::new();
    for cell in cells {
        let cb = to_bary(&cell.centroid());
        if (0..j).any(|i| wall(i, &cb).is_zero()) {
            continue;
        }
        let bary: Vec<Vec<Q>> = cell.pts.iter().map(|p| to_bary(p)).collect();
        let amb: Vec<Point> = bary.iter().map(|l| parent.point_at(l)).collect();
        for simplex in cell.triangulate(&amb) {
            let mut idx = simplex.clone();
            if cell.orientation(&idx) < 0 {
                let last = idx.len() - 1;
                idx.swap(last - 1, last);
            }
            out.push(Piece {
                vertices: idx.iter().map(|&v| amb[v].clone()).collect(),
                bary: idx.iter().map(|&v| bary[v].clone()).collect(),
            });
        }
    }
    out
}

/// Triangulation of `s ∩ r` with orientation inherited from `s`.
///
/// `s` must lie in the parent simplex of `r`. Pieces over all regions of one
/// apex tile `s`, and adjacent pieces share identical vertex sets on common faces.
pub fn clip_simplex_by_region(s: &AffineSimplex, r: &ConeRegion) -> Result<Vec<AffineSimplex>, GeomError> {
    let vbary: Vec<Vec<Q>> = s
        .vertices()
        .iter()
        .map(|v| r.parent.barycentric(v).ok_or(GeomError::NotInAffineHull))
        .collect::<Result<_, _>>()?;
    Ok(clip_bary(&r.parent, &r.apex_bary, r.facet_index, &vbary)
        .into_iter()
        .map(|p| AffineSimplex::from_vertices_unchecked(p.vertices))
        .collect())
}
