//! Covers of finite metric point clouds by greedy-net cells, the partition of
//! unity `τ_i(x) = max(ε/2 - d(x, B_i), 0)`, the barycentric map `ψ` into the
//! nerve, and quasi-isometry measurements of the resulting polyhedral structure.

use crate::complex::{ComplexError, SimplicialComplex};
use crate::linalg::{self, Point};
use crate::rational::{sqrt_f64, Q};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NerveError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("scale must be positive")]
    NonPositiveScale,
    #[error("distance matrix is not square")]
    NotSquare,
    #[error("distance matrix entry ({i}, {j}) violates {what}")]
    NotAMetric { i: usize, j: usize, what: &'static str },
    #[error("points have inconsistent dimensions")]
    RaggedCoordinates,
    #[error("cover set {0} is empty or references a missing point")]
    InvalidCover(usize),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A finite metric space given by coordinates in `Q^d` or a distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricPointCloud {
    Coordinates(Vec<Point>),
    Distances(Vec<Vec<Q>>),
}

impl MetricPointCloud {
    pub fn from_coordinates(points: Vec<Point>) -> Result<Self, NerveError> {
        if points.is_empty() {
            return Err(NerveError::EmptyCloud);
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(NerveError::RaggedCoordinates);
        }
        Ok(MetricPointCloud::Coordinates(points))
    }

    /// Validates symmetry, zero diagonal, nonnegativity and the triangle inequality.
    pub fn from_distances(d: Vec<Vec<Q>>) -> Result<Self, NerveError> {
        let n = d.len();
        if n == 0 {
            return Err(NerveError::EmptyCloud);
        }
        if d.iter().any(|row| row.len() != n) {
            return Err(NerveError::NotSquare);
        }
        for i in 0..n {
            if !d[i][i].is_zero() {
                return Err(NerveError::NotAMetric { i, j: i, what: "zero diagonal" });
            }
            for j in 0..n {
                if d[i][j].is_negative() {
                    return Err(NerveError::NotAMetric { i, j, what: "nonnegativity" });
                }
                if d[i][j] != d[j][i] {
                    return Err(NerveError::NotAMetric { i, j, what: "symmetry" });
                }
                if (0..n).any(|k| d[i][j] > &d[i][k] + &d[k][j]) {
                    return Err(NerveError::NotAMetric { i, j, what: "the triangle inequality" });
                }
            }
        }
        Ok(MetricPointCloud::Distances(d))
    }

    pub fn len(&self) -> usize {
        match self {
            MetricPointCloud::Coordinates(p) => p.len(),
            MetricPointCloud::Distances(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coordinates(&self) -> Option<&[Point]> {
        match self {
            MetricPointCloud::Coordinates(p) => Some(p),
            MetricPointCloud::Distances(_) => None,
        }
    }

    /// Exact squared distance.
    pub fn dist2(&self, i: usize, j: usize) -> Q {
        match self {
            MetricPointCloud::Coordinates(p) => linalg::dist2(&p[i], &p[j]),
            MetricPointCloud::Distances(d) => &d[i][j] * &d[i][j],
        }
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            MetricPointCloud::Coordinates(_) => sqrt_f64(&self.dist2(i, j)),
            MetricPointCloud::Distances(d) => crate::rational::to_f64(&d[i][j]),
        }
    }
}

/// A cover `{B_i}` at scale `s` with its measured Nagata data: `multiplicity`
/// is the largest number of sets met by a closed ball of radius `s/2` about a
/// cloud point, and `diameter` the largest set diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct NagataCover {
    pub s: Q,
    pub sets: Vec<Vec<usize>>,
    pub multiplicity: usize,
    pub diameter: f64,
}

impl NagataCover {
    /// Measured dimension `n = multiplicity - 1`.
    pub fn dimension(&self) -> usize {
        self.multiplicity.saturating_sub(1)
    }

    /// Measured constant `c = diameter / s`.
    pub fn constant(&self) -> f64 {
        self.diameter / crate::rational::to_f64(&self.s)
    }

    /// Builds a cover from explicit sets and measures it.
    pub fn from_sets(cloud: &MetricPointCloud, s: Q, sets: Vec<Vec<usize>>) -> Result<Self, NerveError> {
        if !s.is_positive() {
            return Err(NerveError::NonPositiveScale);
        }
        for (i, b) in sets.iter().enumerate() {
            if b.is_empty() || b.iter().any(|&x| x >= cloud.len()) {
                return Err(NerveError::InvalidCover(i));
            }
        }
        let mut diameter2 = Q::zero();
        for b in &sets {
            for (a, &x) in b.iter().enumerate() {
                for &y in &b[a + 1..] {
                    diameter2 = diameter2.max(cloud.dist2(x, y));
                }
            }
        }
        let r2 = &s * &s / Q::from_integer(4.into());
        let multiplicity = (0..cloud.len())
            .map(|x| sets.iter().filter(|b| b.iter().any(|&y| cloud.dist2(x, y) <= r2)).count())
            .max()
            .unwrap_or(0);
        Ok(NagataCover { s, sets, multiplicity, diameter: sqrt_f64(&diameter2) })
    }
}

/// Greedy `s`-net in index order (a point joins the net when it is farther
/// than `s` from every earlier net point), with Voronoi cells as cover sets;
/// ties go to the smaller net index.
pub fn build_cover(cloud: &MetricPointCloud, s: &Q) -> Result<NagataCover, NerveError> {
    if cloud.is_empty() {
        return Err(NerveError::EmptyCloud);
    }
    if !s.is_positive() {
        return Err(NerveError::NonPositiveScale);
    }
    let s2 = s * s;
    let mut net: Vec<usize> = Vec::new();
    for x in 0..cloud.len() {
        if net.iter().all(|&z| cloud.dist2(x, z) > s2) {
            net.push(x);
        }
    }
    let mut sets = vec![Vec::new(); net.len()];
    for x in 0..cloud.len() {
        let mut best = 0;
        let mut best_d = cloud.dist2(x, net[0]);
        for (i, &z) in net.iter().enumerate().skip(1) {
            let d = cloud.dist2(x, z);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        sets[best].push(x);
    }
    NagataCover::from_sets(cloud, s.clone(), sets)
}

/// Exact squared distance from cloud point `x` to cover set `i`.
fn set_dist2(cloud: &MetricPointCloud, cover: &NagataCover, i: usize, x: usize) -> Q {
    cover.sets[i].iter().map(|&y| cloud.dist2(x, y)).min().expect("cover sets are nonempty")
}

/// Whether `τ_i(x) > 0`, i.e. `d(x, B_i) < s/2`, decided exactly.
pub fn tau_positive(cloud: &MetricPointCloud, cover: &NagataCover, i: usize, x: usize) -> bool {
    set_dist2(cloud, cover, i, x) * Q::from_integer(4.into()) < &cover.s * &cover.s
}

/// `τ_i(x) = max(s/2 - d(x, B_i), 0)`.
pub fn tau(cloud: &MetricPointCloud, cover: &NagataCover, i: usize, x: usize) -> f64 {
    if !tau_positive(cloud, cover, i, x) {
        return 0.0;
    }
    let d = match cloud {
        MetricPointCloud::Distances(m) => {
            cover.sets[i].iter().map(|&y| crate::rational::to_f64(&m[x][y])).fold(f64::INFINITY, f64::min)
        }
        MetricPointCloud::Coordinates(_) => sqrt_f64(&set_dist2(cloud, cover, i, x)),
    };
    (crate::rational::to_f64(&cover.s) / 2.0 - d).max(0.0)
}

/// `ψ(x) = τ(x) / Σ_i τ_i(x)` as sparse `(vertex, weight)` pairs.
pub fn psi(cloud: &MetricPointCloud, cover: &NagataCover, x: usize) -> Vec<(usize, f64)> {
    let taus: Vec<(usize, f64)> = (0..cover.sets.len())
        .filter(|&i| tau_positive(cloud, cover, i, x))
        .map(|i| (i, tau(cloud, cover, i, x)))
        .collect();
    let total: f64 = taus.iter().map(|(_, t)| t).sum();
    taus.into_iter().map(|(i, t)| (i, t / total)).collect()
}

/// Exact check of `Σ_i τ_i(x) >= s/2`: holds when `x` belongs to some cover set.
pub fn tau_sum_bound_holds(cover: &NagataCover, x: usize) -> bool {
    cover.sets.iter().any(|b| b.contains(&x))
}

/// The nerve `Σ` realized at side length `s`, the table `ψ`, and the vertex
/// map `φ0` sending each cover index to a representative cloud point.
#[derive(Debug, Clone, PartialEq)]
pub struct Nerve {
    pub complex: SimplicialComplex,
    pub psi: Vec<Vec<(usize, f64)>>,
    pub phi0: Vec<usize>,
}

/// Representative of a cover set: the member closest to the set's centroid
/// for coordinate clouds, the medoid for distance matrices; ties to the smaller index.
fn representative(cloud: &MetricPointCloud, set: &[usize]) -> usize {
    let cost: Box<dyn Fn(usize) -> Q> = match cloud {
        MetricPointCloud::Coordinates(p) => {
            let n = Q::from_integer((set.len() as i64).into());
            let mut c = vec![Q::zero(); p[set[0]].len()];
            for &x in set {
                c = linalg::add(&c, &p[x]);
            }
            let c: Point = c.iter().map(|v| v / &n).collect();
            Box::new(move |x| linalg::dist2(&p[x], &c))
        }
        MetricPointCloud::Distances(d) => Box::new(move |x| set.iter().map(|&y| d[x][y].clone()).sum()),
    };
    let mut best = set[0];
    let mut best_cost = cost(best);
    for &x in &set[1..] {
        let c = cost(x);
        if c < best_cost || (c == best_cost && x < best) {
            best = x;
            best_cost = c;
        }
    }
    best
}

/// Simplices are the sets `{i : τ_i(x) > 0}` over cloud points `x`.
pub fn build_nerve(cover: &NagataCover, cloud: &MetricPointCloud) -> Result<Nerve, NerveError> {
    let mut simplices: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut psis = Vec::with_capacity(cloud.len());
    for x in 0..cloud.len() {
        let p = psi(cloud, cover, x);
        simplices.insert(p.iter().map(|(i, _)| *i).collect());
        psis.push(p);
    }
    for i in 0..cover.sets.len() {
        simplices.insert(vec![i]);
    }
    let list: Vec<Vec<usize>> = simplices.into_iter().collect();
    let complex = SimplicialComplex::new_abstract(cover.sets.len(), &list, cover.s.clone())?;
    let phi0 = cover.sets.iter().map(|b| representative(cloud, b)).collect();
    Ok(Nerve { complex, psi: psis, phi0 })
}

/// Measured constants of the polyhedral structure, all normalized by `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    /// `max_x d(x, φ0(Σ^(0))) / ε`.
    pub density_defect: f64,
    /// Smallest `C` with `d(z,w) - Cε <= d(φ(z),φ(w)) <= C d(z,w)` over vertex
    /// pairs in a common component, using the length metric of `Σ`.
    pub quasi_isometry: f64,
    /// `max_x d(x, φ(ψ(x))) / ε` with `φ` affine; `None` for distance-matrix clouds.
    pub displacement: Option<f64>,
    /// `ε · max_{x≠y} d_Σ(ψ(x), ψ(y)) / d(x, y)` with the ℓ2 metric of `Σ`;
    /// the bound `ψ` is `Cε^{-1}`-Lipschitz means this stays below `C`.
    pub psi_lipschitz: f64,
}

pub fn verify_structure(nerve: &Nerve, cloud: &MetricPointCloud, epsilon: &Q) -> StructureReport {
    verify_structure_at_depth(nerve, cloud, epsilon, 0)
}

/// [`verify_structure`] with the length metric of `Σ` measured on its
/// depth-`depth` barycentric subdivision graph.
pub fn verify_structure_at_depth(nerve: &Nerve, cloud: &MetricPointCloud, epsilon: &Q, depth: usize) -> StructureReport {
    let eps = crate::rational::to_f64(epsilon);
    let n = cloud.len();
    let density = (0..n)
        .map(|x| nerve.phi0.iter().map(|&r| cloud.dist(x, r)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);

    let dsigma = nerve.complex.vertex_length_distances(depth);
    let mut qi: f64 = 0.0;
    for z in 0..nerve.phi0.len() {
        for w in z + 1..nerve.phi0.len() {
            let d = dsigma[z][w];
            if !d.is_finite() {
                continue;
            }
            let dp = cloud.dist(nerve.phi0[z], nerve.phi0[w]);
            qi = qi.max(dp / d).max((d - dp) / eps);
        }
    }

    let displacement = cloud.coordinates().map(|pts| {
        (0..n)
            .map(|x| {
                let mut img = vec![0.0; pts[0].len()];
                for &(i, wt) in &nerve.psi[x] {
                    for (c, v) in img.iter_mut().zip(&pts[nerve.phi0[i]]) {
                        *c += wt * crate::rational::to_f64(v);
                    }
                }
                let d2: f64 = img.iter().zip(&pts[x]).map(|(a, b)| (a - crate::rational::to_f64(b)).powi(2)).sum();
                d2.sqrt()
            })
            .fold(0.0, f64::max)
            / eps
    });

    let mut lip: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            let d = cloud.dist(x, y);
            if d == 0.0 {
                continue;
            }
            lip = lip.max(eps * psi_l2(&nerve.psi[x], &nerve.psi[y], eps) / d);
        }
    }

    StructureReport { density_defect: density / eps, quasi_isometry: qi, displacement, psi_lipschitz: lip }
}

/// ℓ2 distance in the side-`eps` realization between sparse barycentric points.
fn psi_l2(a: &[(usize, f64)], b: &[(usize, f64)], eps: f64) -> f64 {
    let mut sum = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (ka, kb) = (a.get(i).map(|p| p.0), b.get(j).map(|p| p.0));
        match (ka, kb) {
            (Some(x), Some(y)) if x == y => {
                sum += (a[i].1 - b[j].1).powi(2);
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                sum += a[i].1.powi(2);
                i += 1;
            }
            (Some(_), None) => {
                sum += a[i].1.powi(2);
                i += 1;
            }
            _ => {
                sum += b[j].1.powi(2);
                j += 1;
            }
        }
    }
    eps * (sum / 2.0).sqrt()
}
