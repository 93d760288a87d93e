//! Finite simplicial complexes: face-closed sets of sorted vertex tuples with an
//! optional Euclidean embedding and a side length for the abstract regular
//! realization.

use crate::geom::AffineSimplex;
use crate::linalg::{self, Point};
use crate::rational::{factorial, sqrt_f64, to_f64, Q};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("dimension {k} is out of range for a complex of dimension {dim}")]
    DimensionOutOfRange { k: usize, dim: usize },
    #[error("{0:?} is not a simplex of the complex")]
    NotASimplex(Vec<usize>),
    #[error("vertex index {index} out of range ({count} vertices)")]
    VertexOutOfRange { index: usize, count: usize },
    #[error("simplex {0:?} repeats a vertex")]
    RepeatedVertex(Vec<usize>),
    #[error("vertex coordinates have inconsistent ambient dimensions")]
    CoordinateMismatch,
    #[error("side length must be positive")]
    NonPositiveEpsilon,
    #[error("embedded simplex {0:?} is degenerate")]
    DegenerateSimplex(Vec<usize>),
    #[error("operation needs vertex coordinates")]
    EmbeddingRequired,
    #[error("point does not lie in the complex")]
    NotInComplex,
    #[error("invalid barycentric point: {0}")]
    InvalidBarycentric(String),
    #[error("chain has non-integral coefficients")]
    NonIntegralChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    L2,
    Length,
}

/// A simplex of a complex with an orientation sign relative to sorted vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedSimplex {
    pub vertices: Vec<usize>,
    pub sign: i64,
}

impl OrientedSimplex {
    /// Sorts `ordered`, recording the permutation parity in `sign`.
    pub fn from_ordered(ordered: &[usize]) -> Self {
        let (vertices, sign) = sort_with_sign(ordered);
        OrientedSimplex { vertices, sign }
    }
}

/// Sorted copy of `v` and the sign of the sorting permutation (0 if `v` repeats an entry).
pub fn sort_with_sign<T: Ord + Clone>(v: &[T]) -> (Vec<T>, i64) {
    let mut a = v.to_vec();
    let mut sign = 1;
    // insertion sort counting transpositions; tuples are short
    for i in 1..a.len() {
        let mut j = i;
        while j > 0 && a[j - 1] > a[j] {
            a.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if a.windows(2).any(|w| w[0] == w[1]) {
        sign = 0;
    }
    (a, sign)
}

/// Sparse column-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<Vec<(usize, i64)>>,
}

impl BoundaryMatrix {
    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0; self.cols]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                m[i][j] += v;
            }
        }
        m
    }

    pub fn apply<T>(&self, x: &[T]) -> Vec<T>
    where
        T: Clone + Zero + std::ops::Mul<Output = T> + From<i64>,
    {
        let mut out = vec![T::zero(); self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            if x[j].is_zero() {
                continue;
            }
            for &(i, v) in col {
                out[i] = out[i].clone() + T::from(v) * x[j].clone();
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    n_vertices: usize,
    coords: Option<Vec<Point>>,
    /// `by_dim[k]` holds the sorted k-simplices in lexicographic order.
    by_dim: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    epsilon: Q,
    metric: MetricMode,
}

impl SimplicialComplex {
    /// Builds the face closure of `simplices` on `n_vertices` abstract vertices.
    pub fn new_abstract(n_vertices: usize, simplices: &[Vec<usize>], epsilon: Q) -> Result<Self, ComplexError> {
        Self::build(n_vertices, None, simplices, epsilon)
    }

    /// Builds the face closure of `simplices` with vertex `i` at `coords[i]`.
    /// Embedded simplices must be nondegenerate.
    pub fn new_embedded(coords: Vec<Point>, simplices: &[Vec<usize>], epsilon: Q) -> Result<Self, ComplexError> {
        if let Some(first) = coords.first() {
            if coords.iter().any(|c| c.len() != first.len()) {
                return Err(ComplexError::CoordinateMismatch);
            }
        }
        let n = coords.len();
        let c = Self::build(n, Some(coords), simplices, epsilon)?;
        for s in c.maximal_simplices() {
            if c.geometry(&s)?.is_degenerate() {
                return Err(ComplexError::DegenerateSimplex(s));
            }
        }
        Ok(c)
    }

    fn build(
        n_vertices: usize,
        coords: Option<Vec<Point>>,
        simplices: &[Vec<usize>],
        epsilon: Q,
    ) -> Result<Self, ComplexError> {
        if !epsilon.is_positive() {
            return Err(ComplexError::NonPositiveEpsilon);
        }
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        for v in 0..n_vertices {
            all.insert(vec![v]);
        }
        for s in simplices {
            let (sorted, sign) = sort_with_sign(s);
            if s.is_empty() {
                continue;
            }
            if sign == 0 {
                return Err(ComplexError::RepeatedVertex(s.clone()));
            }
            if let Some(&bad) = sorted.iter().find(|&&v| v >= n_vertices) {
                return Err(ComplexError::VertexOutOfRange { index: bad, count: n_vertices });
            }
            if all.contains(&sorted) {
                continue;
            }
            let k = sorted.len();
            for mask in 1u64..(1u64 << k) {
                let face: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| sorted[i]).collect();
                all.insert(face);
            }
        }
        let dim = all.iter().map(|s| s.len() - 1).max().unwrap_or(0);
        let mut by_dim: Vec<Vec<Vec<usize>>> = vec![Vec::new(); dim + 1];
        for s in all {
            by_dim[s.len() - 1].push(s);
        }
        let index = by_dim
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        Ok(SimplicialComplex {
            n_vertices,
            coords,
            by_dim,
            index,
            epsilon,
            metric: MetricMode::L2,
        })
    }

    pub fn with_metric(mut self, metric: MetricMode) -> Self {
        self.metric = metric;
        self
    }

    pub fn metric(&self) -> MetricMode {
        self.metric
    }

    pub fn epsilon(&self) -> &Q {
        &self.epsilon
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn coords(&self) -> Option<&[Point]> {
        self.coords.as_deref()
    }

    pub fn ambient(&self) -> Option<usize> {
        self.coords.as_ref().and_then(|c| c.first().map(|p| p.len()))
    }

    pub fn is_embedded(&self) -> bool {
        self.coords.is_some()
    }

    /// Dimension of the complex (0 for an empty or vertex-only complex).
    pub fn dim(&self) -> usize {
        self.by_dim.len().saturating_sub(1)
    }

    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        self.by_dim.get(k).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices(k).len()
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        if s.is_empty() {
            return None;
        }
        self.index.get(s.len() - 1)?.get(s).copied()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.index_of(s).is_some()
    }

    pub fn all_simplices(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.by_dim.iter().flatten()
    }

    /// Simplices that are not a proper face of another simplex.
    pub fn maximal_simplices(&self) -> Vec<Vec<usize>> {
        let mut covered: BTreeSet<&Vec<usize>> = BTreeSet::new();
        let mut out = Vec::new();
        for k in (0..self.by_dim.len()).rev() {
            for s in &self.by_dim[k] {
                if !covered.contains(s) {
                    out.push(s.clone());
                }
            }
            if k > 0 {
                for s in &self.by_dim[k] {
                    for f in facets_of(s) {
                        if let Some(slot) = self.index[k - 1].get_key_value(&f) {
                            covered.insert(slot.0);
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// `∂_k`, with column `σ = (v_0 < ... < v_k)` equal to `Σ_i (-1)^i [σ \ v_i]`.
    pub fn boundary_matrix(&self, k: usize) -> Result<BoundaryMatrix, ComplexError> {
        if k == 0 || k > self.dim() {
            return Err(ComplexError::DimensionOutOfRange { k, dim: self.dim() });
        }
        let columns = self.by_dim[k]
            .iter()
            .map(|s| {
                facets_of(s)
                    .into_iter()
                    .enumerate()
                    .map(|(i, f)| (self.index[k - 1][&f], if i % 2 == 0 { 1 } else { -1 }))
                    .collect()
            })
            .collect();
        Ok(BoundaryMatrix {
            rows: self.count(k - 1),
            cols: self.count(k),
            columns,
        })
    }

    /// Cofaces of `s` (including `s`): their interiors make up the open star.
    pub fn star(&self, s: &[usize]) -> Result<Vec<Vec<usize>>, ComplexError> {
        if !self.contains(s) {
            return Err(ComplexError::NotASimplex(s.to_vec()));
        }
        let mut out = Vec::new();
        for k in (s.len() - 1)..self.by_dim.len() {
            for t in &self.by_dim[k] {
                if is_face(s, t) {
                    out.push(t.clone());
                }
            }
        }
        Ok(out)
    }

    /// Smallest subcomplex containing the given simplices (same vertex indexing).
    pub fn hull_of_simplices(&self, sets: &[Vec<usize>]) -> Result<SimplicialComplex, ComplexError> {
        for s in sets {
            if !self.contains(s) {
                return Err(ComplexError::NotASimplex(s.clone()));
            }
        }
        self.subcomplex(sets)
    }

    /// Smallest subcomplex whose support contains the given ambient points.
    pub fn hull_of_points(&self, points: &[Point]) -> Result<SimplicialComplex, ComplexError> {
        let mut carriers = Vec::new();
        for p in points {
            carriers.push(self.locate(p)?.0);
        }
        self.subcomplex(&carriers)
    }

    /// Smallest subcomplex containing the given barycentric points (length `n_vertices`).
    pub fn hull_of_bary(&self, points: &[Vec<Q>]) -> Result<SimplicialComplex, ComplexError> {
        let mut carriers = Vec::new();
        for p in points {
            carriers.push(self.bary_support(p)?);
        }
        self.subcomplex(&carriers)
    }

    /// Subcomplex generated by `sets`, keeping all vertices in the index space.
    pub fn subcomplex(&self, sets: &[Vec<usize>]) -> Result<SimplicialComplex, ComplexError> {
        let mut c = Self::build(self.n_vertices, self.coords.clone(), sets, self.epsilon.clone())?;
        // drop isolated vertices that were not requested
        let requested: BTreeSet<usize> = sets.iter().flatten().copied().collect();
        c.by_dim[0].retain(|v| requested.contains(&v[0]));
        c.reindex();
        c.metric = self.metric;
        Ok(c)
    }

    fn reindex(&mut self) {
        while self.by_dim.len() > 1 && self.by_dim.last().is_some_and(|l| l.is_empty()) {
            self.by_dim.pop();
        }
        self.index = self
            .by_dim
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
    }

    pub fn skeleton(&self, k: usize) -> SimplicialComplex {
        let mut c = self.clone();
        c.by_dim.truncate(k + 1);
        c.reindex();
        c
    }

    /// Whether every simplex of `self` is a simplex of `other`.
    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.n_vertices == other.n_vertices && self.all_simplices().all(|s| other.contains(s))
    }

    /// Geometric simplex of an embedded complex in the given vertex order.
    pub fn geometry(&self, s: &[usize]) -> Result<AffineSimplex, ComplexError> {
        let coords = self.coords.as_ref().ok_or(ComplexError::EmbeddingRequired)?;
        Ok(AffineSimplex::from_vertices_unchecked(
            s.iter().map(|&v| coords[v].clone()).collect(),
        ))
    }

    /// Exact squared k-volume of a simplex: embedded geometry when available,
    /// otherwise the regular simplex of side `epsilon`.
    pub fn squared_volume(&self, s: &[usize]) -> Q {
        match &self.coords {
            Some(_) => self.geometry(s).map(|g| g.squared_volume()).unwrap_or_else(|_| Q::zero()),
            None => regular_squared_volume(s.len() - 1, &self.epsilon),
        }
    }

    pub fn volume(&self, s: &[usize]) -> f64 {
        sqrt_f64(&self.squared_volume(s))
    }

    /// Carrier simplex (support of barycentric coordinates) and full
    /// barycentric coordinates of an ambient point.
    pub fn locate(&self, x: &[Q]) -> Result<(Vec<usize>, Vec<Q>), ComplexError> {
        let coords = self.coords.as_ref().ok_or(ComplexError::EmbeddingRequired)?;
        for s in self.maximal_simplices() {
            if !in_bbox(s.iter().map(|&v| &coords[v]), x) {
                continue;
            }
            let g = self.geometry(&s)?;
            let Some(l) = g.barycentric(x) else { continue };
            if l.iter().any(|v| v.is_negative()) {
                continue;
            }
            let mut full = vec![Q::zero(); self.n_vertices];
            let mut carrier = Vec::new();
            for (&v, lv) in s.iter().zip(&l) {
                if !lv.is_zero() {
                    carrier.push(v);
                    full[v] = lv.clone();
                }
            }
            return Ok((carrier, full));
        }
        Err(ComplexError::NotInComplex)
    }

    /// Support of a barycentric point, checked to be a simplex.
    pub fn bary_support(&self, p: &[Q]) -> Result<Vec<usize>, ComplexError> {
        if p.len() != self.n_vertices {
            return Err(ComplexError::InvalidBarycentric(format!(
                "expected {} coordinates, got {}",
                self.n_vertices,
                p.len()
            )));
        }
        if p.iter().any(|v| v.is_negative()) {
            return Err(ComplexError::InvalidBarycentric("negative coordinate".into()));
        }
        if p.iter().sum::<Q>() != Q::one() {
            return Err(ComplexError::InvalidBarycentric("coordinates do not sum to 1".into()));
        }
        let support: Vec<usize> = (0..p.len()).filter(|&i| !p[i].is_zero()).collect();
        if !self.contains(&support) {
            return Err(ComplexError::NotASimplex(support));
        }
        Ok(support)
    }

    /// Places vertex `i` at `epsilon * e_i` in `Q^{n_vertices}`.
    pub fn realize_l2(&self) -> L2Realization {
        let n = self.n_vertices;
        let coords = (0..n)
            .map(|i| {
                let mut p = vec![Q::zero(); n];
                p[i] = self.epsilon.clone();
                p
            })
            .collect();
        L2Realization {
            coords,
            dist2_scale: Q::new(1.into(), 2.into()),
        }
    }

    /// ℓ2 distance between barycentric points in the side-`epsilon` realization.
    pub fn l2_distance(&self, x: &[Q], y: &[Q]) -> f64 {
        sqrt_f64(&self.l2_dist2(x, y))
    }

    pub fn l2_dist2(&self, x: &[Q], y: &[Q]) -> Q {
        linalg::dist2(x, y) * &self.epsilon * &self.epsilon / Q::from_integer(2.into())
    }

    /// Upper bound for the length metric between barycentric points `x` and `y`:
    /// graph geodesic on the 1-skeleton of the depth-`depth` barycentric
    /// subdivision, with `x` and `y` joined to every subdivision vertex of the
    /// closed maximal simplices containing them. Returns `f64::INFINITY` when
    /// the points lie in different components.
    pub fn length_distance(&self, x: &[Q], y: &[Q], depth: usize) -> Result<f64, ComplexError> {
        let sx = self.bary_support(x)?;
        let sy = self.bary_support(y)?;
        if x == y {
            return Ok(0.0);
        }
        let graph = SubdivisionGraph::build(self, depth);
        Ok(graph.distance(self, (x, &sx), (y, &sy)))
    }

    /// All-pairs length distances between vertices on the depth-`depth` subdivision graph.
    pub fn vertex_length_distances(&self, depth: usize) -> Vec<Vec<f64>> {
        let graph = SubdivisionGraph::build(self, depth);
        (0..self.n_vertices)
            .map(|v| {
                let d = graph.dijkstra(graph.vertex_node(v));
                (0..self.n_vertices)
                    .map(|w| graph.vertex_node(w).map_or(f64::INFINITY, |node| d[node]))
                    .collect()
            })
            .collect()
    }
}

/// Result of [`SimplicialComplex::realize_l2`]: the true squared distance of two
/// realized points is `dist2_scale * |x - y|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct L2Realization {
    pub coords: Vec<Point>,
    pub dist2_scale: Q,
}

impl L2Realization {
    pub fn dist2(&self, x: &[Q], y: &[Q]) -> Q {
        linalg::dist2(x, y) * &self.dist2_scale
    }
}

/// `V^2` of the regular `k`-simplex of side `eps`: `eps^{2k} (k+1) / (2^k (k!)^2)`.
pub fn regular_squared_volume(k: usize, eps: &Q) -> Q {
    let f = Q::from_integer(factorial(k));
    let num = num_traits::pow(eps.clone(), 2 * k) * Q::from_integer(((k + 1) as i64).into());
    num / (Q::from_integer(num_traits::pow(num_bigint::BigInt::from(2), k)) * &f * &f)
}

fn in_bbox<'a>(pts: impl Iterator<Item = &'a Point> + Clone, x: &[Q]) -> bool {
    (0..x.len()).all(|i| {
        let lo = pts.clone().map(|p| &p[i]).min();
        let hi = pts.clone().map(|p| &p[i]).max();
        matches!((lo, hi), (Some(lo), Some(hi)) if lo <= &x[i] && &x[i] <= hi)
    })
}

/// Facets of a sorted simplex, facet `i` omitting vertex `i`.
pub fn facets_of(s: &[usize]) -> Vec<Vec<usize>> {
    (0..s.len())
        .map(|i| s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect())
        .collect()
}

/// Whether sorted `a` is a face of sorted `b`.
pub fn is_face(a: &[usize], b: &[usize]) -> bool {
    let mut it = b.iter();
    a.iter().all(|v| it.any(|w| w == v))
}

struct SubdivisionGraph {
    nodes: Vec<BTreeMap<usize, Q>>,
    node_of: HashMap<Vec<(usize, Q)>, usize>,
    adj: Vec<Vec<(usize, f64)>>,
    /// For each maximal simplex, the subdivision nodes in its closure.
    nodes_in: Vec<(Vec<usize>, Vec<usize>)>,
    eps: f64,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

type SparseBary = BTreeMap<usize, Q>;

fn sparse_dist(eps: f64, a: &SparseBary, b: &SparseBary) -> f64 {
    let mut s = Q::zero();
    for (k, v) in a {
        let w = b.get(k).cloned().unwrap_or_else(Q::zero);
        let d = v - w;
        s += &d * &d;
    }
    for (k, w) in b {
        if !a.contains_key(k) {
            s += w * w;
        }
    }
    eps * (to_f64(&s) / 2.0).sqrt()
}

impl SubdivisionGraph {
    fn build(c: &SimplicialComplex, depth: usize) -> Self {
        let mut g = SubdivisionGraph {
            nodes: Vec::new(),
            node_of: HashMap::new(),
            adj: Vec::new(),
            nodes_in: Vec::new(),
            eps: to_f64(&c.epsilon),
        };
        let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for s in c.maximal_simplices() {
            let start: Vec<SparseBary> = s
                .iter()
                .map(|&v| BTreeMap::from([(v, Q::one())]))
                .collect();
            let mut level = vec![start];
            for _ in 0..depth {
                level = level.iter().flat_map(|simplex| barycentric_subdivide(simplex)).collect();
            }
            let mut inside: BTreeSet<usize> = BTreeSet::new();
            for simplex in &level {
                let ids: Vec<usize> = simplex.iter().map(|p| g.intern(p)).collect();
                for (i, &a) in ids.iter().enumerate() {
                    inside.insert(a);
                    for &b in &ids[i + 1..] {
                        edges.insert((a.min(b), a.max(b)));
                    }
                }
            }
            g.nodes_in.push((s, inside.into_iter().collect()));
        }
        g.adj = vec![Vec::new(); g.nodes.len()];
        for (a, b) in edges {
            let w = sparse_dist(g.eps, &g.nodes[a], &g.nodes[b]);
            g.adj[a].push((b, w));
            g.adj[b].push((a, w));
        }
        g
    }

    fn intern(&mut self, p: &SparseBary) -> usize {
        let key: Vec<(usize, Q)> = p.iter().map(|(k, v)| (*k, v.clone())).collect();
        if let Some(&i) = self.node_of.get(&key) {
            return i;
        }
        self.nodes.push(p.clone());
        self.node_of.insert(key, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn vertex_node(&self, v: usize) -> Option<usize> {
        self.node_of.get(&vec![(v, Q::one())]).copied()
    }

    fn dijkstra_multi(&self, sources: &[(usize, f64)]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        for &(s, d0) in sources {
            if d0 < dist[s] {
                dist[s] = d0;
                heap.push(HeapItem(d0, s));
            }
        }
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(w, len) in &self.adj[u] {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(HeapItem(nd, w));
                }
            }
        }
        dist
    }

    fn dijkstra(&self, source: Option<usize>) -> Vec<f64> {
        match source {
            Some(s) => self.dijkstra_multi(&[(s, 0.0)]),
            None => vec![f64::INFINITY; self.nodes.len()],
        }
    }

    /// Nodes in closed maximal simplices containing `support`, with their distances to `x`.
    fn attach(&self, x: &SparseBary, support: &[usize]) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (s, nodes) in &self.nodes_in {
            if is_face(support, s) {
                out.extend(nodes.iter().map(|&n| (n, sparse_dist(self.eps, x, &self.nodes[n]))));
            }
        }
        out
    }

    fn distance(&self, c: &SimplicialComplex, x: (&[Q], &[usize]), y: (&[Q], &[usize])) -> f64 {
        let to_sparse = |p: &[Q]| -> SparseBary {
            p.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v.clone())).collect()
        };
        let xs = to_sparse(x.0);
        let ys = to_sparse(y.0);
        let mut best = f64::INFINITY;
        // direct segment when both lie in one closed maximal simplex
        let joint: Vec<usize> = {
            let mut u: Vec<usize> = x.1.iter().chain(y.1).copied().collect();
            u.sort();
            u.dedup();
            u
        };
        if c.maximal_simplices().iter().any(|s| is_face(&joint, s)) {
            best = sparse_dist(self.eps, &xs, &ys);
        }
        let dist = self.dijkstra_multi(&self.attach(&xs, x.1));
        for (n, d) in self.attach(&ys, y.1) {
            best = best.min(dist[n] + d);
        }
        best
    }
}

/// Barycentric subdivision of a simplex given by its vertices.
fn barycentric_subdivide(simplex: &[SparseBary]) -> Vec<Vec<SparseBary>> {
    let k = simplex.len();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    permutations(&mut perm, 0, &mut |p| {
        let mut chain = Vec::with_capacity(k);
        let mut acc: SparseBary = BTreeMap::new();
        for (count, &i) in p.iter().enumerate() {
            for (key, v) in &simplex[i] {
                *acc.entry(*key).or_insert_with(Q::zero) += v;
            }
            let w = Q::new(1.into(), ((count + 1) as i64).into());
            chain.push(acc.iter().map(|(key, v)| (*key, v * &w)).collect());
        }
        out.push(chain);
    });
    out
}

fn permutations(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permutations(p, i + 1, f);
        p.swap(i, j);
    }
}

/// Standard triangulations used throughout the crate and its tests.
pub mod builders {
    use super::*;
    use crate::rational::q;

    /// `nx x ny` grid of squares with side `h`, each cut along the diagonal
    /// from `(i, j)` to `(i+1, j+1)`. Vertex `(i, j)` has index `j (nx + 1) + i`.
    pub fn grid_2d(nx: usize, ny: usize, h: &Q) -> SimplicialComplex {
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut coords = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                coords.push(vec![h * q(i as i64), h * q(j as i64)]);
            }
        }
        let mut tris = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                tris.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                tris.push(vec![idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
            }
        }
        SimplicialComplex::new_embedded(coords, &tris, h.clone()).expect("grid is a valid complex")
    }

    /// `n0 x n1 x n2` grid of cubes with side `h`, each split into the six
    /// Kuhn tetrahedra. Vertex `(i, j, l)` has index `(l (n1+1) + j)(n0+1) + i`.
    pub fn grid_3d(n: [usize; 3], h: &Q) -> SimplicialComplex {
        let idx = |p: [usize; 3]| (p[2] * (n[1] + 1) + p[1]) * (n[0] + 1) + p[0];
        let mut coords = Vec::new();
        for l in 0..=n[2] {
            for j in 0..=n[1] {
                for i in 0..=n[0] {
                    coords.push(vec![h * q(i as i64), h * q(j as i64), h * q(l as i64)]);
                }
            }
        }
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut tets = Vec::new();
        for l in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    for perm in &perms {
                        let mut p = [i, j, l];
                        let mut t = vec![idx(p)];
                        for &axis in perm {
                            p[axis] += 1;
                            t.push(idx(p));
                        }
                        tets.push(t);
                    }
                }
            }
        }
        SimplicialComplex::new_embedded(coords, &tets, h.clone()).expect("grid is a valid complex")
    }

    /// The standard triangle `(0,0), (1,0), (0,1)` with its faces.
    pub fn single_triangle() -> SimplicialComplex {
        SimplicialComplex::new_embedded(
            vec![vec![q(0), q(0)], vec![q(1), q(0)], vec![q(0), q(1)]],
            &[vec![0, 1, 2]],
            q(1),
        )
        .expect("valid triangle")
    }
}

#[cfg(test)]
mod tests {
    use super::builders::*;
    use super::*;
    use crate::rational::{q, qf};

    fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let n = b.first().map_or(0, |r| r.len());
        a.iter()
            .map(|row| (0..n).map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
            .collect()
    }

    #[test]
    fn triangle_boundary_convention() {
        let c = single_triangle();
        let d2 = c.boundary_matrix(2).unwrap().to_dense();
        // edges sorted: [0,1], [0,2], [1,2]
        assert_eq!(c.simplices(1), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        let col: Vec<i64> = d2.iter().map(|r| r[0]).collect();
        assert_eq!(col, vec![1, -1, 1]);
        let d1 = c.boundary_matrix(1).unwrap().to_dense();
        assert!(matmul(&d1, &d2).iter().flatten().all(|&x| x == 0));
        assert!(c.boundary_matrix(3).is_err());
        assert!(c.boundary_matrix(0).is_err());
    }

    #[test]
    fn grid_boundary_of_coherent_sum() {
        let c = grid_2d(2, 2, &qf(1, 2));
        assert_eq!(c.count(2), 8);
        // coherent orientation: sign of the sorted-order triangle in the plane
        let coeffs: Vec<i64> = c
            .simplices(2)
            .iter()
            .map(|s| {
                let g = c.geometry(s).unwrap();
                let e = g.edges();
                crate::linalg::sign(&(&e[0][0] * &e[1][1] - &e[0][1] * &e[1][0])) as i64
            })
            .collect();
        let d2 = c.boundary_matrix(2).unwrap();
        let b = d2.apply(&coeffs);
        let nonzero: Vec<(usize, i64)> = b.iter().copied().enumerate().filter(|(_, v)| *v != 0).collect();
        assert_eq!(nonzero.len(), 8);
        assert!(nonzero.iter().all(|(_, v)| v.abs() == 1));
        // brute-force: boundary edges are the edges of exactly one triangle
        for (e, edge) in c.simplices(1).iter().enumerate() {
            let deg = c.simplices(2).iter().filter(|t| is_face(edge, t)).count();
            assert_eq!(deg == 1, b[e] != 0);
        }
    }

    #[test]
    fn star_and_hull() {
        let c = grid_2d(2, 2, &qf(1, 2));
        let center = 4; // vertex (1,1)
        let st = c.star(&[center]).unwrap();
        assert_eq!(st.iter().filter(|s| s.len() == 3).count(), 6);
        assert_eq!(st.iter().filter(|s| s.len() == 2).count(), 6);
        assert_eq!(st.iter().filter(|s| s.len() == 1).count(), 1);
        let top = c.simplices(2)[0].clone();
        assert_eq!(c.star(&top).unwrap(), vec![top.clone()]);
        let h = c.hull_of_simplices(&[vec![3]]).unwrap();
        assert_eq!(h.all_simplices().count(), 1);
        let p = vec![qf(1, 4), qf(1, 2)]; // midpoint of the edge (0,1/2)-(1/2,1/2)
        let h = c.hull_of_points(&[p]).unwrap();
        assert_eq!(h.count(1), 1);
        assert_eq!(h.count(0), 2);
        assert!(c.star(&[0, 8]).is_err());
    }

    #[test]
    fn hull_is_minimal() {
        let c = grid_2d(3, 3, &qf(1, 3));
        let pts = vec![vec![qf(1, 7), qf(1, 9)], vec![qf(2, 3), qf(1, 2)]];
        let h = c.hull_of_points(&pts).unwrap();
        let carriers: Vec<Vec<usize>> = pts.iter().map(|p| c.locate(p).unwrap().0).collect();
        // every maximal simplex of the hull is needed to cover some point
        for m in h.maximal_simplices() {
            assert!(carriers.contains(&m));
        }
        for s in &carriers {
            assert!(h.contains(s));
        }
    }

    #[test]
    fn regular_volumes() {
        assert_eq!(regular_squared_volume(1, &q(1)), q(1));
        assert_eq!(regular_squared_volume(2, &q(1)), qf(3, 16));
        assert_eq!(regular_squared_volume(3, &q(1)), qf(1, 72));
    }

    #[test]
    fn length_and_l2_distances() {
        let c = SimplicialComplex::new_abstract(4, &[vec![0, 1, 2], vec![1, 2, 3]], q(1)).unwrap();
        let e = |i: usize| {
            let mut p = vec![q(0); 4];
            p[i] = q(1);
            p
        };
        assert_eq!(c.length_distance(&e(0), &e(0), 0).unwrap(), 0.0);
        assert!((c.length_distance(&e(0), &e(1), 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((c.l2_distance(&e(0), &e(1)) - 1.0).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for depth in 0..3 {
            let d = c.length_distance(&e(0), &e(3), depth).unwrap();
            assert!(d <= prev + 1e-12);
            assert!(d >= 3f64.sqrt() - 1e-12);
            assert!(d >= c.l2_distance(&e(0), &e(3)));
            prev = d;
        }
        assert!((prev - 3f64.sqrt()).abs() < 1e-9);
        let disconnected = SimplicialComplex::new_abstract(2, &[], q(1)).unwrap();
        assert!(disconnected.length_distance(&e(0)[..2], &e(1)[..2], 1).unwrap().is_infinite());
    }

    #[test]
    fn realization_is_isometric_up_to_scale() {
        let c = SimplicialComplex::new_abstract(3, &[vec![0, 1, 2]], qf(1, 3)).unwrap();
        let r = c.realize_l2();
        assert_eq!(r.dist2(&r.coords[0], &r.coords[2]), qf(1, 9));
    }

    #[test]
    fn kuhn_grid_counts() {
        let c = grid_3d([2, 1, 1], &q(1));
        assert_eq!(c.count(3), 12);
        assert_eq!(c.count(0), 12);
        let d3 = c.boundary_matrix(3).unwrap().to_dense();
        let d2 = c.boundary_matrix(2).unwrap().to_dense();
        assert!(matmul(&d2, &d3).iter().flatten().all(|&x| x == 0));
        let total: Q = c.simplices(3).iter().map(|s| c.squared_volume(s)).sum();
        assert_eq!(total, q(12) / q(36));
    }

    #[test]
    fn sort_sign() {
        assert_eq!(sort_with_sign(&[2, 0, 1]), (vec![0, 1, 2], 1));
        assert_eq!(sort_with_sign(&[1, 0, 2]), (vec![0, 1, 2], -1));
        assert_eq!(sort_with_sign(&[1, 1]).1, 0);
    }
}
