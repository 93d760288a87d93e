//! Convex cells in the local affine coordinates of a simplex, cut out by
//! half-spaces, with a pulling triangulation that is consistent across
//! shared faces when every caller uses the same global vertex order.

use crate::linalg::{self, Point};
use crate::rational::Q;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

/// Affine function `a . x + c` on local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Affine {
    pub a: Vec<Q>,
    pub c: Q,
}

impl Affine {
    pub fn eval(&self, x: &[Q]) -> Q {
        linalg::dot(&self.a, x) + &self.c
    }

    /// The affine function on a `k`-simplex's local coordinates
    /// `x = w0 + sum mu_i (w_i - w0)` taking value `vals[i]` at vertex `i`.
    pub fn from_vertex_values(vals: &[Q]) -> Self {
        let c = vals[0].clone();
        let a = vals[1..].iter().map(|v| v - &c).collect();
        Affine { a, c }
    }

    pub fn negate(&self) -> Self {
        Affine {
            a: self.a.iter().map(|x| -x).collect(),
            c: -self.c.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Cell {
    pub pts: Vec<Point>,
    cons: Vec<Affine>,
    dim: usize,
}

impl Cell {
    /// `{mu >= 0, sum mu <= 1}` in `R^k`.
    pub fn standard_simplex(k: usize) -> Cell {
        let mut pts = vec![vec![Q::zero(); k]];
        let mut cons = Vec::with_capacity(k + 1);
        for i in 0..k {
            let mut p = vec![Q::zero(); k];
            p[i] = Q::one();
            pts.push(p);
            let mut a = vec![Q::zero(); k];
            a[i] = Q::one();
            cons.push(Affine { a, c: Q::zero() });
        }
        cons.push(Affine {
            a: vec![-Q::one(); k],
            c: Q::one(),
        });
        Cell { pts, cons, dim: k }
    }

    fn tight(&self) -> Vec<Vec<bool>> {
        self.pts
            .iter()
            .map(|p| self.cons.iter().map(|h| h.eval(p).is_zero()).collect())
            .collect()
    }

    fn adjacent(tight: &[Vec<bool>], u: usize, w: usize) -> bool {
        let common: Vec<usize> = (0..tight[u].len())
            .filter(|&c| tight[u][c] && tight[w][c])
            .collect();
        !(0..tight.len())
            .any(|z| z != u && z != w && common.iter().all(|&c| tight[z][c]))
    }

    /// Full-dimensional part of `self ∩ {h >= 0}`.
    pub fn clip(&self, h: &Affine) -> Option<Cell> {
        let vals: Vec<Q> = self.pts.iter().map(|p| h.eval(p)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            let mut out = self.clone();
            out.cons.push(h.clone());
            return Some(out);
        }
        if vals.iter().all(|v| !v.is_positive()) {
            return None;
        }
        let tight = self.tight();
        let mut pts: Vec<Point> = Vec::new();
        for (p, v) in self.pts.iter().zip(&vals) {
            if !v.is_negative() {
                pts.push(p.clone());
            }
        }
        for u in 0..self.pts.len() {
            if !vals[u].is_positive() {
                continue;
            }
            for w in 0..self.pts.len() {
                if !vals[w].is_negative() || !Self::adjacent(&tight, u, w) {
                    continue;
                }
                let t = &vals[u] / (&vals[u] - &vals[w]);
                pts.push(linalg::lerp(&self.pts[u], &self.pts[w], &t));
            }
        }
        let refs: Vec<&Point> = pts.iter().collect();
        if linalg::affine_rank(&refs) < self.dim {
            return None;
        }
        let mut cons = self.cons.clone();
        cons.push(h.clone());
        Some(Cell {
            pts,
            cons,
            dim: self.dim,
        })
    }

    pub fn split(&self, h: &Affine) -> (Option<Cell>, Option<Cell>) {
        (self.clip(h), self.clip(&h.negate()))
    }

    /// Strict sign pattern of `h` on the vertices: does `h` cut the interior?
    pub fn crosses(&self, h: &Affine) -> bool {
        let mut pos = false;
        let mut neg = false;
        for p in &self.pts {
            let v = h.eval(p);
            pos |= v.is_positive();
            neg |= v.is_negative();
            if pos && neg {
                return true;
            }
        }
        false
    }

    pub fn centroid(&self) -> Point {
        let n = Q::from_integer((self.pts.len() as i64).into());
        let mut c = vec![Q::zero(); self.dim];
        for p in &self.pts {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi;
            }
        }
        c.iter().map(|x| x / &n).collect()
    }

    /// Pulling triangulation: cone the smallest vertex (by `keys`) over the
    /// triangulations of the facets not containing it, recursively.
    /// Returns vertex-index lists into `pts`.
    pub fn triangulate<K: Ord>(&self, keys: &[K]) -> Vec<Vec<usize>> {
        let tight = self.tight();
        let all: Vec<usize> = (0..self.pts.len()).collect();
        self.tri_face(&all, self.dim, &tight, keys)
    }

    fn tri_face<K: Ord>(
        &self,
        face: &[usize],
        d: usize,
        tight: &[Vec<bool>],
        keys: &[K],
    ) -> Vec<Vec<usize>> {
        let apex = *face.iter().min_by(|a, b| keys[**a].cmp(&keys[**b])).unwrap();
        if d == 0 {
            return vec![vec![apex]];
        }
        if face.len() == d + 1 {
            let mut rest: Vec<usize> = face.iter().copied().filter(|&v| v != apex).collect();
            rest.sort_by(|a, b| keys[*a].cmp(&keys[*b]));
            let mut s = vec![apex];
            s.extend(rest);
            return vec![s];
        }
        let mut out = Vec::new();
        for facet in self.facets(face, d, tight) {
            if facet.contains(&apex) {
                continue;
            }
            for s in self.tri_face(&facet, d - 1, tight, keys) {
                let mut t = vec![apex];
                t.extend(s);
                out.push(t);
            }
        }
        out
    }

    fn facets(&self, face: &[usize], d: usize, tight: &[Vec<bool>]) -> Vec<Vec<usize>> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in 0..self.cons.len() {
            let z: Vec<usize> = face.iter().copied().filter(|&v| tight[v][c]).collect();
            if z.len() == face.len() || z.len() < d {
                continue;
            }
            let refs: Vec<&Point> = z.iter().map(|&v| &self.pts[v]).collect();
            if linalg::affine_rank(&refs) == d - 1 {
                found.insert(z);
            }
        }
        found.into_iter().collect()
    }

    /// Orientation of a local simplex relative to the standard frame.
    pub fn orientation(&self, simplex: &[usize]) -> i32 {
        let o = &self.pts[simplex[0]];
        let rows: Vec<Vec<Q>> = simplex[1..]
            .iter()
            .map(|&v| linalg::sub(&self.pts[v], o))
            .collect();
        linalg::sign(&linalg::det(&rows))
    }

    /// `|det|` of a local simplex: proportional to its volume inside the parent.
    pub fn local_measure(&self, simplex: &[usize]) -> Q {
        let o = &self.pts[simplex[0]];
        let rows: Vec<Vec<Q>> = simplex[1..]
            .iter()
            .map(|&v| linalg::sub(&self.pts[v], o))
            .collect();
        linalg::det(&rows).abs()
    }
}
