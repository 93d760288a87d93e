//! Equality of PL chains as currents.
//!
//! Exact mode groups the terms of `T1 - T2` by the oriented `k`-flat they span,
//! refines overlapping terms along each other's facet hyperplanes and checks
//! that the multiplicity function vanishes on every refined cell. Fast mode
//! compares integrals against monomial and seeded random test forms.

use super::form::{exponent_vectors, index_sets, Poly, TestForm};
use super::PLChain;
use crate::geom::{Affine, Cell};
use crate::linalg::{self, Point};
use crate::rational::Q;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EqualityMode {
    Exact,
    /// Monomial forms up to `max_degree` plus `random_forms` seeded random forms.
    Fast { max_degree: u32, random_forms: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// The merged formal difference is already zero.
    Canonical,
    /// The boundary of every flat component vanishes, recursively down to
    /// points; `components` counts the flat components examined.
    Descent { components: usize },
    /// Every cell of the common refinement has multiplicity zero.
    Refinement { cells: usize },
    /// The difference has nonzero multiplicity at this point.
    Point { point: Point, multiplicity: i64 },
    /// All tested forms agree.
    FormsAgree { forms: usize },
    /// A form on which the two chains differ, with `∫_{T1} ω - ∫_{T2} ω`.
    Form { form: TestForm, difference: Q },
    /// Dimension or ambient dimension differ.
    Incompatible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualityVerdict {
    pub equal: bool,
    pub mode: EqualityMode,
    pub witness: Witness,
}

/// Decides whether `t1` and `t2` are equal as currents.
pub fn chains_equal(t1: &PLChain, t2: &PLChain, mode: &EqualityMode) -> EqualityVerdict {
    let verdict = |equal, witness| EqualityVerdict { equal, mode: mode.clone(), witness };
    let Ok(diff) = t1.try_sub(t2) else {
        return verdict(false, Witness::Incompatible);
    };
    let diff = diff.without_degenerate();
    if diff.is_zero() {
        return verdict(true, Witness::Canonical);
    }
    match mode {
        EqualityMode::Exact => match vanishes(&diff) {
            Some(components) => verdict(true, Witness::Descent { components }),
            None => match exact_difference(&diff) {
                Ok(cells) => verdict(true, Witness::Refinement { cells }),
                Err((point, multiplicity)) => verdict(false, Witness::Point { point, multiplicity }),
            },
        },
        EqualityMode::Fast { max_degree, random_forms, seed } => {
            let mut count = 0;
            let k = diff.dim();
            let d = diff.ambient();
            let check = |form: TestForm, count: &mut usize| -> Option<Witness> {
                *count += 1;
                let v = form.evaluate(&diff).expect("form degree matches");
                (!v.is_zero()).then_some(Witness::Form { form, difference: v })
            };
            for idx in index_sets(d, k) {
                for e in exponent_vectors(d, *max_degree) {
                    let form = TestForm::zero(k, d).with_term(&idx, Poly::monomial(e, Q::one()));
                    if let Some(w) = check(form, &mut count) {
                        return verdict(false, w);
                    }
                }
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*random_forms {
                let form = TestForm::random(k, d, *max_degree + 1, 9, &mut rng);
                if let Some(w) = check(form, &mut count) {
                    return verdict(false, w);
                }
            }
            verdict(true, Witness::FormsAgree { forms: count })
        }
    }
}

/// A chain equal to `t` as a current whose pieces have pairwise disjoint
/// interiors and carry the true multiplicity, so its formal mass is the mass of
/// the current. Pieces are the nonzero-multiplicity cells of the arrangement of
/// all facet hyperplanes within each flat, triangulated.
pub fn canonicalize(t: &PLChain) -> PLChain {
    let t = t.without_degenerate();
    if t.dim() == 0 || t.is_zero() {
        return t;
    }
    let k = t.dim();
    let mut out = PLChain::zero(k, t.ambient());
    for group in group_by_flat(&t) {
        let hyper: BTreeSet<Hyper> = group.terms.iter().flat_map(|ft| ft.facet_hyperplanes()).collect();
        let hyper: Vec<Hyper> = hyper.into_iter().collect();
        let mut cells: BTreeMap<Vec<i8>, (Cell, Vec<Vec<Q>>, i64)> = BTreeMap::new();
        for ft in &group.terms {
            for (cell, mu_to_y) in ft.refine(&hyper) {
                let y = mu_to_y(&cell.centroid());
                let key: Vec<i8> = hyper.iter().map(|h| linalg::sign(&h.eval(&y)) as i8).collect();
                let entry = cells.entry(key).or_insert_with(|| {
                    let ys = cell.pts.iter().map(|m| mu_to_y(m)).collect();
                    (cell, ys, 0)
                });
                entry.2 += ft.coeff;
            }
        }
        for (_, (cell, ys, mult)) in cells {
            if mult == 0 {
                continue;
            }
            let amb: Vec<Point> = ys.iter().map(|y| group.to_ambient(y)).collect();
            for simplex in cell.triangulate(&amb) {
                let rows: Vec<Vec<Q>> = simplex[1..].iter().map(|&i| linalg::sub(&ys[i], &ys[simplex[0]])).collect();
                let s = linalg::sign(&linalg::det(&rows)) as i64;
                out.add_term(simplex.iter().map(|&i| amb[i].clone()).collect(), s * mult);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Hyper {
    a: Vec<Q>,
    c: Q,
}

impl Hyper {
    fn through(points: &[&Vec<Q>], k: usize) -> Option<Hyper> {
        let rows: Vec<Vec<Q>> = points[1..].iter().map(|p| linalg::sub(p, points[0])).collect();
        let ns = linalg::nullspace(&rows, k);
        if ns.len() != 1 {
            return None;
        }
        let mut a = ns.into_iter().next().unwrap();
        let lead = a.iter().find(|x| !x.is_zero())?.clone();
        for x in a.iter_mut() {
            *x /= &lead;
        }
        let c = -linalg::dot(&a, points[0]);
        Some(Hyper { a, c })
    }

    fn eval(&self, y: &[Q]) -> Q {
        linalg::dot(&self.a, y) + &self.c
    }
}

struct FlatTerm {
    /// Vertices in flat coordinates.
    y: Vec<Vec<Q>>,
    coeff: i64,
    lo: Vec<Q>,
    hi: Vec<Q>,
}

impl FlatTerm {
    fn new(y: Vec<Vec<Q>>, coeff: i64) -> Self {
        let k = y.len() - 1;
        let lo = (0..k).map(|i| y.iter().map(|p| &p[i]).min().unwrap().clone()).collect();
        let hi = (0..k).map(|i| y.iter().map(|p| &p[i]).max().unwrap().clone()).collect();
        FlatTerm { y, coeff, lo, hi }
    }

    fn overlaps(&self, other: &FlatTerm) -> bool {
        (0..self.lo.len()).all(|i| self.lo[i] < other.hi[i] && other.lo[i] < self.hi[i])
    }

    /// Facet hyperplanes oriented positive on the opposite vertex.
    fn inward_facets(&self) -> Vec<Hyper> {
        let k = self.y.len() - 1;
        (0..=k)
            .filter_map(|skip| {
                let pts: Vec<&Vec<Q>> = self.y.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, p)| p).collect();
                let h = Hyper::through(&pts, k)?;
                Some(if h.eval(&self.y[skip]).is_negative() { Hyper { a: h.a.iter().map(|x| -x).collect(), c: -h.c } } else { h })
            })
            .collect()
    }

    /// Local simplex coordinates to flat coordinates.
    fn to_flat(&self, mu: &[Q]) -> Vec<Q> {
        let mut y = self.y[0].clone();
        for (m, yj) in mu.iter().zip(&self.y[1..]) {
            if m.is_zero() {
                continue;
            }
            for (yi, (a, b)) in y.iter_mut().zip(yj.iter().zip(&self.y[0])) {
                *yi += m * (a - b);
            }
        }
        y
    }

    fn facet_hyperplanes(&self) -> Vec<Hyper> {
        let k = self.y.len() - 1;
        (0..=k)
            .filter_map(|skip| {
                let pts: Vec<&Vec<Q>> = self.y.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, p)| p).collect();
                Hyper::through(&pts, k)
            })
            .collect()
    }

    /// Splits the term along every hyperplane crossing it; returns cells in
    /// local coordinates with the map to flat coordinates.
    fn refine<'a>(&'a self, hyper: &[Hyper]) -> Vec<(Cell, impl Fn(&[Q]) -> Vec<Q> + 'a)> {
        let k = self.y.len() - 1;
        let mut cells = vec![Cell::standard_simplex(k)];
        for h in hyper {
            let vals: Vec<Q> = self.y.iter().map(|p| h.eval(p)).collect();
            let aff = Affine::from_vertex_values(&vals);
            let mut next = Vec::with_capacity(cells.len());
            for c in cells {
                if c.crosses(&aff) {
                    let (a, b) = c.split(&aff);
                    next.extend(a);
                    next.extend(b);
                } else {
                    next.push(c);
                }
            }
            cells = next;
        }
        cells
            .into_iter()
            .map(|c| {
                let f = move |mu: &[Q]| self.to_flat(mu);
                (c, f)
            })
            .collect()
    }
}

struct FlatGroup {
    base: Point,
    dirs: Vec<Point>,
    terms: Vec<FlatTerm>,
}

impl FlatGroup {
    fn to_ambient(&self, y: &[Q]) -> Point {
        let mut x = self.base.clone();
        for (yr, r) in y.iter().zip(&self.dirs) {
            if yr.is_zero() {
                continue;
            }
            for (xi, ri) in x.iter_mut().zip(r) {
                *xi += yr * ri;
            }
        }
        x
    }
}

/// Groups nondegenerate terms by their spanning k-flat, with flat coordinates
/// given by the pivot coordinates of the reduced direction basis.
fn group_by_flat(t: &PLChain) -> Vec<FlatGroup> {
    let mut groups: BTreeMap<(Vec<Point>, Point), (Vec<usize>, Vec<FlatTerm>)> = BTreeMap::new();
    for (vs, c) in t.terms() {
        let (rows, base, pivots) = flat_key(vs);
        let y: Vec<Vec<Q>> = vs.iter().map(|v| pivots.iter().map(|&pc| v[pc].clone()).collect()).collect();
        let edge_rows: Vec<Vec<Q>> = y[1..].iter().map(|p| linalg::sub(p, &y[0])).collect();
        let orient = linalg::sign(&linalg::det(&edge_rows)) as i64;
        let entry = groups.entry((rows, base)).or_insert_with(|| (pivots, Vec::new()));
        entry.1.push(FlatTerm::new(y, c * orient));
    }
    groups
        .into_iter()
        .map(|((dirs, base), (_, terms))| FlatGroup { base, dirs, terms })
        .collect()
}

/// Decides `d = 0` by constancy: a compactly supported chain inside one
/// `k`-flat is zero exactly when its boundary is, so it suffices to split `d`
/// by spanning flat and recurse on each part's boundary. 0-chains compare
/// formally. Returns the number of flat components visited when zero.
fn vanishes(d: &PLChain) -> Option<usize> {
    let d = d.without_degenerate();
    if d.is_zero() {
        return Some(0);
    }
    if d.dim() == 0 {
        return None;
    }
    let mut parts: BTreeMap<(Vec<Point>, Point), PLChain> = BTreeMap::new();
    for (vs, c) in d.terms() {
        let (rows, base, _) = flat_key(vs);
        parts
            .entry((rows, base))
            .or_insert_with(|| PLChain::zero(d.dim(), d.ambient()))
            .add_term(vs.to_vec(), c);
    }
    let mut visited = parts.len();
    for part in parts.values() {
        visited += vanishes(&part.boundary())?;
    }
    Some(visited)
}

/// Reduced direction rows, base point and pivot columns of the flat spanned
/// by `vs`; the first two identify the flat.
fn flat_key(vs: &[Point]) -> (Vec<Point>, Point, Vec<usize>) {
    let mut rows: Vec<Point> = vs[1..].iter().map(|v| linalg::sub(v, &vs[0])).collect();
    let pivots = linalg::rref(&mut rows);
    let mut base = vs[0].clone();
    for (r, &pc) in pivots.iter().enumerate() {
        let f = vs[0][pc].clone();
        for (bi, ri) in base.iter_mut().zip(&rows[r]) {
            *bi -= &f * ri;
        }
    }
    (rows, base, pivots)
}

/// `Ok(cells checked)` when the chain is zero as a current, otherwise a witness
/// point with its multiplicity.
fn exact_difference(d: &PLChain) -> Result<usize, (Point, i64)> {
    if d.dim() == 0 {
        return match d.terms().next() {
            None => Ok(0),
            Some((vs, c)) => Err((vs[0].clone(), c)),
        };
    }
    let mut cells_checked = 0;
    for group in group_by_flat(d) {
        for (ti, term) in group.terms.iter().enumerate() {
            let mut cells = vec![(Cell::standard_simplex(term.y.len() - 1), term.coeff)];
            for (j, other) in group.terms.iter().enumerate() {
                if j == ti || !other.overlaps(term) {
                    continue;
                }
                let facets: Vec<Affine> = other
                    .inward_facets()
                    .iter()
                    .map(|h| Affine::from_vertex_values(&term.y.iter().map(|p| h.eval(p)).collect::<Vec<_>>()))
                    .collect();
                let mut next = Vec::with_capacity(cells.len());
                for (cell, mult) in cells {
                    next.extend(clip_against(cell, mult, &facets, other.coeff));
                }
                cells = next;
            }
            for (cell, mult) in cells {
                cells_checked += 1;
                if mult != 0 {
                    let y = term.to_flat(&cell.centroid());
                    return Err((group.to_ambient(&y), mult));
                }
            }
        }
    }
    Ok(cells_checked)
}

/// Splits `cell` into the part inside the simplex cut out by `facets` (which
/// gains `coeff`) and convex pieces outside it.
fn clip_against(cell: Cell, mult: i64, facets: &[Affine], coeff: i64) -> Vec<(Cell, i64)> {
    let mut out = Vec::new();
    let mut inside = cell;
    for h in facets {
        if !inside.crosses(h) {
            if inside.pts.iter().any(|p| h.eval(p).is_negative()) {
                out.push((inside, mult));
                return out;
            }
            continue;
        }
        let (keep, away) = inside.split(h);
        out.extend(away.map(|c| (c, mult)));
        match keep {
            Some(c) => inside = c,
            None => return out,
        }
    }
    out.push((inside, mult + coeff));
    out
}

/// Signed multiplicity of a chain at a point, `None` if the point lies on the
/// relative boundary of some term that meets it.
///
/// Each term counts with the sign of its orientation relative to the reduced
/// row basis of its flat, so terms on a common flat are compared consistently.
pub(crate) fn multiplicity_at(t: &PLChain, x: &[Q]) -> Option<i64> {
    let mut total = 0;
    for (s, c) in t.simplices() {
        let Some(l) = s.barycentric(x) else { continue };
        if l.iter().any(|v| v.is_negative()) {
            continue;
        }
        if l.iter().any(|v| v.is_zero()) {
            return None;
        }
        total += c * flat_orientation(s.vertices()) as i64;
    }
    Some(total)
}

/// Sign of the edge matrix restricted to the pivot columns of its reduced form.
pub(crate) fn flat_orientation(vs: &[Point]) -> i32 {
    let edges: Vec<Vec<Q>> = vs[1..].iter().map(|v| linalg::sub(v, &vs[0])).collect();
    let mut reduced = edges.clone();
    let pivots = linalg::rref(&mut reduced);
    let minor: Vec<Vec<Q>> = edges.iter().map(|e| pivots.iter().map(|&pc| e[pc].clone()).collect()).collect();
    linalg::sign(&linalg::det(&minor))
}
