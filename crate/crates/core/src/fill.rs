//! Filling volume, flat norm, coning fillings, isoperimetric profiles and
//! undistortion experiments, all posed as exact L1 minimization problems over
//! the chain groups of a finite simplicial complex.
//!
//! Simplex weights are volumes. A volume is used exactly when its square is
//! the square of a rational; otherwise it is replaced by a 40-bit dyadic lower
//! approximation, and results report whether every weight involved was exact.

use crate::chain::{flat_orientation, PLChain, PolyChain};
use crate::complex::{BoundaryMatrix, ComplexError, SimplicialComplex};
use crate::geom::point_simplex_dist2;
use crate::linalg::{self, Point};
use crate::lp::{solve_ilp, solve_lp, IlpOutcome, LinearProgram, LpOutcome, LpSolution, SolverStats};
use crate::rational::{sqrt_f64, sqrt_q, to_f64, Q};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

/// Fractional bits of the dyadic approximation used for irrational volumes.
pub const WEIGHT_BITS: u32 = 40;
/// Branch-and-bound node budget for integer solves.
pub const MAX_NODES: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FillError {
    #[error("chain is not a cycle")]
    NotACycle,
    /// `certificate` is a rational k-cochain `y` with `y ∘ ∂ = 0` and `y(T) ≠ 0`.
    #[error("cycle is not a boundary in the complex")]
    NotABoundary { certificate: PolyChain },
    #[error("integer search exceeded {nodes} branch-and-bound nodes")]
    NodeLimit { nodes: usize },
    #[error("the second complex is not a subcomplex of the first")]
    SubcomplexInvalid,
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FillMode {
    /// Rational chains: exact linear programming relaxation.
    Lp,
    /// Integer chains: branch and bound over the relaxation.
    Ilp,
}

/// Minimal filling of a cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct FillingResult {
    pub s: PolyChain,
    /// Objective `Σ w_σ |s_σ|` with the exact or dyadic weights.
    pub value: Q,
    /// `mass(S)` from floating-point volumes.
    pub mass: f64,
    pub mode: FillMode,
    pub lp_bound: Q,
    /// `value - lp_bound`; zero in LP mode.
    pub integrality_gap: Q,
    /// Whether the relaxation optimum was already integral.
    pub lp_integral: bool,
    pub exact_weights: bool,
    /// Outcome of the exact check `∂S = T`.
    pub boundary_verified: bool,
    pub stats: SolverStats,
}

/// Optimal decomposition `T = U + ∂V` for the flat norm.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatNormResult {
    pub u: PolyChain,
    pub v: PolyChain,
    pub value: Q,
    pub mode: FillMode,
    pub exact_weights: bool,
    pub decomposition_verified: bool,
    pub stats: SolverStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeFill {
    pub s: PLChain,
    pub mass: f64,
    /// `sup_{x ∈ spt T} |x - a| · mass(T)`.
    pub bound: f64,
    /// Exact termwise certificate of `mass(S) ≤ bound`.
    pub bound_holds: bool,
    /// `diam(spt T) · mass(T)`, present when the apex lies on `spt T`.
    pub diam_bound: Option<f64>,
    pub diam_bound_holds: Option<bool>,
}

/// Smallest doubling radius that admits a filling.
#[derive(Debug, Clone, PartialEq)]
pub struct FillingDiameter {
    /// `ρ / diam(spt T)`, a power of two.
    pub ratio: u64,
    pub rho: f64,
    pub value: Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub mass: f64,
    pub diam: f64,
    pub fillvol: Q,
    /// `Fillvol / mass^{(k+1)/k}`; absent for `k = 0` and for `T = 0`.
    pub ei_ratio: Option<f64>,
    /// `Fillvol / (diam · mass)`; absent when the denominator vanishes.
    pub ci_ratio: Option<f64>,
    pub filling_diameter: Option<FillingDiameter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFlag {
    Ok,
    /// The cycle uses simplices outside the subcomplex.
    NotSupportedInX,
    /// The cycle does not bound in the ambient complex.
    NotBoundInY,
    /// The cycle bounds in the ambient complex but not in the subcomplex.
    ObstructionInX,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UndistortionRow {
    pub cycle: PolyChain,
    pub fill_x: Option<Q>,
    pub fill_y: Option<Q>,
    /// `Fillvol_X / Fillvol_Y`, with `0/0 = 1`.
    pub ratio: Option<Q>,
    pub flag: RowFlag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UndistortionReport {
    pub rows: Vec<UndistortionRow>,
    /// Largest ratio over rows flagged [`RowFlag::Ok`].
    pub max_ratio: Option<Q>,
    /// Whether some row bounds in the ambient complex but not in the subcomplex.
    pub infinite: bool,
}

/// Volumes of the k-simplices of `c`, in index order, and whether all are exact.
pub fn weights(c: &SimplicialComplex, k: usize) -> (Vec<Q>, bool) {
    let mut exact = true;
    let w = c
        .simplices(k)
        .iter()
        .map(|s| {
            let (r, e) = sqrt_q(&c.squared_volume(s), WEIGHT_BITS);
            exact &= e;
            r
        })
        .collect();
    (w, exact)
}

fn weighted_l1(w: &[Q], x: &[Q]) -> Q {
    w.iter().zip(x).map(|(a, b)| a * b.abs()).sum()
}

/// Columns `[M | -M]` for split variables `x = x⁺ - x⁻`.
fn split(dense: &[Vec<i64>]) -> Vec<Vec<Q>> {
    dense
        .iter()
        .map(|row| {
            let mut r: Vec<Q> = row.iter().map(|&v| Q::from_integer(v.into())).collect();
            r.extend(row.iter().map(|&v| Q::from_integer((-v).into())));
            r
        })
        .collect()
}

/// Exact product `∂ x`.
fn apply(bm: &BoundaryMatrix, x: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); bm.rows];
    for (col, xj) in bm.columns.iter().zip(x) {
        if xj.is_zero() {
            continue;
        }
        for &(i, v) in col {
            out[i] += xj * Q::from_integer(v.into());
        }
    }
    out
}

fn join(x: &[Q], n: usize) -> Vec<Q> {
    (0..n).map(|i| &x[i] - &x[n + i]).collect()
}

enum Solved {
    Optimal { solution: LpSolution, lp_bound: Q, lp_integral: bool },
    Infeasible,
}

fn solve(lp: &LinearProgram, mode: FillMode) -> Result<Solved, FillError> {
    match mode {
        FillMode::Lp => match solve_lp(lp) {
            LpOutcome::Optimal(s) => {
                let lp_integral = s.x.iter().all(|v| v.is_integer());
                Ok(Solved::Optimal { lp_bound: s.value.clone(), solution: s, lp_integral })
            }
            // nonnegative costs rule out unboundedness
            LpOutcome::Infeasible | LpOutcome::Unbounded => Ok(Solved::Infeasible),
        },
        FillMode::Ilp => match solve_ilp(lp, MAX_NODES) {
            IlpOutcome::Optimal { solution, lp_bound } => {
                let lp_integral = solution.value == lp_bound && solution.stats.nodes == 1;
                Ok(Solved::Optimal { solution, lp_bound, lp_integral })
            }
            IlpOutcome::Infeasible | IlpOutcome::Unbounded => Ok(Solved::Infeasible),
            IlpOutcome::NodeLimit { .. } => Err(FillError::NodeLimit { nodes: MAX_NODES }),
        },
    }
}

/// A k-cochain vanishing on every boundary of `c` but not on `t`.
fn homology_certificate(c: &SimplicialComplex, k: usize, t: &[Q]) -> PolyChain {
    let rows = t.len();
    let y = if k < c.dim() {
        let d: Vec<Vec<Q>> = c
            .boundary_matrix(k + 1)
            .expect("k + 1 is within range")
            .to_dense()
            .into_iter()
            .map(|r| r.into_iter().map(|v| Q::from_integer(v.into())).collect())
            .collect();
        let dt = linalg::transpose(&d, c.count(k + 1));
        linalg::nullspace(&dt, rows)
            .into_iter()
            .find(|y| !linalg::dot(y, t).is_zero())
            .expect("a non-boundary is detected by some cocycle")
    } else {
        t.to_vec()
    };
    PolyChain::from_vector(c, k, &y)
}

fn check_cycle(c: &SimplicialComplex, t: &PolyChain) -> Result<(), FillError> {
    t.check_supported(c)?;
    if t.dim() > 0 && !t.boundary().is_zero() {
        return Err(FillError::NotACycle);
    }
    Ok(())
}

/// Minimal-mass (k+1)-chain `S` of `c` with `∂S = T`.
///
/// A nonzero cycle that is not a boundary, including every nonzero cycle of
/// dimension `dim c`, yields [`FillError::NotABoundary`]. A 0-cycle must have
/// coefficient sum zero.
pub fn fillvol(c: &SimplicialComplex, t: &PolyChain, mode: FillMode) -> Result<FillingResult, FillError> {
    check_cycle(c, t)?;
    let k = t.dim();
    let zero = |stats| FillingResult {
        s: PolyChain::zero(k + 1),
        value: Q::zero(),
        mass: 0.0,
        mode,
        lp_bound: Q::zero(),
        integrality_gap: Q::zero(),
        lp_integral: true,
        exact_weights: true,
        boundary_verified: true,
        stats,
    };
    if t.is_zero() {
        return Ok(zero(SolverStats::default()));
    }
    let tv = t.to_vector(c)?;
    if k >= c.dim() {
        return Err(FillError::NotABoundary { certificate: homology_certificate(c, k, &tv) });
    }
    let bm = c.boundary_matrix(k + 1)?;
    let n = bm.cols;
    let (w, exact_weights) = weights(c, k + 1);
    let mut cost = w.clone();
    cost.extend(w.iter().cloned());
    let lp = LinearProgram { a: split(&bm.to_dense()), b: tv.clone(), c: cost };
    match solve(&lp, mode)? {
        Solved::Infeasible => Err(FillError::NotABoundary { certificate: homology_certificate(c, k, &tv) }),
        Solved::Optimal { solution, lp_bound, lp_integral } => {
            let sv = join(&solution.x, n);
            let boundary_verified = apply(&bm, &sv) == tv;
            let s = PolyChain::from_vector(c, k + 1, &sv);
            let value = weighted_l1(&w, &sv);
            Ok(FillingResult {
                mass: s.mass(c),
                s,
                integrality_gap: &value - &lp_bound,
                value,
                mode,
                lp_bound,
                lp_integral,
                exact_weights,
                boundary_verified,
                stats: solution.stats,
            })
        }
    }
}

/// Flat norm `min mass(U) + mass(V)` over `T = U + ∂V` in `c`.
pub fn flat_norm(c: &SimplicialComplex, t: &PolyChain, mode: FillMode) -> Result<FlatNormResult, FillError> {
    t.check_supported(c)?;
    let k = t.dim();
    let tv = t.to_vector(c)?;
    let nk = tv.len();
    let (wk, exact_k) = weights(c, k);
    let has_v = k < c.dim();
    let (wv, exact_v, bm) = if has_v {
        let (w, e) = weights(c, k + 1);
        (w, e, Some(c.boundary_matrix(k + 1)?))
    } else {
        (Vec::new(), true, None)
    };
    let nv = wv.len();
    // columns: U⁺, U⁻, V⁺, V⁻
    let identity: Vec<Vec<i64>> = (0..nk).map(|i| (0..nk).map(|j| i64::from(i == j)).collect()).collect();
    let mut a = split(&identity);
    if let Some(bm) = &bm {
        for (row, d) in a.iter_mut().zip(split(&bm.to_dense())) {
            row.extend(d);
        }
    }
    let mut cost: Vec<Q> = wk.iter().chain(&wk).chain(&wv).chain(&wv).cloned().collect();
    cost.truncate(2 * nk + 2 * nv);
    let lp = LinearProgram { a, b: tv.clone(), c: cost };
    let Solved::Optimal { solution, .. } = solve(&lp, mode)? else {
        unreachable!("U = T is always feasible")
    };
    let uv = join(&solution.x[..2 * nk], nk);
    let vv = if has_v { join(&solution.x[2 * nk..], nv) } else { Vec::new() };
    let mut recon = uv.clone();
    if let Some(bm) = &bm {
        for (r, d) in recon.iter_mut().zip(apply(bm, &vv)) {
            *r += d;
        }
    }
    Ok(FlatNormResult {
        value: weighted_l1(&wk, &uv) + weighted_l1(&wv, &vv),
        u: PolyChain::from_vector(c, k, &uv),
        v: if has_v { PolyChain::from_vector(c, k + 1, &vv) } else { PolyChain::zero(k + 1) },
        mode,
        exact_weights: exact_k && exact_v,
        decomposition_verified: recon == tv,
        stats: solution.stats,
    })
}

/// Cone filling `S = cone(a, T)` of a cycle with its coning bounds.
pub fn cone_fill(t: &PLChain, a: &Point) -> Result<ConeFill, FillError> {
    if !t.is_cycle() {
        return Err(FillError::NotACycle);
    }
    let s = t.cone(a);
    let mass_t = t.mass();
    let r2 = t.sup_dist2(a);
    let on_support = t.simplices().any(|(g, _)| g.contains(a));
    let (diam_bound, diam_bound_holds) = if on_support {
        let d2 = t.diam2();
        // sup |x - a| ≤ diam when a ∈ spt T, so the termwise certificate transfers
        (Some(sqrt_f64(&d2) * mass_t), Some(r2 <= d2 && t.cone_bound_holds(a)))
    } else {
        (None, None)
    };
    Ok(ConeFill {
        mass: s.mass(),
        s,
        bound: sqrt_f64(&r2) * mass_t,
        bound_holds: t.cone_bound_holds(a),
        diam_bound,
        diam_bound_holds,
    })
}

/// Vertex positions and the factor converting their squared distances to
/// squared distances of the complex.
fn vertex_positions(c: &SimplicialComplex) -> (Vec<Point>, Q) {
    match c.coords() {
        Some(p) => (p.to_vec(), Q::one()),
        None => {
            let r = c.realize_l2();
            (r.coords, r.dist2_scale)
        }
    }
}

fn support_diam2(pos: &[Point], scale: &Q, t: &PolyChain) -> Q {
    let vs: BTreeSet<usize> = t.terms().flat_map(|(s, _)| s.iter().copied()).collect();
    let vs: Vec<usize> = vs.into_iter().collect();
    let mut best = Q::zero();
    for (i, &a) in vs.iter().enumerate() {
        for &b in &vs[i + 1..] {
            let d = linalg::dist2(&pos[a], &pos[b]) * scale;
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Cheapest filling using only simplices whose vertices lie within `ρ` of
/// `spt T`, with `ρ = 2^j diam(spt T)` for the least feasible `j`.
fn filling_diameter(c: &SimplicialComplex, t: &PolyChain, mode: FillMode) -> Result<Option<FillingDiameter>, FillError> {
    let (pos, scale) = vertex_positions(c);
    let diam2 = support_diam2(&pos, &scale, t);
    if diam2.is_zero() {
        return Ok(None);
    }
    let k = t.dim();
    let pieces: Vec<crate::geom::AffineSimplex> = t
        .terms()
        .map(|(s, _)| c.geometry(s).unwrap_or_else(|_| abstract_geometry(&pos, s)))
        .collect();
    let vertex_dist2: Vec<Option<Q>> = (0..c.n_vertices())
        .map(|v| {
            c.contains(&[v]).then(|| {
                pieces.iter().map(|g| point_simplex_dist2(&pos[v], g) * &scale).min().expect("T is nonzero")
            })
        })
        .collect();
    let mut ratio = 1u64;
    loop {
        let rho2 = &diam2 * Q::from_integer((ratio * ratio).into());
        let keep: Vec<Vec<usize>> = c
            .simplices(k + 1)
            .iter()
            .filter(|s| s.iter().all(|&v| vertex_dist2[v].as_ref().is_some_and(|d| d <= &rho2)))
            .cloned()
            .collect();
        let mut gens = keep.clone();
        gens.extend(t.terms().map(|(s, _)| s.clone()));
        let sub = c.subcomplex(&gens)?;
        let everything = keep.len() == c.count(k + 1);
        match fillvol(&sub, t, mode) {
            Ok(f) => return Ok(Some(FillingDiameter { ratio, rho: sqrt_f64(&rho2), value: f.value })),
            Err(FillError::NotABoundary { .. }) if !everything => ratio *= 2,
            Err(FillError::NotABoundary { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
}

fn abstract_geometry(pos: &[Point], s: &[usize]) -> crate::geom::AffineSimplex {
    crate::geom::AffineSimplex::from_vertices_unchecked(s.iter().map(|&v| pos[v].clone()).collect())
}

/// Runs `f` over `items` on scoped threads, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items.chunks(chunk).map(|part| scope.spawn(|| part.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Per-cycle filling volumes with normalized isoperimetric ratios.
/// Zero cycles contribute rows without ratios.
pub fn isoperimetric_profile(c: &SimplicialComplex, family: &[PolyChain], mode: FillMode) -> Result<Vec<ProfileRow>, FillError> {
    let (pos, scale) = vertex_positions(c);
    par_map(family, |t| {
        let f = fillvol(c, t, mode)?;
        let mass = t.mass(c);
        let diam = sqrt_f64(&support_diam2(&pos, &scale, t));
        let fv = to_f64(&f.value);
        let k = t.dim();
        let ei_ratio = (k > 0 && mass > 0.0).then(|| fv / mass.powf((k + 1) as f64 / k as f64));
        let ci_ratio = (diam * mass > 0.0).then(|| fv / (diam * mass));
        let filling_diameter = if t.is_zero() { None } else { filling_diameter(c, t, mode)? };
        Ok(ProfileRow { mass, diam, fillvol: f.value, ei_ratio, ci_ratio, filling_diameter })
    })
    .into_iter()
    .collect()
}

fn fill_value(c: &SimplicialComplex, t: &PolyChain, mode: FillMode) -> Result<Option<Q>, FillError> {
    match fillvol(c, t, mode) {
        Ok(f) => Ok(Some(f.value)),
        Err(FillError::NotABoundary { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Compares filling volumes in a subcomplex `x` against the ambient `y`.
pub fn undistortion_report(
    y: &SimplicialComplex,
    x: &SimplicialComplex,
    family: &[PolyChain],
    mode: FillMode,
) -> Result<UndistortionReport, FillError> {
    if !x.is_subcomplex_of(y) {
        return Err(FillError::SubcomplexInvalid);
    }
    let rows: Vec<UndistortionRow> = par_map(family, |t| {
        check_cycle(y, t)?;
        let fill_y = fill_value(y, t, mode)?;
        let supported = t.check_supported(x).is_ok();
        let fill_x = if supported { fill_value(x, t, mode)? } else { None };
        let flag = match (&fill_y, supported, &fill_x) {
            (_, false, _) => RowFlag::NotSupportedInX,
            (None, _, _) => RowFlag::NotBoundInY,
            (Some(_), true, None) => RowFlag::ObstructionInX,
            (Some(_), true, Some(_)) => RowFlag::Ok,
        };
        let ratio = match (&fill_x, &fill_y) {
            (Some(fx), Some(fy)) if fy.is_zero() => fx.is_zero().then(Q::one),
            (Some(fx), Some(fy)) => Some(fx / fy),
            _ => None,
        };
        Ok(UndistortionRow { cycle: t.clone(), fill_x, fill_y, ratio, flag })
    })
    .into_iter()
    .collect::<Result<_, FillError>>()?;
    let max_ratio = rows.iter().filter(|r| r.flag == RowFlag::Ok).filter_map(|r| r.ratio.clone()).max();
    let infinite = rows.iter().any(|r| r.flag == RowFlag::ObstructionInX);
    Ok(UndistortionReport { rows, max_ratio, infinite })
}

/// Boundary of the union of equidimensional simplices lying in one flat,
/// each oriented like the flat. Abstract complexes use sorted vertex order.
pub fn region_boundary(c: &SimplicialComplex, simplices: &[Vec<usize>]) -> PolyChain {
    let k = simplices.first().map_or(0, |s| s.len() - 1);
    let sign = |s: &Vec<usize>| match c.coords() {
        Some(p) => i64::from(flat_orientation(&s.iter().map(|&v| p[v].clone()).collect::<Vec<_>>())),
        None => 1,
    };
    PolyChain::from_int_terms(k, simplices.iter().map(|s| (s.clone(), sign(s)))).boundary()
}
