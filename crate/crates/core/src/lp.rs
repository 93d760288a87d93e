//! Exact linear programming over the rationals: a dense two-phase simplex
//! method for `min c·x` subject to `A x = b, x >= 0`, and best-first branch
//! and bound for integer solutions.

use crate::rational::Q;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Consecutive degenerate pivots tolerated under Dantzig's rule before the
/// solver switches to Bland's rule for the rest of the solve.
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Q>,
    pub c: Vec<Q>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverStats {
    pub pivots: usize,
    pub bland_pivots: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<Q>,
    pub value: Q,
    pub stats: SolverStats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

/// Integer optimum with the root relaxation value as lower bound.
#[derive(Debug, Clone, PartialEq)]
pub enum IlpOutcome {
    Optimal { solution: LpSolution, lp_bound: Q },
    Infeasible,
    Unbounded,
    /// Node budget exhausted; the best integer point found so far, if any.
    NodeLimit { best: Option<LpSolution>, lp_bound: Q },
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    obj: Vec<Q>,
    basis: Vec<usize>,
    width: usize,
    stats: SolverStats,
    bland: bool,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Q {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &p;
                }
            }
        }
        let prow: Vec<(usize, Q)> = self.rows[r]
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| (j, v.clone()))
            .collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (j, v) in &prow {
                self.rows[i][*j] -= &f * v;
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (j, v) in &prow {
                self.obj[*j] -= &f * v;
            }
        }
        self.basis[r] = c;
        self.stats.pivots += 1;
        if self.bland {
            self.stats.bland_pivots += 1;
        }
    }

    /// Runs the simplex method over columns `< allowed`. Returns `false` when unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        let mut streak = 0;
        loop {
            let entering = if self.bland {
                (0..allowed).find(|&j| self.obj[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..allowed {
                    if self.obj[j].is_negative() && best.is_none_or(|b| self.obj[j] < self.obj[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => match ratio.cmp(lr) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[i] < self.basis[*li],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else { return false };
            if ratio.is_zero() {
                streak += 1;
                if streak > DEGENERATE_STREAK {
                    self.bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(r, c);
        }
    }
}

/// Solves `min c·x, A x = b, x >= 0` exactly.
pub fn solve_lp(lp: &LinearProgram) -> LpOutcome {
    let m = lp.b.len();
    let n = lp.c.len();
    if m == 0 {
        if lp.c.iter().any(|c| c.is_negative()) {
            return LpOutcome::Unbounded;
        }
        return LpOutcome::Optimal(LpSolution { x: vec![Q::zero(); n], value: Q::zero(), stats: SolverStats::default() });
    }
    let width = n + m;
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(m);
    for i in 0..m {
        let neg = lp.b[i].is_negative();
        let mut row: Vec<Q> = Vec::with_capacity(width + 1);
        row.extend(lp.a[i].iter().map(|v| if neg { -v.clone() } else { v.clone() }));
        row.extend(std::iter::repeat_n(Q::zero(), m));
        row.push(if neg { -lp.b[i].clone() } else { lp.b[i].clone() });
        rows.push(row);
    }
    // crash basis: a column with a single positive entry serves as that row's basic variable
    let mut basis: Vec<Option<usize>> = vec![None; m];
    for j in 0..n {
        let mut nz = (0..m).filter(|&i| !rows[i][j].is_zero());
        if let (Some(i), None) = (nz.next(), nz.next()) {
            if basis[i].is_none() && rows[i][j].is_positive() {
                let p = rows[i][j].clone();
                for x in rows[i].iter_mut() {
                    *x /= &p;
                }
                basis[i] = Some(j);
            }
        }
    }
    let mut obj = vec![Q::zero(); width + 1];
    let mut full_basis = Vec::with_capacity(m);
    for (i, b) in basis.iter().enumerate() {
        match b {
            Some(j) => full_basis.push(*j),
            None => {
                rows[i][n + i] = Q::one();
                full_basis.push(n + i);
                obj[n + i] = Q::one();
            }
        }
    }
    // price out the basic artificials
    for i in 0..m {
        if full_basis[i] >= n {
            for j in 0..=width {
                if !rows[i][j].is_zero() {
                    let v = rows[i][j].clone();
                    obj[j] -= v;
                }
            }
        }
    }
    let mut t = Tableau { rows, obj, basis: full_basis, width, stats: SolverStats::default(), bland: false };
    t.run(width);
    if !t.obj[width].is_zero() {
        return LpOutcome::Infeasible;
    }
    // drive remaining artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }
    // phase 2: drop artificial columns and price the true objective
    for row in t.rows.iter_mut() {
        let rhs = row[width].clone();
        row.truncate(n);
        row.push(rhs);
    }
    t.width = n;
    let mut obj: Vec<Q> = lp.c.clone();
    obj.push(Q::zero());
    for (i, &bj) in t.basis.iter().enumerate() {
        let cb = &lp.c[bj];
        if cb.is_zero() {
            continue;
        }
        for (o, v) in obj.iter_mut().zip(&t.rows[i]) {
            if !v.is_zero() {
                *o -= cb * v;
            }
        }
    }
    t.obj = obj;
    t.bland = false;
    if !t.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bj) in t.basis.iter().enumerate() {
        x[bj] = t.rows[i][n].clone();
    }
    let value = -t.obj[n].clone();
    LpOutcome::Optimal(LpSolution { x, value, stats: t.stats })
}

#[derive(Clone)]
enum Bound {
    Le(usize, Q),
    Ge(usize, Q),
}

struct Node {
    value: Q,
    id: usize,
    bounds: Vec<Bound>,
    solution: LpSolution,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // reversed so that the max-heap pops the smallest value, then the oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other.value.cmp(&self.value).then(other.id.cmp(&self.id))
    }
}

fn with_bounds(lp: &LinearProgram, bounds: &[Bound]) -> LinearProgram {
    let n = lp.c.len();
    let extra = bounds.len();
    let mut a: Vec<Vec<Q>> = lp
        .a
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.extend(std::iter::repeat_n(Q::zero(), extra));
            r
        })
        .collect();
    let mut b = lp.b.clone();
    for (k, bound) in bounds.iter().enumerate() {
        let mut row = vec![Q::zero(); n + extra];
        let (j, v, s) = match bound {
            Bound::Le(j, v) => (*j, v, Q::one()),
            Bound::Ge(j, v) => (*j, v, -Q::one()),
        };
        row[j] = Q::one();
        row[n + k] = s;
        a.push(row);
        b.push(v.clone());
    }
    let mut c = lp.c.clone();
    c.extend(std::iter::repeat_n(Q::zero(), extra));
    LinearProgram { a, b, c }
}

fn solve_node(lp: &LinearProgram, bounds: &[Bound]) -> LpOutcome {
    match solve_lp(&with_bounds(lp, bounds)) {
        LpOutcome::Optimal(mut s) => {
            s.x.truncate(lp.c.len());
            LpOutcome::Optimal(s)
        }
        other => other,
    }
}

/// Best-first branch and bound on the smallest-index fractional coordinate.
pub fn solve_ilp(lp: &LinearProgram, max_nodes: usize) -> IlpOutcome {
    let root = match solve_lp(lp) {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible => return IlpOutcome::Infeasible,
        LpOutcome::Unbounded => return IlpOutcome::Unbounded,
    };
    let lp_bound = root.value.clone();
    let mut stats = SolverStats { nodes: 1, ..root.stats };
    let mut heap = BinaryHeap::new();
    let mut next_id = 1;
    heap.push(Node { value: root.value.clone(), id: 0, bounds: Vec::new(), solution: root });
    let mut best: Option<LpSolution> = None;
    while let Some(node) = heap.pop() {
        if best.as_ref().is_some_and(|b| node.value >= b.value) {
            continue;
        }
        let Some(j) = node.solution.x.iter().position(|v| !v.is_integer()) else {
            best = Some(node.solution);
            continue;
        };
        if stats.nodes >= max_nodes {
            return IlpOutcome::NodeLimit { best: best.map(|b| LpSolution { stats, ..b }), lp_bound };
        }
        let v = &node.solution.x[j];
        for bound in [Bound::Le(j, v.floor()), Bound::Ge(j, v.ceil())] {
            let mut bounds = node.bounds.clone();
            bounds.push(bound);
            stats.nodes += 1;
            if let LpOutcome::Optimal(s) = solve_node(lp, &bounds) {
                stats.pivots += s.stats.pivots;
                stats.bland_pivots += s.stats.bland_pivots;
                if best.as_ref().is_none_or(|b| s.value < b.value) {
                    heap.push(Node { value: s.value.clone(), id: next_id, bounds, solution: s });
                    next_id += 1;
                }
            }
        }
    }
    match best {
        Some(b) => IlpOutcome::Optimal { solution: LpSolution { stats, ..b }, lp_bound },
        None => IlpOutcome::Infeasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn lp(a: &[&[i64]], b: &[i64], c: &[i64]) -> LinearProgram {
        LinearProgram {
            a: a.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect(),
            b: b.iter().map(|&v| q(v)).collect(),
            c: c.iter().map(|&v| q(v)).collect(),
        }
    }

    fn optimal(o: LpOutcome) -> LpSolution {
        match o {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_textbook_problem() {
        // min -x - y, x + 2y + s1 = 4, 3x + y + s2 = 6: optimum at (8/5, 6/5)
        let p = lp(&[&[1, 2, 1, 0], &[3, 1, 0, 1]], &[4, 6], &[-1, -1, 0, 0]);
        let s = optimal(solve_lp(&p));
        assert_eq!(s.value, -qf(14, 5));
        assert_eq!(&s.x[..2], &[qf(8, 5), qf(6, 5)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        assert_eq!(solve_lp(&lp(&[&[1, 1]], &[-1], &[1, 1])), LpOutcome::Infeasible);
        assert_eq!(solve_lp(&lp(&[&[1, -1]], &[1], &[-1, 0])), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let p = lp(&[&[1, 1, 0], &[2, 2, 0], &[0, 1, 1]], &[2, 4, 1], &[1, 2, 3]);
        let s = optimal(solve_lp(&p));
        // z = 1 - y and x = 2 - y, so the objective is 5 - 2y, minimized at y = 1
        assert_eq!(s.value, q(3));
        assert_eq!(s.x, vec![q(1), q(1), q(0)]);
    }

    #[test]
    fn brute_force_vertex_enumeration_agrees() {
        // oracle: enumerate all bases of a 2x4 system
        let p = lp(&[&[2, 1, 1, 0], &[1, 3, 0, 1]], &[7, 9], &[-3, -4, 0, 0]);
        let mut best: Option<Q> = None;
        for i in 0..4 {
            for j in i + 1..4 {
                let m = vec![vec![p.a[0][i].clone(), p.a[0][j].clone()], vec![p.a[1][i].clone(), p.a[1][j].clone()]];
                if let crate::linalg::Solution::Unique(x) = crate::linalg::solve(&m, &p.b) {
                    if x.iter().all(|v| !v.is_negative()) {
                        let val = &p.c[i] * &x[0] + &p.c[j] * &x[1];
                        best = Some(best.map_or(val.clone(), |b: Q| b.min(val)));
                    }
                }
            }
        }
        assert_eq!(optimal(solve_lp(&p)).value, best.unwrap());
    }

    #[test]
    fn branch_and_bound_finds_integer_optimum() {
        // max x + y s.t. 2x + 2y <= 3 (slack s): LP 3/2, ILP 1
        let p = LinearProgram { a: vec![vec![q(2), q(2), q(1)]], b: vec![q(3)], c: vec![q(-1), q(-1), q(0)] };
        match solve_ilp(&p, 100) {
            IlpOutcome::Optimal { solution, lp_bound } => {
                assert_eq!(lp_bound, qf(-3, 2));
                assert_eq!(solution.value, q(-1));
                assert!(solution.x.iter().all(|v| v.is_integer()));
                assert!(solution.stats.nodes > 1);
            }
            other => panic!("{other:?}"),
        }
    }
}
