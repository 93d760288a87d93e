//! Polynomial differential forms and their exact integrals over PL chains.

use super::{ChainError, PLChain};
use crate::linalg::{self, Point};
use crate::rational::{factorial, Q};
use num_traits::{One, Zero};
use rand::Rng;
use std::collections::BTreeMap;

/// Multivariate polynomial with rational coefficients, keyed by exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exps: Vec<u32>, c: Q) -> Self {
        let nvars = exps.len();
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Q)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_monomial(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_monomial(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_monomial(e, c1 * c2);
            }
        }
        out
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        let mut total = Q::zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for (xi, &ei) in x.iter().zip(e) {
                if ei > 0 {
                    v *= num_traits::pow(xi.clone(), ei as usize);
                }
            }
            total += v;
        }
        total
    }

    /// `∂ / ∂x_j`
    pub fn partial(&self, j: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[j] -= 1;
            out.add_monomial(f, c * Q::from_integer((e[j] as i64).into()));
        }
        out
    }

    /// `p(A t + b)` as a polynomial in `t`, where `x_i = b_i + Σ_j a[j][i] t_j`.
    fn substitute(&self, b: &[Q], a: &[Point]) -> Poly {
        let m = a.len();
        let max_deg = self.degree() as usize;
        // linear forms x_i(t) and their powers
        let lin: Vec<Poly> = (0..self.nvars)
            .map(|i| {
                let mut p = Poly::constant(m, b[i].clone());
                for (j, aj) in a.iter().enumerate() {
                    p = p.add(&Poly::var(m, j).scale(&aj[i]));
                }
                p
            })
            .collect();
        let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(self.nvars);
        for l in &lin {
            let mut pw = vec![Poly::constant(m, Q::one())];
            for d in 1..=max_deg {
                let next = pw[d - 1].mul(l);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = Poly::zero(m);
        for (e, c) in &self.terms {
            let mut term = Poly::constant(m, c.clone());
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    term = term.mul(&powers[i][ei as usize]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// `∫_{Δ_m} p(t) dt` over `{t ≥ 0, Σ t ≤ 1}` via `∫ t^α = α! / (m + |α|)!`.
    fn integrate_standard_simplex(&self) -> Q {
        let m = self.nvars;
        let mut total = Q::zero();
        for (e, c) in &self.terms {
            let num = e.iter().fold(num_bigint::BigInt::one(), |acc, &x| acc * factorial(x as usize));
            let den = factorial(m + e.iter().sum::<u32>() as usize);
            total += c * Q::new(num, den);
        }
        total
    }
}

/// `Σ_I p_I dx_I` over sorted index sets `I` of size `k` in `Q^ambient`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TestForm {
    k: usize,
    ambient: usize,
    terms: BTreeMap<Vec<usize>, Poly>,
}

impl TestForm {
    pub fn zero(k: usize, ambient: usize) -> Self {
        TestForm { k, ambient, terms: BTreeMap::new() }
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Poly)> {
        self.terms.iter().map(|(i, p)| (i.as_slice(), p))
    }

    /// Adds `p dx_{i_1} ∧ ... ∧ dx_{i_k}` for indices in any order.
    pub fn with_term(mut self, indices: &[usize], p: Poly) -> Self {
        self.add_term(indices, p);
        self
    }

    pub fn add_term(&mut self, indices: &[usize], p: Poly) {
        assert_eq!(indices.len(), self.k, "index set size must equal the form degree");
        assert_eq!(p.nvars(), self.ambient, "polynomial variables must match the ambient dimension");
        let (sorted, sign) = crate::complex::sort_with_sign(indices);
        if sign == 0 || p.is_zero() {
            return;
        }
        let p = p.scale(&Q::from_integer(sign.into()));
        let entry = self.terms.entry(sorted.clone()).or_insert_with(|| Poly::zero(self.ambient));
        *entry = entry.add(&p);
        if entry.is_zero() {
            self.terms.remove(&sorted);
        }
    }

    pub fn add(&self, other: &TestForm) -> TestForm {
        let mut out = self.clone();
        for (i, p) in &other.terms {
            out.add_term(i, p.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> TestForm {
        let mut out = TestForm::zero(self.k, self.ambient);
        for (i, p) in &self.terms {
            out.add_term(i, p.scale(s));
        }
        out
    }

    /// Exterior derivative `d(p dx_I) = Σ_j ∂_j p dx_j ∧ dx_I`.
    pub fn d(&self) -> TestForm {
        let mut out = TestForm::zero(self.k + 1, self.ambient);
        for (idx, p) in &self.terms {
            for j in 0..self.ambient {
                if idx.contains(&j) {
                    continue;
                }
                let dp = p.partial(j);
                if dp.is_zero() {
                    continue;
                }
                let mut ind = vec![j];
                ind.extend(idx.iter().copied());
                out.add_term(&ind, dp);
            }
        }
        out
    }

    /// Random form with integer coefficients in `[-bound, bound]` on every
    /// monomial up to `max_degree` and every index set.
    pub fn random<R: Rng>(k: usize, ambient: usize, max_degree: u32, bound: i64, rng: &mut R) -> TestForm {
        let mut out = TestForm::zero(k, ambient);
        for idx in index_sets(ambient, k) {
            let mut p = Poly::zero(ambient);
            for e in exponent_vectors(ambient, max_degree) {
                let c = rng.gen_range(-bound..=bound);
                p = p.add(&Poly::monomial(e, Q::from_integer(c.into())));
            }
            out.add_term(&idx, p);
        }
        out
    }

    /// `Σ θ_i ∫_{σ_i} ω`, exact.
    pub fn evaluate(&self, t: &PLChain) -> Result<Q, ChainError> {
        if self.k != t.dim() {
            return Err(ChainError::DegreeMismatch { form: self.k, chain: t.dim() });
        }
        if self.ambient != t.ambient() {
            return Err(ChainError::AmbientMismatch { expected: t.ambient(), got: self.ambient });
        }
        let mut total = Q::zero();
        for (vs, c) in t.terms() {
            total += self.integrate_simplex(vs) * Q::from_integer(c.into());
        }
        Ok(total)
    }

    /// `∫_σ ω` for one oriented simplex.
    pub fn integrate_simplex(&self, vs: &[Point]) -> Q {
        if self.k == 0 {
            return self.terms.get(&Vec::new()).map(|p| p.eval(&vs[0])).unwrap_or_else(Q::zero);
        }
        let o = &vs[0];
        let edges: Vec<Point> = vs[1..].iter().map(|v| linalg::sub(v, o)).collect();
        let mut total = Q::zero();
        for (idx, p) in &self.terms {
            let minor: Vec<Vec<Q>> = idx.iter().map(|&i| edges.iter().map(|e| e[i].clone()).collect()).collect();
            let det = linalg::det(&minor);
            if det.is_zero() {
                continue;
            }
            total += det * p.substitute(o, &edges).integrate_standard_simplex();
        }
        total
    }
}

/// `evaluate(T, ω)`
pub fn evaluate(t: &PLChain, form: &TestForm) -> Result<Q, ChainError> {
    form.evaluate(t)
}

/// Sorted `k`-subsets of `0..n`.
pub fn index_sets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Exponent vectors in `n` variables of total degree at most `max_degree`.
pub fn exponent_vectors(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, max_degree, &mut cur, &mut out);
    out
}
