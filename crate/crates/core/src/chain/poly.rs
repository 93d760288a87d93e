//! Chains on the simplices of a complex, with coefficients relative to the
//! sorted-vertex orientation.

use super::PLChain;
use crate::complex::{facets_of, sort_with_sign, ComplexError, SimplicialComplex};
use crate::rational::{sqrt_f64, Q};
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// `Σ θ_σ ⟦σ⟧` over sorted vertex tuples. Coefficients are rational so that LP
/// relaxations can be represented; integral chains report `is_integral`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyChain {
    k: usize,
    coeffs: BTreeMap<Vec<usize>, Q>,
}

impl PolyChain {
    pub fn zero(k: usize) -> Self {
        PolyChain { k, coeffs: BTreeMap::new() }
    }

    /// Builds a chain from oriented vertex tuples in any order.
    pub fn from_terms<I>(k: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<usize>, Q)>,
    {
        let mut c = Self::zero(k);
        for (s, v) in terms {
            c.add(&s, &v);
        }
        c
    }

    pub fn from_int_terms<I>(k: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<usize>, i64)>,
    {
        Self::from_terms(k, terms.into_iter().map(|(s, v)| (s, Q::from_integer(v.into()))))
    }

    /// Adds `v ⟦s⟧` where `s` is an ordered vertex tuple.
    pub fn add(&mut self, s: &[usize], v: &Q) {
        assert_eq!(s.len(), self.k + 1, "simplex dimension must match the chain");
        let (sorted, sign) = sort_with_sign(s);
        if sign == 0 || v.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(sorted.clone()).or_insert_with(Q::zero);
        *entry += v * Q::from_integer(sign.into());
        if entry.is_zero() {
            self.coeffs.remove(&sorted);
        }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Q)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, s: &[usize]) -> Q {
        let (sorted, sign) = sort_with_sign(s);
        self.coeffs.get(&sorted).cloned().unwrap_or_else(Q::zero) * Q::from_integer(sign.into())
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|v| v.is_integer())
    }

    /// Integer coefficients, if all coefficients are integral and fit in `i64`.
    pub fn int_terms(&self) -> Option<Vec<(Vec<usize>, i64)>> {
        self.coeffs
            .iter()
            .map(|(s, v)| if v.is_integer() { v.to_integer().to_i64().map(|x| (s.clone(), x)) } else { None })
            .collect()
    }

    pub fn plus(&self, other: &PolyChain) -> PolyChain {
        assert_eq!(self.k, other.k, "chains of equal dimension");
        let mut out = self.clone();
        for (s, v) in &other.coeffs {
            out.add(s, v);
        }
        out
    }

    pub fn scaled(&self, f: &Q) -> PolyChain {
        PolyChain::from_terms(self.k, self.coeffs.iter().map(|(s, v)| (s.clone(), v * f)))
    }

    pub fn minus(&self, other: &PolyChain) -> PolyChain {
        self.plus(&other.scaled(&Q::from_integer((-1).into())))
    }

    /// Combinatorial boundary `Σ_i (-1)^i [σ \ v_i]`; the boundary of a 0-chain is zero.
    pub fn boundary(&self) -> PolyChain {
        if self.k == 0 {
            return PolyChain::zero(0);
        }
        let mut out = PolyChain::zero(self.k - 1);
        for (s, v) in &self.coeffs {
            for (i, f) in facets_of(s).into_iter().enumerate() {
                out.add(&f, &if i % 2 == 0 { v.clone() } else { -v.clone() });
            }
        }
        out
    }

    pub fn is_cycle(&self) -> bool {
        self.k == 0 && self.coeffs.values().sum::<Q>().is_zero() || self.k > 0 && self.boundary().is_zero()
    }

    /// Checks that every simplex belongs to `c`.
    pub fn check_supported(&self, c: &SimplicialComplex) -> Result<(), ComplexError> {
        match self.coeffs.keys().find(|s| !c.contains(s)) {
            Some(s) => Err(ComplexError::NotASimplex(s.clone())),
            None => Ok(()),
        }
    }

    /// `Σ |θ_σ| vol(σ)` with volumes from `c`.
    pub fn mass(&self, c: &SimplicialComplex) -> f64 {
        self.coeffs
            .iter()
            .map(|(s, v)| crate::rational::to_f64(&v.abs()) * sqrt_f64(&c.squared_volume(s)))
            .sum()
    }

    /// Coefficient vector indexed like `c.simplices(k)`.
    pub fn to_vector(&self, c: &SimplicialComplex) -> Result<Vec<Q>, ComplexError> {
        let mut v = vec![Q::zero(); c.count(self.k)];
        for (s, x) in &self.coeffs {
            let i = c.index_of(s).ok_or_else(|| ComplexError::NotASimplex(s.clone()))?;
            v[i] = x.clone();
        }
        Ok(v)
    }

    pub fn from_vector(c: &SimplicialComplex, k: usize, v: &[Q]) -> PolyChain {
        PolyChain::from_terms(k, c.simplices(k).iter().zip(v).map(|(s, x)| (s.clone(), x.clone())))
    }

    /// Geometric chain of an integral chain on an embedded complex.
    pub fn to_pl(&self, c: &SimplicialComplex) -> Result<PLChain, ComplexError> {
        let coords = c.coords().ok_or(ComplexError::EmbeddingRequired)?;
        self.check_supported(c)?;
        let ambient = c.ambient().unwrap_or(0);
        let terms = self.int_terms().ok_or(ComplexError::NonIntegralChain)?;
        let mut out = PLChain::zero(self.k, ambient);
        for (s, v) in terms {
            out.add_term(s.iter().map(|&i| coords[i].clone()).collect(), v);
        }
        Ok(out)
    }
}
