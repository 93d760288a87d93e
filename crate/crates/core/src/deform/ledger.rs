//! Per-simplex local mass ledger and support containment checks for a
//! decomposition `T = P + R + ∂S` whose chains are carried by closed simplices.

use super::{group_by_carrier, DeformError};
use crate::chain::{canonicalize, PLChain, PolyChain};
use crate::complex::SimplicialComplex;
use crate::rational::to_f64;
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet};

/// Local masses on one simplex `σ`: `*_int` over the open simplex, `*_star`
/// over its open star. Ratios are `p_int / t_star`, `dp_int / dt_star`,
/// `s_int / (ε t_star)` and `r_int / (ε dt_star)`; `0/0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRow {
    pub simplex: Vec<usize>,
    pub p_int: f64,
    pub t_star: f64,
    pub dp_int: f64,
    pub dt_star: f64,
    pub s_int: f64,
    pub r_int: f64,
    pub ratios: [f64; 4],
}

/// Largest ledger ratios over all rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LedgerMaxima {
    pub p_vs_t: f64,
    pub dp_vs_dt: f64,
    pub s_vs_t: f64,
    pub r_vs_dt: f64,
}

impl LedgerMaxima {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p_vs_t, self.dp_vs_dt, self.s_vs_t, self.r_vs_dt]
    }

    pub fn all_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }
}

/// `spt P, spt S ⊂ Hull(spt T)` and `spt R, spt ∂P ⊂ Hull(spt ∂T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportChecks {
    pub p_in_hull_t: bool,
    pub s_in_hull_t: bool,
    pub r_in_hull_dt: bool,
    pub dp_in_hull_dt: bool,
}

impl SupportChecks {
    pub fn all_true() -> Self {
        SupportChecks { p_in_hull_t: true, s_in_hull_t: true, r_in_hull_dt: true, dp_in_hull_dt: true }
    }

    pub fn all(&self) -> bool {
        self.p_in_hull_t && self.s_in_hull_t && self.r_in_hull_dt && self.dp_in_hull_dt
    }
}

/// Mass carried by each open simplex after cancelling overlaps within each carrier.
fn carrier_masses(x: &SimplicialComplex, t: &PLChain) -> Result<BTreeMap<Vec<usize>, f64>, DeformError> {
    let mut out = BTreeMap::new();
    for (car, part) in group_by_carrier(x, t)? {
        let mass = canonicalize(&part).mass();
        if mass > 0.0 {
            out.insert(car, mass);
        }
    }
    Ok(out)
}

fn poly_masses(x: &SimplicialComplex, p: &PolyChain) -> BTreeMap<Vec<usize>, f64> {
    p.terms().map(|(s, z)| (s.clone(), to_f64(&z.abs()) * x.volume(s))).collect()
}

fn faces(s: &[usize]) -> Vec<Vec<usize>> {
    (1u32..(1 << s.len()))
        .map(|mask| s.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, v)| *v).collect())
        .collect()
}

fn star_sums(int: &BTreeMap<Vec<usize>, f64>) -> BTreeMap<Vec<usize>, f64> {
    let mut out: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (tau, m) in int {
        for f in faces(tau) {
            *out.entry(f).or_insert(0.0) += m;
        }
    }
    out
}

fn closure(carriers: &BTreeMap<Vec<usize>, f64>) -> BTreeSet<Vec<usize>> {
    carriers.keys().flat_map(|c| faces(c)).collect()
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

pub(super) fn build(
    x: &SimplicialComplex,
    t: &PLChain,
    p: &PolyChain,
    r: &PLChain,
    s: &PLChain,
) -> Result<(Vec<LedgerRow>, LedgerMaxima, SupportChecks), DeformError> {
    let eps = to_f64(x.epsilon());
    let t_int = carrier_masses(x, t)?;
    let dt_int = carrier_masses(x, &t.boundary())?;
    let p_int = poly_masses(x, p);
    let dp_int = poly_masses(x, &p.boundary());
    let s_int = carrier_masses(x, s)?;
    let r_int = carrier_masses(x, r)?;
    let t_star = star_sums(&t_int);
    let dt_star = star_sums(&dt_int);

    let mut keys: BTreeSet<Vec<usize>> = BTreeSet::new();
    for m in [&t_star, &dt_star, &p_int, &dp_int, &s_int, &r_int] {
        keys.extend(m.keys().cloned());
    }
    let get = |m: &BTreeMap<Vec<usize>, f64>, k: &Vec<usize>| m.get(k).copied().unwrap_or(0.0);
    let mut rows = Vec::new();
    let mut maxima = LedgerMaxima::default();
    for key in keys {
        let row = LedgerRow {
            p_int: get(&p_int, &key),
            t_star: get(&t_star, &key),
            dp_int: get(&dp_int, &key),
            dt_star: get(&dt_star, &key),
            s_int: get(&s_int, &key),
            r_int: get(&r_int, &key),
            ratios: [0.0; 4],
            simplex: key,
        };
        let ratios = [
            ratio(row.p_int, row.t_star),
            ratio(row.dp_int, row.dt_star),
            ratio(row.s_int, eps * row.t_star),
            ratio(row.r_int, eps * row.dt_star),
        ];
        maxima.p_vs_t = maxima.p_vs_t.max(ratios[0]);
        maxima.dp_vs_dt = maxima.dp_vs_dt.max(ratios[1]);
        maxima.s_vs_t = maxima.s_vs_t.max(ratios[2]);
        maxima.r_vs_dt = maxima.r_vs_dt.max(ratios[3]);
        rows.push(LedgerRow { ratios, ..row });
    }

    let hull_t = closure(&t_int);
    let hull_dt = closure(&dt_int);
    let inside = |m: &BTreeMap<Vec<usize>, f64>, hull: &BTreeSet<Vec<usize>>| m.keys().all(|c| hull.contains(c));
    let supports = SupportChecks {
        p_in_hull_t: inside(&p_int, &hull_t),
        s_in_hull_t: inside(&s_int, &hull_t),
        r_in_hull_dt: inside(&r_int, &hull_dt),
        dp_in_hull_dt: inside(&dp_int, &hull_dt),
    };
    Ok((rows, maxima, supports))
}
