//! Transport of polyhedral chains of an embedded complex into Euclidean space
//! along a vertex map: the affine-extension pushforward `Λ` and the
//! straight-line prism `Γ` from the realization to `Λ`, satisfying
//! `∂Λ = Λ∂` and `∂Γ = Λ - h_# - Γ∂` exactly.

use super::{ChainError, PLChain, PolyChain};
use crate::complex::{ComplexError, SimplicialComplex};
use crate::linalg::{self, Point};
use crate::rational::{sqrt_f64, Q};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("vertex map has {got} images for {expected} vertices")]
    VertexCount { expected: usize, got: usize },
    #[error("vertex map and realization live in different ambient dimensions")]
    AmbientMismatch,
}

/// Per-simplex constants: `c_lambda = mass(Λ⟦σ⟧) / scale^m` and
/// `c_gamma = mass(Γ⟦σ⟧) / scale^{m+1}`, where `scale` is the largest edge
/// length or vertex displacement involved (`0^0 = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct TransportRow {
    pub simplex: Vec<usize>,
    pub mass_lambda: f64,
    pub mass_gamma: f64,
    pub scale: f64,
    pub c_lambda: f64,
    pub c_gamma: f64,
    /// Largest distance from a support vertex of `Λ⟦σ⟧` or `Γ⟦σ⟧` to `φ0(σ^(0))`, divided by `scale`.
    pub support_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub lambda: PLChain,
    pub gamma: PLChain,
    pub rows: Vec<TransportRow>,
}

impl TransportReport {
    pub fn max_c_lambda(&self) -> f64 {
        self.rows.iter().map(|r| r.c_lambda).fold(0.0, f64::max)
    }

    pub fn max_c_gamma(&self) -> f64 {
        self.rows.iter().map(|r| r.c_gamma).fold(0.0, f64::max)
    }
}

fn lambda_of(s: &[usize], phi0: &[Point], ambient: usize, coeff: i64) -> PLChain {
    let mut c = PLChain::zero(s.len() - 1, ambient);
    c.add_term(s.iter().map(|&v| phi0[v].clone()).collect(), coeff);
    c.without_degenerate()
}

fn gamma_of(s: &[usize], h: &[Point], phi0: &[Point], ambient: usize, coeff: i64) -> PLChain {
    let mut c = PLChain::zero(s.len(), ambient);
    for i in 0..s.len() {
        let mut piece: Vec<Point> = s[..=i].iter().map(|&v| h[v].clone()).collect();
        piece.extend(s[i..].iter().map(|&v| phi0[v].clone()));
        c.add_term(piece, if i % 2 == 0 { coeff } else { -coeff });
    }
    c.without_degenerate()
}

/// `Λ(P)` and `Γ(P)` for an integral chain `P` on the embedded complex `sigma`,
/// using the complex's own coordinates as the realization map.
pub fn transport(sigma: &SimplicialComplex, phi0: &[Point], p: &PolyChain) -> Result<TransportReport, TransportError> {
    let h = sigma.coords().ok_or(ComplexError::EmbeddingRequired)?;
    if phi0.len() != sigma.n_vertices() {
        return Err(TransportError::VertexCount { expected: sigma.n_vertices(), got: phi0.len() });
    }
    let ambient = sigma.ambient().unwrap_or(0);
    if phi0.iter().any(|x| x.len() != ambient) {
        return Err(TransportError::AmbientMismatch);
    }
    p.check_supported(sigma)?;
    let terms = p.int_terms().ok_or(ComplexError::NonIntegralChain)?;
    let m = p.dim();
    let mut lambda = PLChain::zero(m, ambient);
    let mut gamma = PLChain::zero(m + 1, ambient);
    let mut rows = Vec::new();
    for (s, coeff) in terms {
        let l = lambda_of(&s, phi0, ambient, coeff);
        let g = gamma_of(&s, h, phi0, ambient, coeff);
        let mut scale2 = Q::zero();
        for (i, &a) in s.iter().enumerate() {
            scale2 = scale2.max(linalg::dist2(&h[a], &phi0[a]));
            for &b in &s[i + 1..] {
                scale2 = scale2.max(linalg::dist2(&phi0[a], &phi0[b]));
                scale2 = scale2.max(linalg::dist2(&h[a], &h[b]));
            }
        }
        let scale = sqrt_f64(&scale2);
        let unit = coeff.unsigned_abs() as f64;
        let (ml, mg) = (l.mass() / unit, g.mass() / unit);
        let ratio = |mass: f64, power: usize| -> f64 {
            let denom = scale.powi(power as i32);
            if mass == 0.0 {
                0.0
            } else {
                mass / denom
            }
        };
        let anchors: Vec<&Point> = s.iter().map(|&v| &phi0[v]).collect();
        let radius2 = l
            .vertex_set()
            .iter()
            .chain(g.vertex_set().iter())
            .map(|x| anchors.iter().map(|a| linalg::dist2(x, a)).min().unwrap())
            .max()
            .unwrap_or_else(Q::zero);
        rows.push(TransportRow {
            simplex: s.clone(),
            mass_lambda: ml,
            mass_gamma: mg,
            scale,
            c_lambda: ratio(ml, m),
            c_gamma: ratio(mg, m + 1),
            support_radius: if scale > 0.0 { sqrt_f64(&radius2) / scale } else { 0.0 },
        });
        lambda = lambda.plus(&l);
        gamma = gamma.plus(&g);
    }
    Ok(TransportReport { lambda, gamma, rows })
}
