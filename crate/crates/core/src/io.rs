//! JSON file formats. Exact rationals are written as `"p/q"` strings; readers
//! also accept plain JSON integers and decimal strings.

use crate::chain::{PLChain, PolyChain};
use crate::complex::{ComplexError, SimplicialComplex};
use crate::nerve::{MetricPointCloud, NagataCover, NerveError};
use crate::rational::{format_q, parse_q, Q};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("invalid rational {0:?}")]
    Rational(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Chain(#[from] crate::chain::ChainError),
    #[error(transparent)]
    Nerve(#[from] NerveError),
}

/// A rational in a file: a `"p/q"` or decimal string, or a JSON integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rational {
    Int(i64),
    Text(String),
}

impl Rational {
    pub fn to_q(&self) -> Result<Q, IoError> {
        match self {
            Rational::Int(n) => Ok(Q::from_integer((*n).into())),
            Rational::Text(s) => parse_q(s).map_err(|_| IoError::Rational(s.clone())),
        }
    }
}

impl From<&Q> for Rational {
    fn from(q: &Q) -> Self {
        Rational::Text(format_q(q))
    }
}

fn points_to_file(points: &[Vec<Q>]) -> Vec<Vec<Rational>> {
    points.iter().map(|p| p.iter().map(Rational::from).collect()).collect()
}

fn points_from_file(points: &[Vec<Rational>]) -> Result<Vec<Vec<Q>>, IoError> {
    points.iter().map(|p| p.iter().map(Rational::to_q).collect()).collect()
}

/// `{"vertices": [[p/q..]..], "simplices": [[i..]..], "epsilon": "p/q"}`; an
/// abstract complex gives `"n_vertices"` instead of `"vertices"`. Only
/// maximal simplices are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_vertices: Option<usize>,
    pub simplices: Vec<Vec<usize>>,
    pub epsilon: Rational,
}

impl ComplexFile {
    pub fn from_complex(c: &SimplicialComplex) -> Self {
        ComplexFile {
            vertices: c.coords().map(points_to_file),
            n_vertices: if c.is_embedded() { None } else { Some(c.n_vertices()) },
            simplices: c.maximal_simplices(),
            epsilon: c.epsilon().into(),
        }
    }

    pub fn to_complex(&self) -> Result<SimplicialComplex, IoError> {
        let eps = self.epsilon.to_q()?;
        let base = match (&self.vertices, self.n_vertices) {
            (Some(v), _) => SimplicialComplex::new_embedded(points_from_file(v)?, &self.simplices, eps)?,
            (None, Some(n)) => SimplicialComplex::new_abstract(n, &self.simplices, eps)?,
            (None, None) => return Err(IoError::Invalid("complex needs \"vertices\" or \"n_vertices\"".into())),
        };
        Ok(base.subcomplex(&self.simplices)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainTerm {
    pub vertices: Vec<Vec<Rational>>,
    pub coeff: i64,
}

/// `{"k": int, "ambient": int, "terms": [{"vertices": [[p/q..]..], "coeff": int}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFile {
    pub k: usize,
    pub ambient: usize,
    pub terms: Vec<ChainTerm>,
}

impl ChainFile {
    pub fn from_chain(t: &PLChain) -> Self {
        ChainFile {
            k: t.dim(),
            ambient: t.ambient(),
            terms: t.terms().map(|(vs, c)| ChainTerm { vertices: points_to_file(vs), coeff: c }).collect(),
        }
    }

    pub fn to_chain(&self) -> Result<PLChain, IoError> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((points_from_file(&t.vertices)?, t.coeff)))
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(PLChain::from_terms(self.k, self.ambient, terms)?)
    }
}

/// A polyhedral chain coefficient: a JSON integer when integral, else `"p/q"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub simplex: Vec<usize>,
    pub coeff: Rational,
}

/// `{"k": int, "terms": [{"simplex": [i..], "coeff": int | "p/q"}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyChainFile {
    pub k: usize,
    pub terms: Vec<PolyTerm>,
}

impl PolyChainFile {
    pub fn from_chain(p: &PolyChain) -> Self {
        let coeff = |v: &Q| match (v.is_integer(), i64::try_from(v.to_integer())) {
            (true, Ok(n)) => Rational::Int(n),
            _ => Rational::from(v),
        };
        PolyChainFile {
            k: p.dim(),
            terms: p.terms().map(|(s, v)| PolyTerm { simplex: s.clone(), coeff: coeff(v) }).collect(),
        }
    }

    pub fn to_chain(&self) -> Result<PolyChain, IoError> {
        let mut out = PolyChain::zero(self.k);
        for t in &self.terms {
            if t.simplex.len() != self.k + 1 {
                return Err(IoError::Invalid(format!("simplex {:?} does not have dimension {}", t.simplex, self.k)));
            }
            out.add(&t.simplex, &t.coeff.to_q()?);
        }
        Ok(out)
    }
}

/// `{"points": [[p/q..]..]}` or `{"distances": [[p/q..]..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<Rational>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<Rational>>>,
}

impl CloudFile {
    pub fn from_cloud(c: &MetricPointCloud) -> Self {
        match c {
            MetricPointCloud::Coordinates(p) => CloudFile { points: Some(points_to_file(p)), distances: None },
            MetricPointCloud::Distances(d) => CloudFile { points: None, distances: Some(points_to_file(d)) },
        }
    }

    pub fn to_cloud(&self) -> Result<MetricPointCloud, IoError> {
        match (&self.points, &self.distances) {
            (Some(p), None) => Ok(MetricPointCloud::from_coordinates(points_from_file(p)?)?),
            (None, Some(d)) => Ok(MetricPointCloud::from_distances(points_from_file(d)?)?),
            _ => Err(IoError::Invalid("cloud needs exactly one of \"points\" and \"distances\"".into())),
        }
    }
}

/// Cover sets with the scale, measured multiplicity and constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverFile {
    pub s: Rational,
    pub sets: Vec<Vec<usize>>,
    pub multiplicity: usize,
    pub dimension: usize,
    pub constant: f64,
}

impl CoverFile {
    pub fn from_cover(c: &NagataCover) -> Self {
        CoverFile {
            s: (&c.s).into(),
            sets: c.sets.clone(),
            multiplicity: c.multiplicity,
            dimension: c.dimension(),
            constant: c.constant(),
        }
    }

    pub fn to_cover(&self, cloud: &MetricPointCloud) -> Result<NagataCover, IoError> {
        Ok(NagataCover::from_sets(cloud, self.s.to_q()?, self.sets.clone())?)
    }
}

/// Parses a JSON document, reporting syntax errors with line and column.
pub fn from_json_str<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read { path: display.clone(), source })?;
    from_json_str(&text, &display)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file types serialize infallibly");
    s.push('\n');
    s
}
