//! Command-line front end: subcommands read JSON inputs, run one computation
//! and emit a deterministic JSON report that records the seed.
//!
//! Exit codes: 0 success, 2 validation error, 3 infeasible or homological
//! obstruction (the report is still written), 4 retry or node budget exhausted.

use crate::chain::{EqualityMode, PLChain, PolyChain, Witness};
use crate::complex::SimplicialComplex;
use crate::deform::{deform, DeformConfig, DeformError, DeformationResult, TriangulatedSpace};
use crate::fill::{self, FillError, FillMode, RowFlag};
use crate::io::{self, ChainFile, CloudFile, ComplexFile, CoverFile, IoError, PolyChainFile};
use crate::nerve::{build_cover, MetricPointCloud, build_nerve, tau_sum_bound_holds, verify_structure_at_depth};
use crate::rational::{format_q, parse_q, to_f64, Q};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Parser)]
#[command(name = "gmtkit", version, about = "Exact polyhedral chains, deformation and filling computations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every random choice; recorded in the report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Rational (lp) or integer (ilp) chains for optimization problems.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Lp)]
    pub mode: ModeArg,
    /// Decision procedure for the deformation certificate.
    #[arg(long, global = true, value_enum, default_value_t = EqualityArg::Exact)]
    pub equality: EqualityArg,
    /// Candidate centers sampled per simplex, or random forms in fast equality mode.
    #[arg(long, global = true, default_value_t = 8)]
    pub samples: usize,
    /// Resampling budget when a center or generic point is rejected.
    #[arg(long, global = true, default_value_t = 32)]
    pub retries: usize,
    /// Barycentric subdivision depth of the length-metric graph.
    #[arg(long, global = true, default_value_t = 0)]
    pub subdiv_depth: usize,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Lp,
    Ilp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EqualityArg {
    Exact,
    Fast,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Cover a point cloud at scale s and build its nerve with the structure report.
    BuildNerve {
        cloud: PathBuf,
        #[arg(long)]
        scale: String,
    },
    /// Deform a chain onto the skeleton of a complex: T = P + R + ∂S.
    Deform { complex: PathBuf, chain: PathBuf },
    /// Minimal filling of a polyhedral cycle.
    Fillvol { complex: PathBuf, cycle: PathBuf },
    /// Flat norm of a polyhedral chain.
    Flatnorm { complex: PathBuf, chain: PathBuf },
    /// Cone filling of a cycle from an apex given as comma-separated rationals.
    Cone {
        chain: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        apex: String,
    },
    /// Compare filling volumes in a subcomplex against its ambient complex.
    Undistortion { ambient: PathBuf, sub: PathBuf, cycles: PathBuf },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Budget(String),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => 4,
            _ => 2,
        }
    }
}

/// A finished report and its exit code (0, or 3 for an obstruction).
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub code: i32,
}

fn qs(x: &Q) -> Value {
    Value::String(format_q(x))
}

/// Finite floats as numbers, others as strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(x.to_string())
    }
}

pub fn fill_mode(m: ModeArg) -> FillMode {
    match m {
        ModeArg::Lp => FillMode::Lp,
        ModeArg::Ilp => FillMode::Ilp,
    }
}

fn mode_name(m: FillMode) -> &'static str {
    match m {
        FillMode::Lp => "lp",
        FillMode::Ilp => "ilp",
    }
}

fn stats(s: &crate::lp::SolverStats) -> Value {
    json!({ "pivots": s.pivots, "bland_pivots": s.bland_pivots, "nodes": s.nodes })
}

fn witness(w: &Witness) -> Value {
    match w {
        Witness::Canonical => json!({ "kind": "canonical" }),
        Witness::Descent { components } => json!({ "kind": "descent", "components": components }),
        Witness::Refinement { cells } => json!({ "kind": "refinement", "cells": cells }),
        Witness::Point { point, multiplicity } => {
            json!({ "kind": "point", "point": point.iter().map(qs).collect::<Vec<_>>(), "multiplicity": multiplicity })
        }
        Witness::FormsAgree { forms } => json!({ "kind": "forms_agree", "forms": forms }),
        Witness::Form { difference, .. } => json!({ "kind": "form", "difference": qs(difference) }),
        Witness::Incompatible => json!({ "kind": "incompatible" }),
    }
}

/// Prefixes a report body with the command name and seed.
fn with_header(cli: &Cli, command: &str, body: Report) -> Report {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(cli.seed));
    if let Value::Object(rest) = body.json {
        m.extend(rest);
    }
    Report { json: Value::Object(m), code: body.code }
}

fn poly(p: &PolyChain) -> Value {
    serde_json::to_value(PolyChainFile::from_chain(p)).expect("serializable")
}

fn fill_error(e: FillError) -> CliError {
    match e {
        FillError::NodeLimit { .. } => CliError::Budget(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn deform_error(e: DeformError) -> CliError {
    match e {
        DeformError::CenterHit { .. } | DeformError::GenericPointOnTermBoundary { .. } => CliError::Budget(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn read_complex(path: &Path) -> Result<SimplicialComplex, CliError> {
    Ok(io::read_json::<ComplexFile>(path)?.to_complex()?)
}

fn read_poly(path: &Path) -> Result<PolyChain, CliError> {
    Ok(io::read_json::<PolyChainFile>(path)?.to_chain()?)
}

/// Runs the selected subcommand without writing anything.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::BuildNerve { cloud, scale } => cmd_build_nerve(cli, cloud, scale),
        Command::Deform { complex, chain } => cmd_deform(cli, complex, chain),
        Command::Fillvol { complex, cycle } => cmd_fillvol(cli, complex, cycle),
        Command::Flatnorm { complex, chain } => cmd_flatnorm(cli, complex, chain),
        Command::Cone { chain, apex } => cmd_cone(cli, chain, apex),
        Command::Undistortion { ambient, sub, cycles } => cmd_undistortion(cli, ambient, sub, cycles),
    }
}

/// Runs the subcommand, writes the report and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = run(cli).and_then(|report| {
        let text = io::to_json_string(&report.json);
        match &cli.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|source| CliError::Write { path: path.display().to_string(), source })?,
            None => print!("{text}"),
        }
        Ok(report.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_build_nerve(cli: &Cli, cloud: &Path, scale: &str) -> Result<Report, CliError> {
    let s = parse_q(scale).map_err(|e| CliError::Validation(format!("--scale: {e}")))?;
    let cloud = io::read_json::<CloudFile>(cloud)?.to_cloud()?;
    Ok(with_header(cli, "build-nerve", nerve_report(&cloud, &s, cli.subdiv_depth)?))
}

/// Cover, nerve, ψ-table, φ0 and structure report of a cloud at scale `s`.
pub fn nerve_report(cloud: &MetricPointCloud, s: &Q, subdiv_depth: usize) -> Result<Report, CliError> {
    let cover = build_cover(cloud, s).map_err(IoError::from)?;
    let nerve = build_nerve(&cover, cloud).map_err(IoError::from)?;
    let report = verify_structure_at_depth(&nerve, cloud, s, subdiv_depth);
    let tau_ok = (0..cloud.len()).all(|x| tau_sum_bound_holds(&cover, x));
    let mut m = serde_json::Map::new();
    m.insert("s".into(), qs(s));
    m.insert("cover".into(), serde_json::to_value(CoverFile::from_cover(&cover)).expect("serializable"));
    m.insert("complex".into(), serde_json::to_value(ComplexFile::from_complex(&nerve.complex)).expect("serializable"));
    m.insert("phi0".into(), json!(nerve.phi0));
    m.insert(
        "psi".into(),
        Value::Array(nerve.psi.iter().map(|row| Value::Array(row.iter().map(|&(i, w)| json!([i, num(w)])).collect())).collect()),
    );
    m.insert(
        "structure".into(),
        json!({
            "density_defect": num(report.density_defect),
            "quasi_isometry": num(report.quasi_isometry),
            "displacement": report.displacement.map(num),
            "psi_lipschitz": num(report.psi_lipschitz),
            "subdiv_depth": subdiv_depth,
        }),
    );
    m.insert("tau_sum_bound_holds".into(), json!(tau_ok));
    Ok(Report { json: Value::Object(m), code: 0 })
}

pub fn deform_config(cli: &Cli) -> DeformConfig {
    let equality = match cli.equality {
        EqualityArg::Exact => EqualityMode::Exact,
        EqualityArg::Fast => EqualityMode::Fast { max_degree: 2, random_forms: cli.samples, seed: cli.seed },
    };
    DeformConfig { seed: cli.seed, samples: cli.samples, retries: cli.retries, equality }
}

/// JSON view of a deformation result.
pub fn deformation_json(res: &DeformationResult) -> Value {
    let ledger: Vec<Value> = res
        .ledger
        .iter()
        .map(|r| {
            json!({
                "simplex": r.simplex,
                "p_int": num(r.p_int),
                "t_star": num(r.t_star),
                "dp_int": num(r.dp_int),
                "dt_star": num(r.dt_star),
                "s_int": num(r.s_int),
                "r_int": num(r.r_int),
                "ratios": r.ratios.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let centers: Vec<Value> = res
        .centers
        .iter()
        .map(|c| {
            json!({
                "simplex": c.simplex,
                "point": c.choice.point.iter().map(qs).collect::<Vec<_>>(),
                "k_chain": num(c.choice.k_chain),
                "k_boundary": num(c.choice.k_boundary),
                "attempts": c.attempts,
            })
        })
        .collect();
    let mode = match res.certificate.mode {
        EqualityMode::Exact => "exact",
        EqualityMode::Fast { .. } => "fast",
    };
    json!({
        "k": res.k,
        "note": res.note,
        "p": poly(&res.p),
        "r": ChainFile::from_chain(&res.r),
        "s": ChainFile::from_chain(&res.s),
        "certificate": { "equal": res.certificate.equal, "mode": mode, "witness": witness(&res.certificate.witness) },
        "supports": {
            "p_in_hull_t": res.supports.p_in_hull_t,
            "s_in_hull_t": res.supports.s_in_hull_t,
            "r_in_hull_dt": res.supports.r_in_hull_dt,
            "dp_in_hull_dt": res.supports.dp_in_hull_dt,
        },
        "maxima": {
            "p_vs_t": num(res.maxima.p_vs_t),
            "dp_vs_dt": num(res.maxima.dp_vs_dt),
            "s_vs_t": num(res.maxima.s_vs_t),
            "r_vs_dt": num(res.maxima.r_vs_dt),
        },
        "ledger": ledger,
        "centers": centers,
    })
}

fn cmd_deform(cli: &Cli, complex: &Path, chain: &Path) -> Result<Report, CliError> {
    let x = read_complex(complex)?;
    let t = io::read_json::<ChainFile>(chain)?.to_chain()?;
    Ok(with_header(cli, "deform", deform_report(x, &t, &deform_config(cli))?))
}

/// Deforms `t` onto the skeleton of `x`; the report adds the distortion of `x`.
pub fn deform_report(x: SimplicialComplex, t: &PLChain, cfg: &DeformConfig) -> Result<Report, CliError> {
    let space = TriangulatedSpace::new(x).map_err(deform_error)?;
    let res = deform(&space, t, cfg).map_err(deform_error)?;
    let mut m = serde_json::Map::new();
    m.insert("distortion".into(), num(space.distortion));
    if let Value::Object(body) = deformation_json(&res) {
        m.extend(body);
    }
    Ok(Report { json: Value::Object(m), code: 0 })
}

fn cmd_fillvol(cli: &Cli, complex: &Path, cycle: &Path) -> Result<Report, CliError> {
    let c = read_complex(complex)?;
    let t = read_poly(cycle)?;
    Ok(with_header(cli, "fillvol", fillvol_report(&c, &t, fill_mode(cli.mode))?))
}

/// Minimal filling report; exit code 3 with a certificate when `t` bounds nothing.
pub fn fillvol_report(c: &SimplicialComplex, t: &PolyChain, mode: FillMode) -> Result<Report, CliError> {
    let mut m = serde_json::Map::new();
    m.insert("mode".into(), json!(mode_name(mode)));
    match fill::fillvol(c, t, mode) {
        Ok(f) => {
            m.insert("verdict".into(), json!("filled"));
            m.insert("value".into(), qs(&f.value));
            m.insert("value_decimal".into(), num(to_f64(&f.value)));
            m.insert("mass".into(), num(f.mass));
            m.insert("lp_bound".into(), qs(&f.lp_bound));
            m.insert("integrality_gap".into(), qs(&f.integrality_gap));
            m.insert("lp_integral".into(), json!(f.lp_integral));
            m.insert("exact_weights".into(), json!(f.exact_weights));
            m.insert("boundary_verified".into(), json!(f.boundary_verified));
            m.insert("stats".into(), stats(&f.stats));
            m.insert("s".into(), poly(&f.s));
            Ok(Report { json: Value::Object(m), code: 0 })
        }
        Err(FillError::NotABoundary { certificate }) => {
            m.insert("verdict".into(), json!("not_a_boundary"));
            m.insert("certificate".into(), poly(&certificate));
            Ok(Report { json: Value::Object(m), code: 3 })
        }
        Err(e) => Err(fill_error(e)),
    }
}

fn cmd_flatnorm(cli: &Cli, complex: &Path, chain: &Path) -> Result<Report, CliError> {
    let c = read_complex(complex)?;
    let t = read_poly(chain)?;
    Ok(with_header(cli, "flatnorm", flatnorm_report(&c, &t, fill_mode(cli.mode))?))
}

/// Flat norm report with the decomposition `t = u + ∂v`.
pub fn flatnorm_report(c: &SimplicialComplex, t: &PolyChain, mode: FillMode) -> Result<Report, CliError> {
    let f = fill::flat_norm(c, t, mode).map_err(fill_error)?;
    let mut m = serde_json::Map::new();
    m.insert("mode".into(), json!(mode_name(mode)));
    m.insert("value".into(), qs(&f.value));
    m.insert("value_decimal".into(), num(to_f64(&f.value)));
    m.insert("mass_t".into(), num(t.mass(c)));
    m.insert("exact_weights".into(), json!(f.exact_weights));
    m.insert("decomposition_verified".into(), json!(f.decomposition_verified));
    m.insert("stats".into(), stats(&f.stats));
    m.insert("u".into(), poly(&f.u));
    m.insert("v".into(), poly(&f.v));
    Ok(Report { json: Value::Object(m), code: 0 })
}

fn cmd_cone(cli: &Cli, chain: &Path, apex: &str) -> Result<Report, CliError> {
    let t = io::read_json::<ChainFile>(chain)?.to_chain()?;
    let a = apex
        .split(',')
        .map(|s| parse_q(s.trim()).map_err(|e| CliError::Validation(format!("--apex: {e}"))))
        .collect::<Result<Vec<Q>, _>>()?;
    Ok(with_header(cli, "cone", cone_report(&t, &a)?))
}

/// Cone filling of a cycle from `a` with the radius and diameter bounds.
pub fn cone_report(t: &PLChain, a: &[Q]) -> Result<Report, CliError> {
    if a.len() != t.ambient() {
        return Err(CliError::Validation(format!("apex has {} coordinates, chain lives in dimension {}", a.len(), t.ambient())));
    }
    let f = fill::cone_fill(t, &a.to_vec()).map_err(fill_error)?;
    let mut m = serde_json::Map::new();
    m.insert("apex".into(), Value::Array(a.iter().map(qs).collect()));
    m.insert("mass".into(), num(f.mass));
    m.insert("bound".into(), num(f.bound));
    m.insert("bound_holds".into(), json!(f.bound_holds));
    m.insert("diam_bound".into(), json!(f.diam_bound.map(num)));
    m.insert("diam_bound_holds".into(), json!(f.diam_bound_holds));
    m.insert("s".into(), serde_json::to_value(ChainFile::from_chain(&f.s)).expect("serializable"));
    Ok(Report { json: Value::Object(m), code: 0 })
}

fn cmd_undistortion(cli: &Cli, ambient: &Path, sub: &Path, cycles: &Path) -> Result<Report, CliError> {
    let y = read_complex(ambient)?;
    let x = read_complex(sub)?;
    let family = io::read_json::<Vec<PolyChainFile>>(cycles)?
        .iter()
        .map(PolyChainFile::to_chain)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(with_header(cli, "undistortion", undistortion_report(&y, &x, &family, fill_mode(cli.mode))?))
}

/// Per-cycle filling ratios of a subcomplex `x` against `y`; exit code 3 when
/// some row is obstructed in `x` or not bounding in `y`.
pub fn undistortion_report(
    y: &SimplicialComplex,
    x: &SimplicialComplex,
    family: &[PolyChain],
    mode: FillMode,
) -> Result<Report, CliError> {
    let rep = fill::undistortion_report(y, x, family, mode).map_err(fill_error)?;
    let flag = |f: RowFlag| match f {
        RowFlag::Ok => "ok",
        RowFlag::NotSupportedInX => "not_supported_in_x",
        RowFlag::NotBoundInY => "not_bound_in_y",
        RowFlag::ObstructionInX => "obstruction_in_x",
    };
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|r| {
            json!({
                "cycle": poly(&r.cycle),
                "fill_x": r.fill_x.as_ref().map(qs),
                "fill_y": r.fill_y.as_ref().map(qs),
                "ratio": r.ratio.as_ref().map(qs),
                "ratio_decimal": r.ratio.as_ref().map(|q| num(to_f64(q))),
                "flag": flag(r.flag),
            })
        })
        .collect();
    let obstructed = rep.rows.iter().any(|r| matches!(r.flag, RowFlag::ObstructionInX | RowFlag::NotBoundInY));
    let mut m = serde_json::Map::new();
    m.insert("mode".into(), json!(mode_name(mode)));
    m.insert("max_ratio".into(), json!(rep.max_ratio.as_ref().map(qs)));
    m.insert("infinite".into(), json!(rep.infinite));
    m.insert("rows".into(), Value::Array(rows));
    Ok(Report { json: Value::Object(m), code: if obstructed { 3 } else { 0 } })
}
