//! Command harness behind the `isoparam` binary. `run` is a pure function of
//! the config; the binary only parses arguments and prints.

use std::f64::consts::FRAC_PI_8;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use isoparam::clifford::{fkm_pair, fkm_system, fkm_system_on, enumerate_fkm_pairs, verify_clifford_system, CliffordSystem};
use isoparam::fkm::{level_shape_spectrum, tube_constancy, verify_munzner_pdes, CartanMunznerField, TubePoint};
use isoparam::focal::{
    antipodal_swap_check, extract_frame_tensors, focal_spectrum, random_frame, shape_blocks, verify_focal_identities,
    verify_slice_formula, DarbouxFrame,
};
use isoparam::quadforms::{block_normal_form, incidence_dimension_probe, rank_and_spanning_check, BilinearSystem, NormalFormOptions};
use isoparam::reconstruct::{build_q_operators, verify_reconstruction};
use isoparam::rng::{derive_seed, sample_rng, unit_vector};
use isoparam::{Error, VerificationReport};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "isoparam", version, about = "Construct and verify FKM isoparametric hypersurfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Number of Clifford operators minus one.
    #[arg(long)]
    pub m: Option<usize>,
    /// Multiple of the minimal module dimension.
    #[arg(long)]
    pub k: Option<usize>,
    /// Half of the ambient dimension (overrides --k).
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Read the Clifford system from a JSON file instead of building it.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a Clifford system and write it as JSON.
    Construct(SystemArgs),
    /// Run the Clifford, polynomial and focal suites.
    Verify(SystemArgs),
    /// Emit a Darboux frame with its tensors and bilinear forms.
    Frame(SystemArgs),
    /// Rank, spanning, normal-form and incidence diagnostics.
    Quadforms(SystemArgs),
    /// Reassemble the Clifford operators from frame data.
    Reconstruct(SystemArgs),
    /// List FKM multiplicity pairs and the open cases.
    Enumerate {
        #[arg(long = "max-m1", default_value_t = 16)]
        max_m1: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Construct,
    Verify,
    Frame,
    Quadforms,
    Reconstruct,
    Enumerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub max_m1: u64,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            command,
            m: None,
            k: None,
            l: None,
            seed: 0,
            tol: 1e-9,
            samples: 200,
            input: None,
            output: None,
            max_m1: 16,
        }
    }
}

impl From<Command> for RunConfig {
    fn from(c: Command) -> Self {
        let (kind, args) = match c {
            Command::Construct(a) => (CommandKind::Construct, a),
            Command::Verify(a) => (CommandKind::Verify, a),
            Command::Frame(a) => (CommandKind::Frame, a),
            Command::Quadforms(a) => (CommandKind::Quadforms, a),
            Command::Reconstruct(a) => (CommandKind::Reconstruct, a),
            Command::Enumerate { max_m1, out } => {
                let mut cfg = RunConfig::new(CommandKind::Enumerate);
                cfg.max_m1 = max_m1;
                cfg.output = out;
                return cfg;
            }
        };
        RunConfig {
            command: kind,
            m: args.m,
            k: args.k,
            l: args.l,
            seed: args.seed,
            tol: args.tol,
            samples: args.samples,
            input: args.input,
            output: args.out,
            max_m1: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Value,
    pub summary: String,
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::DimensionNotAdmissible { .. }
        | Error::ShapeMismatch(_)
        | Error::DimensionMismatch { .. }
        | Error::NotSpecialOrthogonal { .. }
        | Error::InvalidMultiplicities { .. }
        | Error::InvalidArgument(_)
        | Error::NotUnitNormal { .. }
        | Error::FocalRadius { .. }
        | Error::Parse { .. } => EXIT_CONFIG,
        Error::NoConvergence { .. }
        | Error::SingularJacobian { .. }
        | Error::OffManifold { .. }
        | Error::EigsplitDefect(_)
        | Error::ClusterAmbiguity(_)
        | Error::IncompatibleBC { .. }
        | Error::ConditionViolated(_) => EXIT_NUMERICAL,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::DimensionNotAdmissible { .. } => "DimensionNotAdmissible",
        Error::ShapeMismatch(_) => "ShapeMismatch",
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::NotSpecialOrthogonal { .. } => "NotSpecialOrthogonal",
        Error::InvalidMultiplicities { .. } => "InvalidMultiplicities",
        Error::InvalidArgument(_) => "InvalidArgument",
        Error::NoConvergence { .. } => "NoConvergence",
        Error::SingularJacobian { .. } => "SingularJacobian",
        Error::OffManifold { .. } => "OffManifold",
        Error::EigsplitDefect(_) => "EigsplitDefect",
        Error::NotUnitNormal { .. } => "NotUnitNormal",
        Error::FocalRadius { .. } => "FocalRadius",
        Error::ClusterAmbiguity(_) => "ClusterAmbiguity",
        Error::IncompatibleBC { .. } => "IncompatibleBC",
        Error::ConditionViolated(_) => "ConditionViolated",
        Error::Parse { .. } => "Parse",
    }
}

fn error_value(err: &Error) -> Value {
    let mut v = json!({ "kind": error_kind(err), "message": err.to_string() });
    if let Error::Parse { offset, line, column, .. } = err {
        v["offset"] = json!(offset);
        v["line"] = json!(line);
        v["column"] = json!(column);
    }
    v
}

fn provenance(cfg: &RunConfig, seeds: Value, thresholds: Value) -> Value {
    json!({
        "tool": "isoparam",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "seeds": seeds,
        "thresholds": thresholds,
    })
}

/// Runs one command. Never panics on bad input; errors become exit codes.
pub fn run(cfg: &RunConfig) -> Outcome {
    let result = match cfg.command {
        CommandKind::Construct => construct(cfg),
        CommandKind::Verify => verify(cfg),
        CommandKind::Frame => frame(cfg),
        CommandKind::Quadforms => quadforms(cfg),
        CommandKind::Reconstruct => reconstruct(cfg),
        CommandKind::Enumerate => enumerate(cfg),
    };
    match result {
        Ok(o) => o,
        Err(CliError::Lib(e)) => failure(cfg, exit_code_for(&e), error_value(&e)),
        Err(CliError::Io(msg)) => failure(cfg, EXIT_CONFIG, json!({ "kind": "Io", "message": msg })),
    }
}

fn failure(cfg: &RunConfig, code: i32, error: Value) -> Outcome {
    let summary = format!("{:?}: error {}", cfg.command, error["message"].as_str().unwrap_or(""));
    Outcome {
        exit_code: code,
        report: json!({
            "command": cfg.command,
            "provenance": provenance(cfg, json!({ "base": cfg.seed }), json!({ "tol": cfg.tol })),
            "error": error,
            "pass": false,
        }),
        summary,
    }
}

enum CliError {
    Lib(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load_system(cfg: &RunConfig) -> CliResult<CliffordSystem> {
    if let Some(path) = &cfg.input {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok(CliffordSystem::from_json(&text)?);
    }
    let m = cfg
        .m
        .ok_or_else(|| Error::InvalidArgument("--m is required unless --in is given".into()))?;
    Ok(match cfg.l {
        Some(l) => fkm_system_on(m, l)?,
        None => fkm_system(m, cfg.k.unwrap_or(1))?,
    })
}

fn write_output(cfg: &RunConfig, value: &Value) -> CliResult<()> {
    if let Some(path) = &cfg.output {
        let text = serde_json::to_string_pretty(value).expect("serializable");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn finish(cfg: &RunConfig, checks: Vec<VerificationReport>, extra: Value, seeds: Value, thresholds: Value) -> Outcome {
    let pass = checks.iter().all(|c| c.pass) && extra.get("pass").and_then(Value::as_bool).unwrap_or(true);
    let mut summary = format!("{:?}: {}\n", cfg.command, if pass { "PASS" } else { "FAIL" });
    for c in &checks {
        summary.push_str(&format!(
            "  {:<24} {} max residual {:.3e}\n",
            c.check,
            if c.pass { "pass" } else { "FAIL" },
            c.residuals.max
        ));
    }
    Outcome {
        exit_code: if pass { EXIT_PASS } else { EXIT_FAIL },
        report: json!({
            "command": cfg.command,
            "provenance": provenance(cfg, seeds, thresholds),
            "checks": checks,
            "result": extra,
            "pass": pass,
        }),
        summary,
    }
}

fn construct(cfg: &RunConfig) -> CliResult<Outcome> {
    if cfg.input.is_none() {
        let m = cfg.m.ok_or_else(|| Error::InvalidArgument("--m is required".into()))?;
        if cfg.l.is_none() {
            fkm_pair(m as u64, cfg.k.unwrap_or(1) as u64)?;
        }
    }
    let sys = load_system(cfg)?;
    let tol = if sys.is_exact() { 0.0 } else { cfg.tol };
    let check = verify_clifford_system(&sys, tol);
    let doc = serde_json::to_value(sys.to_document()).expect("serializable");
    write_output(cfg, &doc)?;
    let extra = json!({
        "m": sys.m(),
        "half_dim": sys.half_dim(),
        "m2": sys.complementary_multiplicity(),
        "written_to": cfg.output,
        "system": if cfg.output.is_none() { doc } else { Value::Null },
    });
    Ok(finish(cfg, vec![check], extra, json!({}), json!({ "clifford": tol })))
}

const STREAM_CLI_FRAME: u64 = 0xc11f;
const STREAM_CLI_NORMAL: u64 = 0xc11e;

fn frame_seed(cfg: &RunConfig, i: u64) -> u64 {
    derive_seed(cfg.seed, STREAM_CLI_FRAME, i)
}

fn verify(cfg: &RunConfig) -> CliResult<Outcome> {
    let sys = load_system(cfg)?;
    let mut checks = Vec::new();
    let clifford_tol = if sys.is_exact() { 0.0 } else { cfg.tol };
    checks.push(verify_clifford_system(&sys, clifford_tol));
    let field = CartanMunznerField::new(&sys);
    checks.push(verify_munzner_pdes(&field, cfg.samples, cfg.seed, cfg.tol)?);
    if !checks[0].pass {
        // Tubes and frames presuppose a genuine Clifford system.
        let extra = json!({ "m": sys.m(), "half_dim": sys.half_dim(), "skipped": "geometric checks" });
        return Ok(finish(
            cfg,
            checks,
            extra,
            json!({ "base": cfg.seed }),
            json!({ "tol": cfg.tol, "clifford": clifford_tol }),
        ));
    }

    let tube = tube_constancy(&field, 10, 5, FRAC_PI_8, cfg.seed)?;
    let mut tube_report = VerificationReport::new("tube_constancy", cfg.tol).with_samples(tube.samples).with_seed(cfg.seed);
    tube_report.record("spread", &[tube.spread]);
    tube_report.record("level_value", &[tube.mean - (4.0 * FRAC_PI_8).cos()]);
    checks.push(tube_report);

    let frame = random_frame(&sys, frame_seed(cfg, 0))?;
    let spectrum_tol = cfg.tol.max(1e-8);
    let tp = TubePoint::new(frame.x.clone(), frame.normals[0].clone(), FRAC_PI_8)?;
    let spec = level_shape_spectrum(&field, &tp, spectrum_tol)?;
    let mut level = VerificationReport::new("level_spectrum", spectrum_tol);
    level.record("curvature_deviation", &[spec.max_deviation]);
    level.record("angle_spacing", &[spec.angle_spacing_residual]);
    level.record("cross_relations", &[spec.relation_residual]);
    if !spec.multiplicities_match {
        level.fail("curvature multiplicities differ from (m, m, N, N)");
    }
    checks.push(level);

    let mut focal = VerificationReport::new("focal_spectrum", spectrum_tol).with_seed(cfg.seed);
    let (m, n) = (frame.m(), frame.n());
    let mut deviations = Vec::new();
    for j in 0..10u64 {
        let mut rng = sample_rng(cfg.seed, STREAM_CLI_NORMAL, j);
        let c = unit_vector(&mut rng, m + 1);
        let nu = isoparam::fkm::normal_from_coefficients(&sys, &frame.x, &c);
        let s = focal_spectrum(&frame, &nu)?;
        if s.counts != [n, m, n] {
            focal.fail(&format!("spectrum counts {:?} differ from ({n}, {m}, {n})", s.counts));
        }
        deviations.push(s.max_deviation);
    }
    focal.record("cluster_deviation", &deviations);
    focal.samples = deviations.len();
    checks.push(focal);

    let tensors = extract_frame_tensors(&frame);
    let blocks = shape_blocks(&frame)?;
    checks.push(verify_focal_identities(&tensors, &blocks, cfg.tol));
    checks.push(antipodal_swap_check(&frame, cfg.tol, cfg.seed)?.report);
    checks.push(verify_slice_formula(&frame, cfg.samples, cfg.seed, cfg.tol)?);
    let extra = json!({ "m": m, "n": n, "half_dim": sys.half_dim() });
    Ok(finish(
        cfg,
        checks,
        extra,
        json!({ "base": cfg.seed, "frame": frame.basis_seed }),
        json!({ "tol": cfg.tol, "clifford": clifford_tol, "spectrum": spectrum_tol }),
    ))
}

fn frame_bundle(frame: &DarbouxFrame) -> CliResult<Value> {
    let tensors = extract_frame_tensors(frame);
    let bilinear = BilinearSystem::from_tensors(&tensors);
    Ok(json!({
        "frame": frame.to_document(),
        "tensors": tensors,
        "tensor_index_order": {
            "f_alpha_pa": "(alpha, p, a)",
            "f_mu_pa": "(mu, p, a)",
            "f_mu_alpha_a": "(mu, alpha, a)",
            "f_mu_alpha_p": "(mu, alpha, p)",
            "l": "(a, b, c) for L^a_{bc}",
        },
        "bilinear": bilinear.to_document(),
    }))
}

fn frame(cfg: &RunConfig) -> CliResult<Outcome> {
    let sys = load_system(cfg)?;
    let frame = random_frame(&sys, frame_seed(cfg, 0))?;
    let validation = frame.validate(cfg.tol);
    let bundle = frame_bundle(&frame)?;
    write_output(cfg, &bundle)?;
    Ok(finish(
        cfg,
        vec![validation],
        json!({ "bundle": bundle }),
        json!({ "base": cfg.seed, "frame": frame.basis_seed }),
        json!({ "tol": cfg.tol }),
    ))
}

fn quadforms(cfg: &RunConfig) -> CliResult<Outcome> {
    let sys = load_system(cfg)?;
    let frame = random_frame(&sys, frame_seed(cfg, 0))?;
    let tensors = extract_frame_tensors(&frame);
    let blocks = shape_blocks(&frame)?;
    let bilinear = BilinearSystem::from_tensors(&tensors);
    let spanning = rank_and_spanning_check(&bilinear, 10, cfg.seed, None)?;
    let mut nf = VerificationReport::new("normal_form", cfg.tol);
    let mut forms = Vec::new();
    for a in 0..frame.m() {
        let r = block_normal_form(&blocks.a[a], &blocks.b[a], &blocks.c[a], NormalFormOptions::new(cfg.tol))?;
        nf.record(&format!("block_{}", a + 1), &[r.max_residual]);
        forms.push(json!({
            "a": a + 1,
            "rank": r.rank,
            "sigmas": r.sigmas,
            "blocks": r.blocks,
            "kernel_dim_a": r.kernel_dim_a,
            "residuals": r.residuals,
        }));
    }
    let probe = incidence_dimension_probe(&bilinear, bilinear.m1, cfg.samples, cfg.samples.min(100), cfg.seed, None)?;
    let mut bounds = VerificationReport::new("quadform_bounds", 0.0);
    if !spanning.rank_bound_holds {
        bounds.fail("rank(M_a) < m2 - m1 for some a");
    }
    if !probe.fiber_bound_holds {
        bounds.fail("sampled fiber dimension exceeds m1 + m2 - 1");
    }
    let extra = json!({
        "spanning": spanning,
        "normal_forms": forms,
        "probe": probe,
    });
    Ok(finish(
        cfg,
        vec![nf, bounds],
        extra,
        json!({ "base": cfg.seed, "frame": frame.basis_seed }),
        json!({ "tol": cfg.tol, "rank": "max(dim) * eps * sigma_max" }),
    ))
}

fn reconstruct(cfg: &RunConfig) -> CliResult<Outcome> {
    let sys = load_system(cfg)?;
    let points = cfg.samples.max(1);
    let mut reports = Vec::with_capacity(points);
    let mut first = None;
    let mut seeds = Vec::new();
    for i in 0..points {
        let seed = frame_seed(cfg, i as u64);
        seeds.push(seed);
        let frame = random_frame(&sys, seed)?;
        let tensors = extract_frame_tensors(&frame);
        let recon = build_q_operators(&frame, &tensors)?;
        reports.push(verify_reconstruction(&recon, &sys, cfg.tol)?);
        if first.is_none() {
            first = Some(recon);
        }
    }
    let mut merged = VerificationReport::new("reconstruction", cfg.tol).with_samples(points).with_seed(cfg.seed);
    for key in ["symmetry", "orthogonality", "anticommutation", "span_distance"] {
        let values: Vec<f64> = reports.iter().filter_map(|r| r.component(key)).map(|c| c.max).collect();
        merged.record(key, &values);
    }
    let recon_doc = first.and_then(|r| r.to_system().ok()).map(|s| serde_json::to_value(s.to_document()).expect("serializable"));
    if let Some(doc) = &recon_doc {
        write_output(cfg, doc)?;
    }
    Ok(finish(
        cfg,
        vec![merged],
        json!({ "points": points }),
        json!({ "base": cfg.seed, "frames": seeds }),
        json!({ "tol": cfg.tol, "conditions": isoparam::reconstruct::CONDITION_TOL }),
    ))
}

fn enumerate(cfg: &RunConfig) -> CliResult<Outcome> {
    if cfg.max_m1 == 0 {
        return Err(Error::InvalidArgument("--max-m1 must be positive".into()).into());
    }
    let e = enumerate_fkm_pairs(cfg.max_m1);
    let value = serde_json::to_value(&e).expect("serializable");
    write_output(cfg, &value)?;
    let mut summary = format!("open FKM pairs up to m1 = {}:\n", cfg.max_m1);
    for (a, b) in &e.open_pairs {
        summary.push_str(&format!("  ({a}, {b})\n"));
    }
    summary.push_str(&format!(
        "  non-FKM open pair: ({}, {})\n",
        e.non_fkm_open_pair.0, e.non_fkm_open_pair.1
    ));
    Ok(Outcome {
        exit_code: EXIT_PASS,
        report: json!({
            "command": cfg.command,
            "provenance": provenance(cfg, json!({}), json!({})),
            "result": value,
            "pass": true,
        }),
        summary,
    })
}
