//! Command-line front end.
//!
//! Every invocation that gets past `--help` writes `<out>/<run-id>/manifest.json`,
//! including failed ones. The output directory is taken from `--out`, then the
//! `AFFINE_CS_OUT` environment variable, then the `out` key of the JSON file
//! passed with `--config`, and finally `runs`.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure or a failed check.

mod commands;
pub mod output;

use crate::error::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{Check, Failure, GridData, RunDir, RunManifest};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const OUT_ENV: &str = "AFFINE_CS_OUT";
const DEFAULT_OUT: &str = "runs";

#[derive(Debug, Parser)]
#[command(
    name = "affine-cs",
    version,
    about = "Affine coherent states on the half-line"
)]
pub struct Cli {
    /// Output directory for run folders.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON configuration file; only the `out` key is read.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments, scale and constraint residuals of the fiducial vectors Φ_n.
    Fiducial(FiducialArgs),
    /// Data behind the phase-space portraits and fiducial plots.
    Figures(FiguresArgs),
    /// Exact evolution of a coherent state against its label flow.
    Evolve(EvolveArgs),
    /// Measured quantization of a classical symbol.
    Quantize(QuantizeArgs),
    /// SU(1,1) image of V_{q,p}, its factorizations and the algebra checks.
    Su11(Su11Args),
    /// Resolution of the identity on the leading fiducial vectors.
    Identity(IdentityArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fiducial(_) => "fiducial",
            Command::Figures(_) => "figures",
            Command::Evolve(_) => "evolve",
            Command::Quantize(_) => "quantize",
            Command::Su11(_) => "su11",
            Command::Identity(_) => "identity",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FiducialArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub n: Vec<usize>,
    /// Exponents γ of the reported moments c_γ.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "-4,-3,-1,0,1,2"
    )]
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    All,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FiguresArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub id: FigureId,
    #[arg(long, default_value_t = 3.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.05)]
    pub q_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub q_max: f64,
    #[arg(long, default_value_t = 200)]
    pub q_count: usize,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub p_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub p_max: f64,
    #[arg(long, default_value_t = 201)]
    pub p_count: usize,
    /// Initial label of the evolved state in fig1.
    #[arg(long, default_value_t = 5.0)]
    pub q0: f64,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub p0: f64,
    #[arg(long, value_delimiter = ',', default_value = "0,0.3,0.6,0.9,1.2,1.5")]
    pub times: Vec<f64>,
    /// Samples of the trajectory polyline.
    #[arg(long, default_value_t = 301)]
    pub polyline: usize,
    /// Label of the state portrayed in fig2.
    #[arg(long, default_value_t = 2.0)]
    pub fig2_q: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub fig2_p: f64,
    #[arg(long, default_value_t = 6.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 1001)]
    pub x_count: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub fig3_n: Vec<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 3.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value_t = 5.0)]
    pub q0: f64,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub p0: f64,
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "0,0.25,0.6036,1,1.5,2"
    )]
    pub times: Vec<f64>,
    /// Basis size N; the stability check also runs at 2N.
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    /// Basis scale; chosen from the labels when absent.
    #[arg(long)]
    pub xi_ref: Option<f64>,
    #[arg(long, default_value_t = 1e-5)]
    pub fidelity_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub delta_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub deficit_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QuantizeArgs {
    /// q^α, p, qp or p^2.
    #[arg(long, allow_hyphen_values = true)]
    pub symbol: String,
    /// phi<n> (Φ_n at ξ_{ν,n}) or grid (sampled e^{−(x+1/x)}).
    #[arg(long, default_value = "phi0")]
    pub fiducial: String,
    #[arg(long, default_value_t = 3.0)]
    pub nu: f64,
    /// Number of leading basis vectors used as test vectors.
    #[arg(long, default_value_t = 4)]
    pub functions: usize,
    #[arg(long, default_value_t = 3.0)]
    pub basis_nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub basis_xi: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Su11Args {
    #[arg(long)]
    pub q: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub p: f64,
    /// ν of the generator matrices.
    #[arg(long, default_value_t = 3.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 32)]
    pub size: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IdentityArgs {
    #[arg(long, default_value_t = 3.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    /// Number of test vectors Φ_k(·; ν, ξ_{ν,n}).
    #[arg(long, default_value_t = 4)]
    pub functions: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    out: Option<PathBuf>,
}

/// What a command hands back for the manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub grids: Vec<GridData>,
    pub notes: Vec<String>,
    pub report: Value,
}

/// Output directory by precedence: flag, environment, config file, default.
pub fn resolve_out(
    flag: Option<&Path>,
    env: Option<OsString>,
    config: Option<&Path>,
) -> Result<PathBuf> {
    if let Some(p) = flag {
        return Ok(p.to_path_buf());
    }
    if let Some(e) = env.filter(|e| !e.is_empty()) {
        return Ok(PathBuf::from(e));
    }
    if let Some(path) = config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        let cfg: Config = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        if let Some(out) = cfg.out {
            return Ok(out);
        }
    }
    Ok(PathBuf::from(DEFAULT_OUT))
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let t0 = Instant::now();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let _ = e.print();
            let (command, out) = salvage(&args);
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let err = Error::invalid(first.trim_start_matches("error: ").to_string());
            let out = out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            return fail_early(&out, &command, Value::Null, &err, t0);
        }
    };
    let command = cli.command.name();
    let parameters = parameters_of(&cli.command);
    let out = match resolve_out(
        cli.out.as_deref(),
        std::env::var_os(OUT_ENV),
        cli.config.as_deref(),
    ) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            let fallback = resolve_out(None, std::env::var_os(OUT_ENV), None)
                .unwrap_or_else(|_| DEFAULT_OUT.into());
            return fail_early(&fallback, command, parameters, &e, t0);
        }
    };
    let mut dir = match RunDir::create(&out, command) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Fiducial(a) => commands::fiducial(a, &mut dir),
        Command::Figures(a) => commands::figures(a, &mut dir),
        Command::Evolve(a) => commands::evolve(a, &mut dir),
        Command::Quantize(a) => commands::quantize(a, &mut dir),
        Command::Su11(a) => commands::su11(a, &mut dir),
        Command::Identity(a) => commands::identity(a, &mut dir),
    };
    finish(&dir, command, parameters, result, t0)
}

fn parameters_of(c: &Command) -> Value {
    let v = match c {
        Command::Fiducial(a) => serde_json::to_value(a),
        Command::Figures(a) => serde_json::to_value(a),
        Command::Evolve(a) => serde_json::to_value(a),
        Command::Quantize(a) => serde_json::to_value(a),
        Command::Su11(a) => serde_json::to_value(a),
        Command::Identity(a) => serde_json::to_value(a),
    };
    v.unwrap_or(Value::Null)
}

fn finish(
    dir: &RunDir,
    command: &str,
    parameters: Value,
    result: Result<Outcome>,
    t0: Instant,
) -> i32 {
    let (outcome, failure) = match result {
        Ok(o) => {
            let failed: Vec<&str> = o
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            let failure = (!failed.is_empty()).then(|| Failure {
                kind: "check_failed".into(),
                message: format!("failed checks: {}", failed.join(", ")),
                exit_code: 2,
            });
            (o, failure)
        }
        Err(e) => {
            let f = Failure {
                kind: e.kind().into(),
                message: e.to_string(),
                exit_code: e.exit_code(),
            };
            (Outcome::default(), Some(f))
        }
    };
    let exit_code = failure.as_ref().map_or(0, |f| f.exit_code);
    if let Some(f) = &failure {
        eprintln!("error: {}", f.message);
    }
    let manifest = RunManifest {
        command: command.to_string(),
        run_id: dir.run_id.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_ms: dir.started_unix_ms,
        wall_clock_seconds: t0.elapsed().as_secs_f64(),
        status: if exit_code == 0 { "ok" } else { "failed" }.into(),
        exit_code,
        failure,
        parameters,
        checks: outcome.checks,
        grids: outcome.grids,
        files: dir.files().to_vec(),
        notes: outcome.notes,
        report: outcome.report,
    };
    match dir.write_manifest(&manifest) {
        Ok(path) => {
            println!("{}", path.display());
            exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code.max(e.exit_code())
        }
    }
}

fn fail_early(out: &Path, command: &str, parameters: Value, err: &Error, t0: Instant) -> i32 {
    match RunDir::create(out, command) {
        Ok(dir) => finish(&dir, command, parameters, Err(err.clone()), t0),
        Err(_) => err.exit_code(),
    }
}

/// Best-effort command name and `--out` value from arguments clap rejected.
fn salvage(args: &[OsString]) -> (String, Option<PathBuf>) {
    let names = [
        "fiducial", "figures", "evolve", "quantize", "su11", "identity",
    ];
    let strs: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let command = strs
        .iter()
        .find(|s| names.contains(&s.as_str()))
        .cloned()
        .unwrap_or_else(|| "cli".into());
    let mut out = None;
    for (i, s) in strs.iter().enumerate() {
        if let Some(v) = s.strip_prefix("--out=") {
            out = Some(PathBuf::from(v));
        } else if s == "--out" {
            out = strs.get(i + 1).map(PathBuf::from);
        }
    }
    let out = out.or_else(|| {
        std::env::var_os(OUT_ENV)
            .filter(|e| !e.is_empty())
            .map(PathBuf::from)
    });
    (command, out)
}
