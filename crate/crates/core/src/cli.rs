//! Command-line front end: `sketch`, `bounds`, and `experiment <name>`.
//!
//! Exit codes: 0 when every invoked experiment passed (and for `sketch` and
//! `bounds`), 1 when some experiment failed its criterion, 2 on a usage or
//! input error. Output goes to standard output unless `--output_path` is set.
//! JSON documents carry `"schema": 1` and echo every resolved numeric input.
//!
//! Wall-clock time is only recorded with `--timing`, so that the same
//! arguments always produce byte-identical output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    self, ChernoffParams, LargeSampleParams, EMBEDDING_ALPHA, EMBEDDING_DELTA, EMBEDDING_ETA,
    EMBEDDING_WINDOW_ROUNDED,
};
use crate::error::Error;
use crate::experiments::{
    self, ChernoffConfig, EmbeddingConfig, ExperimentSummary, MgfConfig, Mode, DEFAULT_EXHAUSTIVE_CAP,
};
use crate::linalg::{random_orthonormal, singular_values};
use crate::seeding::{self, purpose};
use crate::srht::draw_srht;

pub const SCHEMA_VERSION: u32 = 1;

/// Default `ι` for the large-sample report when `--iota` is absent.
pub const DEFAULT_IOTA: f64 = 0.25;

#[derive(Debug, Parser)]
#[command(name = "srht", version, about = "Subsampled randomized Hadamard transform toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw Φ and an orthonormal V, then report ΦV and its singular values.
    Sketch(SketchArgs),
    /// Evaluate every bound and sample-size formula for (k, n).
    Bounds(BoundsArgs),
    /// Run one validation experiment.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long = "output_path", alias = "output-path")]
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SketchArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "l", alias = "ell")]
    pub l: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include the signs and sample indices in the operator record.
    #[arg(long)]
    pub explicit: bool,
    /// Also write ΦV as a matrix CSV to this path.
    #[arg(long = "matrix_path", alias = "matrix-path")]
    pub matrix_path: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub iota: Option<f64>,
    /// Large-sample constant c (unverified placeholder).
    #[arg(long = "c")]
    pub c_const: Option<f64>,
    /// Large-sample constant C (unverified placeholder).
    #[arg(long = "bigC")]
    pub big_c_const: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentName {
    Embedding,
    Rownorm,
    Flatten,
    Coupon,
    Chernoff,
    Mgf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: ExperimentName,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "l", alias = "ell")]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Enumerate every subset instead of sampling (chernoff, mgf).
    #[arg(long)]
    pub exhaustive: bool,
    /// Row-norm exceedance parameter β (rownorm); defaults to k.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Sample sizes for the coupon sweep.
    #[arg(long, value_delimiter = ',')]
    pub ells: Option<Vec<usize>>,
    /// Deviation grid for chernoff.
    #[arg(long, value_delimiter = ',')]
    pub deviations: Option<Vec<f64>>,
    /// θ grid for mgf.
    #[arg(long, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
    /// Draw a new V in every embedding trial.
    #[arg(long = "fresh_v", alias = "fresh-v")]
    pub fresh_v: bool,
    /// Record wall-clock time in the summaries.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            let line = line.strip_prefix("error: ").unwrap_or(line);
            let _ = writeln!(stderr, "error: {line}");
            return 2;
        }
    };
    match dispatch(&cli.command, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Srht(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn dispatch(command: &Command, stdout: &mut dyn Write) -> Result<bool, CliError> {
    match command {
        Command::Sketch(args) => sketch(args, stdout).map(|_| true),
        Command::Bounds(args) => bounds_report(args, stdout).map(|_| true),
        Command::Experiment(args) => experiment(args, stdout),
    }
}

fn with_output<F>(output: &OutputArgs, stdout: &mut dyn Write, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match &output.output_path {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            body(&mut file)?;
            file.flush()?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn sketch(args: &SketchArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if args.k == 0 || args.k > args.l {
        return Err(CliError::Usage(format!("need 1 <= k <= l, got k = {}, l = {}", args.k, args.l)));
    }
    let phi = draw_srht(args.n, args.l, args.seed)?;
    let v = random_orthonormal(args.n, args.k, seeding::derive_seed(args.seed, purpose::TEST_MATRIX))?;
    let sketch = phi.apply_to_matrix(v.matrix())?;
    let spectrum = singular_values(&sketch)?;

    if let Some(path) = &args.matrix_path {
        let mut file = BufWriter::new(File::create(path)?);
        sketch.write_csv(&mut file)?;
        file.flush()?;
    }
    with_output(&args.output, stdout, |out| match args.output.format {
        Format::Json => {
            let rows: Vec<&[f64]> = (0..sketch.rows()).map(|i| sketch.row(i)).collect();
            write_json(
                out,
                &json!({
                    "schema": SCHEMA_VERSION,
                    "command": "sketch",
                    "config": { "n": args.n, "l": args.l, "k": args.k, "seed": args.seed },
                    "operator": phi.to_record(args.explicit),
                    "sketch": { "rows": sketch.rows(), "cols": sketch.cols(), "data": rows },
                    "singular_values": spectrum,
                }),
            )
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["index", "singular_value"]).map_err(csv_err)?;
            for (i, s) in spectrum.values().iter().enumerate() {
                w.write_record([(i + 1).to_string(), format!("{s:?}")]).map_err(csv_err)?;
            }
            w.flush()?;
            Ok(())
        }
    })
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Srht(Error::Csv(e.to_string()))
}

/// Every formula evaluated at `(k, n)`, as an ordered JSON object.
pub fn bounds_document(
    k: usize,
    n: usize,
    iota: Option<f64>,
    c_const: Option<f64>,
    big_c_const: Option<f64>,
) -> crate::Result<Value> {
    if k == 0 || n == 0 {
        return Err(Error::invalid("k, n", "must be positive"));
    }
    let large = LargeSampleParams::with_constants(
        iota.unwrap_or(DEFAULT_IOTA),
        c_const.unwrap_or(1.0),
        big_c_const.unwrap_or(1.0),
    )?;
    let thm31 = bounds::required_samples_thm31(k, n);
    let thm32 = bounds::required_samples_thm32(k, n, &large);
    let beta = k as f64;
    let row_norm = if beta * n as f64 > 1.0 {
        Some(bounds::row_norm_bound(n, k, beta)?)
    } else {
        None
    };
    let row_sampling = if k >= 2 {
        Some(bounds::row_sampling_failure_bound(k, EMBEDDING_ALPHA, EMBEDDING_DELTA, EMBEDDING_ETA)?)
    } else {
        None
    };
    let mu = EMBEDDING_ALPHA * (k as f64).ln();
    let chernoff = |deviation| ChernoffParams {
        k,
        b: 1.0,
        mu_min: mu,
        mu_max: mu,
        deviation,
    };
    let flatten_t = experiments::flattening_threshold(n);
    let rademacher_t = (8.0 * (beta * n as f64).ln()).sqrt();
    Ok(json!({
        "schema": SCHEMA_VERSION,
        "command": "bounds",
        "k": k,
        "n": n,
        "thm31_ell": thm31.ell,
        "thm31_applicable": thm31.applicable,
        "thm31_window": thm31.window,
        "thm31_window_rounded": EMBEDDING_WINDOW_ROUNDED,
        "thm31_failure_probability": thm31.failure_probability,
        "thm32": {
            "iota": large.iota,
            "c": large.c_const,
            "C": large.big_c_const,
            "constants_verified": false,
            "ell": thm32.ell,
            "applicable": thm32.applicable,
            "window": thm32.window,
            "failure_exponent": thm32.failure_exponent,
        },
        "row_norm": row_norm.map(|r| json!({
            "beta": beta,
            "bound": r.bound,
            "exceedance_probability": r.exceedance_probability,
        })),
        "row_sampling": row_sampling.map(|f| json!({
            "alpha": EMBEDDING_ALPHA,
            "delta": EMBEDDING_DELTA,
            "eta": EMBEDDING_ETA,
            "failure_probability": f,
            "chernoff_lower": bounds::chernoff_lower_tail(&chernoff(EMBEDDING_DELTA)).ok(),
            "chernoff_upper": bounds::chernoff_upper_tail(&chernoff(EMBEDDING_ETA)).ok(),
            "two_over_k": 2.0 / k as f64,
        })),
        "rademacher": {
            "t": rademacher_t,
            "tail": bounds::rademacher_tail(1.0, rademacher_t).ok(),
        },
        "hoeffding": {
            "t": flatten_t,
            "component_tail": bounds::hoeffding_component_tail(n, flatten_t)?,
            "union_bound": n as f64 * bounds::hoeffding_component_tail(n, flatten_t)?,
        },
    }))
}

fn bounds_report(args: &BoundsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let doc = bounds_document(args.k, args.n, args.iota, args.c_const, args.big_c_const)?;
    with_output(&args.output, stdout, |out| match args.output.format {
        Format::Json => write_json(out, &doc),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten_json("", &doc, &mut rows);
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["quantity", "value"]).map_err(csv_err)?;
            for (key, value) in rows {
                w.write_record([key, value]).map_err(csv_err)?;
            }
            w.flush()?;
            Ok(())
        }
    })
}

/// Dotted-path leaves of a JSON value; arrays index with `[i]`.
fn flatten_json(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_json(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_json(&format!("{prefix}[{i}]"), v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_owned(), s.clone())),
        other => out.push((prefix.to_owned(), other.to_string())),
    }
}

fn experiment(args: &ExperimentArgs, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let mode = if args.exhaustive { Mode::Exhaustive } else { Mode::MonteCarlo };
    let (config, summaries): (Value, Vec<ExperimentSummary>) = match args.name {
        ExperimentName::Embedding => {
            let cfg = EmbeddingConfig {
                n: args.n.unwrap_or(65_536),
                k: args.k.unwrap_or(16),
                ell: args.l,
                trials: args.trials,
                seed: args.seed,
                fresh_v: args.fresh_v,
            };
            let s = experiments::run_embedding_trials(&cfg)?;
            let config = json!({
                "n": cfg.n, "k": cfg.k, "l": s.plan.ell, "trials": cfg.trials,
                "seed": cfg.seed, "fresh_v": cfg.fresh_v,
            });
            (config, vec![s])
        }
        ExperimentName::Rownorm => {
            let (n, k) = (args.n.unwrap_or(4096), args.k.unwrap_or(16));
            let beta = args.beta.unwrap_or(k as f64);
            let s = experiments::run_row_norm_trials(n, k, beta, args.trials, args.seed)?;
            (
                json!({ "n": n, "k": k, "beta": beta, "trials": args.trials, "seed": args.seed }),
                vec![s],
            )
        }
        ExperimentName::Flatten => {
            let n = args.n.unwrap_or(1024);
            let s = experiments::run_flattening_trials(n, args.trials, args.seed)?;
            (json!({ "n": n, "trials": args.trials, "seed": args.seed }), vec![s])
        }
        ExperimentName::Coupon => {
            let k = args.k.unwrap_or(8);
            let ells = match (&args.ells, args.l) {
                (Some(list), _) => list.clone(),
                (None, Some(l)) => vec![l],
                (None, None) => default_coupon_grid(k),
            };
            let s = experiments::run_coupon_trials(k, &ells, args.trials, args.seed)?;
            (
                json!({ "k": k, "n": k * k, "ells": ells, "trials": args.trials, "seed": args.seed }),
                s,
            )
        }
        ExperimentName::Chernoff => {
            let defaults = ChernoffConfig::default();
            let cfg = ChernoffConfig {
                n: args.n.unwrap_or(defaults.n),
                k: args.k.unwrap_or(defaults.k),
                ell: args.l.unwrap_or(defaults.ell),
                deviations: args.deviations.clone().unwrap_or(defaults.deviations),
                seed: args.seed,
                mode,
                trials: args.trials,
                exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            };
            let s = experiments::run_chernoff_validation(&cfg)?;
            let config = json!({
                "n": cfg.n, "k": cfg.k, "l": cfg.ell, "deviations": cfg.deviations,
                "trials": cfg.trials, "seed": cfg.seed, "mode": mode.as_str(),
            });
            (config, s)
        }
        ExperimentName::Mgf => {
            let defaults = MgfConfig::default();
            let cfg = MgfConfig {
                n: args.n.unwrap_or(defaults.n),
                k: args.k.unwrap_or(defaults.k),
                ell: args.l.unwrap_or(defaults.ell),
                thetas: args.thetas.clone().unwrap_or(defaults.thetas),
                seed: args.seed,
                mode,
                trials: args.trials,
                exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            };
            let s = experiments::run_mgf_domination(&cfg)?;
            let config = json!({
                "n": cfg.n, "k": cfg.k, "l": cfg.ell, "thetas": cfg.thetas,
                "trials": cfg.trials, "seed": cfg.seed, "mode": mode.as_str(),
            });
            (config, s)
        }
    };
    let summaries: Vec<ExperimentSummary> = if args.timing {
        summaries
    } else {
        summaries.iter().map(ExperimentSummary::without_timing).collect()
    };
    let all_passed = summaries.iter().all(|s| s.passed);
    let name = args
        .name
        .to_possible_value()
        .map(|v| v.get_name().to_owned())
        .unwrap_or_default();
    with_output(&args.output, stdout, |out| match args.output.format {
        Format::Json => write_json(
            out,
            &json!({
                "schema": SCHEMA_VERSION,
                "command": "experiment",
                "experiment": name,
                "config": config,
                "summaries": summaries,
                "all_passed": all_passed,
            }),
        ),
        Format::Csv => Ok(experiments::write_csv(&summaries, out)?),
    })?;
    Ok(all_passed)
}

/// `k`, `1.5k`, `⌈k ln k⌉`, `3k`, clipped to `k²`.
fn default_coupon_grid(k: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = [k, k + k / 2, (k as f64 * (k as f64).ln()).ceil() as usize, 3 * k]
        .into_iter()
        .map(|l| l.clamp(1, k * k))
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}
