//! Command-line pipeline: synthesize a reflectivity field, sample it, fill
//! the gaps back in by nuclear-norm completion, score the result, and render
//! figure-style artifacts.
//!
//! Exit codes: 0 success, 2 validation or format error, 3 solver failure.

mod config;
mod render;
mod report;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use radar_lowrank::io::{
    read_matrix_file, read_observations_file, write_matrix_file, write_observations_file,
    MatrixFormat,
};
use radar_lowrank::{
    apply_mask, default_svt_config, make_mask, singular_value_profile, svt_complete,
    synthesize_field, Error as CoreError, FieldSpec, MaskScheme, MaskSpec,
};

use config::Config;

#[derive(Debug)]
pub enum AppError {
    Core(CoreError),
    Msg(String),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Core(e) => e.fmt(f),
            AppError::Msg(m) => f.write_str(m),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Core(e)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(CoreError::Divergence { .. })
            | AppError::Core(CoreError::NoConvergence { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "radar-lowrank",
    version,
    about = "Low-rank reflectivity field pipeline: synth, sample, complete, eval, render"
)]
struct Cli {
    /// Seed for commands that draw random numbers.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Path of the command's primary output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// On-disk format for written matrices.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Key=value file supplying defaults for any omitted flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Bin,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => MatrixFormat::Csv,
            FormatArg::Bin => MatrixFormat::Binary,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a correlated reflectivity field and a JSON sidecar of the
    /// resolved parameters.
    Synth(SynthArgs),
    /// Sample a matrix into an observation file.
    Sample(SampleArgs),
    /// Fill unobserved entries by singular value thresholding.
    Complete(CompleteArgs),
    /// Compare a reconstruction against the original and low-rank references.
    Eval(EvalArgs),
    /// Render a matrix as an 8-bit PGM image.
    Render(RenderArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Range gates (matrix rows).
    #[arg(long)]
    rows: Option<usize>,
    /// Azimuth rays (matrix columns).
    #[arg(long)]
    cols: Option<usize>,
    /// Correlation length along range, in cells.
    #[arg(long)]
    corr_range: Option<f64>,
    /// Correlation length along azimuth, in cells.
    #[arg(long)]
    corr_azimuth: Option<f64>,
    /// Mean of the wet cells, dBZ.
    #[arg(long)]
    mean_dbz: Option<f64>,
    /// Standard deviation of the wet cells, dB.
    #[arg(long)]
    std_dbz: Option<f64>,
    /// Fraction of cells above the wet threshold.
    #[arg(long)]
    coverage: Option<f64>,
}

#[derive(Args)]
struct SampleArgs {
    /// Matrix file to sample.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Fraction of entries to keep.
    #[arg(long)]
    fraction: Option<f64>,
    /// Fraction of azimuth columns kept in full (azimuth scheme only).
    #[arg(long)]
    dwell_ratio: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SchemeArg {
    Uniform,
    Azimuth,
}

#[derive(Args)]
struct CompleteArgs {
    /// Observation file to complete.
    #[arg(long)]
    input: PathBuf,
    /// Threshold; default 5·√(m·n).
    #[arg(long)]
    tau: Option<f64>,
    /// Step size; default 1.2 / sampling fraction.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Stop when the relative residual on the observed entries drops below
    /// this.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Cap on the rank of each thresholded iterate.
    #[arg(long)]
    rank_cap: Option<usize>,
    /// Residual log path; defaults to <out>.residuals.csv.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// The full field the pipeline started from.
    #[arg(long)]
    original: PathBuf,
    /// The truncated field that was actually sampled.
    #[arg(long)]
    lowrank: PathBuf,
    /// The completed matrix under evaluation.
    #[arg(long)]
    reconstructed: PathBuf,
    /// Histogram bin width in dBZ.
    #[arg(long)]
    bin_width: Option<f64>,
}

#[derive(Args)]
struct RenderArgs {
    /// Matrix file to render.
    #[arg(long)]
    input: PathBuf,
    /// Observation file; unobserved cells render black.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Gray-scale floor; defaults to the data minimum.
    #[arg(long)]
    min_dbz: Option<f64>,
    /// Gray-scale ceiling; defaults to the data maximum.
    #[arg(long)]
    max_dbz: Option<f64>,
    /// Also write the descending singular values as CSV here.
    #[arg(long)]
    singular_values: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Prints to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) -> Result<(), AppError> {
    use std::io::Write as _;
    let mut out = std::io::stdout().lock();
    match out
        .write_all(text.as_bytes())
        .and_then(|()| out.write_all(b"\n"))
    {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(AppError::Core(e.into())),
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    let cfg = Config::load(cli.config.as_deref())?;
    let seed = cfg.pick(cli.seed, "seed", 0)?;
    let format: MatrixFormat = match cli.format {
        Some(f) => f.into(),
        None => match cfg.get::<String>("format")?.as_deref() {
            None | Some("csv") => MatrixFormat::Csv,
            Some("bin") => MatrixFormat::Binary,
            Some(other) => {
                return Err(AppError::Msg(format!(
                    "config key format: expected csv or bin, got {other:?}"
                )))
            }
        },
    };
    match &cli.command {
        Command::Synth(args) => cmd_synth(args, &cfg, seed, out_path(&cli)?, format),
        Command::Sample(args) => cmd_sample(args, &cfg, seed, out_path(&cli)?),
        Command::Complete(args) => cmd_complete(args, &cfg, out_path(&cli)?, format),
        Command::Eval(args) => cmd_eval(args, &cfg, cli.out.as_deref()),
        Command::Render(args) => cmd_render(args, &cfg, out_path(&cli)?),
    }
}

fn out_path(cli: &Cli) -> Result<&Path, AppError> {
    cli.out
        .as_deref()
        .ok_or_else(|| AppError::Msg("--out is required for this command".into()))
}

#[derive(Serialize)]
struct FieldSidecar {
    rows: usize,
    cols: usize,
    corr_range: f64,
    corr_azimuth: f64,
    mean_dbz: f64,
    std_dbz: f64,
    coverage: f64,
    seed: u64,
}

fn cmd_synth(
    args: &SynthArgs,
    cfg: &Config,
    seed: u64,
    out: &Path,
    format: MatrixFormat,
) -> Result<(), AppError> {
    let rows = cfg
        .pick_opt(args.rows, "rows")?
        .ok_or_else(|| AppError::Msg("--rows is required".into()))?;
    let cols = cfg
        .pick_opt(args.cols, "cols")?
        .ok_or_else(|| AppError::Msg("--cols is required".into()))?;
    let mut spec = FieldSpec::new(rows, cols);
    spec.correlation_length_range = cfg.pick(args.corr_range, "corr_range", spec.correlation_length_range)?;
    spec.correlation_length_azimuth =
        cfg.pick(args.corr_azimuth, "corr_azimuth", spec.correlation_length_azimuth)?;
    spec.mean_dbz = cfg.pick(args.mean_dbz, "mean_dbz", spec.mean_dbz)?;
    spec.std_dbz = cfg.pick(args.std_dbz, "std_dbz", spec.std_dbz)?;
    spec.coverage_fraction = cfg.pick(args.coverage, "coverage", spec.coverage_fraction)?;
    spec.seed = seed;

    let field = synthesize_field(&spec)?;
    write_matrix_file(out, &field, format)?;

    let sidecar = FieldSidecar {
        rows,
        cols,
        corr_range: spec.correlation_length_range,
        corr_azimuth: spec.correlation_length_azimuth,
        mean_dbz: spec.mean_dbz,
        std_dbz: spec.std_dbz,
        coverage: spec.coverage_fraction,
        seed,
    };
    let sidecar_path = sidecar_path(out);
    let file = File::create(&sidecar_path).map_err(|e| AppError::Core(e.into()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &sidecar)
        .map_err(|e| AppError::Msg(format!("cannot write {}: {e}", sidecar_path.display())))?;
    emit(&format!(
        "synthesized {}x{} field -> {} (sidecar {})",
        rows,
        cols,
        out.display(),
        sidecar_path.display()
    ))?;
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

fn cmd_sample(args: &SampleArgs, cfg: &Config, seed: u64, out: &Path) -> Result<(), AppError> {
    let matrix = read_matrix_file(&args.input)?;
    let fraction = cfg.pick(args.fraction, "fraction", 1.0 / 3.0)?;
    let scheme_arg = match cfg.pick_opt(args.scheme.map(|s| format!("{s:?}")), "scheme")? {
        None => SchemeArg::Uniform,
        Some(s) => match s.to_ascii_lowercase().as_str() {
            "uniform" => SchemeArg::Uniform,
            "azimuth" => SchemeArg::Azimuth,
            other => {
                return Err(AppError::Msg(format!(
                    "scheme: expected uniform or azimuth, got {other:?}"
                )))
            }
        },
    };
    let scheme = match scheme_arg {
        SchemeArg::Uniform => MaskScheme::UniformEntries,
        SchemeArg::Azimuth => MaskScheme::AzimuthMiss {
            dwell_ratio: cfg.pick(args.dwell_ratio, "dwell_ratio", 0.2)?,
        },
    };
    let mask = make_mask(&MaskSpec {
        scheme,
        fraction,
        rows: matrix.rows(),
        cols: matrix.cols(),
        seed,
    })?;
    let omega = apply_mask(&matrix, &mask)?;
    write_observations_file(out, &omega)?;
    emit(&format!(
        "sampled {} of {} entries -> {}",
        omega.len(),
        matrix.rows() * matrix.cols(),
        out.display()
    ))?;
    Ok(())
}

fn cmd_complete(
    args: &CompleteArgs,
    cfg: &Config,
    out: &Path,
    format: MatrixFormat,
) -> Result<(), AppError> {
    let omega = read_observations_file(&args.input)?;
    let mut svt = default_svt_config(&omega);
    svt.tau = cfg.pick(args.tau, "tau", svt.tau)?;
    svt.delta = cfg.pick(args.delta, "delta", svt.delta)?;
    svt.max_iters = cfg.pick(args.max_iters, "max_iters", svt.max_iters)?;
    svt.tolerance = cfg.pick(args.tolerance, "tolerance", svt.tolerance)?;
    svt.inner_rank_cap = cfg.pick_opt(args.rank_cap, "rank_cap")?;

    let result = svt_complete(&omega, &svt)?;
    write_matrix_file(out, &result.x_hat, format)?;

    let log_path = match cfg.pick_opt(args.log.clone(), "log")? {
        Some(p) => p,
        None => {
            let mut s = out.as_os_str().to_os_string();
            s.push(".residuals.csv");
            PathBuf::from(s)
        }
    };
    let mut log = BufWriter::new(File::create(&log_path).map_err(|e| AppError::Core(e.into()))?);
    writeln!(log, "# iteration,relative_residual").map_err(|e| AppError::Core(e.into()))?;
    for (k, r) in result.residuals.iter().enumerate() {
        writeln!(log, "{},{}", k + 1, r).map_err(|e| AppError::Core(e.into()))?;
    }
    log.flush().map_err(|e| AppError::Core(e.into()))?;

    emit(&format!(
        "{} after {} iterations, residual {:.3e}, rank {} -> {} (log {})",
        if result.converged { "converged" } else { "stopped" },
        result.iterations_used,
        result.final_residual,
        result.rank_of_solution,
        out.display(),
        log_path.display()
    ))?;
    Ok(())
}

fn cmd_eval(args: &EvalArgs, cfg: &Config, out: Option<&Path>) -> Result<(), AppError> {
    let original = read_matrix_file(&args.original)?;
    let lowrank = read_matrix_file(&args.lowrank)?;
    let reconstructed = read_matrix_file(&args.reconstructed)?;
    let bin_width = cfg.pick(args.bin_width, "bin_width", 1.0)?;
    let report = report::evaluate(&original, &lowrank, &reconstructed, bin_width)?;
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| AppError::Core(e.into()))?;
            serde_json::to_writer_pretty(BufWriter::new(file), &report)
                .map_err(|e| AppError::Msg(format!("cannot write {}: {e}", path.display())))?;
            emit(&format!(
                "epsilon1 {:.6e}, epsilon2 {:.6e}, same order: {} -> {}",
                report.epsilon1,
                report.epsilon2,
                report.same_order,
                path.display()
            ))?;
        }
        None => {
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| AppError::Msg(format!("cannot serialize report: {e}")))?;
            emit(&text)?;
        }
    }
    Ok(())
}

fn cmd_render(args: &RenderArgs, cfg: &Config, out: &Path) -> Result<(), AppError> {
    let matrix = read_matrix_file(&args.input)?;
    let mask = match &args.mask {
        Some(p) => Some(read_observations_file(p)?),
        None => None,
    };
    let (data_lo, data_hi) = matrix.min_max();
    let lo = cfg.pick(args.min_dbz, "min_dbz", data_lo)?;
    let hi = cfg.pick(args.max_dbz, "max_dbz", data_hi)?;
    let mut file = BufWriter::new(File::create(out).map_err(|e| AppError::Core(e.into()))?);
    render::render_pgm(&mut file, &matrix, mask.as_ref(), lo, hi)?;
    file.flush().map_err(|e| AppError::Core(e.into()))?;

    if let Some(sv_path) = &args.singular_values {
        let sigmas = singular_value_profile(&matrix)?;
        let mut f = BufWriter::new(File::create(sv_path).map_err(|e| AppError::Core(e.into()))?);
        writeln!(f, "# k,sigma").map_err(|e| AppError::Core(e.into()))?;
        for (k, s) in sigmas.iter().enumerate() {
            writeln!(f, "{},{}", k + 1, s).map_err(|e| AppError::Core(e.into()))?;
        }
        f.flush().map_err(|e| AppError::Core(e.into()))?;
    }
    emit(&format!(
        "rendered {} -> {}",
        args.input.display(),
        out.display()
    ))?;
    Ok(())
}
