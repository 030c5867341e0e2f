//! Command-line front end for the `stablecir` library.
//!
//! Subcommands: `simulate` (one path as CSV), `strong-error` (coupled
//! two-resolution error at one step count), `rate-sweep` (strong rates
//! across stability indices, with plot-ready reference lines), and
//! `diagnostics` (discriminant-negativity frequency vs. its bound,
//! running-maximum and inverse moments).
//!
//! Exit codes: 0 on success, 2 when the configuration fails validation
//! (the violation list is printed to stderr as a JSON array), 1 on
//! runtime failures. For a fixed configuration and seed every emitted
//! byte is deterministic, regardless of `--workers`.

mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stablecir::{
    estimate_dneg_frequency, estimate_inverse_moment, estimate_scheme_moment,
    estimate_strong_error, rate_sweep, simulate_path, validate_model, GridSpec, IncrementGrid,
    StableLawSpec,
};

use config::{resolve, CommonArgs, ResolvedConfig};
use output::{
    rate_plot_rows, write_csv_header, write_metric_row, write_path_csv, write_plot_file,
    MetricContext, PlotRow,
};

/// How a command failed: validation problems exit 2 with a
/// machine-readable violation list, runtime problems exit 1.
pub enum Failure {
    Validation(Vec<String>),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Failure::Runtime(err)
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::Runtime(err.into())
    }
}

/// Maps a library error to an exit class: parameter-domain problems
/// are configuration validation failures, everything else is runtime.
fn core_err(err: stablecir::Error) -> Failure {
    match &err {
        stablecir::Error::InvalidParameter(_) => Failure::Validation(vec![err.to_string()]),
        _ => Failure::Runtime(err.into()),
    }
}

#[derive(Parser)]
#[command(
    name = "stablecir",
    version,
    about = "Positivity-preserving simulation of jump-extended CIR/CEV models \
             driven by one-sided stable noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write it as step,t,x CSV.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Estimate the coupled two-resolution strong error S_n.
    StrongError {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Measure strong-convergence rates across stability indices.
    RateSweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Stability indices to sweep, comma separated (default: the
        /// configured alpha alone).
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Coarse resolution of the two-point rate; pairs with 10*n0.
        #[arg(long)]
        n0: Option<usize>,
    },
    /// Report discriminant-negativity frequency against its bound,
    /// plus running-maximum and inverse moment estimates.
    Diagnostics {
        #[command(flatten)]
        common: CommonArgs,
        /// Paths for the negativity-frequency estimate (>= 10^4).
        #[arg(long)]
        trials: Option<usize>,
        /// Running-maximum moment order, in [1, alpha).
        #[arg(long)]
        beta: Option<f64>,
        /// Inverse-moment order, > 0.
        #[arg(long)]
        p: Option<f64>,
        /// Constant multiplying T in the inverse-moment ceiling; the
        /// ceiling is only reported when this is given.
        #[arg(long)]
        cf: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(violations)) => {
            let json = serde_json::to_string(&violations).unwrap_or_else(|_| "[]".to_string());
            eprintln!("{json}");
            ExitCode::from(2)
        }
        // A closed output pipe (e.g. piping into `head`) is how consumers
        // stop us early, not a failure of ours.
        Err(Failure::Runtime(err)) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(Failure::Runtime(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause
            .downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate { common } => {
            let cfg = resolve(&common)?;
            init_workers(&cfg)?;
            cmd_simulate(&cfg)
        }
        Command::StrongError { common } => {
            let cfg = resolve(&common)?;
            init_workers(&cfg)?;
            cmd_strong_error(&cfg)
        }
        Command::RateSweep { common, alphas, n0 } => {
            let cfg = resolve(&common)?;
            init_workers(&cfg)?;
            cmd_rate_sweep(&cfg, alphas, n0)
        }
        Command::Diagnostics {
            common,
            trials,
            beta,
            p,
            cf,
        } => {
            let cfg = resolve(&common)?;
            init_workers(&cfg)?;
            cmd_diagnostics(&cfg, trials, beta, p, cf)
        }
    }
}

/// Sizes the global worker pool when requested; the default pool uses
/// available parallelism. Estimator results do not depend on this.
fn init_workers(cfg: &ResolvedConfig) -> Result<(), Failure> {
    if let Some(workers) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|err| Failure::Runtime(anyhow::anyhow!("worker pool setup failed: {err}")))?;
    }
    Ok(())
}

/// Builds the time grid, surfacing domain problems as validation
/// failures.
fn build_grid(cfg: &ResolvedConfig, n: usize) -> Result<GridSpec, Failure> {
    GridSpec::new(cfg.horizon, n, cfg.params.k)
        .map_err(|err| Failure::Validation(vec![err.to_string()]))
}

/// Refuses to simulate on a configuration that fails the model's
/// standing assumptions; soft findings are printed as warnings.
fn gate(cfg: &ResolvedConfig, grid: &GridSpec) -> Result<(), Failure> {
    let report = validate_model(&cfg.params, grid);
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    if !report.ok() {
        return Err(Failure::Validation(report.violations));
    }
    Ok(())
}

fn open_out(cfg: &ResolvedConfig) -> Result<Box<dyn Write>, Failure> {
    match &cfg.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|err| {
                Failure::Runtime(anyhow::anyhow!("cannot create {}: {err}", path.display()))
            })?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

/// Builds the stable-increment spec when the model has jumps.
fn stable_spec(cfg: &ResolvedConfig, dt: f64) -> Result<Option<StableLawSpec>, Failure> {
    if cfg.params.sigma2 > 0.0 {
        StableLawSpec::new(cfg.params.alpha, cfg.normalization, dt)
            .map(Some)
            .map_err(core_err)
    } else {
        Ok(None)
    }
}

fn metric_context(cfg: &ResolvedConfig) -> MetricContext<'_> {
    MetricContext {
        scheme: cfg.scheme,
        params: &cfg.params,
        horizon: cfg.horizon,
        seed: cfg.seed,
    }
}

fn cmd_simulate(cfg: &ResolvedConfig) -> Result<(), Failure> {
    let grid = build_grid(cfg, cfg.n)?;
    gate(cfg, &grid)?;
    let stable = stable_spec(cfg, grid.dt)?;
    let increments =
        IncrementGrid::sample(cfg.seed, 0, cfg.n, grid.dt, stable.as_ref()).map_err(core_err)?;
    let result =
        simulate_path(cfg.scheme, &cfg.params, &grid, &increments, true).map_err(core_err)?;
    let states = result.path.expect("path was requested and must be present");
    let mut w = open_out(cfg)?;
    write_path_csv(&mut w, &grid, &states)?;
    w.flush()?;
    Ok(())
}

fn cmd_strong_error(cfg: &ResolvedConfig) -> Result<(), Failure> {
    let grid = build_grid(cfg, cfg.n)?;
    gate(cfg, &grid)?;
    let report = estimate_strong_error(
        cfg.scheme,
        &cfg.params,
        cfg.horizon,
        cfg.n,
        cfg.samples,
        cfg.seed,
        cfg.normalization,
    )
    .map_err(core_err)?;
    let mut w = open_out(cfg)?;
    write_csv_header(&mut w)?;
    write_metric_row(
        &mut w,
        &metric_context(cfg),
        report.n,
        report.samples,
        "s_n",
        report.s_n,
        report.stderr,
    )?;
    w.flush()?;
    if let Some(path) = &cfg.plot {
        let rows: Vec<PlotRow> = vec![("s_n", report.n as f64, report.s_n, report.stderr)];
        write_plot_file(path, &rows)?;
    }
    Ok(())
}

fn cmd_rate_sweep(
    cfg: &ResolvedConfig,
    alphas: Option<Vec<f64>>,
    n0: Option<usize>,
) -> Result<(), Failure> {
    let n0 = n0.or(cfg.n0).unwrap_or(8);
    let alphas = alphas.unwrap_or_else(|| vec![cfg.params.alpha]);
    let sweep = rate_sweep(
        cfg.scheme,
        &cfg.params,
        cfg.horizon,
        n0,
        &alphas,
        cfg.samples,
        cfg.seed,
        cfg.normalization,
    )
    .map_err(core_err)?;
    for (alpha, reason) in &sweep.skipped {
        eprintln!("warning: skipped alpha = {alpha}: {reason}");
    }
    if sweep.reports.is_empty() {
        return Err(Failure::Validation(
            sweep
                .skipped
                .into_iter()
                .map(|(alpha, reason)| format!("alpha = {alpha}: {reason}"))
                .collect(),
        ));
    }
    let mut w = open_out(cfg)?;
    write_csv_header(&mut w)?;
    for report in &sweep.reports {
        // The row's model columns reflect the swept index, not the base
        // config, so each row is self-describing.
        let mut params = cfg.params;
        params.alpha = report.alpha;
        let ctx = MetricContext {
            scheme: cfg.scheme,
            params: &params,
            horizon: cfg.horizon,
            seed: cfg.seed,
        };
        write_metric_row(
            &mut w,
            &ctx,
            n0,
            cfg.samples,
            "rate",
            report.rate_estimate,
            report.rate_stderr,
        )?;
    }
    w.flush()?;
    if let Some(path) = &cfg.plot {
        let rows: Vec<PlotRow> = sweep.reports.iter().flat_map(rate_plot_rows).collect();
        write_plot_file(path, &rows)?;
    }
    Ok(())
}

fn cmd_diagnostics(
    cfg: &ResolvedConfig,
    trials: Option<usize>,
    beta: Option<f64>,
    p: Option<f64>,
    cf: Option<f64>,
) -> Result<(), Failure> {
    let trials = trials.unwrap_or(10_000);
    let beta = beta.unwrap_or(1.0);
    let p = p.unwrap_or(1.0);
    let grid = build_grid(cfg, cfg.n)?;
    gate(cfg, &grid)?;
    let dneg = estimate_dneg_frequency(&cfg.params, &grid, trials, cfg.seed, cfg.normalization)
        .map_err(core_err)?;
    let moment = estimate_scheme_moment(
        &cfg.params,
        &grid,
        beta,
        cfg.samples,
        cfg.seed,
        cfg.normalization,
    )
    .map_err(core_err)?;
    let inverse = estimate_inverse_moment(
        &cfg.params,
        &grid,
        p,
        cfg.samples,
        cfg.seed,
        cfg.normalization,
        cf,
    )
    .map_err(core_err)?;
    if let Some(warning) = &inverse.warning {
        eprintln!("warning: {warning}");
    }
    if inverse.excluded_paths > 0 {
        eprintln!(
            "note: {} path(s) hit zero and were excluded from the inverse moment",
            inverse.excluded_paths
        );
    }
    if let Some(ceiling) = inverse.ceiling {
        eprintln!("note: inverse-moment ceiling (x0^(-p) + cf*T)*exp(T*p*k) = {ceiling}");
    }
    let ctx = metric_context(cfg);
    let mut w = open_out(cfg)?;
    write_csv_header(&mut w)?;
    write_metric_row(
        &mut w,
        &ctx,
        grid.n,
        dneg.trials,
        "dneg_freq",
        dneg.observed_freq,
        dneg.mc_stderr,
    )?;
    // The bound is analytic: no Monte Carlo behind it, hence samples 0.
    write_metric_row(
        &mut w,
        &ctx,
        grid.n,
        0,
        "dneg_bound",
        dneg.theoretical_bound,
        0.0,
    )?;
    write_metric_row(
        &mut w,
        &ctx,
        grid.n,
        cfg.samples,
        "moment",
        moment.estimate,
        moment.stderr,
    )?;
    write_metric_row(
        &mut w,
        &ctx,
        grid.n,
        cfg.samples,
        "inv_moment",
        inverse.estimate,
        inverse.stderr,
    )?;
    w.flush()?;
    Ok(())
}
