//! Deterministic text output: the long-format metric CSV shared by all
//! commands, per-step path CSV for `simulate`, and whitespace-delimited
//! plot data with `#`-prefixed header comments.
//!
//! All floats are written with Rust's shortest round-trip formatting,
//! so parsing an emitted file recovers the original values exactly and
//! identical runs produce identical bytes.

use std::io::{self, Write};
use std::path::Path;

use stablecir::{GridSpec, ModelParams, RateReport, Scheme};

/// Exact header of the long-format metric CSV.
pub const CSV_HEADER: &str =
    "scheme,alpha,gamma,a,k,sigma1,sigma2,x0,T,n,samples,seed,metric,value,stderr";

/// Header comment of plot-data files.
pub const PLOT_HEADER: &str = "# columns: series x y stderr";

/// The configuration half of a metric row (everything left of the
/// metric name).
pub struct MetricContext<'a> {
    pub scheme: Scheme,
    pub params: &'a ModelParams,
    pub horizon: f64,
    pub seed: u64,
}

/// One plot-data row: series label, x, y, stderr.
pub type PlotRow = (&'static str, f64, f64, f64);

pub fn write_csv_header(w: &mut impl Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")
}

/// Writes one long-format metric row.
pub fn write_metric_row(
    w: &mut impl Write,
    ctx: &MetricContext,
    n: usize,
    samples: usize,
    metric: &str,
    value: f64,
    stderr: f64,
) -> io::Result<()> {
    let p = ctx.params;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        ctx.scheme.name(),
        p.alpha,
        p.gamma,
        p.a,
        p.k,
        p.sigma1,
        p.sigma2,
        p.x0,
        ctx.horizon,
        n,
        samples,
        ctx.seed,
        metric,
        value,
        stderr
    )
}

/// Writes a simulated path as `step,t,x` rows (step 0 is the initial
/// state).
pub fn write_path_csv(w: &mut impl Write, grid: &GridSpec, states: &[f64]) -> io::Result<()> {
    writeln!(w, "step,t,x")?;
    for (i, x) in states.iter().enumerate() {
        writeln!(w, "{},{},{}", i, i as f64 * grid.dt, x)?;
    }
    Ok(())
}

/// The plot rows for one rate measurement: the estimate plus the three
/// reference lines, all at `x = alpha`.
pub fn rate_plot_rows(report: &RateReport) -> Vec<PlotRow> {
    vec![
        (
            "rate",
            report.alpha,
            report.rate_estimate,
            report.rate_stderr,
        ),
        ("ref_half", report.alpha, report.reference_lines.half, 0.0),
        (
            "ref_inv2alpha",
            report.alpha,
            report.reference_lines.inv_two_alpha,
            0.0,
        ),
        (
            "ref_alpha_quarter",
            report.alpha,
            report.reference_lines.alpha_quarter,
            0.0,
        ),
    ]
}

/// Writes a plot-data file. Refuses an empty row set: a plot with no
/// data is always a caller bug.
pub fn write_plot_file(path: &Path, rows: &[PlotRow]) -> anyhow::Result<()> {
    if rows.is_empty() {
        anyhow::bail!("no plot data to write");
    }
    let mut w = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{PLOT_HEADER}")?;
    for (series, x, y, stderr) in rows {
        writeln!(w, "{series} {x} {y} {stderr}")?;
    }
    w.flush()?;
    Ok(())
}
