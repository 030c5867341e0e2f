//! Configuration resolution for the command-line front end.
//!
//! Every knob can come from three places, in increasing precedence:
//! built-in defaults, a TOML config file (`--config PATH`), and
//! command-line flags. Flags and file values are all optional; the
//! merge happens field by field.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Deserialize;
use stablecir::{ModelParams, Normalization, Scheme};

use crate::Failure;

/// Scheme selector shared by flags and config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Implicit,
    Em,
    DriftImplicit,
}

impl From<SchemeArg> for Scheme {
    fn from(value: SchemeArg) -> Self {
        match value {
            SchemeArg::Implicit => Scheme::Implicit,
            SchemeArg::Em => Scheme::Em,
            SchemeArg::DriftImplicit => Scheme::DriftImplicit,
        }
    }
}

/// Jump-increment normalization selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationArg {
    /// Scale increments by the Levy-measure constant `c_alpha`.
    Levy,
    /// Unit-scale increments `dt^(1/alpha) * X`.
    Unit,
}

impl From<NormalizationArg> for Normalization {
    fn from(value: NormalizationArg) -> Self {
        match value {
            NormalizationArg::Levy => Normalization::LevyMeasure,
            NormalizationArg::Unit => Normalization::UnitScale,
        }
    }
}

/// Flags shared by every subcommand. All optional so that config-file
/// values survive unless a flag explicitly overrides them.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML config file; flags override its values field by field.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Discretization scheme.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Stability index of the jump noise, in (1, 2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Diffusion exponent, in [1/2, 1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Constant drift inflow, >= 0.
    #[arg(long)]
    pub a: Option<f64>,
    /// Mean-reversion speed.
    #[arg(long)]
    pub k: Option<f64>,
    /// Diffusion scale, >= 0.
    #[arg(long)]
    pub sigma1: Option<f64>,
    /// Jump scale, >= 0.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Initial state, > 0.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Time horizon, > 0.
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    pub n: Option<usize>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// RNG seed; together with the config it determines every output byte.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism). Results do not
    /// depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV output path (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Jump-increment normalization.
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
    /// Plot-data output path (whitespace-delimited columns with `#`
    /// header comments).
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
}

/// Config-file schema. Unknown keys are rejected so typos surface as
/// validation failures instead of silently using defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub scheme: Option<SchemeArg>,
    pub normalization: Option<NormalizationArg>,
    #[serde(default)]
    pub model: FileModel,
    #[serde(default)]
    pub grid: FileGrid,
    #[serde(default)]
    pub mc: FileMc,
    #[serde(default)]
    pub output: FileOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileModel {
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub a: Option<f64>,
    pub k: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub x0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileGrid {
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub n: Option<usize>,
    pub n0: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMc {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOutput {
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

/// Fully resolved configuration: every field concrete, model
/// parameters already constructed (and therefore domain-checked).
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub scheme: Scheme,
    pub normalization: Normalization,
    pub params: ModelParams,
    pub horizon: f64,
    pub n: usize,
    pub n0: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

/// Merges defaults, config file, and flags into a concrete config.
///
/// File read errors are runtime failures; parse errors and model
/// domain violations are validation failures.
pub fn resolve(args: &CommonArgs) -> Result<ResolvedConfig, Failure> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|err| {
                Failure::Runtime(anyhow::anyhow!(
                    "cannot read config file {}: {err}",
                    path.display()
                ))
            })?;
            toml::from_str::<FileConfig>(&text).map_err(|err| {
                Failure::Validation(vec![format!("config file {}: {err}", path.display())])
            })?
        }
        None => FileConfig::default(),
    };
    let scheme: Scheme = args
        .scheme
        .or(file.scheme)
        .unwrap_or(SchemeArg::Implicit)
        .into();
    let normalization: Normalization = args
        .normalization
        .or(file.normalization)
        .unwrap_or(NormalizationArg::Unit)
        .into();
    let a = args.a.or(file.model.a).unwrap_or(1.05);
    let k = args.k.or(file.model.k).unwrap_or(2.0);
    let sigma1 = args.sigma1.or(file.model.sigma1).unwrap_or(0.37);
    let sigma2 = args.sigma2.or(file.model.sigma2).unwrap_or(0.37);
    let gamma = args.gamma.or(file.model.gamma).unwrap_or(0.54);
    let alpha = args.alpha.or(file.model.alpha).unwrap_or(1.5);
    let x0 = args.x0.or(file.model.x0).unwrap_or(1.0);
    let params = ModelParams::new(a, k, sigma1, sigma2, gamma, alpha, x0)
        .map_err(|err| Failure::Validation(vec![err.to_string()]))?;
    Ok(ResolvedConfig {
        scheme,
        normalization,
        params,
        horizon: args.horizon.or(file.grid.horizon).unwrap_or(1.0),
        n: args.n.or(file.grid.n).unwrap_or(64),
        n0: file.grid.n0,
        samples: args.samples.or(file.mc.samples).unwrap_or(1000),
        seed: args.seed.or(file.mc.seed).unwrap_or(1),
        workers: args.workers.or(file.mc.workers),
        out: args.out.clone().or(file.output.out),
        plot: args.plot.clone().or(file.output.plot),
    })
}
