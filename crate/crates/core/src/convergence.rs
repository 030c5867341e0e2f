//! Strong-convergence measurement by coupled-path refinement.
//!
//! A coupled pair runs the same scheme on `2n` and `n` steps of the
//! same time horizon, with the coarse path consuming the pairwise sums
//! of the fine path's increments, so both paths see the same driving
//! noise. The strong error `S_n = E|X^{2n}_T - X^n_T|` then decays at
//! the scheme's strong rate, read off as a `log10` slope between
//! resolutions one decade apart (or a least-squares slope over a
//! ladder of resolutions).
//!
//! Estimators parallelize over sample pairs but collect per-pair
//! results in pair order and reduce sequentially, so every report is a
//! deterministic function of `(seed, parameters)` alone.

use rayon::prelude::*;

use crate::model::{validate_model, GridSpec, ModelParams};
use crate::schemes::{simulate_path, Scheme};
use crate::stable_rng::{coupled_grids, Normalization, StableLawSpec};
use crate::{Error, Result};

/// Natural log of 10, for converting `ln`-space errors to `log10`.
const LN_10: f64 = std::f64::consts::LN_10;

/// One coupled simulation: terminal values at `2n` and `n` steps
/// driven by the same noise, and their absolute gap.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPair {
    /// Terminal state of the `2n`-step path.
    pub fine_terminal: f64,
    /// Terminal state of the `n`-step path.
    pub coarse_terminal: f64,
    /// `|fine_terminal - coarse_terminal|`.
    pub abs_diff: f64,
}

/// Monte Carlo estimate of the strong error at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongErrorReport {
    /// Scheme under measurement.
    pub scheme: Scheme,
    /// Coarse step count (the fine member used `2n`).
    pub n: usize,
    /// Coupled pairs averaged.
    pub samples: usize,
    /// Estimate of `E|X^{2n}_T - X^n_T|`.
    pub s_n: f64,
    /// Standard error of the estimate.
    pub stderr: f64,
}

/// The three reference slopes a measured rate is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceLines {
    /// Classical diffusion rate 1/2.
    pub half: f64,
    /// Jump-modulated rate `1/(2*alpha)`.
    pub inv_two_alpha: f64,
    /// Jump-regime target `alpha/4`.
    pub alpha_quarter: f64,
}

impl ReferenceLines {
    /// Reference slopes for a given stability index.
    pub fn for_alpha(alpha: f64) -> Self {
        ReferenceLines {
            half: 0.5,
            inv_two_alpha: 1.0 / (2.0 * alpha),
            alpha_quarter: alpha / 4.0,
        }
    }
}

/// How a rate estimate was extracted from the measured errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    /// Two resolutions a decade apart: `log10 S_n - log10 S_10n`.
    LogDifference,
    /// Least-squares slope of `log10 S` against `log10 n`, negated.
    LeastSquares,
}

/// A measured strong-convergence rate with its context.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Stability index the measurement ran at.
    pub alpha: f64,
    /// Measured rate (positive means the error decays).
    pub rate_estimate: f64,
    /// Standard error of the rate, propagated from the `S_n` errors.
    pub rate_stderr: f64,
    /// The `(n, S_n)` points the rate was extracted from.
    pub pairs_used: Vec<(usize, f64)>,
    /// Slopes to compare against.
    pub reference_lines: ReferenceLines,
    /// Proven lower bound `min((alpha - 0.05)/2, 1/alpha)/2` on the
    /// strong rate.
    pub theoretical_floor: f64,
    /// The shifted index `alpha - 0.05` the floor is stated at.
    pub alpha_minus: f64,
    /// Extraction method.
    pub method: RateMethod,
}

/// A rate measurement per stability index, plus the indices that had
/// to be skipped (with the reason).
#[derive(Debug, Clone, PartialEq)]
pub struct RateSweepReport {
    /// One report per admissible index, in input order.
    pub reports: Vec<RateReport>,
    /// `(alpha, reason)` for every index that failed admissibility.
    pub skipped: Vec<(f64, String)>,
}

/// Proven lower bound on the strong rate at stability index `alpha`:
/// `min((alpha - 0.05)/2, 1/alpha) / 2`.
pub fn theoretical_floor(alpha: f64) -> f64 {
    0.5 * ((alpha - 0.05) / 2.0).min(1.0 / alpha)
}

/// Rate read off two error levels a decade apart in resolution:
/// `log10(s_n) - log10(s_10n)`.
pub fn rate_from_s(s_n: f64, s_10n: f64) -> f64 {
    s_n.log10() - s_10n.log10()
}

/// Simulates one coupled pair: a `2n`-step path and an `n`-step path
/// over the same horizon, the coarse one driven by the pairwise sums
/// of the fine increments. `stream_id` selects the noise; see
/// [`estimate_strong_error`] for the stream layout estimators use.
pub fn simulate_coupled_pair(
    scheme: Scheme,
    params: &ModelParams,
    horizon: f64,
    n: usize,
    seed: u64,
    stream_id: u64,
    normalization: Normalization,
) -> Result<CoupledPair> {
    let fine_grid = GridSpec::new(horizon, 2 * n, params.k)?;
    let coarse_grid = GridSpec::new(horizon, n, params.k)?;
    let stable = if params.sigma2 > 0.0 {
        Some(StableLawSpec::new(
            params.alpha,
            normalization,
            fine_grid.dt,
        )?)
    } else {
        None
    };
    let (fine, coarse) = coupled_grids(seed, stream_id, n, fine_grid.dt, stable.as_ref())?;
    #[cfg(debug_assertions)]
    for i in 0..n {
        debug_assert_eq!(coarse.dw[i], fine.dw[2 * i] + fine.dw[2 * i + 1]);
        debug_assert_eq!(coarse.dz[i], fine.dz[2 * i] + fine.dz[2 * i + 1]);
    }
    let fine_path = simulate_path(scheme, params, &fine_grid, &fine, false)?;
    let coarse_path = simulate_path(scheme, params, &coarse_grid, &coarse, false)?;
    Ok(CoupledPair {
        fine_terminal: fine_path.terminal,
        coarse_terminal: coarse_path.terminal,
        abs_diff: (fine_path.terminal - coarse_path.terminal).abs(),
    })
}

/// Estimates `S_n = E|X^{2n}_T - X^n_T|` over `samples` coupled pairs.
///
/// Requires `samples >= 100`. Pair `j` uses stream `(n << 32) | j`, so
/// different resolutions under the same seed stay independent while a
/// fixed `(n, j)` replays exactly.
pub fn estimate_strong_error(
    scheme: Scheme,
    params: &ModelParams,
    horizon: f64,
    n: usize,
    samples: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<StrongErrorReport> {
    if samples < 100 {
        return Err(Error::InvalidParameter(format!(
            "strong-error estimation needs at least 100 samples, got {samples}"
        )));
    }
    if (n as u64) >= (1 << 32) || (samples as u64) >= (1 << 32) {
        return Err(Error::InvalidParameter(
            "stream layout supports n and samples below 2^32".into(),
        ));
    }
    let diffs: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let stream_id = ((n as u64) << 32) | j as u64;
            simulate_coupled_pair(scheme, params, horizon, n, seed, stream_id, normalization)
                .map(|pair| pair.abs_diff)
        })
        .collect::<Result<_>>()?;
    let len = diffs.len() as f64;
    let s_n = diffs.iter().sum::<f64>() / len;
    let var = diffs.iter().map(|d| (d - s_n) * (d - s_n)).sum::<f64>() / (len - 1.0);
    let stderr = (var / len).sqrt();
    if s_n == 0.0 && (params.sigma1 > 0.0 || params.sigma2 > 0.0) {
        return Err(Error::Estimation(
            "strong error collapsed to zero under nondegenerate noise; \
             the coupling is broken"
                .into(),
        ));
    }
    Ok(StrongErrorReport {
        scheme,
        n,
        samples,
        s_n,
        stderr,
    })
}

/// Measures the strong rate from two resolutions a decade apart:
/// `S_n0` vs `S_10n0`, rate `= log10 S_n0 - log10 S_10n0`, with the
/// standard error propagated through the logs (delta method).
///
/// `samples_fn` maps each resolution to its sample count, so callers
/// can spend more samples where the errors are smaller. Requires
/// `n0 >= 8`.
pub fn estimate_rate(
    scheme: Scheme,
    params: &ModelParams,
    horizon: f64,
    n0: usize,
    samples_fn: impl Fn(usize) -> usize,
    seed: u64,
    normalization: Normalization,
) -> Result<RateReport> {
    if n0 < 8 {
        return Err(Error::InvalidParameter(format!(
            "rate measurement needs a base resolution of at least 8 steps, got {n0}"
        )));
    }
    let coarse = estimate_strong_error(
        scheme,
        params,
        horizon,
        n0,
        samples_fn(n0),
        seed,
        normalization,
    )?;
    let fine = estimate_strong_error(
        scheme,
        params,
        horizon,
        10 * n0,
        samples_fn(10 * n0),
        seed,
        normalization,
    )?;
    for report in [&coarse, &fine] {
        if report.s_n <= 0.0 {
            return Err(Error::Estimation(format!(
                "strong error at n = {} is not positive; cannot take logs",
                report.n
            )));
        }
    }
    let rate_estimate = rate_from_s(coarse.s_n, fine.s_n);
    let rel_a = coarse.stderr / coarse.s_n;
    let rel_b = fine.stderr / fine.s_n;
    let rate_stderr = (rel_a * rel_a + rel_b * rel_b).sqrt() / LN_10;
    Ok(RateReport {
        alpha: params.alpha,
        rate_estimate,
        rate_stderr,
        pairs_used: vec![(n0, coarse.s_n), (10 * n0, fine.s_n)],
        reference_lines: ReferenceLines::for_alpha(params.alpha),
        theoretical_floor: theoretical_floor(params.alpha),
        alpha_minus: params.alpha - 0.05,
        method: RateMethod::LogDifference,
    })
}

/// Measures the strong rate as the negated least-squares slope of
/// `log10 S_n` against `log10 n` over a ladder of resolutions, with
/// the slope's standard error propagated from the per-point errors.
///
/// Requires at least two rungs, each with at least 8 steps.
pub fn estimate_rate_ladder(
    scheme: Scheme,
    params: &ModelParams,
    horizon: f64,
    ns: &[usize],
    samples_fn: impl Fn(usize) -> usize,
    seed: u64,
    normalization: Normalization,
) -> Result<RateReport> {
    if ns.len() < 2 {
        return Err(Error::InvalidParameter(
            "a rate ladder needs at least two resolutions".into(),
        ));
    }
    if let Some(&bad) = ns.iter().find(|&&n| n < 8) {
        return Err(Error::InvalidParameter(format!(
            "rate measurement needs resolutions of at least 8 steps, got {bad}"
        )));
    }
    let mut pairs_used = Vec::with_capacity(ns.len());
    let mut xs = Vec::with_capacity(ns.len());
    let mut ys = Vec::with_capacity(ns.len());
    let mut sigmas = Vec::with_capacity(ns.len());
    for &n in ns {
        let report = estimate_strong_error(
            scheme,
            params,
            horizon,
            n,
            samples_fn(n),
            seed,
            normalization,
        )?;
        if report.s_n <= 0.0 {
            return Err(Error::Estimation(format!(
                "strong error at n = {n} is not positive; cannot take logs"
            )));
        }
        pairs_used.push((n, report.s_n));
        xs.push((n as f64).log10());
        ys.push(report.s_n.log10());
        sigmas.push(report.stderr / (report.s_n * LN_10));
    }
    let len = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / len;
    let y_mean = ys.iter().sum::<f64>() / len;
    let sxx = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum::<f64>();
    let sxy = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum::<f64>();
    let slope = sxy / sxx;
    let slope_var = xs
        .iter()
        .zip(&sigmas)
        .map(|(x, sigma)| {
            let c = (x - x_mean) / sxx;
            c * c * sigma * sigma
        })
        .sum::<f64>();
    Ok(RateReport {
        alpha: params.alpha,
        rate_estimate: -slope,
        rate_stderr: slope_var.sqrt(),
        pairs_used,
        reference_lines: ReferenceLines::for_alpha(params.alpha),
        theoretical_floor: theoretical_floor(params.alpha),
        alpha_minus: params.alpha - 0.05,
        method: RateMethod::LeastSquares,
    })
}

/// Runs the two-resolution rate measurement across a sweep of
/// stability indices, holding every other parameter (and the seed)
/// fixed so the sweeps share their random numbers.
///
/// Indices that fail construction or model admissibility on the
/// coarsest grid are skipped with a recorded reason rather than
/// failing the sweep.
#[allow(clippy::too_many_arguments)]
pub fn rate_sweep(
    scheme: Scheme,
    base: &ModelParams,
    horizon: f64,
    n0: usize,
    alphas: &[f64],
    samples: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<RateSweepReport> {
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for &alpha in alphas {
        let params = match ModelParams::new(
            base.a,
            base.k,
            base.sigma1,
            base.sigma2,
            base.gamma,
            alpha,
            base.x0,
        ) {
            Ok(p) => p,
            Err(err) => {
                skipped.push((alpha, err.to_string()));
                continue;
            }
        };
        let coarse_grid = GridSpec::new(horizon, n0, params.k)?;
        let validation = validate_model(&params, &coarse_grid);
        if !validation.ok() {
            skipped.push((alpha, validation.violations.join("; ")));
            continue;
        }
        reports.push(estimate_rate(
            scheme,
            &params,
            horizon,
            n0,
            |_| samples,
            seed,
            normalization,
        )?);
    }
    Ok(RateSweepReport { reports, skipped })
}
