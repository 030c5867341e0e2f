//! Empirical verification of the scheme's probabilistic behavior at
//! desk scale: how often the discriminant driver `D` goes negative
//! (against its closed-form exponential bound), and Monte Carlo
//! estimates of running-maximum moments and inverse moments.
//!
//! All estimators are deterministic functions of `(seed, parameters)`:
//! paths are farmed out in parallel but collected in path order, and
//! floating-point reductions run sequentially over that order, so
//! results are independent of the worker count.

use rayon::prelude::*;

use crate::model::{GridSpec, ModelParams};
use crate::schemes::{implicit_step, simulate_path, Scheme, StepInputs};
use crate::stable_rng::{IncrementGrid, Normalization, StableLawSpec};
use crate::{Error, Result};

/// Observed vs bounded frequency of the rare event `D < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DNegReport {
    /// Steps per path.
    pub n: usize,
    /// Simulated paths.
    pub trials: usize,
    /// Largest per-step frequency `max_i #{D_i < 0}/trials`.
    pub observed_freq: f64,
    /// Closed-form bound `exp(-K * dt^(-(2-alpha)/(alpha-1)))`.
    pub theoretical_bound: f64,
    /// Binomial standard error at the maximizing step.
    pub mc_stderr: f64,
}

/// Monte Carlo moment estimate (direct or inverse).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    /// Moment order: `beta` for direct running-maximum moments, `p`
    /// for inverse moments.
    pub beta: f64,
    /// The Monte Carlo estimate.
    pub estimate: f64,
    /// Standard error of the estimate.
    pub stderr: f64,
    /// Steps per path.
    pub n: usize,
    /// Paths that entered the estimate.
    pub paths: usize,
    /// Paths excluded because the state hit exactly zero (inverse
    /// moments cannot invert them); always 0 for direct moments.
    pub excluded_paths: usize,
    /// Theoretical ceiling `(x0^(-p) + c_f*T)*exp(T*p*k)`, present only
    /// when the caller supplied the constant `c_f`.
    pub ceiling: Option<f64>,
    /// Advisory attached when a precondition is soft-violated (e.g.
    /// inverse moments at `gamma = 1/2` with `p >= 2a/sigma1^2 - 1`).
    pub warning: Option<String>,
}

/// The constant `K` in the discriminant-negativity bound:
///
/// ```text
/// K = (a - sigma1^2/2) * ((1 - sigma1^2*dt/2) * sin(pi*(alpha-1)/2) / sigma2^alpha)^(1/(alpha-1))
/// ```
///
/// Requires the admissibility conditions (`a - sigma1^2/2 > 0`,
/// `1 - sigma1^2*dt/2 > 0`). With `sigma2 = 0` the division yields
/// `K = +inf`, which downstream turns the probability bound into an
/// exact zero: without jumps, `D` cannot go negative at all.
pub fn dneg_bound_constant(params: &ModelParams, grid: &GridSpec) -> f64 {
    let feller = params.a - params.sigma1 * params.sigma1 / 2.0;
    let step_bound = 1.0 - params.sigma1 * params.sigma1 * grid.dt / 2.0;
    let angle = (std::f64::consts::PI * (params.alpha - 1.0) / 2.0).sin();
    feller
        * (step_bound * angle / params.sigma2.powf(params.alpha)).powf(1.0 / (params.alpha - 1.0))
}

/// The full bound `exp(-K * dt^(-(2-alpha)/(alpha-1)))` on the
/// per-step probability of `D < 0`.
pub fn dneg_probability_bound(params: &ModelParams, grid: &GridSpec) -> f64 {
    let k = dneg_bound_constant(params, grid);
    let exponent = -(2.0 - params.alpha) / (params.alpha - 1.0);
    (-k * grid.dt.powf(exponent)).exp()
}

/// Simulates `trials` implicit-scheme paths and reports the largest
/// per-step frequency of `D < 0` with its binomial standard error,
/// next to the closed-form bound.
///
/// Requires `trials >= 10_000` (the event is rare; smaller samples say
/// nothing). Path `j` draws its increments from stream `j` of `seed`.
pub fn estimate_dneg_frequency(
    params: &ModelParams,
    grid: &GridSpec,
    trials: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<DNegReport> {
    if trials < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "discriminant-negativity estimation needs at least 10^4 trials, got {trials}"
        )));
    }
    let stable = stable_spec_for(params, grid, normalization)?;
    let n = grid.n;
    // Integer counts reduce associatively, so a parallel tree reduction
    // is exactly deterministic here.
    let counts: Vec<u64> = (0..trials)
        .into_par_iter()
        .try_fold(
            || vec![0u64; n],
            |mut acc, j| -> Result<Vec<u64>> {
                let increments =
                    IncrementGrid::sample(seed, j as u64, n, grid.dt, stable.as_ref())?;
                let mut x = params.x0;
                for (i, slot) in acc.iter_mut().enumerate() {
                    let inputs = StepInputs {
                        x,
                        dw: increments.dw[i],
                        dz: increments.dz[i],
                        params,
                        grid,
                    };
                    let (next, diag) = implicit_step(&inputs);
                    if diag.d_negative {
                        *slot += 1;
                    }
                    x = next;
                }
                Ok(acc)
            },
        )
        .try_reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (ai, bi) in a.iter_mut().zip(b) {
                    *ai += bi;
                }
                Ok(a)
            },
        )?;
    let worst = counts.iter().copied().max().unwrap_or(0);
    let observed_freq = worst as f64 / trials as f64;
    let mc_stderr = (observed_freq * (1.0 - observed_freq) / trials as f64).sqrt();
    Ok(DNegReport {
        n,
        trials,
        observed_freq,
        theoretical_bound: dneg_probability_bound(params, grid),
        mc_stderr,
    })
}

/// Monte Carlo estimate of `E[max_i (X_i)^beta]` (the running-maximum
/// `beta`-moment of the implicit scheme), `1 <= beta < alpha`.
///
/// Path `j` draws its increments from stream `j` of `seed`.
pub fn estimate_scheme_moment(
    params: &ModelParams,
    grid: &GridSpec,
    beta: f64,
    paths: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<MomentReport> {
    if !(beta >= 1.0 && beta < params.alpha) {
        return Err(Error::InvalidParameter(format!(
            "moment order must lie in [1, alpha) = [1, {}), got {beta}",
            params.alpha
        )));
    }
    if paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let stable = stable_spec_for(params, grid, normalization)?;
    let values = simulate_statistics(params, grid, paths, seed, stable.as_ref(), |result| {
        result.diagnostics.max_state.powf(beta)
    })?;
    let (estimate, stderr) = mean_and_stderr(&values);
    Ok(MomentReport {
        beta,
        estimate,
        stderr,
        n: grid.n,
        paths,
        excluded_paths: 0,
        ceiling: None,
        warning: None,
    })
}

/// Monte Carlo estimate of the inverse moment `E[(X_T)^(-p)]`, `p > 0`.
///
/// Paths whose terminal state is exactly zero cannot be inverted and
/// are excluded (their count is reported). When the caller supplies
/// the constant `c_f`, the report carries the theoretical ceiling
/// `(x0^(-p) + c_f*T)*exp(T*p*k)`. At `gamma = 1/2` the estimate is
/// only guaranteed finite for `p < 2a/sigma1^2 - 1`; violating that
/// attaches a warning instead of failing.
#[allow(clippy::too_many_arguments)]
pub fn estimate_inverse_moment(
    params: &ModelParams,
    grid: &GridSpec,
    p: f64,
    paths: usize,
    seed: u64,
    normalization: Normalization,
    c_f: Option<f64>,
) -> Result<MomentReport> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inverse-moment order must be a positive finite number, got {p}"
        )));
    }
    if paths == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let mut warning = None;
    if params.gamma == 0.5 && params.sigma1 > 0.0 {
        let limit = 2.0 * params.a / (params.sigma1 * params.sigma1) - 1.0;
        if p >= limit {
            warning = Some(format!(
                "at gamma = 1/2 the inverse moment is only guaranteed finite for \
                 p < 2a/sigma1^2 - 1 = {limit}; got p = {p}"
            ));
        }
    }
    let stable = stable_spec_for(params, grid, normalization)?;
    let terminals = simulate_statistics(params, grid, paths, seed, stable.as_ref(), |result| {
        result.terminal
    })?;
    let values: Vec<f64> = terminals
        .iter()
        .filter(|&&t| t > 0.0)
        .map(|&t| t.powf(-p))
        .collect();
    let excluded_paths = paths - values.len();
    if values.is_empty() {
        return Err(Error::Estimation(
            "every path hit zero; inverse moment undefined".into(),
        ));
    }
    let (estimate, stderr) = mean_and_stderr(&values);
    let ceiling = c_f
        .map(|cf| (params.x0.powf(-p) + cf * grid.horizon) * (grid.horizon * p * params.k).exp());
    Ok(MomentReport {
        beta: p,
        estimate,
        stderr,
        n: grid.n,
        paths: values.len(),
        excluded_paths,
        ceiling,
        warning,
    })
}

/// Builds the stable-increment spec for the model, or `None` when the
/// jump scale is zero (no stable sampling needed).
fn stable_spec_for(
    params: &ModelParams,
    grid: &GridSpec,
    normalization: Normalization,
) -> Result<Option<StableLawSpec>> {
    if params.sigma2 > 0.0 {
        Ok(Some(StableLawSpec::new(
            params.alpha,
            normalization,
            grid.dt,
        )?))
    } else {
        Ok(None)
    }
}

/// Runs `paths` implicit-scheme simulations in parallel, collects one
/// statistic per path in path order, and returns the ordered vector
/// (so downstream reductions are worker-count independent).
fn simulate_statistics(
    params: &ModelParams,
    grid: &GridSpec,
    paths: usize,
    seed: u64,
    stable: Option<&StableLawSpec>,
    statistic: impl Fn(&crate::schemes::PathResult) -> f64 + Sync,
) -> Result<Vec<f64>> {
    (0..paths)
        .into_par_iter()
        .map(|j| {
            let increments = IncrementGrid::sample(seed, j as u64, grid.n, grid.dt, stable)?;
            let result = simulate_path(Scheme::Implicit, params, grid, &increments, false)?;
            Ok(statistic(&result))
        })
        .collect()
}

/// Two-pass mean and standard error (sample std / sqrt(len)).
fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (len - 1.0);
    (mean, (var / len).sqrt())
}
