//! Model parameters, admissibility validation, and the SDE coefficient
//! functions.
//!
//! The process under study is
//!
//! ```text
//! dX_t = (a - k*X_t) dt + sigma1*(X_t+)^gamma dW_t + sigma2*(X_t-+)^(1/alpha) dZ_t
//! ```
//!
//! with `x+ = max(x, 0)`. Admissibility of a parameter set rests on four
//! conditions, checked by [`validate_model`]:
//!
//! 1. `2*gamma < alpha` (jump activity dominates the elasticity),
//! 2. `a - sigma1^2/2 > 0` (Feller-type condition keeping the diffusion
//!    away from zero),
//! 3. `1 + k*dt > 0` (the implicit scheme's denominator stays positive),
//! 4. `1 - sigma1^2*dt/2 > 0` (step size small enough for the
//!    discriminant analysis).

use crate::{Error, Result};

/// Positive part `max(x, 0)`.
#[inline]
fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// Coefficients of the SDE, plus the initial value.
///
/// Invariants enforced by [`ModelParams::new`]:
/// `gamma in [1/2, 1)`, `alpha in (1, 2)`, `x0 > 0`, and
/// `a, sigma1, sigma2 >= 0`. The mean-reversion speed `k` may be any
/// real number; `k <= 0` weakens the convergence guarantees and is
/// reported as a warning by [`validate_model`], not an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Mean-reversion level coefficient (constant drift term), `a >= 0`.
    pub a: f64,
    /// Mean-reversion speed (linear drift coefficient), any real.
    pub k: f64,
    /// Diffusion scale, `sigma1 >= 0`.
    pub sigma1: f64,
    /// Jump scale, `sigma2 >= 0`.
    pub sigma2: f64,
    /// Diffusion elasticity, `gamma in [1/2, 1)`; `1/2` is the CIR case.
    pub gamma: f64,
    /// Stable index of the driving jump process, `alpha in (1, 2)`.
    pub alpha: f64,
    /// Initial value, `x0 > 0`.
    pub x0: f64,
}

impl ModelParams {
    /// Builds a parameter set, enforcing the hard domain invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        k: f64,
        sigma1: f64,
        sigma2: f64,
        gamma: f64,
        alpha: f64,
        x0: f64,
    ) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::InvalidParameter(format!("a must be >= 0, got {a}")));
        }
        if !k.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "k must be finite, got {k}"
            )));
        }
        if !sigma1.is_finite() || sigma1 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma1 must be >= 0, got {sigma1}"
            )));
        }
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma2 must be >= 0, got {sigma2}"
            )));
        }
        if !(0.5..1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [1/2, 1), got {gamma}"
            )));
        }
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie strictly inside (1, 2), got {alpha}"
            )));
        }
        if !x0.is_finite() || x0 <= 0.0 {
            return Err(Error::InvalidParameter(format!("x0 must be > 0, got {x0}")));
        }
        Ok(Self {
            a,
            k,
            sigma1,
            sigma2,
            gamma,
            alpha,
            x0,
        })
    }

    /// Drift `a - k*x`, evaluated at the raw state (no positive-part
    /// clamp: the drift is defined for every real state).
    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        self.a - self.k * x
    }

    /// Diffusion coefficient `sigma1*(x+)^gamma`; nonnegative for every
    /// real `x` and zero for `x <= 0`.
    #[inline]
    pub fn diffusion_coeff(&self, x: f64) -> f64 {
        self.sigma1 * pos(x).powf(self.gamma)
    }

    /// Jump coefficient `sigma2*(x+)^(1/alpha)`; nonnegative for every
    /// real `x` and zero for `x <= 0`.
    #[inline]
    pub fn jump_coeff(&self, x: f64) -> f64 {
        self.sigma2 * pos(x).powf(1.0 / self.alpha)
    }
}

/// Uniform time grid on `[0, horizon]` together with the derived
/// per-step constants used by the implicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Time horizon (the final time of the simulation), `> 0`.
    pub horizon: f64,
    /// Number of steps, `>= 1`.
    pub n: usize,
    /// Step size `horizon / n`.
    pub dt: f64,
    /// Effective mean-reversion speed of the implicit scheme,
    /// `k_n = k / (1 + k*dt)`.
    pub k_n: f64,
    /// A strictly positive lower bound for `1 + k*dt` lying in `(0, 1)`:
    /// `kappa_floor = (1 + k*dt) / (2 + k*dt)`. This is a reporting
    /// constant for remainder estimates, not used by the stepping code.
    pub kappa_floor: f64,
}

impl GridSpec {
    /// Builds a grid; fails when `horizon <= 0`, `n == 0`, or the
    /// implicit denominator `1 + k*dt` is not strictly positive.
    pub fn new(horizon: f64, n: usize, k: f64) -> Result<Self> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "horizon must be > 0, got {horizon}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one step".into(),
            ));
        }
        let dt = horizon / n as f64;
        let kappa = 1.0 + k * dt;
        if kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "1 + k*dt must be > 0, got {kappa} (k = {k}, dt = {dt})"
            )));
        }
        Ok(Self {
            horizon,
            n,
            dt,
            k_n: k / kappa,
            kappa_floor: kappa / (1.0 + kappa),
        })
    }
}

/// Outcome of [`validate_model`]: empty `violations` means the
/// parameter/grid combination is admissible. Violations are data, not
/// errors; callers decide whether to refuse the run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    /// Hard admissibility failures; any entry makes the combination
    /// unsuitable for the implicit scheme's guarantees.
    pub violations: Vec<String>,
    /// Soft advisories (e.g. `k <= 0` weakens the rate guarantees).
    pub warnings: Vec<String>,
}

impl ValidationReport {
    /// True when no violation was recorded (warnings do not count).
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the four admissibility conditions of the model/grid pair and
/// reports every violated one (see the module docs for the list).
///
/// `k <= 0` is reported as a warning rather than a violation: the
/// scheme still converges, only with weaker rate guarantees.
pub fn validate_model(params: &ModelParams, grid: &GridSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    if 2.0 * params.gamma >= params.alpha {
        report.violations.push(format!(
            "2*gamma < alpha fails: 2*{} = {} >= {}",
            params.gamma,
            2.0 * params.gamma,
            params.alpha
        ));
    }
    let feller = params.a - params.sigma1 * params.sigma1 / 2.0;
    if feller <= 0.0 {
        report.violations.push(format!(
            "a - sigma1^2/2 > 0 fails: {} - {} = {feller}",
            params.a,
            params.sigma1 * params.sigma1 / 2.0
        ));
    }
    let kappa = 1.0 + params.k * grid.dt;
    if kappa <= 0.0 {
        report.violations.push(format!(
            "1 + k*dt > 0 fails: 1 + {}*{} = {kappa}",
            params.k, grid.dt
        ));
    }
    let step_bound = 1.0 - params.sigma1 * params.sigma1 * grid.dt / 2.0;
    if step_bound <= 0.0 {
        report.violations.push(format!(
            "1 - sigma1^2*dt/2 > 0 fails: got {step_bound} (sigma1 = {}, dt = {})",
            params.sigma1, grid.dt
        ));
    }
    if params.k <= 0.0 {
        report.warnings.push(format!(
            "k = {} is not positive; convergence-rate guarantees weaken",
            params.k
        ));
    }
    report
}
