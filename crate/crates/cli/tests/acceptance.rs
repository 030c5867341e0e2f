//! The project's acceptance gate: one test per acceptance criterion,
//! each printing a `criterion N PASS/FAIL — detail` line and asserting
//! the stated tolerance and runtime budget.
//!
//! Two criteria are measured faithfully and currently fail at desk
//! scale; both tests print the measured values and the mechanism, then
//! fail honestly rather than loosening their tolerances:
//!
//! - Criterion 7 (jump-regime rate sweep against the alpha/4 band):
//!   the two-resolution protocol on these parameters reads rates
//!   between 1/2 and 1/alpha, which sit above the alpha/4 targets for
//!   every alpha in the sweep.
//! - Criterion 8 (running-maximum moment stability): the discrete
//!   running maximum climbs toward the continuous supremum as the grid
//!   refines, and at 20,000 paths the n = 16 vs n = 128 refinement
//!   drift resolves at slightly more than five combined standard
//!   errors. The estimates are bounded in n (they plateau near 1.31 by
//!   n = 512); it is the zero-drift reading at this sample size that
//!   fails, by a small margin.

// Expected values are written with every digit the reference
// computation printed, even past f64 round-trip precision.
#![allow(clippy::excessive_precision)]

use std::process::Command;
use std::time::Instant;

use rand::Rng;
use stablecir::{
    decompose_step, estimate_dneg_frequency, estimate_rate, estimate_scheme_moment, implicit_step,
    rate_sweep, sample_brownian_increments, sample_stable_increments, simulate_path, stream_rng,
    GridSpec, IncrementGrid, ModelParams, Normalization, Scheme, StableLawSpec, StepInputs,
};

fn jump_benchmark_params(alpha: f64) -> ModelParams {
    ModelParams::new(1.05, 2.0, 0.37, 0.37, 0.54, alpha, 1.0).unwrap()
}

fn budget(start: Instant, seconds: u64, label: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < seconds as f64,
        "{label}: took {elapsed:.1}s, budget {seconds}s"
    );
}

#[test]
fn criterion_1_positivity_under_extreme_noise() {
    let start = Instant::now();
    let mut rng = stream_rng(4242, 0);
    let steps_per_set = 10_000usize;
    let dt = 0.01;
    let mut total_steps = 0usize;
    for set in 0..100u64 {
        // Random admissible parameter set: Feller-type drift margin,
        // jump exponent below the stability index, mild mean reversion.
        let gamma = 0.5 + 0.45 * rng.random::<f64>();
        let alpha_lo = (2.0 * gamma).max(1.0) + 0.01;
        let alpha = alpha_lo + (1.99 - alpha_lo) * rng.random::<f64>();
        let sigma1 = 2.0 * rng.random::<f64>();
        let a = sigma1 * sigma1 / 2.0 + 0.01 + 2.0 * rng.random::<f64>();
        let sigma2 = 2.0 * rng.random::<f64>();
        let k = -5.0 + 10.0 * rng.random::<f64>();
        let x0 = 0.01 + 9.99 * rng.random::<f64>();
        let params = ModelParams::new(a, k, sigma1, sigma2, gamma, alpha, x0).unwrap();
        let grid = GridSpec::new(dt * steps_per_set as f64, steps_per_set, k).unwrap();
        // Raw increments spanning +-10^3, far beyond any distributional
        // tail the samplers would produce.
        let dw: Vec<f64> = (0..steps_per_set)
            .map(|_| 2000.0 * (rng.random::<f64>() - 0.5))
            .collect();
        let dz: Vec<f64> = (0..steps_per_set)
            .map(|_| 2000.0 * (rng.random::<f64>() - 0.5))
            .collect();
        let increments = IncrementGrid {
            n: steps_per_set,
            dw,
            dz,
            seed: 4242,
            stream_id: set,
        };
        let result = simulate_path(Scheme::Implicit, &params, &grid, &increments, false).unwrap();
        assert!(
            result.diagnostics.min_state >= 0.0,
            "set {set}: negative state {}",
            result.diagnostics.min_state
        );
        assert!(
            result.terminal.is_finite() && result.diagnostics.max_state.is_finite(),
            "set {set}: non-finite state"
        );
        total_steps += steps_per_set;
    }
    assert_eq!(total_steps, 1_000_000);
    println!(
        "criterion 1 PASS — {total_steps} implicit steps over 100 random parameter sets \
         with +-10^3 noise: no negative, NaN, or infinite states"
    );
    budget(start, 60, "criterion 1");
}

#[test]
fn criterion_2_deterministic_reduction_to_the_closed_recursion() {
    let start = Instant::now();
    let n = 1usize << 16;
    let params = ModelParams::new(1.05, 2.0, 0.0, 0.0, 0.54, 1.5, 1.0).unwrap();
    let grid = GridSpec::new(1.0, n, params.k).unwrap();
    let increments = IncrementGrid {
        n,
        dw: vec![0.0; n],
        dz: vec![0.0; n],
        seed: 0,
        stream_id: 0,
    };
    let result = simulate_path(Scheme::Implicit, &params, &grid, &increments, true).unwrap();
    let states = result.path.unwrap();
    let mut expected: f64 = params.x0;
    let mut worst_rel: f64 = 0.0;
    for (i, &x) in states.iter().enumerate() {
        let rel = (x - expected).abs() / expected;
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 1e-14,
            "step {i}: path {x} vs recursion {expected} (rel {rel:.2e})"
        );
        expected = (expected + params.a * grid.dt) / (1.0 + params.k * grid.dt);
    }
    println!(
        "criterion 2 PASS — sigma1 = sigma2 = 0 path matches the closed recursion over \
         2^16 steps; worst relative deviation {worst_rel:.2e} (tolerance 1e-14)"
    );
    budget(start, 60, "criterion 2");
}

#[test]
fn criterion_3_step_decomposition_identity() {
    let start = Instant::now();
    let params = jump_benchmark_params(1.5);
    let grid = GridSpec::new(1.0, 64, params.k).unwrap();
    let spec = StableLawSpec::new(params.alpha, Normalization::UnitScale, grid.dt).unwrap();
    let mut rng = stream_rng(3003, 0);
    let steps = 10_000usize;
    let dws = sample_brownian_increments(steps, grid.dt, &mut rng).unwrap();
    let dzs = sample_stable_increments(&spec, steps, &mut rng).unwrap();
    let mut worst_recon: f64 = 0.0;
    let mut worst_forms: f64 = 0.0;
    for i in 0..steps {
        let x = 0.01 + 4.99 * rng.random::<f64>();
        let inputs = StepInputs {
            x,
            dw: dws[i],
            dz: dzs[i],
            params: &params,
            grid: &grid,
        };
        let (next, _) = implicit_step(&inputs);
        let dec = decompose_step(&inputs, next);
        let reconstructed =
            x + dec.drift_term + dec.diffusion_term + dec.jump_term + dec.remainder_closed;
        let recon_rel = (reconstructed - next).abs() / next.abs().max(1e-300);
        worst_recon = worst_recon.max(recon_rel);
        assert!(
            recon_rel <= 1e-12,
            "step {i}: reconstruction off by {recon_rel:.2e} relative"
        );
        // The difference-based remainder subtracts terms of the step's
        // own magnitude, so compare the two forms relative to that
        // scale rather than to the (often tiny) remainder itself.
        let scale = x
            .abs()
            .max(next.abs())
            .max(dec.remainder_closed.abs())
            .max(1.0);
        let forms_rel = (dec.remainder_closed - dec.remainder_diff).abs() / scale;
        worst_forms = worst_forms.max(forms_rel);
        assert!(
            forms_rel <= 1e-10,
            "step {i}: remainder forms disagree by {forms_rel:.2e} of the step scale"
        );
    }
    println!(
        "criterion 3 PASS — decomposition identity on {steps} random steps: worst \
         reconstruction deviation {worst_recon:.2e} (tolerance 1e-12), worst \
         closed-vs-difference remainder deviation {worst_forms:.2e} (tolerance 1e-10)"
    );
    budget(start, 60, "criterion 3");
}

#[test]
fn criterion_4_stable_sampler_laplace_oracle() {
    let start = Instant::now();
    // psi(m) = m^alpha * Gamma(2 - alpha)/(alpha*(alpha - 1)), evaluated
    // independently with 50-digit arithmetic before the build.
    let table: [(f64, [(f64, f64); 3]); 3] = [
        (
            1.2,
            [
                (0.5, 2.111_501_735_603_433_8),
                (1.0, 4.850_957_140_522_097_4),
                (2.0, 11.144_572_974_957_708),
            ],
        ),
        (
            1.5,
            [
                (0.5, 0.835_542_758_210_333_5),
                (1.0, 2.363_271_801_207_354_7),
                (2.0, 6.684_342_065_682_668),
            ],
        ),
        (
            1.8,
            [
                (0.5, 0.915_537_260_420_400_5),
                (1.0, 3.188_085_911_110_279_9),
                (2.0, 11.101_559_943_013_965),
            ],
        ),
    ];
    let dt = 0.1;
    let draws_per_alpha = 1_000_000usize;
    let mut details = Vec::new();
    for (idx, (alpha, rows)) in table.iter().enumerate() {
        let spec = StableLawSpec::new(*alpha, Normalization::LevyMeasure, dt).unwrap();
        let mut rng = stream_rng(4004, idx as u64);
        let draws = sample_stable_increments(&spec, draws_per_alpha, &mut rng).unwrap();
        for (m, psi) in rows {
            let transformed: Vec<f64> = draws.iter().map(|z| (-m * z).exp()).collect();
            let len = transformed.len() as f64;
            let mean = transformed.iter().sum::<f64>() / len;
            let var = transformed
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / (len - 1.0);
            let se = (var / len).sqrt();
            let target = (dt * psi).exp();
            let deviation = (mean - target).abs() / se;
            assert!(
                deviation <= 4.0,
                "alpha = {alpha}, m = {m}: empirical transform {mean} vs {target} \
                 is {deviation:.2} standard errors off"
            );
            details.push(format!("alpha {alpha} m {m}: {deviation:.2}se"));
        }
    }
    println!(
        "criterion 4 PASS — Laplace transform within 4 MC standard errors on all 9 \
         (alpha, m) cells at N = 10^6: {}",
        details.join(", ")
    );
    budget(start, 60, "criterion 4");
}

#[test]
fn criterion_5_discriminant_negativity_bound() {
    let start = Instant::now();
    let params = jump_benchmark_params(1.5);
    let grid = GridSpec::new(1.0, 64, params.k).unwrap();
    let report =
        estimate_dneg_frequency(&params, &grid, 100_000, 51, Normalization::UnitScale).unwrap();
    let allowance = report.theoretical_bound + 3.0 * report.mc_stderr;
    assert!(
        report.observed_freq <= allowance,
        "observed max-over-step frequency {} exceeds bound {} + 3se {}",
        report.observed_freq,
        report.theoretical_bound,
        report.mc_stderr
    );
    println!(
        "criterion 5 PASS — observed max-over-step D<0 frequency {} over 10^5 paths at \
         n = 64; closed-form bound {:.3e}",
        report.observed_freq, report.theoretical_bound
    );
    budget(start, 120, "criterion 5");
}

#[test]
fn criterion_6_diffusion_rate_near_one_half() {
    let start = Instant::now();
    let params = ModelParams::new(1.05, 2.0, 1.0, 0.0, 0.54, 1.5, 1.0).unwrap();
    let mut rates = Vec::new();
    for seed in 11..=15u64 {
        let report = estimate_rate(
            Scheme::Implicit,
            &params,
            1.0,
            32,
            |_| 9216,
            seed,
            Normalization::UnitScale,
        )
        .unwrap();
        assert!(
            (report.rate_estimate - 0.5).abs() <= 0.12,
            "seed {seed}: rate {} outside 0.5 +- 0.12",
            report.rate_estimate
        );
        rates.push(format!("{:.3}", report.rate_estimate));
    }
    println!(
        "criterion 6 PASS — diffusion-only rates at n = 2^5, N = (3n)^2 across seeds \
         11..15: [{}], all within 0.5 +- 0.12",
        rates.join(", ")
    );
    budget(start, 300, "criterion 6");
}

#[test]
fn criterion_7_jump_rate_sweep_against_alpha_quarter() {
    let start = Instant::now();
    let base = jump_benchmark_params(1.5);
    let alphas = [1.2, 1.4, 1.6, 1.8];
    let sweep = rate_sweep(
        Scheme::Implicit,
        &base,
        1.0,
        64,
        &alphas,
        36_864,
        1,
        Normalization::UnitScale,
    )
    .unwrap();
    assert!(sweep.skipped.is_empty(), "no alpha should be skipped");
    assert_eq!(sweep.reports.len(), alphas.len());
    let mut abs_devs = Vec::new();
    for report in &sweep.reports {
        let target = report.reference_lines.alpha_quarter;
        let floor_margin =
            report.rate_estimate + 3.0 * report.rate_stderr - report.theoretical_floor;
        println!(
            "  alpha {:.1}: rate {:.3} +- {:.3}, alpha/4 target {:.3}, floor {:.4} \
             (margin {:+.3})",
            report.alpha,
            report.rate_estimate,
            report.rate_stderr,
            target,
            report.theoretical_floor,
            floor_margin
        );
        assert!(
            floor_margin >= 0.0,
            "alpha {}: rate {} + 3se sits below the theoretical floor {}",
            report.alpha,
            report.rate_estimate,
            report.theoretical_floor
        );
        abs_devs.push((report.rate_estimate - target).abs());
    }
    let mad = abs_devs.iter().sum::<f64>() / abs_devs.len() as f64;
    budget(start, 1200, "criterion 7");
    let status = if mad <= 0.12 { "PASS" } else { "FAIL" };
    println!(
        "criterion 7 {status} — jump-regime sweep at n = 2^6, N = (3n)^2: mean absolute \
         deviation from alpha/4 = {mad:.3} (band 0.12); theoretical-floor check passed \
         for every alpha. The coupled two-resolution protocol measures rates between \
         1/2 and 1/alpha on these parameters (the pairwise-summed jump input cancels \
         exactly, leaving only coefficient-smoothness error), so the alpha/4 band is \
         not reachable at this scale."
    );
    assert!(
        mad <= 0.12,
        "mean absolute deviation from alpha/4 is {mad:.3}, outside the 0.12 band"
    );
}

#[test]
fn criterion_8_moment_stability_across_resolutions() {
    let start = Instant::now();
    let params = jump_benchmark_params(1.5);
    let paths = 20_000usize;
    let mut reports = Vec::new();
    for n in [16usize, 32, 64, 128] {
        let grid = GridSpec::new(1.0, n, params.k).unwrap();
        let report =
            estimate_scheme_moment(&params, &grid, 1.0, paths, 21, Normalization::UnitScale)
                .unwrap();
        reports.push(report);
    }
    let mut worst: Option<(usize, usize, f64, f64)> = None;
    for i in 0..reports.len() {
        for j in (i + 1)..reports.len() {
            let (a, b) = (&reports[i], &reports[j]);
            let combined = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
            let gap = (a.estimate - b.estimate).abs();
            if worst.is_none_or(|(_, _, g, c)| gap / combined > g / c) {
                worst = Some((a.n, b.n, gap, combined));
            }
        }
    }
    let (wn_a, wn_b, wgap, wcombined) = worst.unwrap();
    let summary: Vec<String> = reports
        .iter()
        .map(|r| format!("n {}: {:.4}+-{:.4}", r.n, r.estimate, r.stderr))
        .collect();
    budget(start, 300, "criterion 8");
    let status = if wgap <= 5.0 * wcombined {
        "PASS"
    } else {
        "FAIL"
    };
    println!(
        "criterion 8 {status} — running-maximum first moments across resolutions: {summary}; \
         widest pairwise gap is n {wn_a} vs n {wn_b}: {wgap:.4} against a 5-sigma \
         allowance of {allowance:.4}. The discrete running maximum climbs toward the \
         continuous supremum as the grid refines (the estimates level off near 1.31 by \
         n = 512), so the statistic is bounded in n but carries a real refinement drift \
         that a 20,000-path run resolves at this significance.",
        summary = summary.join(", "),
        allowance = 5.0 * wcombined
    );
    for i in 0..reports.len() {
        for j in (i + 1)..reports.len() {
            let (a, b) = (&reports[i], &reports[j]);
            let combined = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
            let gap = (a.estimate - b.estimate).abs();
            assert!(
                gap <= 5.0 * combined,
                "moments at n = {} and n = {} differ by {gap:.4} > 5 x combined se {combined:.4}",
                a.n,
                b.n
            );
        }
    }
}

#[test]
fn criterion_9_byte_identical_output_across_workers_and_reruns() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_stablecir");
    let tmp = std::env::temp_dir();
    let commands: [(&str, Vec<&str>); 4] = [
        ("simulate", vec!["simulate", "--n", "64", "--seed", "7"]),
        (
            "strong-error",
            vec![
                "strong-error",
                "--n",
                "8",
                "--samples",
                "200",
                "--seed",
                "7",
            ],
        ),
        (
            "rate-sweep",
            vec![
                "rate-sweep",
                "--alphas",
                "1.3,1.5",
                "--n0",
                "8",
                "--samples",
                "100",
                "--seed",
                "7",
            ],
        ),
        (
            "diagnostics",
            vec![
                "diagnostics",
                "--n",
                "16",
                "--trials",
                "10000",
                "--samples",
                "300",
                "--seed",
                "7",
            ],
        ),
    ];
    for (name, args) in &commands {
        let mut outputs: Vec<(Vec<u8>, Option<Vec<u8>>)> = Vec::new();
        for (variant, workers) in [(0, None), (1, Some(1)), (2, Some(4))] {
            for rerun in 0..2 {
                let out_path = tmp.join(format!(
                    "stablecir_acc9_{}_{name}_{variant}_{rerun}.csv",
                    std::process::id()
                ));
                let plot_path = tmp.join(format!(
                    "stablecir_acc9_{}_{name}_{variant}_{rerun}.dat",
                    std::process::id()
                ));
                let mut cmd = Command::new(bin);
                cmd.args(args).arg("--out").arg(&out_path);
                if *name == "rate-sweep" {
                    cmd.arg("--plot").arg(&plot_path);
                }
                if let Some(w) = workers {
                    cmd.arg("--workers").arg(w.to_string());
                }
                let status = cmd.output().expect("binary must run");
                assert!(
                    status.status.success(),
                    "{name} (workers {workers:?}) failed: {}",
                    String::from_utf8_lossy(&status.stderr)
                );
                let csv = std::fs::read(&out_path).unwrap();
                let plot = if *name == "rate-sweep" {
                    Some(std::fs::read(&plot_path).unwrap())
                } else {
                    None
                };
                let _ = std::fs::remove_file(&out_path);
                let _ = std::fs::remove_file(&plot_path);
                outputs.push((csv, plot));
            }
        }
        for other in &outputs[1..] {
            assert_eq!(
                outputs[0], *other,
                "{name}: output bytes differ across workers/reruns"
            );
        }
    }
    println!(
        "criterion 9 PASS — all four subcommands emit byte-identical CSV (and plot \
         data) across workers in {{default, 1, 4}} and across reruns"
    );
    budget(start, 60, "criterion 9");
}
