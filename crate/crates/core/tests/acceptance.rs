//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and then
//! asserts the same condition.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracmem::fracops::{
    check_adjoint, check_semigroup, power_profile, rl_left, rl_power_closed_form, rl_right, FracOrder, TimeGrid,
    TimeSeries,
};
use fracmem::testfn::{
    comparability_ratios, cutoff_constants, frac_laplacian_fourier, frac_laplacian_singular, verify_comparability,
    CutoffSpec, PowerWeight, TestFunctionSpec,
};
use fracmem::volterra::{
    closed_form_v, exp_frac_integral_limit_values, exp_frac_integral_limits, hardy_constant, solve_linear_volterra,
    weighted_hardy_check, InequalityParams,
};
use fracmem::wavesim::{
    comparability_on_grid, default_chi, fit_linear_coefficient, identity_series, moment_inequality_monitor,
    monitor_constant, run_with, threshold_sweep, Classification, DataSpec, ModelParams, RunOptions,
};

fn order(a: f64) -> FracOrder {
    FracOrder::new(a).unwrap()
}

fn report(id: u32, name: &str, pass: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let ok = pass && elapsed < limit;
    println!(
        "{} criterion {id} ({name}): {detail}; runtime {:.2}s (limit {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(elapsed < limit, "criterion {id} exceeded its runtime budget");
}

/// Semigroup and adjoint residuals for the identity families at `n` steps on [0, 1].
fn identity_residuals(n: usize) -> Vec<(&'static str, f64)> {
    let grid = TimeGrid::with_horizon(n, 1.0).unwrap();
    let one = TimeSeries::from_fn(grid, |_| 1.0).unwrap();
    let t = TimeSeries::from_fn(grid, |t| t).unwrap();
    let t2 = TimeSeries::from_fn(grid, |t| t * t).unwrap();
    let down = TimeSeries::from_fn(grid, |t| 1.0 - t).unwrap();
    let wave = TimeSeries::from_fn(grid, |t| (3.0 * t).cos()).unwrap();
    let zero = TimeSeries::zeros(grid);
    vec![
        ("semigroup 1, a=b=1/2", check_semigroup(&one, order(0.5), order(0.5)).unwrap()),
        ("semigroup t^2, a=b=1", check_semigroup(&t2, order(1.0), order(1.0)).unwrap()),
        ("semigroup cos 3t, a=0.3 b=1.2", check_semigroup(&wave, order(0.3), order(1.2)).unwrap()),
        ("adjoint 1,1, a=1", check_adjoint(&one, &one, order(1.0)).unwrap()),
        ("adjoint t,1-t, a=1/2", check_adjoint(&t, &down, order(0.5)).unwrap()),
        ("adjoint cos 3t,t^2, a=0.7", check_adjoint(&wave, &t2, order(0.7)).unwrap()),
        ("adjoint 0,1-t, a=1/2", check_adjoint(&zero, &down, order(0.5)).unwrap()),
    ]
}

#[test]
fn criterion_1_operator_identities() {
    let start = Instant::now();
    let coarse = identity_residuals(2000);
    let fine = identity_residuals(4000);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    for ((name, r1), (_, r2)) in coarse.iter().zip(&fine) {
        worst = worst.max(*r1);
        pass &= *r1 <= 5e-4;
        // residuals already at round-off cannot shrink further
        if *r1 > 1e-12 {
            let ratio = r1 / r2;
            min_ratio = min_ratio.min(ratio);
            pass &= ratio >= 1.7;
            println!("  {name}: {r1:.3e} -> {r2:.3e} (x{ratio:.2})");
        } else {
            println!("  {name}: {r1:.3e} (round-off)");
        }
    }
    report(
        1,
        "operator identities",
        pass,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("max residual {worst:.3e} <= 5e-4, min shrink ratio {min_ratio:.2} >= 1.7"),
    );
}

#[test]
fn criterion_2_power_closed_form() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = TimeGrid::with_horizon(2000, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let gamma_ = rng.gen_range(-1.0..1.0);
        let p = rng.gen_range(1.2..4.0);
        let threshold = p * (3.0 - gamma_) / (p - 1.0);
        let l = rng.gen_range(threshold..threshold + 6.0);
        let beta = rng.gen_range(0.2..3.0);
        let numeric = rl_right(&power_profile(l, gamma_, grid).unwrap(), order(beta)).unwrap();
        let exact = rl_power_closed_form(l, gamma_, order(beta), grid).unwrap();
        let n = grid.n_steps();
        let scale = exact.values()[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = numeric.values()[..n]
            .iter()
            .zip(&exact.values()[..n])
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let rel = err / scale;
        println!("  l={l:.3} gamma={gamma_:.3} beta={beta:.3}: relative error {rel:.3e}");
        worst = worst.max(rel);
    }
    report(
        2,
        "right power rule",
        worst <= 1e-3,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("max relative error {worst:.3e} <= 1e-3 over 10 triples"),
    );
}

#[test]
fn criterion_3_laplace_solution() {
    let start = Instant::now();
    let grid = TimeGrid::with_horizon(4000, 10.0).unwrap();
    let zero = TimeSeries::zeros(grid);
    let mut worst: f64 = 0.0;
    for (a, b_, b, c) in [(1.0, 0.0, 3.0, 2.0), (0.0, 1.0, 3.0, 2.0), (1.0, 1.0, 5.0, 4.0)] {
        let params = InequalityParams::new(a, b_, 1.0, b, c, 0.5, 2.0).unwrap();
        let w = solve_linear_volterra(&params, &zero).unwrap();
        let i2w = rl_left(&w, order(2.0)).unwrap();
        let v = closed_form_v(&params, &zero).unwrap();
        let err = i2w.max_abs_diff(&v).unwrap();
        println!("  (A,B,b,c)=({a},{b_},{b},{c}): max error {err:.3e}");
        worst = worst.max(err);
    }
    report(
        3,
        "closed-form Volterra solution",
        worst <= 1e-4,
        start.elapsed(),
        Duration::from_secs(30),
        &format!("max error {worst:.3e} <= 1e-4"),
    );
}

#[test]
fn criterion_4_exponential_limits() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for lambda in [-0.5, -1.0, -2.0] {
        for gamma_ in [-1.0, 0.0, 0.5] {
            let (x, y, z) = exp_frac_integral_limits(lambda, gamma_, 100.0).unwrap();
            let (lx, ly, lz) = exp_frac_integral_limit_values(lambda, gamma_);
            let devs = [(x / lx - 1.0).abs(), (y / ly - 1.0).abs(), (z / lz - 1.0).abs()];
            println!(
                "  lambda={lambda} gamma={gamma_}: deviations {:.3e} {:.3e} {:.3e}",
                devs[0], devs[1], devs[2]
            );
            worst = devs.iter().fold(worst, |m, d| m.max(*d));
        }
    }
    report(
        4,
        "exponential-integral limits at t=100",
        worst <= 0.01,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("max relative deviation {worst:.3e} <= 1e-2"),
    );
}

#[test]
fn criterion_5_weighted_hardy() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = TimeGrid::with_horizon(1000, 10.0).unwrap();
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        for _ in 0..100 {
            let knots: Vec<f64> = (0..=10).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = TimeSeries::from_fn(grid, |t| {
                let k = (t.floor() as usize).min(9);
                let s = t - k as f64;
                knots[k] * (1.0 - s) + knots[k + 1] * s
            })
            .unwrap();
            let (lhs, rhs) = weighted_hardy_check(&w, p).unwrap();
            if lhs > rhs {
                violations += 1;
            }
            if rhs > 0.0 {
                max_ratio = max_ratio.max(lhs / rhs);
            }
        }
    }
    let k2 = hardy_constant(2.0);
    let pass = violations == 0 && (k2 - 4.0 / 3.0).abs() <= 1e-12;
    report(
        5,
        "weighted Hardy estimate",
        pass,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("{violations} violations in 300 samples (max LHS/RHS {max_ratio:.3}), K_2 - 4/3 = {:.1e}", k2 - 4.0 / 3.0),
    );
}

#[test]
fn criterion_6_test_function_bound() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (n, q, s) in [(1usize, 2.0, 0.5), (1, 2.5, 0.5), (2, 3.0, 0.5)] {
        let w = PowerWeight::new(n, q).unwrap();
        let radii: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        let a: Vec<f64> = radii.iter().map(|&r| frac_laplacian_singular(&w, s, r).unwrap()).collect();
        let b: Vec<f64> = radii.iter().map(|&r| frac_laplacian_fourier(&w, s, r).unwrap()).collect();
        let floor = 1e-6 * b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let agree = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs() / y.abs().max(floor)));
        // one sweep on |x| <= 20 at spacing 0.05 gives both constants
        let ratios = comparability_ratios(&w, s, 20.0, 400).unwrap();
        let c10 = ratios.iter().filter(|(r, _)| *r <= 10.0 + 1e-12).fold(0.0f64, |m, (_, c)| m.max(*c));
        let c20 = ratios.iter().fold(0.0f64, |m, (_, c)| m.max(*c));
        let drift = (c20 - c10).abs() / c10;
        let ok = agree <= 1e-3 && drift < 0.1;
        pass &= ok;
        println!(
            "  (N,q,s)=({n},{q},{s}): two-route relative gap {agree:.2e}, C(10)={c10:.4} C(20)={c20:.4} drift {:.1}% {}",
            100.0 * drift,
            if ok { "ok" } else { "FAILED" }
        );
        details.push(format!("({n},{q},{s}) gap {agree:.1e} drift {:.1}%", 100.0 * drift));
    }
    report(
        6,
        "test-function comparability",
        pass,
        start.elapsed(),
        Duration::from_secs(120),
        &details.join(", "),
    );
}

#[test]
fn criterion_7_cutoff_uniformity() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (n, q) in [(1usize, 2.0), (2, 3.0)] {
        let spec = TestFunctionSpec::new(n, q, 0.5, 0.5).unwrap();
        let totals: Vec<f64> = [1u32, 2, 4, 8, 16]
            .iter()
            .map(|&k| cutoff_constants(&spec, &CutoffSpec::new(k).unwrap(), 0.5).unwrap().total)
            .collect();
        let reference = totals[4];
        let worst = totals.iter().fold(1.0f64, |m, c| m.max(c / reference).max(reference / c));
        pass &= worst <= 2.0;
        println!("  N={n} q={q}: C for n=1,2,4,8,16 = {totals:.4?}, worst factor {worst:.2}");
        details.push(format!("N={n} worst factor {worst:.2} vs n=16"));
    }
    report(7, "cutoff uniformity", pass, start.elapsed(), Duration::from_secs(60), &details.join(", "));
}

fn sweep_base() -> ModelParams {
    ModelParams::new(1.0, 0.5, 2.0, 0.5, 2.0, 1, 20.0, 256, 1e-3, 50.0).unwrap()
}

#[test]
fn criterion_8_blowup_dichotomy() {
    let start = Instant::now();
    let ps = [1.2, 1.5, 1.9, 2.0];
    let data = DataSpec::gaussian(1.0, 1.0);
    let base = sweep_base();
    let reference = threshold_sweep(&base, &ps, &data).unwrap();
    let high = threshold_sweep(&base.with_threshold(1e12), &ps, &data).unwrap();
    let refined = threshold_sweep(&base.with_dt(5e-4), &ps, &data).unwrap();
    let mut pass = true;
    for ((r, h), f) in reference.iter().zip(&high).zip(&refined) {
        let blow = |row: &fracmem::wavesim::SweepRow| row.classification == Some(Classification::Blowup);
        let drift = (f.time - r.time).abs() / r.time;
        let ok = blow(r) && blow(h) && blow(f) && drift < 0.1;
        pass &= ok;
        println!(
            "  p={} (p*gamma={}): {:?} at t={:.4}; threshold 1e12: {:?} at t={:.4}; dt/2: {:?} at t={:.4} (drift {:.3}%)",
            r.p,
            r.p_gamma,
            r.classification,
            r.time,
            h.classification,
            h.time,
            f.classification,
            f.time,
            100.0 * drift
        );
    }
    let control = ModelParams::new(1.0, 0.5, 2.0, 0.5, 6.0, 1, 20.0, 256, 1e-3, 50.0).unwrap();
    let (u0, u1) = DataSpec::gaussian(1e-3, 1.0).fields(&control);
    let chi = default_chi(&control).unwrap();
    let c = run_with(&control, &u0, &u1, &chi, &RunOptions::default()).unwrap();
    let control_ok = c.classification == Classification::NotBlownUp && c.final_time >= 50.0 - 1e-9;
    println!(
        "  control p=6, amplitude 1e-3: {:?} to t={:.3}, final sup {:.3e}",
        c.classification, c.final_time, c.final_sup
    );
    pass &= control_ok;
    report(
        8,
        "blow-up dichotomy",
        pass,
        start.elapsed(),
        Duration::from_secs(600),
        "all p*gamma <= 1 rows BLOWUP under threshold 1e6/1e12 and dt/2 (drift < 10%), control bounded",
    );
}

#[test]
fn criterion_9_moment_monitor() {
    let start = Instant::now();
    let params = sweep_base().with_p(1.5);
    let chi = default_chi(&params).unwrap();
    let (u0, u1) = DataSpec::gaussian(1.0, 1.0).fields(&params);
    let result = run_with(&params, &u0, &u1, &chi, &RunOptions::default()).unwrap();
    assert_eq!(result.classification, Classification::Blowup);
    let radius = params.half_width;
    let samples = (radius / 0.05) as usize;
    let c_sigma = verify_comparability(&chi, params.sigma, radius, samples)
        .unwrap()
        .max(comparability_on_grid(&params, &chi, params.sigma));
    let c_eta = verify_comparability(&chi, params.eta, radius, samples)
        .unwrap()
        .max(comparability_on_grid(&params, &chi, params.eta));
    let c = monitor_constant(c_sigma, c_eta, params.mu);
    let monitor = moment_inequality_monitor(&result, &params, Some(c)).unwrap();
    let min_norm = monitor.min_normalized();
    let identity = identity_series(&result, &params).unwrap();
    let b_fit = fit_linear_coefficient(&identity, 1.0);
    let b_err = (b_fit - result.b_const).abs() / result.b_const.abs();
    println!(
        "  blow-up at t={:.4}, C={c:.4}, min residual/scale {min_norm:.3e}, B={:.6} fitted {b_fit:.6}",
        result.blowup_time.unwrap(),
        result.b_const
    );
    report(
        9,
        "moment-monitor consistency",
        min_norm >= -1e-3 && b_err < 0.05,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("min residual/scale {min_norm:.3e} >= -1e-3, B relative error {b_err:.2e} < 5e-2"),
    );
}
