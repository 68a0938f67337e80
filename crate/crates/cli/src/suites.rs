//! Check suites behind the `verify-*`, `simulate` and `sweep` modes.
//!
//! A suite is a list of jobs. Jobs run concurrently; their checks are
//! collected in declaration order.

use std::error::Error;
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use fracmem::fracops::{
    adjoint_sides, check_adjoint, check_semigroup, laplace_check_exp, power_profile, rl_left, rl_power_closed_form,
    rl_right, FracOrder, TimeGrid, TimeSeries,
};
use fracmem::quad::{integrate_to_infinity, QuadOptions};
use fracmem::special::gamma;
use fracmem::testfn::{
    chi_eval, chi_mass, cutoff_constants, default_samples, frac_laplacian_fourier, frac_laplacian_radial,
    max_admissible_q, verify_comparability, CutoffSpec, PowerWeight, TestFunctionSpec,
};
use fracmem::volterra::{
    certify_bound_i, closed_form_v, exp_frac_integral_limit_values, exp_frac_integral_limits, fixed_point_solution,
    hardy_constant, liminf_growth_estimate, solve_linear_volterra, weighted_hardy_check, young_constants,
    FixedPointOutcome, InequalityParams,
};
use fracmem::wavesim::{
    comparability_on_grid, fit_linear_coefficient, identity_series, moment_inequality_monitor, monitor_constant,
    run_with, threshold_sweep, Classification, MemoryConvolver, RunOptions, SimError, SimResult, SimState, SweepRow,
};

use crate::config::{Mode, RunConfig};
use crate::record::{excess, Check};

type Fallible<T> = Result<T, Box<dyn Error + Send + Sync>>;
type Job = Box<dyn Fn() -> Fallible<Vec<Check>> + Send + Sync>;

/// Everything a mode produces.
#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub checks: Vec<Check>,
    /// Single run of `simulate`.
    pub simulation: Option<SimResult>,
    /// Rows of `sweep`, warning row first when present.
    pub sweep: Vec<SweepRow>,
}

pub fn run_mode(cfg: &RunConfig) -> SuiteOutput {
    let mut out = match cfg.mode {
        Mode::VerifyFracops => checks_only(run_jobs(fracops_jobs(cfg), cfg.record_wall_time)),
        Mode::VerifyVolterra => checks_only(run_jobs(volterra_jobs(cfg), cfg.record_wall_time)),
        Mode::VerifyTestfn => checks_only(run_jobs(testfn_jobs(cfg), cfg.record_wall_time)),
        Mode::Simulate => simulate(cfg),
        Mode::Sweep => sweep(cfg),
    };
    if cfg.force_failure {
        match out.checks.first_mut() {
            Some(c) => c.invert_tolerance(),
            None => out.checks.push(Check::holds("forced failure", false)),
        }
    }
    out
}

fn checks_only(checks: Vec<Check>) -> SuiteOutput {
    SuiteOutput {
        checks,
        ..SuiteOutput::default()
    }
}

fn run_jobs(jobs: Vec<(&'static str, Job)>, timed: bool) -> Vec<Check> {
    jobs.par_iter()
        .map(|(name, job)| {
            let start = Instant::now();
            let mut checks = job().unwrap_or_else(|e| vec![Check::errored(*name, e)]);
            if timed {
                let secs = start.elapsed().as_secs_f64();
                checks.iter_mut().for_each(|c| c.seconds = secs);
            }
            checks
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn job(name: &'static str, f: impl Fn() -> Fallible<Vec<Check>> + Send + Sync + 'static) -> (&'static str, Job) {
    (name, Box::new(f))
}

fn order(a: f64) -> Fallible<FracOrder> {
    Ok(FracOrder::new(a)?)
}

fn unit_grid(n: usize) -> Fallible<TimeGrid> {
    Ok(TimeGrid::with_horizon(n, 1.0)?)
}

fn series(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Fallible<TimeSeries> {
    Ok(TimeSeries::from_fn(grid, f)?)
}

fn max_diff(a: &TimeSeries, b: &TimeSeries) -> Fallible<f64> {
    Ok(a.max_abs_diff(b)?)
}

fn slope(r1: f64, r2: f64) -> f64 {
    (r1 / r2).log2()
}

// ---------------------------------------------------------------- fracops

/// Max error of `I^alpha t^2` against `2 t^(2+alpha) / Gamma(3+alpha)`.
fn power_rule_error(n: usize, alpha: f64) -> Fallible<f64> {
    let grid = unit_grid(n)?;
    let numeric = rl_left(&series(grid, |t| t * t)?, order(alpha)?)?;
    let exact = series(grid, |t| 2.0 * t.powf(2.0 + alpha) / gamma(3.0 + alpha))?;
    max_diff(&numeric, &exact)
}

fn semigroup_residual(n: usize) -> Fallible<f64> {
    let grid = unit_grid(n)?;
    Ok(check_semigroup(&series(grid, |t| (3.0 * t).cos())?, order(0.3)?, order(1.2)?)?)
}

fn adjoint_residual(n: usize) -> Fallible<f64> {
    let grid = unit_grid(n)?;
    Ok(check_adjoint(&series(grid, |t| (3.0 * t).cos())?, &series(grid, |t| t * t)?, order(0.7)?)?)
}

fn fracops_jobs(cfg: &RunConfig) -> Vec<(&'static str, Job)> {
    let seed = cfg.seed;
    vec![
        job("left integral of 1, order 1", || {
            let grid = unit_grid(2000)?;
            let got = rl_left(&series(grid, |_| 1.0)?, order(1.0)?)?;
            Ok(vec![Check::close("I^1 1 = t (n=2000)", max_diff(&got, &series(grid, |t| t)?)?, 0.0, 1e-12)])
        }),
        job("left integral of t, order 1/2", || {
            let grid = unit_grid(2000)?;
            let got = rl_left(&series(grid, |t| t)?, order(0.5)?)?;
            let exact = series(grid, |t| 4.0 / (3.0 * PI.sqrt()) * t.powf(1.5))?;
            Ok(vec![Check::close("I^(1/2) t = 4 t^(3/2)/(3 sqrt(pi)) (n=2000)", max_diff(&got, &exact)?, 0.0, 5e-4)])
        }),
        job("left integral of exp(-t) at t=40", || {
            let grid = TimeGrid::with_horizon(4000, 40.0)?;
            let got = rl_left(&series(grid, |t| (-t).exp())?, order(1.0)?)?.last();
            Ok(vec![Check::close("I^1 exp(-t) at t=40 = 1 - exp(-40)", got, 1.0 - (-40f64).exp(), 1e-4)])
        }),
        job("right integral of 1, order 1", || {
            let grid = unit_grid(2000)?;
            let got = rl_right(&series(grid, |_| 1.0)?, order(1.0)?)?;
            Ok(vec![Check::close("tI_T^1 1 = T - t (n=2000)", max_diff(&got, &series(grid, |t| 1.0 - t)?)?, 0.0, 1e-12)])
        }),
        job("right power rule l=8", || {
            let grid = unit_grid(2000)?;
            let got = rl_right(&power_profile(8.0, 0.5, grid)?, order(2.5)?)?;
            let exact = series(grid, |t| gamma(6.5) / gamma(9.0) * (1.0 - t).powi(8))?;
            let formula = rl_power_closed_form(8.0, 0.5, order(2.5)?, grid)?;
            Ok(vec![
                Check::close("tI_T^(5/2) (1-t)^(11/2) = G(6.5)/G(9) (1-t)^8 (n=2000)", max_diff(&got, &exact)?, 0.0, 5e-4),
                Check::close("closed form l=8 matches Gamma oracle", max_diff(&formula, &exact)?, 0.0, 1e-13),
                Check::close("closed form vanishes at t=T", formula.last(), 0.0, 0.0),
            ])
        }),
        job("right integral of 0", || {
            let grid = unit_grid(2000)?;
            let got = rl_right(&TimeSeries::zeros(grid), order(0.7)?)?;
            Ok(vec![Check::close("tI_T^0.7 0 = 0", got.max_abs(), 0.0, 0.0)])
        }),
        job("closed form beta=1 l=3 gamma=1", || {
            let grid = TimeGrid::with_horizon(1000, 2.0)?;
            let formula = rl_power_closed_form(3.0, 1.0, order(1.0)?, grid)?;
            let exact = series(grid, |t| (1.0 - t / 2.0).powi(2))?;
            Ok(vec![Check::close("tI_T^1 (1-t/T) = (T/2)(1-t/T)^2, T=2", max_diff(&formula, &exact)?, 0.0, 1e-13)])
        }),
        job("random right power rules", move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let grid = unit_grid(2000)?;
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let g = rng.gen_range(-1.0..1.0);
                let p = rng.gen_range(1.2..4.0);
                let l = rng.gen_range(p * (3.0 - g) / (p - 1.0)..p * (3.0 - g) / (p - 1.0) + 6.0);
                let b = rng.gen_range(0.2..3.0);
                let numeric = rl_right(&power_profile(l, g, grid)?, order(b)?)?;
                let exact = rl_power_closed_form(l, g, order(b)?, grid)?;
                worst = worst.max(max_diff(&numeric, &exact)? / exact.max_abs());
            }
            Ok(vec![Check::close("right power rule, 10 random (l, gamma, beta), relative", worst, 0.0, 1e-3)])
        }),
        job("semigroup of 1, orders 1/2 + 1/2", || {
            let grid = unit_grid(2000)?;
            let one = series(grid, |_| 1.0)?;
            let half = order(0.5)?;
            let twice = rl_left(&rl_left(&one, half)?, half)?;
            Ok(vec![
                Check::close("semigroup residual, f=1, a=b=1/2 (n=2000)", check_semigroup(&one, half, half)?, 0.0, 5e-4),
                Check::close("I^(1/2) I^(1/2) 1 = t (n=2000)", max_diff(&twice, &series(grid, |t| t)?)?, 0.0, 5e-4),
            ])
        }),
        job("semigroup of t^2, orders 1 + 1", || {
            let grid = unit_grid(2000)?;
            let t2 = series(grid, |t| t * t)?;
            let twice = rl_left(&rl_left(&t2, order(1.0)?)?, order(1.0)?)?;
            Ok(vec![
                Check::close("semigroup residual, f=t^2, a=b=1 (n=2000)", check_semigroup(&t2, order(1.0)?, order(1.0)?)?, 0.0, 5e-4),
                Check::close("I^1 I^1 t^2 = t^4/12 (n=2000)", max_diff(&twice, &series(grid, |t| t.powi(4) / 12.0)?)?, 0.0, 5e-4),
            ])
        }),
        job("empty grid rejected", || {
            Ok(vec![Check::holds("n_steps = 0 grid is a constructor error", TimeGrid::new(0, 0.1).is_err())])
        }),
        job("adjoint of 1, 1, order 1", || {
            let grid = unit_grid(2000)?;
            let one = series(grid, |_| 1.0)?;
            let (l, r) = adjoint_sides(&one, &one, order(1.0)?)?;
            Ok(vec![
                Check::close("adjoint residual, f=g=1, a=1", (l - r).abs(), 0.0, 1e-10),
                Check::close("adjoint side equals T^2/2", l, 0.5, 1e-10),
            ])
        }),
        job("adjoint of t, 1-t, order 1/2", || {
            let grid = unit_grid(2000)?;
            let (f, g) = (series(grid, |t| t)?, series(grid, |t| 1.0 - t)?);
            let (l, r) = adjoint_sides(&f, &g, order(0.5)?)?;
            // both sides equal B(5/2, 2) / Gamma(5/2) = 1 / Gamma(9/2)
            let oracle = 16.0 / (105.0 * PI.sqrt());
            Ok(vec![
                Check::close("adjoint residual, f=t, g=1-t, a=1/2 (n=2000)", (l - r).abs(), 0.0, 1e-4),
                Check::close("adjoint left side = 16/(105 sqrt(pi)) (n=2000)", l, oracle, 1e-4),
            ])
        }),
        job("adjoint with f = 0", || {
            let grid = unit_grid(2000)?;
            let r = check_adjoint(&TimeSeries::zeros(grid), &series(grid, |t| 1.0 - t)?, order(0.5)?)?;
            Ok(vec![Check::close("adjoint residual, f=0", r, 0.0, 0.0)])
        }),
        job("Laplace transforms", || {
            let mut out = Vec::new();
            for (a, lambda, s) in [(1.0, -1.0, 1.0), (0.5, -1.0, 2.0), (2.0, -2.0, 1.0)] {
                let (numeric, exact) = laplace_check_exp(order(a)?, lambda, s)?;
                out.push(Check::close(
                    format!("Laplace of I^{a} exp({lambda} t) at s={s} vs s^(-a)/(s-lambda)"),
                    numeric,
                    exact,
                    1e-4,
                ));
            }
            let (_, exact) = laplace_check_exp(order(0.5)?, -1.0, 2.0)?;
            out.push(Check::close("s^(-1/2)/(s+1) at s=2 = 1/(3 sqrt 2)", exact, 1.0 / (3.0 * 2f64.sqrt()), 1e-15));
            Ok(out)
        }),
        job("linearity", move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
            let grid = unit_grid(500)?;
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let (a, b) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
                let alpha = order(rng.gen_range(0.1..3.0))?;
                let fv: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let gv: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = TimeSeries::new(grid, fv)?;
                let g = TimeSeries::new(grid, gv)?;
                let combined = rl_left(&f.zip_with(&g, |x, y| a * x + b * y)?, alpha)?;
                let separate = rl_left(&f, alpha)?.zip_with(&rl_left(&g, alpha)?, |x, y| a * x + b * y)?;
                worst = worst.max(max_diff(&combined, &separate)? / separate.max_abs().max(1.0));
            }
            Ok(vec![Check::close("linearity, 20 random (a, b, f, g, alpha), relative", worst, 0.0, 1e-12)])
        }),
        job("positivity", move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x22);
            let grid = unit_grid(500)?;
            let mut lowest = f64::INFINITY;
            for _ in 0..20 {
                let alpha = order(rng.gen_range(0.05..3.0))?;
                let f = TimeSeries::new(grid, (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect())?;
                lowest = lowest.min(rl_left(&f, alpha)?.values().iter().fold(f64::INFINITY, |m, &v| m.min(v)));
            }
            Ok(vec![Check::at_least("f >= 0 gives I^alpha f >= 0 (min over 20 samples)", lowest, 0.0)])
        }),
        job("monotone in horizon", move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x33);
            let grid = unit_grid(500)?;
            let mut lowest = f64::INFINITY;
            for _ in 0..20 {
                let alpha = order(rng.gen_range(1.0..3.0))?;
                let f = TimeSeries::new(grid, (0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect())?;
                let v = rl_left(&f, alpha)?;
                lowest = v.values().windows(2).fold(lowest, |m, w| m.min(w[1] - w[0]));
            }
            Ok(vec![Check::at_least("alpha >= 1, f >= 0: smallest increment of I^alpha f", lowest, 0.0)])
        }),
        job("convergence order", || {
            let mut out = Vec::new();
            for alpha in [0.3, 0.5, 1.5] {
                let errs = [power_rule_error(500, alpha)?, power_rule_error(1000, alpha)?, power_rule_error(2000, alpha)?];
                let observed = slope(errs[0], errs[1]).min(slope(errs[1], errs[2]));
                let expected = (1.0 + alpha).min(2.0);
                out.push(Check::with_residual(
                    format!("observed order of I^{alpha} t^2 (n=500,1000,2000) vs min(2, 1+alpha) - 0.2"),
                    observed,
                    expected,
                    (expected - observed).max(0.0),
                    0.2,
                ));
            }
            Ok(out)
        }),
        job("identity refinement", || {
            let (s1, s2) = (semigroup_residual(1000)?, semigroup_residual(2000)?);
            let (a1, a2) = (adjoint_residual(1000)?, adjoint_residual(2000)?);
            Ok(vec![
                Check::at_least("semigroup residual shrink ratio n=1000 -> 2000 (cos 3t, 0.3 + 1.2)", s1 / s2, 1.7),
                Check::at_least("adjoint residual shrink ratio n=1000 -> 2000 (cos 3t, t^2, 0.7)", a1 / a2, 1.7),
            ])
        }),
    ]
}

// ---------------------------------------------------------------- volterra

fn ineq(a: f64, b_: f64, b: f64, c: f64, gamma_: f64, p: f64) -> Fallible<InequalityParams> {
    Ok(InequalityParams::new(a, b_, 1.0, b, c, gamma_, p)?)
}

/// Max gap between `I^2 w` and the closed form for `f = 0`.
fn closed_form_gap(params: &InequalityParams, n: usize, horizon: f64) -> Fallible<f64> {
    let grid = TimeGrid::with_horizon(n, horizon)?;
    let zero = TimeSeries::zeros(grid);
    let w = solve_linear_volterra(params, &zero)?;
    max_diff(&rl_left(&w, order(2.0)?)?, &closed_form_v(params, &zero)?)
}

fn volterra_jobs(cfg: &RunConfig) -> Vec<(&'static str, Job)> {
    let seed = cfg.seed;
    let configured = cfg.inequality();
    vec![
        job("zero data", || {
            let grid = TimeGrid::with_horizon(1000, 10.0)?;
            let params = ineq(0.0, 0.0, 3.0, 2.0, 0.5, 2.0)?;
            let zero = TimeSeries::zeros(grid);
            Ok(vec![
                Check::close("A=B=0, f=0: w = 0", solve_linear_volterra(&params, &zero)?.max_abs(), 0.0, 0.0),
                Check::close("A=B=0, f=0: v = 0", closed_form_v(&params, &zero)?.max_abs(), 0.0, 0.0),
            ])
        }),
        job("closed form cross-checks", || {
            Ok(vec![
                Check::close(
                    "A=1 B=0 b=3 c=2: I^2 w vs closed form (n=4000, T=10)",
                    closed_form_gap(&ineq(1.0, 0.0, 3.0, 2.0, 0.5, 2.0)?, 4000, 10.0)?,
                    0.0,
                    1e-4,
                ),
                Check::close(
                    "A=0 B=1 b=3 c=2: I^2 w vs closed form (n=4000, T=10)",
                    closed_form_gap(&ineq(0.0, 1.0, 3.0, 2.0, 0.5, 2.0)?, 4000, 10.0)?,
                    0.0,
                    1e-4,
                ),
            ])
        }),
        job("closed form refinement", || {
            let params = ineq(1.0, 1.0, 3.0, 2.0, 0.5, 2.0)?;
            let (g1, g2) = (closed_form_gap(&params, 1000, 10.0)?, closed_form_gap(&params, 2000, 10.0)?);
            Ok(vec![Check::at_least("closed-form gap shrink ratio n=1000 -> 2000 (A=B=1)", g1 / g2, 1.7)])
        }),
        job("closed form spot value", || {
            let grid = TimeGrid::with_horizon(1000, 2f64.ln())?;
            let params = ineq(1.0, 0.0, 3.0, 2.0, 0.5, 2.0)?;
            let v = closed_form_v(&params, &TimeSeries::zeros(grid))?;
            let exact = series(grid, |t| 0.5 - (-t).exp() + 0.5 * (-2.0 * t).exp())?;
            Ok(vec![
                Check::close("v(ln 2) = 1/8 (A=1, b=3, c=2)", v.last(), 0.125, 1e-12),
                Check::close("v = 1/2 - exp(-t) + exp(-2t)/2 on [0, ln 2]", max_diff(&v, &exact)?, 0.0, 1e-12),
            ])
        }),
        job("kernel sign and monotone memory", || {
            let grid = TimeGrid::with_horizon(2000, 20.0)?;
            let params = ineq(1.0, 0.0, 3.0, 2.0, 0.5, 2.0)?;
            let (l1, l2) = params.roots();
            let kernel = series(grid, |t| (l2 * t).exp() - (l1 * t).exp())?;
            let lowest = kernel.values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
            let memory = rl_left(&kernel, order(3.0 - params.gamma())?)?;
            let step = memory.values().windows(2).fold(f64::INFINITY, |m, w| m.min(w[1] - w[0]));
            let v = closed_form_v(&ineq(2.0, 0.0, 3.0, 2.0, 0.5, 2.0)?, &TimeSeries::zeros(grid))?;
            let v_low = v.values().iter().fold(f64::INFINITY, |m, &x| m.min(x));
            Ok(vec![
                Check::at_least("exp(l2 t) - exp(l1 t) >= 0 on [0, 20]", lowest, 0.0),
                Check::at_least("I^(3-gamma) of the kernel: smallest increment", step, 0.0),
                Check::at_least("A-branch of v with A > 0 is nonnegative", v_low, 0.0),
            ])
        }),
        job("step size rejected", || {
            let params = ineq(1.0, 0.0, -100.0, 1.0, 0.5, 2.0)?;
            let grid = TimeGrid::new(10, 0.1)?;
            Ok(vec![Check::holds(
                "1 + b h/2 + c h^2/4 <= 0 is a step-size error",
                solve_linear_volterra(&params, &TimeSeries::zeros(grid)).is_err(),
            )])
        }),
        job("exponential-integral limits", || {
            let mut out = Vec::new();
            let (x, y, z) = exp_frac_integral_limits(-1.0, 0.5, 50.0)?;
            let (lx, ly, lz) = exp_frac_integral_limit_values(-1.0, 0.5);
            for (k, (v, l)) in [(x, lx), (y, ly), (z, lz)].into_iter().enumerate() {
                out.push(Check::relative(format!("lambda=-1 gamma=1/2 t=50: component {}", k + 1), v, l, 0.04));
            }
            out.push(Check::close("limit of third component = 1/Gamma(5/2)", lz, 4.0 / (3.0 * PI.sqrt()), 1e-12));
            let (x, y, z) = exp_frac_integral_limits(-2.0, 0.5, 100.0)?;
            let limits = exp_frac_integral_limit_values(-2.0, 0.5);
            out.push(Check::close("lambda=-2 limits = (1/2, 1/2, 1/(2 Gamma(5/2)))", limits.0 + limits.1, 1.0, 1e-15));
            for (k, (v, l)) in [(x, limits.0), (y, limits.1), (z, limits.2)].into_iter().enumerate() {
                out.push(Check::relative(format!("lambda=-2 gamma=1/2 t=100: component {}", k + 1), v, l, 0.04));
            }
            let (small, _, _) = exp_frac_integral_limits(-1.0, 0.5, 1e-3)?;
            out.push(Check::relative("t=1e-3: first component ~ t", small, 1e-3, 1e-3));
            Ok(out)
        }),
        job("limits converge", || {
            let mut worse = 0;
            for lambda in [-0.5, -1.0, -2.0] {
                for g in [-1.0, 0.0, 0.5] {
                    let lim = exp_frac_integral_limit_values(lambda, g);
                    let dev = |v: (f64, f64, f64)| {
                        [(v.0 / lim.0 - 1.0).abs(), (v.1 / lim.1 - 1.0).abs(), (v.2 / lim.2 - 1.0).abs()]
                    };
                    let (near, far) = (dev(exp_frac_integral_limits(lambda, g, 10.0)?), dev(exp_frac_integral_limits(lambda, g, 100.0)?));
                    worse += near.iter().zip(&far).filter(|(a, b)| b > a).count();
                }
            }
            Ok(vec![Check::close("components farther from the limit at t=100 than at t=10", worse as f64, 0.0, 0.0)])
        }),
        job("certificate exponents", || {
            let (_, _, e) = young_constants(&ineq(0.1, 0.1, 3.0, 2.0, 0.5, 3.0)?, 16.0)?;
            let expected = [-2.75, -1.25, 0.25];
            let gap = e.iter().zip(&expected).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            Ok(vec![Check::close("p=3 gamma=1/2: T exponents = (-2.75, -1.25, 0.25)", gap, 0.0, 1e-12)])
        }),
        job("certificate of zero solution", || {
            let grid = TimeGrid::with_horizon(200, 1.0)?;
            let r = certify_bound_i(&TimeSeries::zeros(grid), &ineq(-1.0, -1.0, 3.0, 2.0, 0.5, 3.0)?, 16.0)?;
            Ok(vec![Check::at_most("w = 0, A = B = -1: LHS <= RHS", r.lhs, r.rhs)])
        }),
        job("fixed-point certificates", || {
            let params = ineq(0.1, 0.1, 3.0, 2.0, 0.5, 3.0)?;
            let mut out = Vec::new();
            for horizon in [1.0, 2.0, 4.0] {
                let grid = TimeGrid::with_horizon((200.0 * horizon) as usize, horizon)?;
                match fixed_point_solution(&params, grid)? {
                    FixedPointOutcome::Converged { w, .. } => {
                        let r = certify_bound_i(&w, &params, 16.0)?;
                        out.push(Check::at_most(format!("fixed point A=B=0.1, l=16, T={horizon}: LHS <= RHS"), r.lhs, r.rhs));
                    }
                    other => out.push(Check::errored(format!("fixed point T={horizon}"), format!("{other:?}"))),
                }
            }
            Ok(out)
        }),
        job("configured certificate", move || {
            let Some(params) = configured else {
                return Err("configured inequality parameters are invalid".into());
            };
            let l = (params.exponent_threshold() + 1.0).max(16.0);
            let grid = TimeGrid::with_horizon(400, 2.0)?;
            Ok(match fixed_point_solution(&params, grid)? {
                FixedPointOutcome::Converged { w, .. } => {
                    let r = certify_bound_i(&w, &params, l)?;
                    vec![Check::at_most(format!("configured parameters, l={l}, T=2: LHS <= RHS"), r.lhs, r.rhs)]
                }
                FixedPointOutcome::Diverged { iterations } => vec![Check::holds(
                    format!("configured parameters, T=2: fixed point diverged after {iterations} sweeps (blow-up-like)"),
                    true,
                )],
                stalled => vec![Check::errored("configured fixed point", format!("{stalled:?}"))],
            })
        }),
        job("Hardy constant", || {
            let grid = TimeGrid::with_horizon(1000, 10.0)?;
            let (l, r) = weighted_hardy_check(&TimeSeries::zeros(grid), 2.0)?;
            Ok(vec![
                Check::close("K_2 = Gamma(1/2)/Gamma(5/2) = 4/3", hardy_constant(2.0), 4.0 / 3.0, 1e-12),
                Check::close("w = 0: (LHS, RHS) = (0, 0)", l.abs() + r.abs(), 0.0, 0.0),
                Check::holds("p = 1 rejected", weighted_hardy_check(&TimeSeries::zeros(grid), 1.0).is_err()),
            ])
        }),
        job("Hardy random samples", move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x44);
            let grid = TimeGrid::with_horizon(1000, 10.0)?;
            let mut out = Vec::new();
            for p in [1.5, 2.0, 3.0] {
                let mut worst = f64::NEG_INFINITY;
                for _ in 0..100 {
                    let knots: Vec<f64> = (0..=10).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let w = series(grid, |t| {
                        let k = (t.floor() as usize).min(9);
                        let s = t - k as f64;
                        knots[k] * (1.0 - s) + knots[k + 1] * s
                    })?;
                    let (l, r) = weighted_hardy_check(&w, p)?;
                    worst = worst.max(l - r);
                }
                out.push(Check::at_most(format!("p={p}: max LHS - RHS over 100 random w"), worst, 0.0));
            }
            Ok(out)
        }),
        job("liminf proxy", || {
            let grid = TimeGrid::with_horizon(1000, 10.0)?;
            Ok(vec![
                Check::close("w = 1, gamma = 0: proxy = 1/2", liminf_growth_estimate(&series(grid, |_| 1.0)?, 0.0)?, 0.5, 1e-10),
                Check::close("w = 0: proxy = 0", liminf_growth_estimate(&TimeSeries::zeros(grid), 0.5)?, 0.0, 0.0),
            ])
        }),
        job("liminf of fixed point", || {
            let params = ineq(0.01, 0.01, 3.0, 2.0, 0.5, 3.0)?;
            let grid = TimeGrid::with_horizon(10000, 50.0)?;
            match fixed_point_solution(&params, grid)? {
                FixedPointOutcome::Converged { w, .. } => Ok(vec![Check::above(
                    "fixed point A=B=0.01, T=50: liminf proxy > 0",
                    liminf_growth_estimate(&w, 0.5)?,
                    0.0,
                )]),
                other => Err(format!("fixed point did not converge: {other:?}").into()),
            }
        }),
    ]
}

// ---------------------------------------------------------------- testfn

/// `sup (1+r)^(N+2) |Hessian chi|` and `sup (1+r)^N chi` for chi alone.
fn chi_alone_terms(w: &PowerWeight, reach: f64) -> (f64, f64) {
    let n = w.dim() as i32;
    let steps = (reach / 0.05).ceil() as usize;
    let (mut hess, mut sup) = (0.0f64, 0.0f64);
    for i in 0..=steps {
        let r = i as f64 * 0.05;
        let h = if n == 1 { w.radial_d2(r).abs() } else { two_d_hessian_sum(w, r) };
        hess = hess.max((1.0 + r).powi(n + 2) * h);
        sup = sup.max((1.0 + r).powi(n) * w.radial(r));
    }
    (hess, sup)
}

/// Max over five directions in `[0, pi/4]` of `|h11| + |h12| + |h22|`.
fn two_d_hessian_sum(w: &PowerWeight, r: f64) -> f64 {
    let d2 = w.radial_d2(r);
    let d1r = if r == 0.0 { d2 } else { w.radial_d1(r) / r };
    (0..5)
        .map(|k| {
            let th = k as f64 * PI / 16.0;
            let (c, s) = (th.cos(), th.sin());
            let h11 = d2 * c * c + d1r * s * s;
            let h22 = d2 * s * s + d1r * c * c;
            let h12 = (d2 - d1r) * c * s;
            h11.abs() + h12.abs() + h22.abs()
        })
        .fold(0.0, f64::max)
}

fn testfn_jobs(cfg: &RunConfig) -> Vec<(&'static str, Job)> {
    let configured = cfg.test_function();
    let (dim, sigma, eta) = (cfg.dim, cfg.sigma, cfg.eta);
    vec![
        job("chi in one dimension", || {
            let spec = TestFunctionSpec::new(1, 2.0, 0.5, 0.5)?;
            let x = 1e4;
            Ok(vec![
                Check::close("N=1 q=2: normalising constant = pi", spec.norm_const(), PI, 1e-12),
                Check::close("N=1 q=2: chi(0) = 1/pi", chi_eval(&spec, &[0.0])?, 1.0 / PI, 1e-15),
                Check::relative("N=1 q=2: |x|^q chi(x) at |x|=1e4 -> 1/pi", x * x * chi_eval(&spec, &[x])?, 1.0 / PI, 1e-7),
            ])
        }),
        job("chi in two dimensions", || {
            let spec = TestFunctionSpec::new(2, 3.0, 0.5, 0.5)?;
            let radial = integrate_to_infinity(|r| 2.0 * PI * r * (1.0 + r * r).powf(-1.5), 0.0, &QuadOptions::default());
            Ok(vec![
                Check::relative("N=2 q=3: normalising constant vs radial quadrature", spec.norm_const(), radial.value, 1e-8),
                Check::relative("N=2 q=3: normalising constant = 2 pi", spec.norm_const(), 2.0 * PI, 1e-12),
            ])
        }),
        job("unit mass", || {
            let mut worst: f64 = 0.0;
            for (n, q) in [(1, 1.5), (1, 2.0), (1, 3.0), (2, 2.5), (2, 3.0), (2, 4.0)] {
                worst = worst.max((chi_mass(&PowerWeight::new(n, q)?) - 1.0).abs());
            }
            Ok(vec![Check::close("int chi = 1 for six (N, q)", worst, 0.0, 1e-6)])
        }),
        job("radially nonincreasing", || {
            let mut rise = f64::NEG_INFINITY;
            for (n, q) in [(1, 2.0), (2, 3.0)] {
                let w = PowerWeight::new(n, q)?;
                for i in 0..400 {
                    let r = 0.05 * i as f64;
                    rise = rise.max(w.radial(r + 0.05) - w.radial(r));
                }
            }
            Ok(vec![Check::at_most("largest increase of chi along a ray", rise, 0.0)])
        }),
        job("symmetry and sign", || {
            let spec = TestFunctionSpec::new(1, 2.0, 0.5, 0.5)?;
            let pts: Vec<Vec<f64>> = [0.0, 0.7, -0.7, 3.0, -3.0].iter().map(|&x| vec![x]).collect();
            let v = frac_laplacian_radial(&spec, 0.5, &pts)?;
            let spec2 = TestFunctionSpec::new(2, 3.0, 0.5, 0.5)?;
            let v2 = frac_laplacian_radial(&spec2, 0.5, &[vec![1.0, 2.0], vec![-1.0, -2.0], vec![0.0, 0.0]])?;
            Ok(vec![
                Check::close("N=1: value at x equals value at -x", (v[1] - v[2]).abs().max((v[3] - v[4]).abs()), 0.0, 1e-12),
                Check::close("N=2: value at x equals value at -x", (v2[0] - v2[1]).abs(), 0.0, 1e-12),
                Check::above("N=1 q=2 s=1/2: value at origin > 0", v[0], 0.0),
                Check::above("N=2 q=3 s=1/2: value at origin > 0", v2[2], 0.0),
            ])
        }),
        job("two-route agreement", || {
            let mut out = Vec::new();
            let w = PowerWeight::new(1, 2.0)?;
            let a = frac_laplacian_radial(&TestFunctionSpec::new(1, 2.0, 0.5, 0.5)?, 0.5, &[vec![0.0]])?[0];
            out.push(Check::relative("N=1 q=2 s=1/2 x=0: singular integral vs Fourier route", a, frac_laplacian_fourier(&w, 0.5, 0.0)?, 1e-3));
            for (n, q, s) in [(1usize, 2.0, 0.5), (2, 3.0, 0.5), (1, 1.5, 0.25)] {
                let spec = TestFunctionSpec::new(n, q, s, s)?;
                let w = PowerWeight::new(n, q)?;
                let pts: Vec<Vec<f64>> = (0..=20)
                    .map(|i| {
                        let r = 0.5 * i as f64;
                        if n == 1 { vec![r] } else { vec![r * 0.6, r * 0.8] }
                    })
                    .collect();
                let sing = frac_laplacian_radial(&spec, s, &pts)?;
                let four: Vec<f64> = (0..=20).map(|i| frac_laplacian_fourier(&w, s, 0.5 * i as f64)).collect::<Result<_, _>>()?;
                let floor = 1e-6 * four.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let gap = sing.iter().zip(&four).fold(0.0f64, |m, (x, y)| m.max((x - y).abs() / y.abs().max(floor)));
                out.push(Check::close(format!("N={n} q={q} s={s}: relative gap of the two routes on |x| <= 10"), gap, 0.0, 1e-3));
            }
            Ok(out)
        }),
        job("comparability stability", move || {
            let mut specs = vec![(1usize, 2.0, 0.5), (2, 3.0, 0.5)];
            if let Some(spec) = configured {
                for s in [spec.sigma(), spec.eta()] {
                    if s > 0.0 && s < 1.0 && !specs.contains(&(spec.dim(), spec.q(), s)) {
                        specs.push((spec.dim(), spec.q(), s));
                    }
                }
            }
            let mut out = Vec::new();
            for (n, q, s) in specs {
                let spec = TestFunctionSpec::new(n, q, s, s)?;
                let c10 = verify_comparability(&spec, s, 10.0, default_samples(10.0))?;
                let c20 = verify_comparability(&spec, s, 20.0, default_samples(20.0))?;
                out.push(Check::relative(format!("N={n} q={q} s={s}: C(20) vs C(10)"), c20, c10, 0.1));
            }
            Ok(out)
        }),
        job("comparability across the window", move || {
            let cap = max_admissible_q(dim, sigma, eta);
            let top = cap.unwrap_or(dim as f64 + 2.0);
            let mut values = Vec::new();
            for frac in [0.25, 0.5, 0.75, 1.0] {
                let q = dim as f64 + frac * (top - dim as f64);
                let spec = TestFunctionSpec::new(dim, q, sigma, eta)?;
                let s = if sigma < 1.0 { sigma } else { eta };
                if s > 0.0 && s < 1.0 {
                    values.push(verify_comparability(&spec, s, 10.0, default_samples(10.0))?);
                }
            }
            // only finiteness is asserted; the values are reported
            let worst = values.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(*v) } else { f64::INFINITY });
            Ok(vec![Check::holds(
                format!("configured (N, sigma, eta): constants finite across the q window {values:.4?}"),
                worst.is_finite(),
            )])
        }),
        job("inadmissible q", || {
            Ok(vec![
                Check::holds("0<sigma<1, q = N + 2 sigma + 1 rejected", TestFunctionSpec::new(1, 3.0, 0.5, 0.0).is_err()),
                Check::holds("q = N rejected", TestFunctionSpec::new(2, 2.0, 1.0, 1.0).is_err()),
            ])
        }),
        job("cutoff profile", || {
            let mut low = f64::INFINITY;
            let mut high = f64::NEG_INFINITY;
            let mut off_plateau: f64 = 0.0;
            let mut scale_gap: f64 = 0.0;
            let base = CutoffSpec::new(1)?;
            let (mut d1_sup, mut d2_sup) = (0.0f64, 0.0f64);
            for i in 0..=500 {
                let r = 2.5 * i as f64 / 500.0;
                let (v, d1, d2) = base.radial(r);
                low = low.min(v);
                high = high.max(v);
                if r <= 1.0 {
                    off_plateau = off_plateau.max((v - 1.0).abs());
                } else if r >= 2.0 {
                    off_plateau = off_plateau.max(v.abs());
                }
                d1_sup = d1_sup.max(d1.abs());
                d2_sup = d2_sup.max(d2.abs());
            }
            for n in [2u32, 4, 8, 16] {
                let cut = CutoffSpec::new(n)?;
                let nf = n as f64;
                let (mut a, mut b) = (0.0f64, 0.0f64);
                for i in 0..=500 {
                    let (_, d1, d2) = cut.radial(2.5 * nf * i as f64 / 500.0);
                    a = a.max(d1.abs());
                    b = b.max(d2.abs());
                }
                scale_gap = scale_gap.max((nf * a - d1_sup).abs()).max((nf * nf * b - d2_sup).abs());
            }
            Ok(vec![
                Check::at_least("min Psi >= 0", low, 0.0),
                Check::at_most("max Psi <= 1", high, 1.0),
                Check::close("Psi = 1 on |x| <= 1 and 0 on |x| >= 2", off_plateau, 0.0, 0.0),
                Check::close("n sup|psi_n'| and n^2 sup|psi_n''| independent of n", scale_gap, 0.0, 1e-12),
            ])
        }),
        job("cutoff L1 norm", || {
            let mut worst = f64::NEG_INFINITY;
            for (n, q) in [(1usize, 2.0), (2, 3.0)] {
                let spec = TestFunctionSpec::new(n, q, 0.5, 0.5)?;
                for k in [1u32, 2, 4, 8, 16] {
                    worst = worst.max(cutoff_constants(&spec, &CutoffSpec::new(k)?, 0.5)?.l1_norm);
                }
            }
            Ok(vec![Check::at_most("||psi_n chi||_1 <= ||chi||_1 = 1", worst, 1.0 + 1e-9)])
        }),
        job("cutoff terms converge to chi", || {
            let mut out = Vec::new();
            for (n, q) in [(1usize, 2.0), (2, 3.0)] {
                let spec = TestFunctionSpec::new(n, q, 0.5, 0.5)?;
                let big = cutoff_constants(&spec, &CutoffSpec::new(256)?, 0.5)?;
                let (hess, sup) = chi_alone_terms(spec.weight(), 512.0);
                out.push(Check::relative(format!("N={n} n=256: weighted Hessian sup vs chi alone"), big.hessian_sup, hess, 1e-2));
                out.push(Check::relative(format!("N={n} n=256: weighted sup vs chi alone"), big.weighted_sup, sup, 1e-2));
                out.push(Check::relative(format!("N={n} n=256: L1 norm vs 1"), big.l1_norm, 1.0, 1e-2));
            }
            Ok(out)
        }),
        job("cutoff uniformity", || {
            let mut out = Vec::new();
            for (n, q) in [(1usize, 2.0), (2, 3.0)] {
                let spec = TestFunctionSpec::new(n, q, 0.5, 0.5)?;
                let totals: Vec<f64> = [1u32, 2, 4, 8, 16]
                    .iter()
                    .map(|&k| Ok(cutoff_constants(&spec, &CutoffSpec::new(k)?, 0.5)?.total))
                    .collect::<Fallible<_>>()?;
                let reference = totals[4];
                let worst = totals.iter().fold(1.0f64, |m, c| m.max(c / reference).max(reference / c));
                out.push(Check::at_most(format!("N={n} q={q}: max factor between C(n) and C(16), n in 1..16"), worst, 2.0));
            }
            Ok(out)
        }),
    ]
}

// ---------------------------------------------------------------- wavesim

fn center_index(cfg: &RunConfig) -> usize {
    let c = cfg.modes / 2;
    if cfg.dim == 1 {
        c
    } else {
        c + c * cfg.modes
    }
}

/// Online (block-FFT) memory values against direct sums at one grid point
/// over the first `steps` steps of a run.
fn memory_equivalence(cfg: &RunConfig, steps: usize) -> Fallible<Check> {
    let params = cfg.model().with_threshold(f64::INFINITY);
    let (u0, u1) = cfg.data().fields(&params);
    let mut state = SimState::new(&params, &u0, &u1, true)?;
    let steps = steps.min(params.n_steps());
    for _ in 0..steps {
        state.advance()?;
    }
    let history = state.memory().history();
    let idx = center_index(cfg);
    let mut online = MemoryConvolver::new(order(1.0 - cfg.gamma)?, cfg.dt, history[0].len());
    let (mut gap, mut scale) = (0.0f64, 0.0f64);
    for (m, g) in history.iter().enumerate() {
        online.push(g.clone());
        let fast = online.take_value(m)[idx];
        let direct = online.direct_value(m)[idx];
        gap = gap.max((fast - direct).abs());
        scale = scale.max(direct.abs());
    }
    Ok(Check::with_residual(
        format!("online vs direct memory at the centre, first {steps} steps, relative"),
        gap,
        scale,
        if scale > 0.0 { gap / scale } else { gap },
        1e-6,
    ))
}

fn monitor_checks(cfg: &RunConfig, result: &SimResult) -> Fallible<Vec<Check>> {
    let params = cfg.model();
    let chi = cfg.test_function().ok_or("test function parameters are invalid")?;
    let radius = params.half_width;
    let constant = |s: f64| -> Fallible<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        Ok(verify_comparability(&chi, s, radius, default_samples(radius))?.max(comparability_on_grid(&params, &chi, s)))
    };
    let c = monitor_constant(constant(params.sigma)?, constant(params.eta)?, params.mu);
    let monitor = moment_inequality_monitor(result, &params, Some(c))?;
    let identity = identity_series(result, &params)?;
    let t_fit = result.final_time.min(1.0);
    let fitted = fit_linear_coefficient(&identity, t_fit);
    Ok(vec![
        {
            let m = monitor.min_normalized();
            Check::with_residual(format!("moment inequality, C = {c:.6}: min residual/scale"), m, 0.0, excess(-m), 1e-3)
        },
        Check::relative(format!("B fitted on (0, {t_fit}] vs B from the data"), fitted, result.b_const, 5e-2),
    ])
}

fn classification_check(label: Classification, time: f64, cfg_t_max: f64, note: &str) -> Check {
    let name = if note.is_empty() {
        format!("classification {label}")
    } else {
        format!("classification {label} ({note})")
    };
    let residual = if label == Classification::Failure { f64::NAN } else { 0.0 };
    Check::with_residual(name, time, cfg_t_max, residual, 0.0)
}

fn simulate(cfg: &RunConfig) -> SuiteOutput {
    let params = cfg.model();
    let mut out = SuiteOutput::default();
    let Some(chi) = cfg.test_function() else {
        out.checks.push(Check::errored("simulate", "test function parameters are invalid"));
        return out;
    };
    let (u0, u1) = cfg.data().fields(&params);
    let options = RunOptions {
        record_every: cfg.record_every,
        forcing: true,
    };
    let start = Instant::now();
    let (result, note) = match run_with(&params, &u0, &u1, &chi, &options) {
        Ok(r) => (r, String::new()),
        Err(SimError::IntegrationFailure { partial, reason, .. }) => (*partial, reason),
        Err(e) => {
            out.checks.push(Check::errored("simulate", e));
            return out;
        }
    };
    let time = result.blowup_time.unwrap_or(result.final_time);
    let mut run_check = classification_check(result.classification, time, params.t_max, &note);
    let tail = [
        monitor_checks(cfg, &result).unwrap_or_else(|e| vec![Check::errored("moment monitor", e)]),
        vec![memory_equivalence(cfg, 200).unwrap_or_else(|e| Check::errored("memory equivalence", e))],
    ];
    if cfg.record_wall_time {
        run_check.seconds = start.elapsed().as_secs_f64();
    }
    out.checks.push(run_check);
    out.checks.extend(tail.into_iter().flatten());
    out.simulation = Some(result);
    out
}

fn sweep(cfg: &RunConfig) -> SuiteOutput {
    let base = cfg.model();
    let mut out = SuiteOutput::default();
    let rows = match threshold_sweep(&base, &cfg.p_values, &cfg.data()) {
        Ok(rows) => rows,
        Err(e) => {
            out.checks.push(Check::errored("sweep", e));
            return out;
        }
    };
    for row in &rows {
        let Some(class) = row.classification else {
            out.checks.push(Check::with_residual(row.note.clone(), 0.0, 0.0, 0.0, 0.0));
            continue;
        };
        out.checks.push(classification_check(class, row.time, base.t_max, &format!("p={}", row.p)).with_note(&row.note));
        if row.p_gamma <= 1.0 {
            out.checks.push(Check::holds(
                format!("p={} (p gamma = {}): BLOWUP expected for p gamma <= 1", row.p, row.p_gamma),
                class == Classification::Blowup,
            ));
        }
    }
    out.sweep = rows;
    out
}

trait WithNote {
    fn with_note(self, note: &str) -> Self;
}

impl WithNote for Check {
    fn with_note(mut self, note: &str) -> Self {
        if !note.is_empty() {
            self.name = format!("{}: {note}", self.name);
        }
        self
    }
}
