//! The Volterra integral inequality
//! `w + b I^1 w + c I^2 w - A - B t >= a I^(3-gamma) |w|^p`.
//!
//! Provides a second-kind Volterra solver for the linear part, the closed-form
//! solution of the twice-integrated equation obtained by Laplace inversion,
//! the long-time limits of fractional integrals of decaying exponentials,
//! the finite-horizon certificate of the power-law bound, the weighted Hardy
//! estimate for `I^2`, and a tail-minimum proxy for the growth liminf.

use serde::{Deserialize, Serialize};

use crate::fracops::{
    rl_left_last, rl_left_values, trapezoid, FracError, FracOrder, TimeGrid, TimeSeries,
};
use crate::special::{gamma, gamma_ratio, GammaPole};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VolterraError {
    #[error("invalid inequality parameters: {0}")]
    InvalidParams(String),
    #[error("step too large: diagonal coefficient 1 + b h/2 + c h^2/4 = {0} is not positive")]
    StepTooLarge(f64),
    #[error("test exponent l = {l} must exceed p(3-gamma)/(p-1) = {threshold}")]
    ExponentTooSmall { l: f64, threshold: f64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Pole(#[from] GammaPole),
}

pub type Result<T> = std::result::Result<T, VolterraError>;

/// Parameters `(A, B, a, b, c, gamma, p)` of the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityParams {
    a_const: f64,
    b_const: f64,
    source: f64,
    b: f64,
    c: f64,
    gamma: f64,
    p: f64,
}

impl InequalityParams {
    /// Validates `a > 0`, `c > 0`, `b^2 - 4c > 0`, `gamma < 1`, `p > 1`.
    pub fn new(a_const: f64, b_const: f64, source: f64, b: f64, c: f64, gamma: f64, p: f64) -> Result<Self> {
        let violations = Self::violations(a_const, b_const, source, b, c, gamma, p);
        if !violations.is_empty() {
            return Err(VolterraError::InvalidParams(violations.join("; ")));
        }
        Ok(Self {
            a_const,
            b_const,
            source,
            b,
            c,
            gamma,
            p,
        })
    }

    /// Every hypothesis the arguments break, in a fixed order.
    pub fn violations(a_const: f64, b_const: f64, source: f64, b: f64, c: f64, gamma: f64, p: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [("A", a_const), ("B", b_const), ("a", source), ("b", b), ("c", c), ("gamma", gamma), ("p", p)] {
            if !v.is_finite() {
                out.push(format!("{name} must be finite"));
            }
        }
        if !(source > 0.0) {
            out.push(format!("a = {source} violates a>0"));
        }
        if !(c > 0.0) {
            out.push(format!("c = {c} violates c>0"));
        }
        if !(b * b - 4.0 * c > 0.0) {
            out.push(format!("b = {b}, c = {c} violate b²−4c>0"));
        }
        if !(gamma < 1.0) {
            out.push(format!("gamma = {gamma} violates γ<1"));
        }
        if !(p > 1.0) {
            out.push(format!("p = {p} violates p>1"));
        }
        out
    }

    pub fn a_const(&self) -> f64 {
        self.a_const
    }
    pub fn b_const(&self) -> f64 {
        self.b_const
    }
    pub fn source(&self) -> f64 {
        self.source
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Same hypotheses with different data constants `A`, `B`.
    pub fn with_data(&self, a_const: f64, b_const: f64) -> Result<Self> {
        Self::new(a_const, b_const, self.source, self.b, self.c, self.gamma, self.p)
    }

    /// Roots `(lambda_1, lambda_2)` of `s^2 + b s + c`, `lambda_1 < lambda_2`.
    pub fn roots(&self) -> (f64, f64) {
        let disc = (self.b * self.b - 4.0 * self.c).sqrt();
        // avoid cancellation in the root of smaller magnitude
        let q = -0.5 * (self.b + self.b.signum() * disc);
        let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q, self.c / q) };
        (r1.min(r2), r1.max(r2))
    }

    /// Threshold `p(3-gamma)/(p-1)` that the test exponent `l` must exceed.
    pub fn exponent_threshold(&self) -> f64 {
        self.p * (3.0 - self.gamma) / (self.p - 1.0)
    }
}

/// Outcome of evaluating both sides of the power-law bound on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub l_used: f64,
    pub t_used: f64,
    /// Constant multiplying the sum of the three powers of `T`.
    pub constant: f64,
    /// The exponents of `T` on the right-hand side.
    pub exponents: [f64; 3],
}

/// Solves `w + b I^1 w + c I^2 w = A + B t + f(t)` by marching.
///
/// `I^1` and `I^2 = I^1 I^1` are both accumulated with the trapezoidal rule,
/// so each node needs one scalar division by `1 + b h/2 + c h^2/4`.
pub fn solve_linear_volterra(params: &InequalityParams, f: &TimeSeries) -> Result<TimeSeries> {
    let grid = *f.grid();
    let h = grid.h();
    let (b, c) = (params.b, params.c);
    let diag = 1.0 + 0.5 * b * h + 0.25 * c * h * h;
    if !(diag > 0.0) {
        return Err(VolterraError::StepTooLarge(diag));
    }
    let rhs = |i: usize| params.a_const + params.b_const * grid.node(i) + f.values()[i];
    let mut w = Vec::with_capacity(grid.len());
    w.push(rhs(0));
    let (mut v1, mut v2) = (0.0, 0.0);
    for i in 1..grid.len() {
        let w_prev = w[i - 1];
        // parts of I^1 w, I^2 w at t_i that do not involve w_i
        let v1_known = v1 + 0.5 * h * w_prev;
        let v2_known = v2 + 0.5 * h * v1 + 0.5 * h * v1_known;
        let wi = (rhs(i) - b * v1_known - c * v2_known) / diag;
        v1 = v1_known + 0.5 * h * wi;
        v2 = v2_known + 0.25 * h * h * wi;
        w.push(wi);
    }
    Ok(TimeSeries::new(grid, w)?)
}

/// `I^1 e^(lambda t) = (e^(lambda t) - 1) / lambda`.
fn int1_exp(lambda: f64, t: f64) -> f64 {
    let x = lambda * t;
    if x.abs() < 1e-8 {
        t * (1.0 + 0.5 * x)
    } else {
        x.exp_m1() / lambda
    }
}

/// `I^2 e^(lambda t) = (e^(lambda t) - 1 - lambda t) / lambda^2`.
fn int2_exp(lambda: f64, t: f64) -> f64 {
    let x = lambda * t;
    if x.abs() < 1e-3 {
        // t^2 (1/2 + x/6 + x^2/24 + x^3/120)
        t * t * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))
    } else {
        (x.exp_m1() - x) / (lambda * lambda)
    }
}

/// Closed-form `v = I^2 w` obtained by Laplace inversion:
/// `v = (A I^1 k + B I^2 k + k * f) / (lambda_2 - lambda_1)` with
/// `k(t) = e^(lambda_2 t) - e^(lambda_1 t)`. The exponential integrals are
/// exact; the convolution with `f` uses the trapezoidal rule.
pub fn closed_form_v(params: &InequalityParams, f: &TimeSeries) -> Result<TimeSeries> {
    let grid = *f.grid();
    let (l1, l2) = params.roots();
    let gap = l2 - l1;
    let h = grid.h();
    let kernel: Vec<f64> = grid.nodes().map(|t| (l2 * t).exp() - (l1 * t).exp()).collect();
    let fv = f.values();
    let has_source = fv.iter().any(|&v| v != 0.0);
    let values = grid
        .nodes()
        .enumerate()
        .map(|(n, t)| {
            let a_part = params.a_const * (int1_exp(l2, t) - int1_exp(l1, t));
            let b_part = params.b_const * (int2_exp(l2, t) - int2_exp(l1, t));
            let conv = if has_source && n > 0 {
                let terms: Vec<f64> = (0..=n).map(|j| kernel[n - j] * fv[j]).collect();
                trapezoid(&terms, h)
            } else {
                0.0
            };
            (a_part + b_part + conv) / gap
        })
        .collect();
    Ok(TimeSeries::new(grid, values)?)
}

const LIMIT_STEP: f64 = 4e-5;

/// `(I^1 e^(lambda t), t^-1 I^2 e^(lambda t), t^(gamma-2) I^(3-gamma) e^(lambda t))`
/// at time `t`, computed with the product-integration operators on a grid of
/// step at most `LIMIT_STEP` (and at least 4000 cells). The fine step keeps
/// the quadrature error below the distance to the limit for `t <= 100`.
pub fn exp_frac_integral_limits(lambda: f64, gamma_: f64, t: f64) -> Result<(f64, f64, f64)> {
    if !(lambda < 0.0) {
        return Err(VolterraError::InvalidArgument(format!("lambda = {lambda} must be negative")));
    }
    if !(gamma_ < 1.0) {
        return Err(VolterraError::InvalidArgument(format!("gamma = {gamma_} violates γ<1")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(VolterraError::InvalidArgument(format!("t = {t} must be positive")));
    }
    let n_steps = ((t / LIMIT_STEP).ceil() as usize).max(4000);
    let h = t / n_steps as f64;
    let e: Vec<f64> = (0..=n_steps).map(|i| (lambda * i as f64 * h).exp()).collect();
    let i1 = rl_left_last(&e, h, FracOrder::new(1.0)?);
    let i2 = rl_left_last(&e, h, FracOrder::new(2.0)?);
    let i3 = rl_left_last(&e, h, FracOrder::new(3.0 - gamma_)?);
    Ok((i1, i2 / t, t.powf(gamma_ - 2.0) * i3))
}

/// The limits of [`exp_frac_integral_limits`] as `t -> inf`.
pub fn exp_frac_integral_limit_values(lambda: f64, gamma_: f64) -> (f64, f64, f64) {
    let base = -1.0 / lambda;
    (base, base, base / gamma(3.0 - gamma_))
}

/// Young-inequality constants behind the power-law bound.
///
/// With `phi = Gamma(l+1)/Gamma(l+gamma-2) T^-(3-gamma) (1-t/T)^(l-3+gamma)`
/// the three multipliers `phi`, `|b| tI^1 phi`, `c tI^2 phi` are
/// `D_j T^(j-3+gamma) (1-t/T)^(l-3+gamma+j)`. Splitting
/// `|w| |phi_j| <= (a/6) |w|^p psi_T + K_j |phi_j|^p' psi_T^(-p'/p)` and
/// integrating the second term exactly gives `C_j T^(1 - p(3-gamma-j)/(p-1))`.
/// Returns `(max_j C_j, [C_0, C_1, C_2], exponents)`.
pub fn young_constants(params: &InequalityParams, l: f64) -> Result<(f64, [f64; 3], [f64; 3])> {
    let p = params.p;
    let g = params.gamma;
    let threshold = params.exponent_threshold();
    if !(l > threshold) {
        return Err(VolterraError::ExponentTooSmall { l, threshold });
    }
    let conj = p / (p - 1.0);
    let eps = params.source / 6.0;
    let young = (p * eps).powf(-1.0 / (p - 1.0)) / conj;
    let mults = [1.0, params.b.abs(), params.c];
    let mut consts = [0.0; 3];
    let mut exps = [0.0; 3];
    for j in 0..3 {
        let jf = j as f64;
        let d = mults[j] * gamma_ratio(l + 1.0, l + g - 2.0 + jf)?;
        let shift = p * (3.0 - g - jf) / (p - 1.0);
        consts[j] = young * d.powf(conj) / (1.0 + l - shift);
        exps[j] = 1.0 - shift;
    }
    let c = consts.iter().copied().fold(0.0, f64::max);
    Ok((c, consts, exps))
}

/// Evaluates both sides of the power-law bound on the horizon of `w`:
/// `LHS = (a/2) int |w|^p psi_T + A Gamma(l+1)/Gamma(l+gamma-1) T^(gamma-2)
///        + B Gamma(l+1)/Gamma(l+gamma) T^(gamma-1)`,
/// `RHS = C (T^(1-p(3-gamma)/(p-1)) + T^(1-p(2-gamma)/(p-1)) + T^(1-p(1-gamma)/(p-1)))`,
/// with `psi_T = (1 - t/T)^l`.
pub fn certify_bound_i(w: &TimeSeries, params: &InequalityParams, l: f64) -> Result<CertificateReport> {
    let (constant, _, exponents) = young_constants(params, l)?;
    let grid = *w.grid();
    let horizon = grid.horizon();
    let (p, g) = (params.p, params.gamma);
    let weighted: Vec<f64> = grid
        .nodes()
        .zip(w.values())
        .map(|(t, &v)| v.abs().powf(p) * (1.0 - t / horizon).max(0.0).powf(l))
        .collect();
    let lhs = 0.5 * params.source * trapezoid(&weighted, grid.h())
        + params.a_const * gamma_ratio(l + 1.0, l + g - 1.0)? * horizon.powf(g - 2.0)
        + params.b_const * gamma_ratio(l + 1.0, l + g)? * horizon.powf(g - 1.0);
    let rhs = constant * exponents.iter().map(|&e| horizon.powf(e)).sum::<f64>();
    Ok(CertificateReport {
        lhs,
        rhs,
        satisfied: lhs <= rhs,
        l_used: l,
        t_used: horizon,
        constant,
        exponents,
    })
}

/// Sharp constant `Gamma(1 - 1/p) / Gamma(3 - 1/p)` of the weighted Hardy
/// inequality for `I^2` in `L^p`.
pub fn hardy_constant(p: f64) -> f64 {
    gamma(1.0 - 1.0 / p) / gamma(3.0 - 1.0 / p)
}

/// `(LHS, RHS)` of `(int t^(-2p) |I^2 w|^p)^(1/p) <= K_p (int |w|^p)^(1/p)`
/// truncated to the horizon of `w`. The weighted integral starts at the
/// first node after `t = 0`.
pub fn weighted_hardy_check(w: &TimeSeries, p: f64) -> Result<(f64, f64)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(VolterraError::InvalidArgument(format!("p = {p} violates p>1")));
    }
    let grid = *w.grid();
    let h = grid.h();
    let i2 = rl_left_values(w.values(), h, FracOrder::new(2.0)?);
    let weighted: Vec<f64> = grid
        .nodes()
        .zip(&i2)
        .skip(1)
        .map(|(t, v)| t.powf(-2.0 * p) * v.abs().powf(p))
        .collect();
    let lhs = trapezoid(&weighted, h).powf(1.0 / p);
    let powered: Vec<f64> = w.values().iter().map(|v| v.abs().powf(p)).collect();
    let rhs = hardy_constant(p) * trapezoid(&powered, h).powf(1.0 / p);
    Ok((lhs, rhs))
}

/// Minimum of `t^(gamma-2) I^2 w` over the last quarter of the grid, a proxy
/// for `liminf_{t->inf} t^(gamma-2) I^2 w`.
pub fn liminf_growth_estimate(w: &TimeSeries, gamma_: f64) -> Result<f64> {
    if !(gamma_ < 1.0) {
        return Err(VolterraError::InvalidArgument(format!("gamma = {gamma_} violates γ<1")));
    }
    let grid = *w.grid();
    let i2 = rl_left_values(w.values(), grid.h(), FracOrder::new(2.0)?);
    let start = (3 * grid.len()) / 4;
    Ok(grid
        .nodes()
        .zip(&i2)
        .skip(start.max(1))
        .map(|(t, v)| t.powf(gamma_ - 2.0) * v)
        .fold(f64::INFINITY, f64::min))
}

/// Result of the fixed-point construction of an inequality solution.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedPointOutcome {
    Converged { w: TimeSeries, iterations: usize, last_change: f64 },
    /// Iteration stopped at the cap without meeting the tolerance.
    Stalled { w: TimeSeries, iterations: usize, last_change: f64 },
    /// The iterate exceeded 1e10 in max norm.
    Diverged { iterations: usize },
}

impl FixedPointOutcome {
    pub fn solution(&self) -> Option<&TimeSeries> {
        match self {
            Self::Converged { w, .. } => Some(w),
            _ => None,
        }
    }
}

/// Iterates `w <- solve_linear_volterra(params, a I^(3-gamma) |w|^p)` from
/// `w = A + B t` until successive iterates differ by less than `1e-8` in max
/// norm (at most 100 sweeps). A converged `w` satisfies the inequality with
/// equality.
pub fn fixed_point_solution(params: &InequalityParams, grid: TimeGrid) -> Result<FixedPointOutcome> {
    const TOL: f64 = 1e-8;
    const MAX_ITER: usize = 100;
    const DIVERGED: f64 = 1e10;
    let order = FracOrder::new(3.0 - params.gamma)?;
    let mut w = TimeSeries::from_fn(grid, |t| params.a_const + params.b_const * t)?;
    let mut change = f64::INFINITY;
    for it in 1..=MAX_ITER {
        let powered: Vec<f64> = w.values().iter().map(|v| v.abs().powf(params.p)).collect();
        let forcing: Vec<f64> = rl_left_values(&powered, grid.h(), order)
            .into_iter()
            .map(|v| params.source * v)
            .collect();
        if forcing.iter().any(|v| !v.is_finite() || v.abs() > DIVERGED) {
            return Ok(FixedPointOutcome::Diverged { iterations: it });
        }
        let next = solve_linear_volterra(params, &TimeSeries::new(grid, forcing)?)?;
        if next.max_abs() > DIVERGED {
            return Ok(FixedPointOutcome::Diverged { iterations: it });
        }
        change = next.max_abs_diff(&w)?;
        w = next;
        if change < TOL {
            return Ok(FixedPointOutcome::Converged {
                w,
                iterations: it,
                last_change: change,
            });
        }
    }
    Ok(FixedPointOutcome::Stalled {
        w,
        iterations: MAX_ITER,
        last_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::fracops::rl_left;

    fn params(a: f64, b_: f64, b: f64, c: f64) -> InequalityParams {
        InequalityParams::new(a, b_, 1.0, b, c, 0.5, 3.0).unwrap()
    }

    #[test]
    fn hypotheses_enforced() {
        assert!(InequalityParams::new(0.0, 0.0, 1.0, 1.0, 2.0, 0.5, 2.0).is_err());
        assert!(InequalityParams::new(0.0, 0.0, 0.0, 3.0, 2.0, 0.5, 2.0).is_err());
        assert!(InequalityParams::new(0.0, 0.0, 1.0, 3.0, 2.0, 1.0, 2.0).is_err());
        assert!(InequalityParams::new(0.0, 0.0, 1.0, 3.0, 2.0, 0.5, 1.0).is_err());
        let v = InequalityParams::violations(0.0, 0.0, -1.0, 1.0, 2.0, 1.0, 0.5);
        assert_eq!(v.len(), 4, "{v:?}");
        assert!(v.iter().any(|m| m.contains("b²−4c>0")));
    }

    #[test]
    fn roots_ordered() {
        let (l1, l2) = params(0.0, 0.0, 3.0, 2.0).roots();
        assert_relative_eq!(l1, -2.0, max_relative = 1e-15);
        assert_relative_eq!(l2, -1.0, max_relative = 1e-15);
        let (l1, l2) = params(0.0, 0.0, -3.0, 2.0).roots();
        assert!(l1 < l2);
        assert_relative_eq!(l1, 1.0, max_relative = 1e-15);
        assert_relative_eq!(l2, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = TimeGrid::with_horizon(100, 1.0).unwrap();
        let z = TimeSeries::zeros(g);
        let p = params(0.0, 0.0, 3.0, 2.0);
        assert_eq!(solve_linear_volterra(&p, &z).unwrap().max_abs(), 0.0);
        assert_eq!(closed_form_v(&p, &z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn closed_form_spot_value() {
        let ln2 = std::f64::consts::LN_2;
        let g = TimeGrid::with_horizon(1, ln2).unwrap();
        let v = closed_form_v(&params(1.0, 0.0, 3.0, 2.0), &TimeSeries::zeros(g)).unwrap();
        assert_relative_eq!(v.last(), 0.125, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_a_branch_nonnegative() {
        let g = TimeGrid::with_horizon(500, 20.0).unwrap();
        let v = closed_form_v(&params(2.0, 0.0, 5.0, 4.0), &TimeSeries::zeros(g)).unwrap();
        assert!(v.values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn integrated_solution_matches_closed_form() {
        let g = TimeGrid::with_horizon(4000, 10.0).unwrap();
        let z = TimeSeries::zeros(g);
        for p in [params(1.0, 0.0, 3.0, 2.0), params(0.0, 1.0, 3.0, 2.0)] {
            let w = solve_linear_volterra(&p, &z).unwrap();
            let v = rl_left(&w, FracOrder::new(2.0).unwrap()).unwrap();
            let exact = closed_form_v(&p, &z).unwrap();
            let gap = v.max_abs_diff(&exact).unwrap();
            assert!(gap < 1e-4, "{gap}");
        }
    }

    #[test]
    fn closed_form_with_source_matches_solver() {
        let g = TimeGrid::with_horizon(2000, 5.0).unwrap();
        let f = TimeSeries::from_fn(g, |t| (2.0 * t).sin()).unwrap();
        let p = params(0.5, -0.2, 3.0, 2.0);
        let w = solve_linear_volterra(&p, &f).unwrap();
        let v = rl_left(&w, FracOrder::new(2.0).unwrap()).unwrap();
        let exact = closed_form_v(&p, &f).unwrap();
        assert!(v.max_abs_diff(&exact).unwrap() < 1e-4);
    }

    #[test]
    fn step_too_large_rejected() {
        let p = InequalityParams::new(1.0, 0.0, 1.0, -50.0, 2.0, 0.5, 2.0).unwrap();
        let g = TimeGrid::with_horizon(10, 10.0).unwrap();
        assert!(matches!(
            solve_linear_volterra(&p, &TimeSeries::zeros(g)),
            Err(VolterraError::StepTooLarge(_))
        ));
    }

    #[test]
    fn limits_examples() {
        let t = 50.0;
        let (a, b, c) = exp_frac_integral_limits(-1.0, 0.5, t).unwrap();
        let (la, lb, lc) = exp_frac_integral_limit_values(-1.0, 0.5);
        assert_relative_eq!(lc, 1.0 / gamma(2.5), max_relative = 1e-14);
        // exact finite-t values of the first two components
        assert!((a - (1.0 - (-t).exp())).abs() < 2e-5);
        assert!((b - (1.0 - (1.0 - (-t).exp()) / t)).abs() < 2e-5);
        // third component: limit times 1 - (2 - gamma)/(|lambda| t) + O(t^-2)
        assert!((c / lc - (1.0 - 1.5 / t)).abs() < 2e-3, "{}", c / lc);
        for (v, l) in [(a, la), (b, lb), (c, lc)] {
            assert!((v - l).abs() < 0.04 * l);
        }
        assert_eq!(exp_frac_integral_limit_values(-2.0, 0.5).0, 0.5);
        let (small, _, _) = exp_frac_integral_limits(-1.0, 0.5, 1e-3).unwrap();
        assert!((small - 1e-3).abs() < 1e-6);
        assert!(exp_frac_integral_limits(0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn exponents_arithmetic() {
        let p = params(0.0, 0.0, 3.0, 2.0);
        let (_, _, e) = young_constants(&p, 16.0).unwrap();
        assert_relative_eq!(e[0], -2.75, max_relative = 1e-14);
        assert_relative_eq!(e[1], -1.25, max_relative = 1e-14);
        assert_relative_eq!(e[2], 0.25, max_relative = 1e-14);
        assert!(matches!(
            young_constants(&p, 3.75),
            Err(VolterraError::ExponentTooSmall { .. })
        ));
    }

    #[test]
    fn certificate_trivial_case() {
        let p = InequalityParams::new(-1.0, -0.5, 1.0, 3.0, 2.0, 0.5, 3.0).unwrap();
        let g = TimeGrid::with_horizon(100, 2.0).unwrap();
        let r = certify_bound_i(&TimeSeries::zeros(g), &p, 16.0).unwrap();
        assert!(r.lhs <= 0.0 && r.rhs >= 0.0 && r.satisfied);
    }

    #[test]
    fn hardy_examples() {
        assert_relative_eq!(hardy_constant(2.0), 4.0 / 3.0, max_relative = 1e-12);
        let g = TimeGrid::with_horizon(100, 1.0).unwrap();
        assert_eq!(weighted_hardy_check(&TimeSeries::zeros(g), 2.0).unwrap(), (0.0, 0.0));
        assert!(weighted_hardy_check(&TimeSeries::zeros(g), 1.0).is_err());
    }

    #[test]
    fn liminf_examples() {
        let g = TimeGrid::with_horizon(100, 10.0).unwrap();
        let one = TimeSeries::from_fn(g, |_| 1.0).unwrap();
        assert_relative_eq!(liminf_growth_estimate(&one, 0.0).unwrap(), 0.5, max_relative = 1e-12);
        assert_eq!(liminf_growth_estimate(&TimeSeries::zeros(g), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn fixed_point_certificates_and_liminf() {
        let p = InequalityParams::new(0.1, 0.1, 1.0, 3.0, 2.0, 0.5, 3.0).unwrap();
        for t in [1.0, 2.0, 4.0] {
            let g = TimeGrid::with_horizon((200.0 * t) as usize, t).unwrap();
            let out = fixed_point_solution(&p, g).unwrap();
            let w = out.solution().expect("converges on short horizons");
            assert!(certify_bound_i(w, &p, 16.0).unwrap().satisfied);
        }
        let small = p.with_data(0.01, 0.01).unwrap();
        let g = TimeGrid::with_horizon(10_000, 50.0).unwrap();
        let out = fixed_point_solution(&small, g).unwrap();
        assert!(liminf_growth_estimate(out.solution().unwrap(), 0.5).unwrap() > 0.0);
        // larger data leave the basin of the iteration on long horizons
        let big = p.with_data(1.0, 1.0).unwrap();
        assert!(matches!(fixed_point_solution(&big, g).unwrap(), FixedPointOutcome::Diverged { .. }));
    }
}
