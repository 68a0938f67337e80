//! Riemann-Liouville fractional integrals on uniform grids.
//!
//! Both the left operator `(1/Gamma(a)) int_0^t (t-s)^(a-1) f(s) ds` and the
//! right operator `(1/Gamma(a)) int_t^T (s-t)^(a-1) f(s) ds` are discretised
//! by product integration: `f` is replaced by its piecewise-linear
//! interpolant and the kernel moments over every cell are integrated exactly.
//! The weakly singular kernel is never sampled, all weights are nonnegative
//! and the rule is exact for linear `f`.

use serde::{Deserialize, Serialize};

use crate::special::{gamma, gamma_checked, GammaPole};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FracError {
    #[error("fractional order must be positive and finite, got {0}")]
    NonPositiveOrder(f64),
    #[error("time grid needs at least one step")]
    EmptyGrid,
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("series length {got} does not match grid with {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("series live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Pole(#[from] GammaPole),
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, FracError>;

/// Uniform grid `t_i = i h`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    n_steps: usize,
    h: f64,
}

impl TimeGrid {
    pub fn new(n_steps: usize, h: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(FracError::EmptyGrid);
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(FracError::InvalidStep(h));
        }
        Ok(Self { n_steps, h })
    }

    /// Grid with `n_steps` cells covering `[0, horizon]`.
    pub fn with_horizon(n_steps: usize, horizon: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(FracError::EmptyGrid);
        }
        Self::new(n_steps, horizon / n_steps as f64)
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

/// Samples of a function on a [`TimeGrid`]; every value is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FracError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FracError::NonFinite { index, value });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("grid has at least two nodes")
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_grid(other)?;
        Self::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(FracError::GridMismatch);
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Composite trapezoidal rule over the whole grid.
    pub fn trapezoid(&self) -> f64 {
        trapezoid(&self.values, self.grid.h)
    }

    /// The same series with time reversed, `t -> T - t`.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid,
            values,
        }
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// Positive fractional order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha.is_finite() {
            Ok(Self(alpha))
        } else {
            Err(FracError::NonPositiveOrder(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::ops::Add for FracOrder {
    type Output = FracOrder;
    fn add(self, rhs: Self) -> Self {
        FracOrder(self.0 + rhs.0)
    }
}

// Below this lag the closed-form differences are accurate; above it the
// binomial series avoids cancellation between O(k^e) terms.
const SERIES_THRESHOLD: f64 = 16.0;

/// `(k+1)^e - 2 k^e + (k-1)^e` for `k >= 1`.
pub fn power_second_difference(k: usize, e: f64) -> f64 {
    let kf = k as f64;
    if kf < SERIES_THRESHOLD {
        return (kf + 1.0).powf(e) - 2.0 * kf.powf(e) + (kf - 1.0).powf(e);
    }
    // k^e * sum_m 2 binom(e, 2m) k^(-2m)
    let inv2 = 1.0 / (kf * kf);
    let mut binom = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for j in 1..=60 {
        binom *= (e - (j - 1) as f64) / j as f64;
        if j % 2 == 0 {
            pow *= inv2;
            let term = 2.0 * binom * pow;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() || binom == 0.0 {
                break;
            }
        }
    }
    kf.powf(e) * sum
}

/// Start weight `(n-1)^(a+1) - (n-1-a) n^a` of the product rule at node `n >= 1`.
pub fn start_weight(n: usize, alpha: f64) -> f64 {
    let e = alpha + 1.0;
    let nf = n as f64;
    if nf < SERIES_THRESHOLD {
        return (nf - 1.0).powf(e) - (nf - e) * nf.powf(alpha);
    }
    // n^e * sum_{j>=2} binom(e, j) (-1/n)^j
    let x = -1.0 / nf;
    let mut binom = e;
    let mut pow = x;
    let mut sum = 0.0;
    for j in 2..=80 {
        binom *= (e - (j - 1) as f64) / j as f64;
        pow *= x;
        let term = binom * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || binom == 0.0 {
            break;
        }
    }
    nf.powf(e) * sum
}

/// Product-integration weights for the left operator of order `alpha`.
///
/// At node `n >= 1` the rule reads
/// `scale * (start(n) f_0 + sum_{j=1}^{n-1} interior(n-j) f_j + f_n)`.
#[derive(Debug, Clone)]
pub struct ProductWeights {
    alpha: f64,
    scale: f64,
    interior: Vec<f64>,
    start: Vec<f64>,
}

impl ProductWeights {
    pub fn new(alpha: FracOrder, h: f64, n_max: usize) -> Self {
        let a = alpha.value();
        let scale = h.powf(a) / gamma(a + 2.0);
        let mut interior = Vec::with_capacity(n_max + 1);
        let mut start = Vec::with_capacity(n_max + 1);
        interior.push(0.0);
        start.push(0.0);
        for k in 1..=n_max {
            interior.push(power_second_difference(k, a + 1.0));
            start.push(start_weight(k, a));
        }
        Self {
            alpha: a,
            scale,
            interior,
            start,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn n_max(&self) -> usize {
        self.interior.len() - 1
    }

    /// Weight of `f_j` for lag `k = n - j` with `1 <= j <= n - 1`.
    pub fn interior(&self, k: usize) -> f64 {
        self.interior[k]
    }

    pub fn start(&self, n: usize) -> f64 {
        self.start[n]
    }

    /// Applies the rule at node `n` to the samples `f[0..=n]`.
    pub fn apply_at(&self, f: &[f64], n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let mut acc = self.start[n] * f[0] + f[n];
        for j in 1..n {
            acc += self.interior[n - j] * f[j];
        }
        self.scale * acc
    }
}

/// Left operator at the last node only, without storing the weights.
pub fn rl_left_last(f: &[f64], h: f64, alpha: FracOrder) -> f64 {
    let n = match f.len() {
        0 | 1 => return 0.0,
        len => len - 1,
    };
    let a = alpha.value();
    let mut acc = start_weight(n, a) * f[0] + f[n];
    for j in 1..n {
        acc += power_second_difference(n - j, a + 1.0) * f[j];
    }
    h.powf(a) / gamma(a + 2.0) * acc
}

/// Left operator applied to raw samples with step `h`.
pub fn rl_left_values(f: &[f64], h: f64, alpha: FracOrder) -> Vec<f64> {
    if f.is_empty() {
        return Vec::new();
    }
    let w = ProductWeights::new(alpha, h, f.len() - 1);
    (0..f.len()).map(|n| w.apply_at(f, n)).collect()
}

/// Left Riemann-Liouville integral `0 I_t^alpha f` at every node.
pub fn rl_left(f: &TimeSeries, alpha: FracOrder) -> Result<TimeSeries> {
    TimeSeries::new(f.grid, rl_left_values(&f.values, f.grid.h, alpha))
}

/// Right Riemann-Liouville integral `t I_T^alpha f` at every node, obtained
/// by reflecting `t -> T - t` and applying the left rule.
pub fn rl_right(f: &TimeSeries, alpha: FracOrder) -> Result<TimeSeries> {
    Ok(rl_left(&f.reversed(), alpha)?.reversed())
}

/// Power rule for the right operator:
/// `t I_T^beta (1 - t/T)^nu = Gamma(nu+1)/Gamma(nu+beta+1) T^beta (1 - t/T)^(nu+beta)`
/// with `nu = l - (3 - gamma)`.
pub fn rl_power_closed_form(l: f64, gamma_: f64, beta: FracOrder, grid: TimeGrid) -> Result<TimeSeries> {
    let nu = l - (3.0 - gamma_);
    let b = beta.value();
    if nu <= -1.0 {
        return Err(FracError::InvalidArgument(format!(
            "exponent l-(3-gamma) = {nu} must exceed -1 for integrability"
        )));
    }
    let ratio = gamma_checked(nu + 1.0)? / gamma_checked(nu + b + 1.0)?;
    let horizon = grid.horizon();
    let coeff = ratio * horizon.powf(b);
    TimeSeries::from_fn(grid, |t| {
        let r = (1.0 - t / horizon).max(0.0);
        coeff * r.powf(nu + b)
    })
}

/// The base power `(1 - t/T)^(l - (3 - gamma))` that [`rl_power_closed_form`] integrates.
pub fn power_profile(l: f64, gamma_: f64, grid: TimeGrid) -> Result<TimeSeries> {
    let nu = l - (3.0 - gamma_);
    let horizon = grid.horizon();
    TimeSeries::from_fn(grid, |t| (1.0 - t / horizon).max(0.0).powf(nu))
}

/// Largest deviation from the semigroup law `I^b I^a f = I^(a+b) f`, taken
/// over both the left and the right operators.
pub fn check_semigroup(f: &TimeSeries, alpha: FracOrder, beta: FracOrder) -> Result<f64> {
    let left = rl_left(&rl_left(f, alpha)?, beta)?.max_abs_diff(&rl_left(f, alpha + beta)?)?;
    let right = rl_right(&rl_right(f, alpha)?, beta)?.max_abs_diff(&rl_right(f, alpha + beta)?)?;
    Ok(left.max(right))
}

/// Both sides of the integration-by-parts identity
/// `int (0I^a f) g dt = int (tI^a g) f dt`, trapezoidal outer quadrature.
pub fn adjoint_sides(f: &TimeSeries, g: &TimeSeries, alpha: FracOrder) -> Result<(f64, f64)> {
    f.ensure_same_grid(g)?;
    let lhs = rl_left(f, alpha)?.zip_with(g, |a, b| a * b)?.trapezoid();
    let rhs = rl_right(g, alpha)?.zip_with(f, |a, b| a * b)?.trapezoid();
    Ok((lhs, rhs))
}

pub fn check_adjoint(f: &TimeSeries, g: &TimeSeries, alpha: FracOrder) -> Result<f64> {
    let (lhs, rhs) = adjoint_sides(f, g, alpha)?;
    Ok((lhs - rhs).abs())
}

/// Numeric Laplace transform of `0I^alpha e^(lambda t)` next to the closed
/// form `s^(-alpha) / (s - lambda)`.
///
/// The horizon is cut where both `e^(lambda T)` and `e^(-s T)` fall below
/// 1e-12; the step is at most 2e-3.
pub fn laplace_check_exp(alpha: FracOrder, lambda: f64, s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(FracError::InvalidArgument(format!(
            "Laplace variable must be positive, got {s}"
        )));
    }
    if !(lambda < 0.0 && lambda.is_finite()) {
        return Err(FracError::InvalidArgument(format!(
            "decay rate must be negative, got {lambda}"
        )));
    }
    let horizon = 12.0 * std::f64::consts::LN_10 / s.min(-lambda);
    let n_steps = ((horizon / 2e-3).ceil() as usize).max(2000);
    let grid = TimeGrid::with_horizon(n_steps, horizon)?;
    let f = TimeSeries::from_fn(grid, |t| (lambda * t).exp())?;
    let integral = rl_left(&f, alpha)?;
    let weighted: Vec<f64> = grid
        .nodes()
        .zip(integral.values())
        .map(|(t, v)| (-s * t).exp() * v)
        .collect();
    let numeric = trapezoid(&weighted, grid.h());
    let exact = s.powf(-alpha.value()) / (s - lambda);
    Ok((numeric, exact))
}
