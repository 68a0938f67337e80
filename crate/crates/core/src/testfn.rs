//! Power-law test function `chi(x) = (1+|x|^2)^(-q/2) / Z`, smooth cutoffs
//! `psi_n(x) = Psi(x/n)`, and numerical checks of the comparability bound
//! `|(-Delta)^s chi| <= C chi`.
//!
//! The fractional Laplacian of `chi` is evaluated two independent ways: the
//! second-difference singular integral in physical space, and the inverse
//! Fourier transform of `|xi|^(2s) chi_hat(xi)` with `chi_hat` written through
//! the modified Bessel function `K_nu`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quad::{integrate, integrate_to_infinity, integrate_with_breaks, QuadOptions};
use crate::special::{bessel_j0, bessel_k, gamma};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TestFnError {
    #[error("inadmissible test function: {}", .0.join("; "))]
    Inadmissible(Vec<String>),
    #[error("order s = {0} must lie in (0,1) for the singular integral")]
    OrderOutOfRange(f64),
    #[error("order s = {s} is not admissible for q = {q} in dimension {dim}: need q <= N+2s")]
    OrderNotAdmissible { s: f64, q: f64, dim: usize },
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cutoff scale must be positive")]
    ZeroCutoff,
}

pub type Result<T> = std::result::Result<T, TestFnError>;

/// The normalised radial weight `(1+r^2)^(-q/2) / Z` in dimension 1 or 2,
/// without any admissibility constraint beyond integrability (`q > N`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerWeight {
    dim: usize,
    q: f64,
    norm_const: f64,
}

impl PowerWeight {
    pub fn new(dim: usize, q: f64) -> Result<Self> {
        let mut bad = Vec::new();
        if !(dim == 1 || dim == 2) {
            bad.push(format!("dimension N = {dim} unsupported (N ∈ {{1,2}})"));
        }
        if !(q.is_finite() && q > dim as f64) {
            bad.push(format!("q = {q} must satisfy q > N = {dim}"));
        }
        if !bad.is_empty() {
            return Err(TestFnError::Inadmissible(bad));
        }
        Ok(Self {
            dim,
            q,
            norm_const: normalising_integral(dim, q),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `Z = int_{R^N} (1+|x|^2)^(-q/2) dx = pi^(N/2) Gamma((q-N)/2) / Gamma(q/2)`.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// `chi` as a function of the radius.
    pub fn radial(&self, r: f64) -> f64 {
        (1.0 + r * r).powf(-0.5 * self.q) / self.norm_const
    }

    pub fn radial_d1(&self, r: f64) -> f64 {
        -self.q * r * (1.0 + r * r).powf(-0.5 * self.q - 1.0) / self.norm_const
    }

    pub fn radial_d2(&self, r: f64) -> f64 {
        let q = self.q;
        let s = 1.0 + r * r;
        (-q * s.powf(-0.5 * q - 1.0) + q * (q + 2.0) * r * r * s.powf(-0.5 * q - 2.0)) / self.norm_const
    }

    /// Exact `-Delta chi` at radius `r`.
    pub fn neg_laplacian(&self, r: f64) -> f64 {
        let q = self.q;
        let n = self.dim as f64;
        let s = 1.0 + r * r;
        -q * s.powf(-0.5 * q - 2.0) * ((q + 2.0 - n) * r * r - n) / self.norm_const
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(TestFnError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.radial(norm(x)))
    }

    /// Fourier transform `chi_hat(k) = 2^(1-nu) k^nu K_nu(k) / Gamma(nu)`,
    /// `nu = (q-N)/2`, normalised so that `chi_hat(0) = 1`.
    pub fn fourier(&self, k: f64) -> f64 {
        let nu = 0.5 * (self.q - self.dim as f64);
        if k == 0.0 {
            return 1.0;
        }
        2f64.powf(1.0 - nu) * k.powf(nu) * bessel_k(nu, k) / gamma(nu)
    }
}

fn normalising_integral(dim: usize, q: f64) -> f64 {
    let n = dim as f64;
    PI.powf(0.5 * n) * gamma(0.5 * (q - n)) / gamma(0.5 * q)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest admissible `q` for operator orders `sigma`, `eta`, or `None` when
/// only `q > N` is required (both orders in `{0, 1}`).
pub fn max_admissible_q(dim: usize, sigma: f64, eta: f64) -> Option<f64> {
    let fractional = [sigma, eta].into_iter().filter(|&s| s > 0.0 && s < 1.0);
    fractional.fold(None, |acc: Option<f64>, s| {
        let cap = dim as f64 + 2.0 * s;
        Some(acc.map_or(cap, |a| a.min(cap)))
    })
}

/// `chi` together with the operator orders it is paired with.
///
/// The decay exponent obeys the selection rules: `q > N` when both orders
/// are integers, otherwise `q <= N + 2 min` over the orders in `(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    weight: PowerWeight,
    sigma: f64,
    eta: f64,
}

impl TestFunctionSpec {
    pub fn new(dim: usize, q: f64, sigma: f64, eta: f64) -> Result<Self> {
        let bad = Self::violations(dim, q, sigma, eta);
        if !bad.is_empty() {
            return Err(TestFnError::Inadmissible(bad));
        }
        Ok(Self {
            weight: PowerWeight::new(dim, q)?,
            sigma,
            eta,
        })
    }

    /// All rules broken by the arguments.
    pub fn violations(dim: usize, q: f64, sigma: f64, eta: f64) -> Vec<String> {
        let mut bad = Vec::new();
        if !(dim == 1 || dim == 2) {
            bad.push(format!("dimension N = {dim} unsupported (N ∈ {{1,2}})"));
        }
        if !(sigma > 0.0 && sigma <= 1.0) {
            bad.push(format!("sigma = {sigma} violates 0<σ≤1"));
        }
        if !(eta >= 0.0 && eta <= 1.0) {
            bad.push(format!("eta = {eta} violates 0≤η≤1"));
        }
        let n = dim as f64;
        if !(q.is_finite() && q > n) {
            bad.push(format!("q = {q} must satisfy q > N = {dim}"));
        } else if let Some(cap) = max_admissible_q(dim, sigma, eta) {
            if q > cap + 1e-12 {
                let which = if sigma > 0.0 && sigma < 1.0 && eta > 0.0 && eta < 1.0 {
                    "(N, N+2·min(σ,η)]"
                } else if sigma > 0.0 && sigma < 1.0 {
                    "(N, N+2σ]"
                } else {
                    "(N, N+2η]"
                };
                bad.push(format!("q = {q} must lie in {which} = ({n}, {cap}]"));
            }
        }
        bad
    }

    pub fn weight(&self) -> &PowerWeight {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.weight.dim
    }

    pub fn q(&self) -> f64 {
        self.weight.q
    }

    pub fn norm_const(&self) -> f64 {
        self.weight.norm_const
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Whether `|(-Delta)^s chi| <= C chi` can hold for this `q`.
    pub fn order_admissible(&self, s: f64) -> bool {
        s == 0.0 || s == 1.0 || (s > 0.0 && s < 1.0 && self.q() <= self.dim() as f64 + 2.0 * s + 1e-12)
    }
}

/// `chi(x)` for a point of the spec's dimension.
pub fn chi_eval(spec: &TestFunctionSpec, x: &[f64]) -> Result<f64> {
    spec.weight.eval(x)
}

/// `int chi` by radial quadrature; equals 1 up to quadrature error.
pub fn chi_mass(weight: &PowerWeight) -> f64 {
    let shell = if weight.dim == 1 { 2.0 } else { 2.0 * PI };
    // u = 1/(1+r^2) maps the slowly decaying tail onto endpoint singularities
    let (a, b) = (0.5 * (weight.q - weight.dim as f64) - 1.0, 0.5 * weight.dim as f64 - 1.0);
    let o = QuadOptions {
        max_intervals: 4000,
        ..QuadOptions::default()
    };
    // near each end, v = u^(a+1) (resp. (1-u)^(b+1)) removes the singular power
    let half = |e: f64, other: f64| {
        integrate(|v| (1.0 - v.powf(1.0 / (e + 1.0))).powf(other), 0.0, 0.5f64.powf(e + 1.0), &o).value / (e + 1.0)
    };
    shell * 0.5 * (half(a, b) + half(b, a)) / weight.norm_const
}

/// Constant of the second-difference representation,
/// `s 2^(2s-1) Gamma((N+2s)/2) / (pi^(N/2) Gamma(1-s))`.
pub fn second_difference_constant(dim: usize, s: f64) -> f64 {
    let n = dim as f64;
    s * 2f64.powf(2.0 * s - 1.0) * gamma(0.5 * (n + 2.0 * s)) / (PI.powf(0.5 * n) * gamma(1.0 - s))
}

fn opts(rel: f64) -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: rel,
        max_intervals: 1000,
    }
}

/// Singular-integral value of `(-Delta)^s chi` at radius `r`.
///
/// The `y` integral is split at `|y| = 1`. The inner part integrates the
/// exact second difference against `|y|^(-N-2s)` (no node at `y = 0`); the
/// outer part integrates the `2 chi(x)` term in closed form and the shifted
/// terms by quadrature on a semi-infinite range.
pub fn frac_laplacian_singular(weight: &PowerWeight, s: f64, r: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(TestFnError::OrderOutOfRange(s));
    }
    let r = r.abs();
    let g = |z: f64| weight.radial(z);
    let g0 = g(r);
    let e = 2.0 * s;
    let body = match weight.dim {
        1 => {
            let inner = integrate(
                |y| (2.0 * g0 - g(r + y) - g(r - y)) * y.powf(-1.0 - e),
                0.0,
                1.0,
                &opts(1e-11),
            )
            .value;
            let far = 2.0 * r + 10.0;
            let shifted = |y: f64| (g(r + y) + g(r - y)) * y.powf(-1.0 - e);
            let tail = integrate_with_breaks(shifted, 1.0, far, &[r - 1.0, r, r + 1.0], &opts(1e-11)).value
                + integrate_to_infinity(shifted, far, &opts(1e-11)).value;
            2.0 * inner + 2.0 * (2.0 * g0 / e - tail)
        }
        _ => {
            // x = (r, 0), y = rho (cos th, sin th); the second difference is
            // symmetric under th -> pi - th and th -> th + pi
            let at = |rho: f64, th: f64, sign: f64| {
                g((r * r + rho * rho + sign * 2.0 * r * rho * th.cos()).max(0.0).sqrt())
            };
            let ring = |rho: f64| {
                4.0 * integrate(
                    |th| 2.0 * g0 - at(rho, th, 1.0) - at(rho, th, -1.0),
                    0.0,
                    0.5 * PI,
                    &opts(1e-12),
                )
                .value
            };
            let inner = integrate(|rho| ring(rho) * rho.powf(-1.0 - e), 0.0, 1.0, &opts(1e-10)).value;
            // int_0^{2pi} g(|x+y|) dth, peaked at th = pi when rho ~ r
            let circle = |rho: f64| {
                let brk = PI - (2.0 / (rho + 1.0)).min(1.0);
                2.0 * integrate_with_breaks(|th| at(rho, th, 1.0), 0.0, PI, &[brk], &opts(1e-12)).value
            };
            let far = 2.0 * r + 10.0;
            let shifted = |rho: f64| 2.0 * circle(rho) * rho.powf(-1.0 - e);
            let tail = integrate_with_breaks(shifted, 1.0, far, &[r - 1.0, r, r + 1.0], &opts(1e-10)).value
                + integrate_to_infinity(shifted, far, &opts(1e-10)).value;
            inner + 2.0 * PI * 2.0 * g0 / e - tail
        }
    };
    Ok(second_difference_constant(weight.dim, s) * body)
}

/// Fourier-side value of `(-Delta)^s chi` at radius `r`:
/// `(1/pi) int_0^inf k^(2s) chi_hat(k) cos(k r) dk` in 1D and
/// `(1/2pi) int_0^inf k^(1+2s) chi_hat(k) J_0(k r) dk` in 2D.
pub fn frac_laplacian_fourier(weight: &PowerWeight, s: f64, r: f64) -> Result<f64> {
    if !(s >= 0.0 && s <= 1.0) {
        return Err(TestFnError::OrderOutOfRange(s));
    }
    let r = r.abs();
    // chi_hat decays like k^(nu - 1/2) e^(-k)
    let k_max = 60.0;
    let n_osc = (k_max * r / PI).ceil() as usize;
    let breaks: Vec<f64> = (1..n_osc.min(400)).map(|i| i as f64 * k_max / n_osc.min(400) as f64).collect();
    let o = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    let v = match weight.dim {
        1 => {
            integrate_with_breaks(
                |k| k.powf(2.0 * s) * weight.fourier(k) * (k * r).cos(),
                0.0,
                k_max,
                &breaks,
                &o,
            )
            .value
                / PI
        }
        _ => {
            integrate_with_breaks(
                |k| k.powf(1.0 + 2.0 * s) * weight.fourier(k) * bessel_j0(k * r),
                0.0,
                k_max,
                &breaks,
                &o,
            )
            .value
                / (2.0 * PI)
        }
    };
    Ok(v)
}

/// `(-Delta)^s chi` at radius `r` for any `s` in `[0, 1]`: the identity at
/// `s = 0`, the exact Laplacian at `s = 1`, the singular integral otherwise.
pub fn frac_laplacian_profile(weight: &PowerWeight, s: f64, r: f64) -> Result<f64> {
    if s == 0.0 {
        Ok(weight.radial(r))
    } else if s == 1.0 {
        Ok(weight.neg_laplacian(r))
    } else {
        frac_laplacian_singular(weight, s, r)
    }
}

/// Singular-integral `(-Delta)^s chi` at each point of `x_grid`.
pub fn frac_laplacian_radial(spec: &TestFunctionSpec, s: f64, x_grid: &[Vec<f64>]) -> Result<Vec<f64>> {
    if !(s > 0.0 && s < 1.0) {
        return Err(TestFnError::OrderOutOfRange(s));
    }
    for x in x_grid {
        if x.len() != spec.dim() {
            return Err(TestFnError::DimensionMismatch {
                expected: spec.dim(),
                got: x.len(),
            });
        }
    }
    x_grid
        .par_iter()
        .map(|x| frac_laplacian_singular(&spec.weight, s, norm(x)))
        .collect()
}

/// Ratios `|(-Delta)^s chi(r_i)| / chi(r_i)` on `r_i = radius i / samples`.
pub fn comparability_ratios(weight: &PowerWeight, s: f64, radius: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    let samples = samples.max(1);
    (0..=samples)
        .into_par_iter()
        .map(|i| {
            let r = radius * i as f64 / samples as f64;
            let l = frac_laplacian_profile(weight, s, r)?;
            Ok((r, l.abs() / weight.radial(r)))
        })
        .collect()
}

/// Empirical constant `max |(-Delta)^s chi| / chi` over `|x| <= radius`,
/// without checking that `q` admits a finite constant.
pub fn empirical_comparability(weight: &PowerWeight, s: f64, radius: f64, samples: usize) -> Result<f64> {
    Ok(comparability_ratios(weight, s, radius, samples)?
        .into_iter()
        .map(|(_, c)| c)
        .fold(0.0, f64::max))
}

/// Empirical comparability constant for an admissible order.
pub fn verify_comparability(spec: &TestFunctionSpec, s: f64, radius: f64, samples: usize) -> Result<f64> {
    if !spec.order_admissible(s) {
        return Err(TestFnError::OrderNotAdmissible {
            s,
            q: spec.q(),
            dim: spec.dim(),
        });
    }
    empirical_comparability(&spec.weight, s, radius, samples)
}

/// Number of samples giving the default 0.05 spacing on `[0, radius]`.
pub fn default_samples(radius: f64) -> usize {
    (radius / 0.05).round().max(1.0) as usize
}

/// Plateau cutoff `psi_n(x) = Psi(x / n)`, with `Psi = 1` on `|x| <= 1`,
/// `Psi = 0` on `|x| >= 2` and the quintic smoothstep in between (C^2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffSpec {
    n: u32,
}

fn smoothstep(t: f64) -> (f64, f64, f64) {
    let t = t.clamp(0.0, 1.0);
    (
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
        30.0 * t * t * (1.0 - t) * (1.0 - t),
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
    )
}

impl CutoffSpec {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(TestFnError::ZeroCutoff);
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `(Psi, Psi', Psi'')` of the base profile at radius `r`.
    pub fn base(r: f64) -> (f64, f64, f64) {
        if r <= 1.0 {
            (1.0, 0.0, 0.0)
        } else if r >= 2.0 {
            (0.0, 0.0, 0.0)
        } else {
            let (v, d1, d2) = smoothstep(2.0 - r);
            (v, -d1, d2)
        }
    }

    /// `(psi_n, psi_n', psi_n'')` at radius `r`.
    pub fn radial(&self, r: f64) -> (f64, f64, f64) {
        let n = self.n as f64;
        let (v, d1, d2) = Self::base(r / n);
        (v, d1 / n, d2 / (n * n))
    }
}

/// The three terms of the constant bounding `(-Delta)^s (psi_n chi)` for
/// `|x| > 1`, and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffConstants {
    /// `sup (1+|x|)^(N+2) sum_{|alpha|=2} |d^alpha (psi_n chi)|`
    pub hessian_sup: f64,
    /// `sup (1+|x|)^N |psi_n chi|`
    pub weighted_sup: f64,
    /// `|| psi_n chi ||_{L^1}`
    pub l1_norm: f64,
    pub total: f64,
}

/// Sum of the absolute second partials of a radial function at `x = r (cos th, sin th)`.
fn hessian_abs_sum(dim: usize, r: f64, th: f64, d1: f64, d2: f64) -> f64 {
    if dim == 1 {
        return d2.abs();
    }
    let d1_over_r = if r > 0.0 { d1 / r } else { d2 };
    let (c, s) = (th.cos(), th.sin());
    let h11 = d2 * c * c + d1_over_r * s * s;
    let h22 = d2 * s * s + d1_over_r * c * c;
    let h12 = (d2 - d1_over_r) * c * s;
    h11.abs() + h12.abs() + h22.abs()
}

/// Evaluates the three suprema/norms for `psi_n chi` on a 0.05-spaced radial
/// grid (five directions in 2D) and returns them with their sum.
pub fn cutoff_constants(spec: &TestFunctionSpec, cut: &CutoffSpec, s: f64) -> Result<CutoffConstants> {
    if !(s > 0.0 && s < 1.0) {
        return Err(TestFnError::OrderOutOfRange(s));
    }
    let w = &spec.weight;
    let dim = w.dim;
    let nd = dim as i32;
    let n = cut.n as f64;
    let reach = 2.0 * n;
    let steps = (reach / 0.05).ceil() as usize;
    let angles: Vec<f64> = if dim == 1 {
        vec![0.0]
    } else {
        (0..5).map(|i| 0.25 * PI * i as f64 / 4.0).collect()
    };
    let mut hessian_sup: f64 = 0.0;
    let mut weighted_sup: f64 = 0.0;
    for i in 0..=steps {
        let r = reach * i as f64 / steps as f64;
        let (p0, p1, p2) = cut.radial(r);
        let (c0, c1, c2) = (w.radial(r), w.radial_d1(r), w.radial_d2(r));
        let f1 = p1 * c0 + p0 * c1;
        let f2 = p2 * c0 + 2.0 * p1 * c1 + p0 * c2;
        let wt = 1.0 + r;
        for &th in &angles {
            hessian_sup = hessian_sup.max(wt.powi(nd + 2) * hessian_abs_sum(dim, r, th, f1, f2));
        }
        weighted_sup = weighted_sup.max(wt.powi(nd) * (p0 * c0).abs());
    }
    let shell = if dim == 1 { 2.0 } else { 2.0 * PI };
    let l1_norm = shell
        * integrate_with_breaks(
            |r| r.powi(nd - 1) * cut.radial(r).0 * w.radial(r),
            0.0,
            reach,
            &[n],
            &QuadOptions::default(),
        )
        .value;
    Ok(CutoffConstants {
        hessian_sup,
        weighted_sup,
        l1_norm,
        total: hessian_sup + weighted_sup + l1_norm,
    })
}
