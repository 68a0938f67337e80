//! Consistency checks of the moment reduction on simulated trajectories.
//!
//! Pairing the equation with `chi` and integrating twice in time gives the
//! identity
//! `I^(3-gamma) m_p + A + B t = W + I^2 z_sigma + mu I^1 z_eta`,
//! with `W = int u chi`, `z_s = int u (-Delta)^s chi`, `m_p = int |u|^p chi`.
//! Bounding `W <= w`, `|z_s| <= C_s w` and `m_p >= w^p` turns it into the
//! reduced inequality
//! `I^(3-gamma) w^p <= w + (2 sqrt(C) + 1) I^1 w + C I^2 w - A - B t`.

use serde::{Deserialize, Serialize};

use super::sim::SimResult;
use super::{ModelParams, Result, SimError};
use crate::fracops::{rl_left, FracOrder, TimeGrid, TimeSeries};

/// `C = max(C_sigma, ((|mu| C_eta - 1) / 2)^2)`, the smallest constant with
/// `C_sigma <= C` and `|mu| C_eta <= 2 sqrt(C) + 1`.
pub fn monitor_constant(c_sigma: f64, c_eta: f64, mu: f64) -> f64 {
    let damping = (mu.abs() * c_eta - 1.0).max(0.0) / 2.0;
    c_sigma.max(damping * damping)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub constant: f64,
    pub lhs: TimeSeries,
    pub rhs: TimeSeries,
    /// `rhs - lhs`
    pub residual: TimeSeries,
    /// Largest absolute term of the inequality over the run.
    pub scale: f64,
}

impl MonitorReport {
    /// `min residual / scale` (zero when everything vanishes).
    pub fn min_normalized(&self) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        self.residual.values().iter().fold(f64::INFINITY, |m, &r| m.min(r)) / self.scale
    }
}

fn record_series(result: &SimResult, f: impl Fn(&super::MomentRecord) -> f64) -> Result<TimeSeries> {
    let n = result.records.len();
    if n < 2 {
        return Err(SimError::InvalidParams(vec!["need at least two records".into()]));
    }
    let grid = TimeGrid::new(n - 1, result.record_dt)?;
    Ok(TimeSeries::new(grid, result.records.iter().map(f).collect())?)
}

/// Residual of the reduced inequality on the recorded times.
pub fn moment_inequality_monitor(
    result: &SimResult,
    params: &ModelParams,
    c_hat: Option<f64>,
) -> Result<MonitorReport> {
    let c = c_hat.ok_or(SimError::MissingConstant)?;
    let w = record_series(result, |r| r.w)?;
    let grid = *w.grid();
    let lhs = rl_left(&w.map(|x| x.powf(params.p))?, FracOrder::new(3.0 - params.gamma)?)?;
    let i1 = rl_left(&w, FracOrder::new(1.0)?)?;
    let i2 = rl_left(&w, FracOrder::new(2.0)?)?;
    let k1 = 2.0 * c.sqrt() + 1.0;
    let (a, b) = (result.a_const, result.b_const);
    let mut scale: f64 = 0.0;
    let rhs: Vec<f64> = (0..grid.len())
        .map(|i| {
            let t = grid.node(i);
            let terms = [w.values()[i], k1 * i1.values()[i], c * i2.values()[i], a, b * t, lhs.values()[i]];
            scale = scale.max(terms.iter().fold(0.0, |m, x| m.max(x.abs())));
            terms[0] + terms[1] + terms[2] - terms[3] - terms[4]
        })
        .collect();
    let rhs = TimeSeries::new(grid, rhs)?;
    let residual = rhs.zip_with(&lhs, |r, l| r - l)?;
    Ok(MonitorReport {
        constant: c,
        lhs,
        rhs,
        residual,
        scale,
    })
}

/// `W + I^2 z_sigma + mu I^1 z_eta - I^(3-gamma) m_p - A`, which equals `B t`
/// for an exact solution.
pub fn identity_series(result: &SimResult, params: &ModelParams) -> Result<TimeSeries> {
    let signed = record_series(result, |r| r.signed_w)?;
    let zs = rl_left(&record_series(result, |r| r.z_sigma)?, FracOrder::new(2.0)?)?;
    let ze = rl_left(&record_series(result, |r| r.z_eta)?, FracOrder::new(1.0)?)?;
    let mp = rl_left(&record_series(result, |r| r.m_p)?, FracOrder::new(3.0 - params.gamma)?)?;
    let vals = (0..signed.grid().len())
        .map(|i| {
            signed.values()[i] + zs.values()[i] + params.mu * ze.values()[i] - mp.values()[i] - result.a_const
        })
        .collect();
    Ok(TimeSeries::new(*signed.grid(), vals)?)
}

/// Least-squares slope through the origin of `series` over `0 < t <= t_fit`.
pub fn fit_linear_coefficient(series: &TimeSeries, t_fit: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &y) in series.values().iter().enumerate() {
        let t = series.grid().node(i);
        if t > t_fit + 1e-12 {
            break;
        }
        num += t * y;
        den += t * t;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
