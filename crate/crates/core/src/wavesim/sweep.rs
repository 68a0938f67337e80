//! Exponent sweeps around the threshold `p gamma = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sim::{run, Classification, SimResult};
use super::{Field, ModelParams, Result, SimError};
use crate::testfn::{max_admissible_q, TestFunctionSpec};

/// Gaussian initial data `u0 = a0 exp(-|x|^2 / w^2)`, `u1 = a1 exp(-|x|^2 / w^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub u0_amplitude: f64,
    pub u1_amplitude: f64,
    pub width: f64,
}

impl DataSpec {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Self {
            u0_amplitude: amplitude,
            u1_amplitude: amplitude,
            width,
        }
    }

    pub fn fields(&self, params: &ModelParams) -> (Field, Field) {
        let grid = params.grid();
        let w2 = self.width * self.width;
        let bump = |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>() / w2).exp();
        (
            grid.field_from_fn(|x| self.u0_amplitude * bump(x)),
            grid.field_from_fn(|x| self.u1_amplitude * bump(x)),
        )
    }
}

/// Test function paired with the model: the largest admissible `q`, or
/// `q = N + 1` when both orders are integers.
pub fn default_chi(params: &ModelParams) -> Result<TestFunctionSpec> {
    let q = max_admissible_q(params.dim, params.sigma, params.eta).unwrap_or(params.dim as f64 + 1.0);
    Ok(TestFunctionSpec::new(params.dim, q, params.sigma, params.eta)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub p_gamma: f64,
    /// `None` for warning rows.
    pub classification: Option<Classification>,
    /// Blow-up time, or the time reached.
    pub time: f64,
    pub final_sup: f64,
    pub note: String,
    #[serde(skip)]
    pub result: Option<Box<SimResult>>,
}

impl SweepRow {
    pub fn is_warning(&self) -> bool {
        self.classification.is_none()
    }
}

/// Runs the model once per distinct `p`. Duplicates are dropped and reported
/// in a leading warning row; a failing run is recorded in its row.
pub fn threshold_sweep(base: &ModelParams, p_values: &[f64], data: &DataSpec) -> Result<Vec<SweepRow>> {
    if p_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(SimError::UnsortedSweep);
    }
    let mut distinct: Vec<f64> = p_values.to_vec();
    distinct.dedup();
    let mut rows = Vec::new();
    if distinct.len() < p_values.len() {
        let dups: Vec<String> = p_values
            .windows(2)
            .filter(|w| w[0] == w[1])
            .map(|w| format!("{}", w[0]))
            .collect();
        rows.push(SweepRow {
            p: f64::NAN,
            p_gamma: f64::NAN,
            classification: None,
            time: f64::NAN,
            final_sup: f64::NAN,
            note: format!("warning: duplicate p values removed: {}", dups.join(", ")),
            result: None,
        });
    }
    let runs: Vec<SweepRow> = distinct
        .par_iter()
        .map(|&p| {
            let params = base.with_p(p);
            let p_gamma = p * params.gamma;
            let outcome = params.validate().and_then(|_| {
                let chi = default_chi(&params)?;
                let (u0, u1) = data.fields(&params);
                run(&params, &u0, &u1, &chi)
            });
            match outcome {
                Ok(r) => SweepRow {
                    p,
                    p_gamma,
                    classification: Some(r.classification),
                    time: r.blowup_time.unwrap_or(r.final_time),
                    final_sup: r.final_sup,
                    note: String::new(),
                    result: Some(Box::new(r)),
                },
                Err(SimError::IntegrationFailure { t, reason, partial, .. }) => SweepRow {
                    p,
                    p_gamma,
                    classification: Some(Classification::Failure),
                    time: t,
                    final_sup: partial.final_sup,
                    note: reason,
                    result: Some(partial),
                },
                Err(e) => SweepRow {
                    p,
                    p_gamma,
                    classification: Some(Classification::Failure),
                    time: 0.0,
                    final_sup: f64::NAN,
                    note: e.to_string(),
                    result: None,
                },
            }
        })
        .collect();
    rows.extend(runs);
    Ok(rows)
}
