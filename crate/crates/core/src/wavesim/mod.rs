//! Periodic pseudospectral simulator for
//! `u_tt + (-Delta)^sigma u + mu (-Delta)^eta u_t = 0 I_t^(1-gamma) |u|^p`
//! with blow-up detection, moment monitoring and exponent sweeps.

mod memory;
mod monitor;
mod propagator;
mod sim;
mod spectral;
mod sweep;

use serde::{Deserialize, Serialize};

pub use memory::MemoryConvolver;
pub use monitor::{
    fit_linear_coefficient, identity_series, moment_inequality_monitor, monitor_constant, MonitorReport,
};
pub use propagator::ModePropagator;
pub use sim::{
    comparability_on_grid, frac_laplacian_apply, memory_term, run, run_with, step, Classification, MomentRecord,
    RunOptions, SimResult, SimState,
};
pub use spectral::SpectralGrid;
pub use sweep::{default_chi, threshold_sweep, DataSpec, SweepRow};

use crate::fracops::FracError;
use crate::testfn::TestFnError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid model parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("field shape (N={}, M={}) does not match grid (N={}, M={})", got.0, got.1, expected.0, expected.1)]
    ShapeMismatch { expected: (usize, usize), got: (usize, usize) },
    #[error("non-finite field value")]
    NonFinite,
    #[error("integration failure at step {step} (t = {t}): {reason}")]
    IntegrationFailure {
        step: usize,
        t: f64,
        reason: String,
        partial: Box<SimResult>,
    },
    #[error("memory history is empty at t = {0} > 0")]
    EmptyHistory(f64),
    #[error("blow-up already flagged at t = {0}")]
    AlreadyBlownUp(f64),
    #[error("test function does not match the model: {0}")]
    ChiMismatch(String),
    #[error("comparability constant is missing")]
    MissingConstant,
    #[error("p values must be sorted ascending")]
    UnsortedSweep,
    #[error(transparent)]
    TestFn(#[from] TestFnError),
    #[error(transparent)]
    Frac(#[from] FracError),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Model and discretisation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sigma: f64,
    pub eta: f64,
    pub mu: f64,
    pub gamma: f64,
    pub p: f64,
    pub dim: usize,
    /// Box half-width `L`; the grid covers `[-L, L)^N`.
    pub half_width: f64,
    /// Modes per dimension (power of two).
    pub modes: usize,
    pub dt: f64,
    pub t_max: f64,
    pub blowup_threshold: f64,
}

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

impl ModelParams {
    /// Parameters with the default blow-up threshold.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sigma: f64,
        eta: f64,
        mu: f64,
        gamma: f64,
        p: f64,
        dim: usize,
        half_width: f64,
        modes: usize,
        dt: f64,
        t_max: f64,
    ) -> Result<Self> {
        let params = Self {
            sigma,
            eta,
            mu,
            gamma,
            p,
            dim,
            half_width,
            modes,
            dt,
            t_max,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = self.violations();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidParams(bad))
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if !(self.p > 1.0 && self.p.is_finite()) {
            bad.push(format!("p = {} violates p>1", self.p));
        }
        if !(self.gamma < 1.0 && self.gamma.is_finite()) {
            bad.push(format!("gamma = {} violates γ<1", self.gamma));
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            bad.push(format!("sigma = {} violates 0<σ≤1", self.sigma));
        }
        if !(self.eta >= 0.0 && self.eta <= 1.0) {
            bad.push(format!("eta = {} violates 0≤η≤1", self.eta));
        }
        if !self.mu.is_finite() {
            bad.push(format!("mu = {} violates μ∈ℝ", self.mu));
        }
        if !(self.dim == 1 || self.dim == 2) {
            bad.push(format!("N = {} unsupported (N ∈ {{1,2}})", self.dim));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            bad.push(format!("L = {} must be positive", self.half_width));
        }
        if !(self.modes >= 4 && self.modes.is_power_of_two()) {
            bad.push(format!("M = {} must be a power of two ≥ 4", self.modes));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            bad.push(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            bad.push(format!("T_max = {} must be positive", self.t_max));
        }
        if !(self.blowup_threshold > 0.0) {
            bad.push(format!("blowup_threshold = {} must be positive", self.blowup_threshold));
        }
        bad
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.blowup_threshold = threshold;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    /// Number of steps to reach `T_max`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    pub fn grid(&self) -> SpectralGrid {
        SpectralGrid::new(self.dim, self.modes, self.half_width)
    }
}

/// Real values on the `M^N` periodic grid (first axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    dim: usize,
    modes: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(dim: usize, modes: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != modes.pow(dim as u32) {
            return Err(SimError::ShapeMismatch {
                expected: (dim, modes),
                got: (dim, values.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite);
        }
        Ok(Self { dim, modes, values })
    }

    pub fn zeros(dim: usize, modes: usize) -> Self {
        Self {
            dim,
            modes,
            values: vec![0.0; modes.pow(dim as u32)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
