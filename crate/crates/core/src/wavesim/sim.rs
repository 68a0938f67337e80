//! Time stepping, blow-up detection and moment recording.
//!
//! One step is a kick-drift-kick splitting: half a kick from the memory
//! forcing, the exact damped-oscillator propagator per Fourier mode for the
//! linear part, then half a kick from the forcing at the new time. The
//! forcing is explicit and dealiased by the 2/3 rule.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::memory::MemoryConvolver;
use super::propagator::ModePropagator;
use super::spectral::SpectralGrid;
use super::{Field, ModelParams, Result, SimError};
use crate::fracops::FracOrder;
use crate::testfn::TestFunctionSpec;

/// Spectral multiplier `|xi|^(2s)` on the periodic grid.
pub fn frac_laplacian_apply(f: &Field, s: f64, params: &ModelParams) -> Result<Field> {
    if !(0.0..=1.0).contains(&s) {
        return Err(SimError::InvalidParams(vec![format!("order s = {s} violates 0≤s≤1")]));
    }
    let grid = params.grid();
    grid.check(f)?;
    Field::new(f.dim(), f.modes(), grid.apply_symbol(f.values(), s))
}

/// Run-time switches that are not model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// A moment record is taken every this many steps.
    pub record_every: usize,
    /// Test hook: `false` drops the memory forcing.
    pub forcing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            record_every: 10,
            forcing: true,
        }
    }
}

pub struct SimState {
    params: ModelParams,
    grid: SpectralGrid,
    props: Vec<ModePropagator>,
    u_hat: Vec<Complex64>,
    v_hat: Vec<Complex64>,
    u: Field,
    forcing_hat: Vec<Complex64>,
    memory: MemoryConvolver,
    forcing: bool,
    t: f64,
    step_index: usize,
    blown_up: Option<f64>,
}

impl std::fmt::Debug for SimState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimState")
            .field("t", &self.t)
            .field("step_index", &self.step_index)
            .field("u_sup", &self.u.sup())
            .finish()
    }
}

impl SimState {
    pub fn new(params: &ModelParams, u0: &Field, u1: &Field, forcing: bool) -> Result<Self> {
        params.validate()?;
        let grid = params.grid();
        grid.check(u0)?;
        grid.check(u1)?;
        let props = (0..grid.len())
            .map(|idx| {
                let k = grid.symbol(idx, params.sigma);
                let d = params.mu * grid.symbol(idx, params.eta);
                ModePropagator::new(k, d, params.dt)
            })
            .collect();
        let alpha = FracOrder::new(1.0 - params.gamma)?;
        let mut memory = MemoryConvolver::new(alpha, params.dt, grid.len());
        memory.push(u0.values().iter().map(|v| v.abs().powf(params.p)).collect());
        let _ = memory.take_value(0);
        Ok(Self {
            params: *params,
            u_hat: grid.forward(u0.values()),
            v_hat: grid.forward(u1.values()),
            forcing_hat: vec![Complex64::default(); grid.len()],
            u: u0.clone(),
            grid,
            props,
            memory,
            forcing,
            t: 0.0,
            step_index: 0,
            blown_up: None,
        })
    }

    pub fn u(&self) -> &Field {
        &self.u
    }

    pub fn v(&self) -> Field {
        Field {
            dim: self.u.dim,
            modes: self.u.modes,
            values: self.grid.inverse(&self.v_hat),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn memory(&self) -> &MemoryConvolver {
        &self.memory
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn mark_blown_up(&mut self, t: f64) {
        self.blown_up = Some(t);
    }

    fn kick(&mut self) {
        let half = 0.5 * self.params.dt;
        for (v, f) in self.v_hat.iter_mut().zip(&self.forcing_hat) {
            *v += f * half;
        }
    }

    /// Advances one step in place.
    pub fn advance(&mut self) -> Result<()> {
        if let Some(t) = self.blown_up {
            return Err(SimError::AlreadyBlownUp(t));
        }
        self.kick();
        for ((u, v), prop) in self.u_hat.iter_mut().zip(self.v_hat.iter_mut()).zip(&self.props) {
            (*u, *v) = prop.apply(*u, *v);
        }
        let u = self.grid.inverse(&self.u_hat);
        if u.iter().any(|x| !x.is_finite()) {
            return Err(SimError::NonFinite);
        }
        let p = self.params.p;
        let g: Vec<f64> = u.iter().map(|x| x.abs().powf(p)).collect();
        if g.iter().any(|x| !x.is_finite()) {
            return Err(SimError::NonFinite);
        }
        self.memory.push(g);
        self.step_index += 1;
        self.t = self.step_index as f64 * self.params.dt;
        let forcing = self.memory.take_value(self.step_index);
        if self.forcing {
            let mut hat = self.grid.forward(&forcing);
            self.grid.dealias_in_place(&mut hat);
            self.forcing_hat = hat;
        }
        self.u.values = u;
        self.kick();
        Ok(())
    }
}

/// Advances the state by one step.
pub fn step(mut state: SimState, params: &ModelParams) -> Result<SimState> {
    if *params != state.params {
        return Err(SimError::InvalidParams(vec!["state was built for other parameters".into()]));
    }
    state.advance()?;
    Ok(state)
}

/// Memory forcing `0 I_t^(1-gamma) |u|^p` at the current time, by direct
/// summation over the stored history.
pub fn memory_term(state: &SimState, params: &ModelParams) -> Result<Field> {
    if state.memory.is_empty() {
        return Err(SimError::EmptyHistory(state.t));
    }
    if (state.memory.alpha() - (1.0 - params.gamma)).abs() > 1e-15 {
        return Err(SimError::InvalidParams(vec!["state was built for another gamma".into()]));
    }
    Field::new(params.dim, params.modes, state.memory.direct_value(state.step_index))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// `sup |u|` crossed the threshold before `T_max`.
    #[serde(rename = "BLOWUP")]
    Blowup,
    /// Reached `T_max` below the threshold.
    #[serde(rename = "NOT-BLOWN-UP")]
    NotBlownUp,
    /// Identically zero data stay zero.
    #[serde(rename = "GLOBAL")]
    Global,
    /// Non-finite values before the threshold was crossed.
    #[serde(rename = "FAILURE")]
    Failure,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Blowup => "BLOWUP",
            Self::NotBlownUp => "NOT-BLOWN-UP",
            Self::Global => "GLOBAL",
            Self::Failure => "FAILURE",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Moment functionals at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub t: f64,
    /// `int |u| chi`
    pub w: f64,
    pub u_sup: f64,
    /// `||u||_2^2 + ||u_t||_2^2`
    pub energy_proxy: f64,
    /// `int u chi`
    pub signed_w: f64,
    /// `int u (-Delta)^sigma chi`
    pub z_sigma: f64,
    /// `int u (-Delta)^eta chi`
    pub z_eta: f64,
    /// `int |u|^p chi` (against the dealiased weight)
    pub m_p: f64,
    /// Share of `int |u|` in the outer tenth of the box.
    pub boundary_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub params: ModelParams,
    pub classification: Classification,
    pub blowup_time: Option<f64>,
    pub final_time: f64,
    pub final_sup: f64,
    pub steps: usize,
    /// `int u0 chi`
    pub a_const: f64,
    /// `int [u1 chi + mu u0 (-Delta)^eta chi]`
    pub b_const: f64,
    /// Spacing of `records`.
    pub record_dt: f64,
    /// Records at `t = k record_dt`.
    pub records: Vec<MomentRecord>,
    /// State at `final_time` (may fall between record times).
    pub final_record: MomentRecord,
    pub max_boundary_fraction: f64,
}

impl SimResult {
    /// `(t, w, u_sup, energy_proxy)` rows for plotting, including the final state.
    pub fn plot_rows(&self) -> Vec<[f64; 4]> {
        let mut rows: Vec<[f64; 4]> = self.records.iter().map(|r| [r.t, r.w, r.u_sup, r.energy_proxy]).collect();
        let last = self.final_record;
        if rows.last().is_none_or(|r| r[0] < last.t) {
            rows.push([last.t, last.w, last.u_sup, last.energy_proxy]);
        }
        rows
    }
}

/// Weights on the grid used by the moment functionals.
struct MomentWeights {
    chi: Vec<f64>,
    chi_dealiased: Vec<f64>,
    lap_sigma: Vec<f64>,
    lap_eta: Vec<f64>,
    boundary: Vec<bool>,
    cell: f64,
}

impl MomentWeights {
    fn new(grid: &SpectralGrid, chi: &TestFunctionSpec, params: &ModelParams) -> Self {
        let w = chi.weight();
        let vals: Vec<f64> = (0..grid.len()).map(|i| w.radial(grid.radius(i))).collect();
        let band = 0.9 * grid.half_width();
        let boundary = (0..grid.len())
            .map(|i| {
                let [x, y] = grid.point(i);
                x.abs() >= band || y.abs() >= band
            })
            .collect();
        Self {
            chi_dealiased: grid.dealiased(&vals),
            lap_sigma: grid.apply_symbol(&vals, params.sigma),
            lap_eta: grid.apply_symbol(&vals, params.eta),
            chi: vals,
            boundary,
            cell: grid.cell(),
        }
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.cell
    }

    fn record(&self, state: &SimState) -> MomentRecord {
        let u = state.u.values();
        let v = state.v();
        let p = state.params.p;
        let abs: Vec<f64> = u.iter().map(|x| x.abs()).collect();
        let g: Vec<f64> = abs.iter().map(|x| x.powf(p)).collect();
        let total: f64 = abs.iter().sum();
        let edge: f64 = abs.iter().zip(&self.boundary).filter(|(_, &b)| b).map(|(a, _)| a).sum();
        let sq = |f: &[f64]| f.iter().map(|x| x * x).sum::<f64>() * self.cell;
        MomentRecord {
            t: state.t,
            w: self.dot(&abs, &self.chi),
            u_sup: state.u.sup(),
            energy_proxy: sq(u) + sq(v.values()),
            signed_w: self.dot(u, &self.chi),
            z_sigma: self.dot(u, &self.lap_sigma),
            z_eta: self.dot(u, &self.lap_eta),
            m_p: self.dot(&g, &self.chi_dealiased),
            boundary_fraction: if total > 0.0 { edge / total } else { 0.0 },
        }
    }
}

/// `max |(-Delta)^s chi| / chi` over the grid, with the periodic operator.
pub fn comparability_on_grid(params: &ModelParams, chi: &TestFunctionSpec, s: f64) -> f64 {
    let grid = params.grid();
    let w = chi.weight();
    let vals: Vec<f64> = (0..grid.len()).map(|i| w.radial(grid.radius(i))).collect();
    grid.apply_symbol(&vals, s)
        .iter()
        .zip(&vals)
        .fold(0.0, |m, (l, c)| m.max(l.abs() / c))
}

fn check_chi(params: &ModelParams, chi: &TestFunctionSpec) -> Result<()> {
    let mut bad = Vec::new();
    if chi.dim() != params.dim {
        bad.push(format!("N = {} vs {}", chi.dim(), params.dim));
    }
    if chi.sigma() != params.sigma || chi.eta() != params.eta {
        bad.push(format!(
            "(σ, η) = ({}, {}) vs ({}, {})",
            chi.sigma(),
            chi.eta(),
            params.sigma,
            params.eta
        ));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(SimError::ChiMismatch(bad.join(", ")))
    }
}

pub fn run(params: &ModelParams, u0: &Field, u1: &Field, chi: &TestFunctionSpec) -> Result<SimResult> {
    run_with(params, u0, u1, chi, &RunOptions::default())
}

/// Integrates to `T_max` or until `sup |u|` exceeds the threshold.
pub fn run_with(
    params: &ModelParams,
    u0: &Field,
    u1: &Field,
    chi: &TestFunctionSpec,
    options: &RunOptions,
) -> Result<SimResult> {
    check_chi(params, chi)?;
    let mut state = SimState::new(params, u0, u1, options.forcing)?;
    let weights = MomentWeights::new(&state.grid, chi, params);
    let a_const = weights.dot(u0.values(), &weights.chi);
    let b_const = weights.dot(u1.values(), &weights.chi) + params.mu * weights.dot(u0.values(), &weights.lap_eta);
    let every = options.record_every.max(1);
    let n_steps = params.n_steps();
    let mut records = Vec::with_capacity(n_steps / every + 2);
    let mut max_boundary: f64 = 0.0;
    let mut ever_nonzero = u0.sup() > 0.0 || u1.sup() > 0.0;
    let mut blowup_time = None;
    let mut failure: Option<String> = None;
    let mut prev_sup = u0.sup();
    records.push(weights.record(&state));
    while state.step_index < n_steps {
        if let Err(e) = state.advance() {
            failure = Some(e.to_string());
            break;
        }
        let sup = state.u.sup();
        ever_nonzero |= sup > 0.0;
        if state.step_index % every == 0 {
            let r = weights.record(&state);
            max_boundary = max_boundary.max(r.boundary_fraction);
            records.push(r);
        }
        if sup > params.blowup_threshold {
            let frac = (params.blowup_threshold - prev_sup) / (sup - prev_sup);
            let t = state.t - params.dt + frac.clamp(0.0, 1.0) * params.dt;
            state.mark_blown_up(t);
            blowup_time = Some(t);
            break;
        }
        prev_sup = sup;
    }
    let final_record = weights.record(&state);
    max_boundary = max_boundary.max(final_record.boundary_fraction);
    let classification = if failure.is_some() {
        Classification::Failure
    } else if blowup_time.is_some() {
        Classification::Blowup
    } else if ever_nonzero {
        Classification::NotBlownUp
    } else {
        Classification::Global
    };
    let result = SimResult {
        params: *params,
        classification,
        blowup_time,
        final_time: state.t,
        final_sup: state.u.sup(),
        steps: state.step_index,
        a_const,
        b_const,
        record_dt: every as f64 * params.dt,
        records,
        final_record,
        max_boundary_fraction: max_boundary,
    };
    match failure {
        Some(reason) => Err(SimError::IntegrationFailure {
            step: state.step_index,
            t: state.t,
            reason,
            partial: Box::new(result),
        }),
        None => Ok(result),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(p: f64) -> ModelParams {
        ModelParams::new(1.0, 0.5, 2.0, 0.5, p, 1, 20.0, 64, 1e-2, 1.0).unwrap()
    }

    #[test]
    fn spectral_single_mode_examples() {
        let pr = params(1.5);
        let g = pr.grid();
        let f = g.field_from_fn(|x| (PI * x[0] / 20.0).sin());
        let k = PI / 20.0;
        let one = frac_laplacian_apply(&f, 1.0, &pr).unwrap();
        let half = frac_laplacian_apply(&f, 0.5, &pr).unwrap();
        let zero = frac_laplacian_apply(&f, 0.0, &pr).unwrap();
        for i in 0..f.values().len() {
            assert!((one.values()[i] - k * k * f.values()[i]).abs() < 1e-14);
            assert!((half.values()[i] - k * f.values()[i]).abs() < 1e-14);
            assert_eq!(zero.values()[i], f.values()[i]);
        }
        assert!(frac_laplacian_apply(&Field::zeros(1, 32), 1.0, &pr).is_err());
        assert!(frac_laplacian_apply(&f, 1.5, &pr).is_err());
    }

    #[test]
    fn spectral_beats_finite_differences() {
        let mut errs = Vec::new();
        for m in [32usize, 64] {
            let pr = ModelParams { modes: m, half_width: 8.0, ..params(1.5) };
            let g = pr.grid();
            let f = g.field_from_fn(|x| (-x[0] * x[0]).exp());
            let exact: Vec<f64> = (0..m).map(|i| {
                let x = g.coord(i);
                -(4.0 * x * x - 2.0) * (-x * x).exp()
            }).collect();
            let spec = frac_laplacian_apply(&f, 1.0, &pr).unwrap();
            let h = g.dx();
            let v = f.values();
            let fd: Vec<f64> = (0..m).map(|i| -(v[(i + 1) % m] - 2.0 * v[i] + v[(i + m - 1) % m]) / (h * h)).collect();
            let es = spec.values().iter().zip(&exact).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            let ef = fd.iter().zip(&exact).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            assert!(es < ef);
            errs.push(ef);
        }
        // second order for the finite differences
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.0 && ratio < 5.0, "{ratio}");
    }

    #[test]
    fn zero_data_stay_zero() {
        let pr = params(2.0);
        let chi = TestFunctionSpec::new(1, 2.0, 1.0, 0.5).unwrap();
        let z = Field::zeros(1, 64);
        let r = run(&pr, &z, &z, &chi).unwrap();
        assert_eq!(r.classification, Classification::Global);
        assert!(r.records.iter().all(|m| m.w == 0.0 && m.u_sup == 0.0));
        assert_eq!((r.a_const, r.b_const), (0.0, 0.0));
    }

    #[test]
    fn undamped_single_mode_matches_ode() {
        let pr = ModelParams::new(1.0, 0.0, 0.0, 0.5, 2.0, 1, 10.0, 32, 1e-3, 0.1).unwrap();
        let g = pr.grid();
        let k = 3.0 * PI / 10.0;
        let u0 = g.field_from_fn(|x| (k * x[0]).cos());
        let mut state = SimState::new(&pr, &u0, &Field::zeros(1, 32), false).unwrap();
        for _ in 0..100 {
            state = step(state, &pr).unwrap();
        }
        let t = state.t();
        for (i, v) in state.u().values().iter().enumerate() {
            let exact = (k * t).cos() * (k * g.coord(i)).cos();
            assert!((v - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn damped_energy_nonincreasing() {
        let pr = ModelParams::new(1.0, 0.5, 1.0, 0.5, 2.0, 1, 10.0, 64, 1e-2, 2.0).unwrap();
        let g = pr.grid();
        let u0 = g.field_from_fn(|x| (-x[0] * x[0]).exp());
        let chi = TestFunctionSpec::new(1, 2.0, 1.0, 0.5).unwrap();
        let opts = RunOptions { record_every: 1, forcing: false };
        let r = run_with(&pr, &u0, &u0, &chi, &opts).unwrap();
        // the proxy ||u||^2 + ||v||^2 is not the conserved energy, so check
        // the true energy ||v||^2 + <u, (-Delta) u> through the propagator
        let mut state = SimState::new(&pr, &u0, &u0, false).unwrap();
        let energy = |s: &SimState| {
            let v = s.v();
            let lu = g.apply_symbol(s.u().values(), 1.0);
            v.values().iter().map(|x| x * x).sum::<f64>()
                + s.u().values().iter().zip(&lu).map(|(a, b)| a * b).sum::<f64>()
        };
        let mut last = energy(&state);
        for _ in 0..200 {
            state.advance().unwrap();
            let e = energy(&state);
            assert!(e <= last * (1.0 + 1e-12));
            last = e;
        }
        assert_eq!(r.classification, Classification::NotBlownUp);
    }

    #[test]
    fn memory_term_matches_online_forcing() {
        let pr = params(1.5);
        let g = pr.grid();
        let u0 = g.field_from_fn(|x| (-x[0] * x[0]).exp());
        let mut state = SimState::new(&pr, &u0, &u0, true).unwrap();
        for _ in 0..150 {
            state.advance().unwrap();
        }
        let direct = memory_term(&state, &pr).unwrap();
        let mut online = g.forward(direct.values());
        g.dealias_in_place(&mut online);
        for (a, b) in online.iter().zip(&state.forcing_hat) {
            assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn chi_must_match_model() {
        let pr = params(1.5);
        let z = Field::zeros(1, 64);
        let chi = TestFunctionSpec::new(1, 2.0, 1.0, 1.0).unwrap();
        assert!(matches!(run(&pr, &z, &z, &chi), Err(SimError::ChiMismatch(_))));
    }

    #[test]
    fn invalid_params_listed() {
        let bad = ModelParams { gamma: 1.0, p: 0.5, modes: 48, ..params(1.5) };
        let v = bad.violations();
        assert_eq!(v.len(), 3);
        assert!(v[0].contains("p>1") && v[1].contains("γ<1"));
    }
}
