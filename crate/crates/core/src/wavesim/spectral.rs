//! Periodic pseudospectral grid on `[-L, L)^N` with FFT transforms.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Field, SimError};

/// Uniform periodic grid with `M` points per dimension and the matching
/// wavenumbers `xi_k = pi k / L`, `k = -M/2 .. M/2-1` (FFT order).
#[derive(Clone)]
pub struct SpectralGrid {
    dim: usize,
    m: usize,
    half_width: f64,
    xi2: Vec<f64>,
    dealias: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dim", &self.dim)
            .field("m", &self.m)
            .field("half_width", &self.half_width)
            .finish()
    }
}

fn wavenumber_index(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

impl SpectralGrid {
    pub fn new(dim: usize, m: usize, half_width: f64) -> Self {
        assert!(dim == 1 || dim == 2, "dimension must be 1 or 2");
        assert!(m >= 2 && m % 2 == 0, "mode count must be even");
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let k0 = std::f64::consts::PI / half_width;
        let cutoff = (m as f64) / 3.0;
        let size = m.pow(dim as u32);
        let mut xi2 = Vec::with_capacity(size);
        let mut dealias = Vec::with_capacity(size);
        for idx in 0..size {
            let (mut s, mut keep) = (0.0, true);
            let mut rest = idx;
            for _ in 0..dim {
                let k = wavenumber_index(rest % m, m);
                rest /= m;
                let xi = k0 * k as f64;
                s += xi * xi;
                // 2/3 rule: keep |k| < M/3
                keep &= (k.unsigned_abs() as f64) < cutoff;
            }
            xi2.push(s);
            dealias.push(keep);
        }
        Self {
            dim,
            m,
            half_width,
            xi2,
            dealias,
            fwd,
            inv,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.xi2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi2.is_empty()
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.m as f64
    }

    /// Volume element `dx^N`.
    pub fn cell(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Coordinate of point `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    /// Coordinates of flat index `idx` (first axis fastest).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let i = idx % self.m;
        let j = idx / self.m;
        [self.coord(i), if self.dim == 2 { self.coord(j) } else { 0.0 }]
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.point(idx);
        (x * x + y * y).sqrt()
    }

    /// `|xi|^2` per mode in FFT order.
    pub fn xi2(&self) -> &[f64] {
        &self.xi2
    }

    /// `|xi|^(2s)` for mode `idx`, with `|xi|^0 = 1` everywhere.
    pub fn symbol(&self, idx: usize, s: f64) -> f64 {
        if s == 0.0 {
            1.0
        } else {
            self.xi2[idx].powf(s)
        }
    }

    pub fn keeps(&self, idx: usize) -> bool {
        self.dealias[idx]
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        for row in data.chunks_exact_mut(m) {
            plan.process(row);
        }
        if self.dim == 2 {
            let mut col = vec![Complex64::default(); m];
            for i in 0..m {
                for j in 0..m {
                    col[j] = data[j * m + i];
                }
                plan.process(&mut col);
                for j in 0..m {
                    data[j * m + i] = col[j];
                }
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.fwd);
        data
    }

    /// Inverse transform, normalised, keeping the real part.
    pub fn inverse(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut data = spec.to_vec();
        self.transform(&mut data, &self.inv);
        let norm = 1.0 / self.len() as f64;
        data.iter().map(|c| c.re * norm).collect()
    }

    /// Multiplies each mode by `|xi|^(2s)` and transforms back.
    pub fn apply_symbol(&self, values: &[f64], s: f64) -> Vec<f64> {
        if s == 0.0 {
            return values.to_vec();
        }
        let mut spec = self.forward(values);
        for (idx, c) in spec.iter_mut().enumerate() {
            *c *= self.symbol(idx, s);
        }
        self.inverse(&spec)
    }

    /// Zeroes the modes removed by the 2/3 rule.
    pub fn dealias_in_place(&self, spec: &mut [Complex64]) {
        for (c, &keep) in spec.iter_mut().zip(&self.dealias) {
            if !keep {
                *c = Complex64::default();
            }
        }
    }

    pub fn dealiased(&self, values: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(values);
        self.dealias_in_place(&mut spec);
        self.inverse(&spec)
    }

    pub fn field_from_fn(&self, f: impl Fn(&[f64]) -> f64) -> Field {
        let values = (0..self.len())
            .map(|idx| {
                let p = self.point(idx);
                f(&p[..self.dim])
            })
            .collect();
        Field::new(self.dim, self.m, values).expect("grid-shaped field")
    }

    pub fn check(&self, f: &Field) -> Result<(), SimError> {
        if f.dim() != self.dim || f.modes() != self.m {
            return Err(SimError::ShapeMismatch {
                expected: (self.dim, self.m),
                got: (f.dim(), f.modes()),
            });
        }
        Ok(())
    }
}
