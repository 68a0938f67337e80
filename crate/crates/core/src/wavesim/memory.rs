//! Pointwise Riemann-Liouville memory `0 I_t^alpha g(., x)` over a dense
//! history, with the same product rule as [`crate::fracops::rl_left`].
//!
//! The history sum `sum_{j=1}^{m-1} c(m-j) g_j` is accumulated online by a
//! dyadic block decomposition: once `g_n` is known, the block of the last
//! `b = 2^tz(n+1)` samples is convolved against the kernel and scattered onto
//! the next `b` outputs. Small blocks are summed directly, large ones by FFT,
//! so a run of `n` steps costs `O(n log^2 n)` per grid point.

use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::fracops::{power_second_difference, start_weight, FracOrder};
use crate::special::gamma;

const DIRECT_BLOCK: usize = 64;

struct Level {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex64>,
}

pub struct MemoryConvolver {
    alpha: f64,
    h: f64,
    scale: f64,
    points: usize,
    history: Vec<Vec<f64>>,
    pending: HashMap<usize, Vec<f64>>,
    kernel: Vec<f64>,
    levels: HashMap<usize, Level>,
    planner: FftPlanner<f64>,
}

impl std::fmt::Debug for MemoryConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MemoryConvolver")
            .field("alpha", &self.alpha)
            .field("h", &self.h)
            .field("points", &self.points)
            .field("len", &self.history.len())
            .finish()
    }
}

impl MemoryConvolver {
    pub fn new(alpha: FracOrder, h: f64, points: usize) -> Self {
        let a = alpha.value();
        Self {
            alpha: a,
            h,
            scale: h.powf(a) / gamma(a + 2.0),
            points,
            history: Vec::new(),
            pending: HashMap::new(),
            kernel: vec![0.0],
            levels: HashMap::new(),
            planner: FftPlanner::new(),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn history(&self) -> &[Vec<f64>] {
        &self.history
    }

    fn kernel_upto(&mut self, k: usize) {
        let e = self.alpha + 1.0;
        while self.kernel.len() <= k {
            let lag = self.kernel.len();
            self.kernel.push(power_second_difference(lag, e));
        }
    }

    /// Appends `g_n` and schedules its block contributions.
    pub fn push(&mut self, g: Vec<f64>) {
        assert_eq!(g.len(), self.points, "history sample has wrong size");
        self.history.push(g);
        let n = self.history.len() - 1;
        let b = 1usize << (n + 1).trailing_zeros();
        let j0 = n + 1 - b;
        self.kernel_upto(2 * b);
        let mut out = vec![vec![0.0; self.points]; b];
        if b <= DIRECT_BLOCK {
            for (i, row) in out.iter_mut().enumerate() {
                let m = n + 1 + i;
                // g_0 enters through the start weight, not the kernel
                for j in j0.max(1)..=n {
                    let c = self.kernel[m - j];
                    for (o, &v) in row.iter_mut().zip(&self.history[j]) {
                        *o += c * v;
                    }
                }
            }
        } else {
            self.fft_block(j0, b, &mut out);
        }
        for (i, row) in out.into_iter().enumerate() {
            let m = n + 1 + i;
            match self.pending.get_mut(&m) {
                Some(acc) => acc.iter_mut().zip(&row).for_each(|(a, r)| *a += r),
                None => {
                    self.pending.insert(m, row);
                }
            }
        }
    }

    fn fft_block(&mut self, j0: usize, b: usize, out: &mut [Vec<f64>]) {
        let size = 2 * b;
        if !self.levels.contains_key(&b) {
            let fwd = self.planner.plan_fft_forward(size);
            let inv = self.planner.plan_fft_inverse(size);
            let mut kernel_hat: Vec<Complex64> =
                (0..size).map(|d| Complex64::new(if d == 0 { 0.0 } else { self.kernel[d] }, 0.0)).collect();
            fwd.process(&mut kernel_hat);
            self.levels.insert(b, Level { fwd, inv, kernel_hat });
        }
        let level = &self.levels[&b];
        let norm = 1.0 / size as f64;
        let mut buf = vec![Complex64::default(); size];
        for x in 0..self.points {
            for (l, slot) in buf.iter_mut().enumerate() {
                let j = j0 + l;
                let v = if l < b && j >= 1 { self.history[j][x] } else { 0.0 };
                *slot = Complex64::new(v, 0.0);
            }
            level.fwd.process(&mut buf);
            for (s, k) in buf.iter_mut().zip(&level.kernel_hat) {
                *s *= k;
            }
            level.inv.process(&mut buf);
            // lag b + i - l lands at index b + i, clear of circular wrap
            for (i, row) in out.iter_mut().enumerate() {
                row[x] += buf[b + i].re * norm;
            }
        }
    }

    /// Memory at node `m` (requires `g_0..=g_m`); consumes the accumulated
    /// history sum for that node.
    pub fn take_value(&mut self, m: usize) -> Vec<f64> {
        assert!(m < self.history.len(), "node {m} beyond history");
        if m == 0 {
            self.pending.remove(&0);
            return vec![0.0; self.points];
        }
        let acc = self.pending.remove(&m).unwrap_or_else(|| vec![0.0; self.points]);
        let a0 = start_weight(m, self.alpha);
        let (g0, gm) = (&self.history[0], &self.history[m]);
        acc.iter()
            .zip(g0.iter().zip(gm))
            .map(|(s, (z, c))| self.scale * (a0 * z + s + c))
            .collect()
    }

    /// Memory at node `m` by direct summation over the stored history.
    pub fn direct_value(&self, m: usize) -> Vec<f64> {
        assert!(m < self.history.len(), "node {m} beyond history");
        if m == 0 {
            return vec![0.0; self.points];
        }
        let e = self.alpha + 1.0;
        let a0 = start_weight(m, self.alpha);
        let mut out: Vec<f64> = self.history[0]
            .iter()
            .zip(&self.history[m])
            .map(|(z, c)| a0 * z + c)
            .collect();
        for j in 1..m {
            let c = power_second_difference(m - j, e);
            for (o, v) in out.iter_mut().zip(&self.history[j]) {
                *o += c * v;
            }
        }
        out.iter_mut().for_each(|o| *o *= self.scale);
        out
    }
}
