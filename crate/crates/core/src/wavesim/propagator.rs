//! Exact propagator of the damped mode equation `y'' + d y' + k y = 0`.

/// Transfer matrix `[[p11, p12], [p21, p22]]` mapping `(y, y')` at time 0 to
/// time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePropagator {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

impl ModePropagator {
    /// With `w^2 = k - d^2/4`:
    /// `y(t) = e^(-dt/2) [y0 C + (v0 + d y0 / 2) S]`,
    /// `v(t) = e^(-dt/2) [v0 C - (k y0 + d v0 / 2) S]`,
    /// where `C = cos wt`, `S = sin(wt)/w` (hyperbolic when `w^2 < 0`).
    pub fn new(k: f64, d: f64, t: f64) -> Self {
        let disc = k - 0.25 * d * d;
        let half = -0.5 * d * t;
        // e^(-dt/2) C and e^(-dt/2) S, combined before exponentiating so
        // that strongly overdamped modes never overflow
        let (ec, es) = if disc > 0.0 {
            let w = disc.sqrt();
            let e = half.exp();
            let s = if w * t < 1e-8 { t } else { (w * t).sin() / w };
            (e * (w * t).cos(), e * s)
        } else if disc < 0.0 {
            let kap = (-disc).sqrt();
            let plus = (half + kap * t).exp();
            let minus = (half - kap * t).exp();
            let s = if kap * t < 1e-8 { t * half.exp() } else { 0.5 * (plus - minus) / kap };
            (0.5 * (plus + minus), s)
        } else {
            let e = half.exp();
            (e, e * t)
        };
        Self {
            p11: ec + 0.5 * d * es,
            p12: es,
            p21: -k * es,
            p22: ec - 0.5 * d * es,
        }
    }

    pub fn apply<T>(&self, y: T, v: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        (y * self.p11 + v * self.p12, y * self.p21 + v * self.p22)
    }
}
