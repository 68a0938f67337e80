//! Special functions: Gamma (Lanczos), modified Bessel K_nu and Bessel J_0.

use std::f64::consts::PI;

use crate::quad::{integrate, QuadOptions};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// True when `x` is a pole of Gamma (zero or a negative integer).
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gamma function. Returns NaN at poles; callers that need a hard error use
/// [`gamma_checked`].
pub fn gamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return f64::NAN;
    }
    if x < 0.5 {
        // reflection
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x == x.round() && x <= 23.0 {
        // exact factorials while they fit in 53 bits
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return acc;
    }
    let z = x - 1.0;
    let mut series = LANCZOS_P[0];
    for (i, &c) in LANCZOS_P.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * series
}

/// Natural log of |Gamma(x)| for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        return gamma(x).abs().ln();
    }
    let z = x - 1.0;
    let mut series = LANCZOS_P[0];
    for (i, &c) in LANCZOS_P.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("Gamma evaluated at pole {0}")]
pub struct GammaPole(pub f64);

pub fn gamma_checked(x: f64) -> Result<f64, GammaPole> {
    if is_gamma_pole(x) {
        Err(GammaPole(x))
    } else {
        Ok(gamma(x))
    }
}

/// Gamma(a) / Gamma(b), stable for large positive arguments.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64, GammaPole> {
    if is_gamma_pole(a) {
        return Err(GammaPole(a));
    }
    if is_gamma_pole(b) {
        return Err(GammaPole(b));
    }
    if a > 0.0 && b > 0.0 && (a > 100.0 || b > 100.0) {
        return Ok((ln_gamma(a) - ln_gamma(b)).exp());
    }
    Ok(gamma(a) / gamma(b))
}

/// Modified Bessel function of the second kind, K_nu(x), x > 0.
///
/// Half-integer order 1/2 uses the closed form; other orders integrate
/// `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k needs x > 0");
    let nu = nu.abs();
    if (nu - 0.5).abs() < 1e-15 {
        return (PI / (2.0 * x)).sqrt() * (-x).exp();
    }
    // integrand is below exp(-x - 745) past this point
    let t_max = ((745.0 + x) / x).acosh() + 1.0;
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 400,
    };
    let shift = x;
    // factor out exp(-x) to keep the integrand O(1)
    let scaled = integrate(
        |t| (-(x * (t.cosh() - 1.0))).exp() * (nu * t).cosh(),
        0.0,
        t_max,
        &opts,
    )
    .value;
    scaled * (-shift).exp()
}

/// Bessel function of the first kind of order zero.
///
/// Trapezoidal rule on `(1/2pi) int_0^{2pi} cos(z sin theta) dtheta`, which is
/// exact up to terms of order J_m(z) for m points.
pub fn bessel_j0(z: f64) -> f64 {
    let z = z.abs();
    let m = (z.ceil() as usize + 40).next_multiple_of(4);
    let mut acc = 0.0;
    for k in 0..m {
        let th = 2.0 * PI * k as f64 / m as f64;
        acc += (z * th.sin()).cos();
    }
    acc / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_reference_values() {
        assert_relative_eq!(gamma(0.5), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(2.5), 0.75 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(1.5), 0.5 * PI.sqrt(), max_relative = 1e-13);
        assert_eq!(gamma(5.0), 24.0);
        assert_relative_eq!(gamma(10.5), 1_133_278.388_948_785_3, max_relative = 1e-13);
        assert_relative_eq!(gamma(-0.5), -2.0 * PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma(0.1), 9.513_507_698_668_732, max_relative = 1e-13);
    }

    #[test]
    fn gamma_recurrence_holds() {
        let mut x = -3.7;
        while x < 30.0 {
            if !is_gamma_pole(x) && !is_gamma_pole(x + 1.0) {
                assert_relative_eq!(gamma(x + 1.0), x * gamma(x), max_relative = 1e-12);
            }
            x += 0.173;
        }
    }

    #[test]
    fn poles_rejected() {
        assert!(gamma_checked(0.0).is_err());
        assert!(gamma_checked(-3.0).is_err());
        assert!(gamma(-2.0).is_nan());
        assert!(gamma_checked(-2.5).is_ok());
    }

    #[test]
    fn ratio_matches_direct_and_large() {
        assert_relative_eq!(
            gamma_ratio(17.0, 14.5).unwrap(),
            gamma(17.0) / gamma(14.5),
            max_relative = 1e-12
        );
        // Gamma(201)/Gamma(200) = 200
        assert_relative_eq!(gamma_ratio(201.0, 200.0).unwrap(), 200.0, max_relative = 1e-10);
    }

    #[test]
    fn bessel_k_half_and_generic() {
        // generic path must agree with the closed form at nu = 1/2
        let x = 1.3;
        let closed = bessel_k(0.5, x);
        let t_max = ((745.0 + x) / x).acosh() + 1.0;
        let generic = integrate(
            |t| (-(x * t.cosh())).exp() * (0.5 * t).cosh(),
            0.0,
            t_max,
            &QuadOptions::default(),
        )
        .value;
        assert_relative_eq!(closed, generic, max_relative = 1e-11);
        // K_0(1) = 0.42102443824070834, K_1(2) = 0.13986588181652243
        assert_relative_eq!(bessel_k(0.0, 1.0), 0.421_024_438_240_708_34, max_relative = 1e-11);
        assert_relative_eq!(bessel_k(1.0, 2.0), 0.139_865_881_816_522_43, max_relative = 1e-11);
    }

    #[test]
    fn bessel_j0_reference() {
        assert_relative_eq!(bessel_j0(0.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(bessel_j0(1.0), 0.765_197_686_557_966_6, max_relative = 1e-13);
        assert_relative_eq!(bessel_j0(10.0), -0.245_935_764_451_348_3, max_relative = 1e-12);
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-14);
    }
}
