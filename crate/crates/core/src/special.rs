//! Normal distribution and incomplete-gamma helpers.
//!
//! Φ and its complement come from `libm::erfc`, which keeps relative
//! accuracy in the tails until underflow. Past that point `ln_norm_sf` switches to the
//! asymptotic Mills-ratio series.

use libm::{erf, erfc};
use statrs::function::gamma::{gamma_lr, ln_gamma};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal survival function 1 − Φ(z).
pub fn norm_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// Two-sided tail 2(1 − Φ(|z|)).
pub fn two_sided_tail(z: f64) -> f64 {
    erfc(z.abs() * FRAC_1_SQRT_2)
}

/// Central mass 2Φ(|z|) − 1, without cancellation for small |z|.
pub fn central_mass(z: f64) -> f64 {
    erf(z.abs() * FRAC_1_SQRT_2)
}

/// ln(1 − Φ(z)), finite for every real z.
pub fn ln_norm_sf(z: f64) -> f64 {
    if z < 30.0 {
        return norm_sf(z).ln();
    }
    // 1 − Φ(z) = φ(z)/z · (1 − 1/z² + 3/z⁴ − 15/z⁶ + …)
    let z2 = z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        term *= -((2 * k - 1) as f64) / z2;
        sum += term;
    }
    -0.5 * z2 - z.ln() - 0.5 * (2.0 * PI).ln() + sum.ln()
}

/// ln Φ(z).
pub fn ln_norm_cdf(z: f64) -> f64 {
    ln_norm_sf(-z)
}

/// Inverse standard normal CDF, refined by Newton steps on `norm_cdf`.
pub fn norm_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "norm_quantile needs p in (0,1), got {p}");
    // Acklam's rational starting point
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    let lo = 0.02425;
    let mut x = if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lo {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..3 {
        // work on the smaller tail to keep relative precision
        let (f, target) = if x < 0.0 {
            (norm_cdf(x), p)
        } else {
            (norm_sf(x), 1.0 - p)
        };
        let pdf = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        if pdf == 0.0 {
            break;
        }
        let step = if x < 0.0 {
            (f - target) / pdf
        } else {
            (target - f) / pdf
        };
        x -= step;
    }
    x
}

/// ∫₀^z e^{−u/2} u^{c−1} du = 2^c Γ(c) P(c, z/2).
pub fn lower_gamma_integral(c: f64, z: f64) -> f64 {
    assert!(c > 0.0 && z >= 0.0);
    if z == 0.0 {
        return 0.0;
    }
    (c * std::f64::consts::LN_2 + ln_gamma(c)).exp() * gamma_lr(c, 0.5 * z)
}

/// ∫₀^∞ e^{−u/2} u^{c−1} du = 2^c Γ(c).
pub fn full_gamma_integral(c: f64) -> f64 {
    (c * std::f64::consts::LN_2 + ln_gamma(c)).exp()
}
