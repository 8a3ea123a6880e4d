//! Error-function family used by the closed-form CIR expressions.
//!
//! Every `exp(A) * erfc(B)` product in the hitting-rate and absorbed-fraction
//! formulas is rewritten as `erfcx(B) * exp(A - B^2)`. At the default geometry
//! `exp(A)` alone overflows once the surface rate exceeds roughly 10^3 um/s.

use std::f64::consts::PI;

/// `1 / sqrt(pi)`.
pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Error function.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// `exp(x*x)` with the rounding error of the square folded back in.
#[inline]
fn exp_sq(x: f64) -> f64 {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    hi.exp() * lo.exp()
}

/// Scaled complementary error function `erfcx(x) = exp(x^2) erfc(x)`.
///
/// Finite for every `x >= -26.6`; overflows to `+inf` below that, which is
/// the true value in double precision.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 * exp_sq(x) - erfcx(-x);
    }
    if x < 12.0 {
        exp_sq(x) * erfc(x)
    } else {
        erfcx_continued_fraction(x)
    }
}

/// Laplace continued fraction, `erfcx(x) = (1/sqrt(pi)) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`.
/// Converges to full precision in a few dozen terms for `x >= 12`.
fn erfcx_continued_fraction(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    let mut tail = 0.0;
    for n in (1..=40).rev() {
        tail = (n as f64 * 0.5) / (x + tail);
    }
    FRAC_1_SQRT_PI / (x + tail)
}

/// `1/sqrt(pi) - x * erfcx(x)` for `x >= 0`, without cancellation at large `x`.
///
/// This is the positive gap between the Mills-ratio bound and `erfcx`; it
/// appears when the hitting rate is split into non-negative pieces.
pub fn mills_gap(x: f64) -> f64 {
    debug_assert!(x >= 0.0, "mills_gap is defined for x >= 0");
    if x < 8.0 {
        return (FRAC_1_SQRT_PI - x * erfcx(x)).max(0.0);
    }
    if x.is_infinite() {
        return 0.0;
    }
    // 1/sqrt(pi) * sum_{n>=1} (-1)^{n+1} (2n-1)!! / (2x^2)^n
    let inv = 1.0 / (2.0 * x * x);
    let mut term = inv;
    let mut sum = term;
    for n in 2..40 {
        term *= -((2 * n - 1) as f64) * inv;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    FRAC_1_SQRT_PI * sum
}

/// `sqrt(pi)`, kept next to its reciprocal for the CIR formulas.
#[inline]
pub fn sqrt_pi() -> f64 {
    PI.sqrt()
}
