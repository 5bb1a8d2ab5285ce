//! Scalar special functions: the standard normal pdf/cdf, the inverse Mills
//! ratio `R(t) = phi(t) / Phi(t)` and its derivative, the risk kernel
//! `T(s) = R(s) (R(s) + 2s)` with its derivative, and regularized incomplete
//! Gamma functions.
//!
//! The normal lower tail is evaluated through the scaled complementary error
//! function `erfcx(y) = exp(y^2) erfc(y)`, so `Phi(t)` and `R(t)` keep full
//! relative precision far into the lower tail where `phi / Phi` would
//! otherwise be `0 / 0`. All functions are total on finite inputs and
//! propagate NaN.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// 1 / sqrt(2 pi)
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// sqrt(2 / pi) = R(0)
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
/// 1 / sqrt(pi)
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Above this argument `erfc` underflows, so `erfcx` switches to its
/// continued fraction.
const ERFCX_CF_SWITCH: f64 = 20.0;
const ERFCX_CF_TERMS: usize = 60;

/// Below this `t`, `R(t) - |t|` is evaluated directly by continued fraction.
const MILLS_CF_SWITCH: f64 = -20.0;
const MILLS_CF_TERMS: usize = 80;

/// `exp(-t^2 / 2)` without the rounding error of forming `t^2`.
///
/// `t` is split as `hi + lo` with `hi` carrying 26 significant bits, so
/// `hi^2 / 2` is exact and the correction `lo (t + hi) / 2` is tiny.
fn exp_neg_half_sq(t: f64) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { t } else { 0.0 };
    }
    let hi = f64::from_bits(t.to_bits() & 0xffff_ffff_f800_0000);
    let lo = t - hi;
    (-0.5 * hi * hi).exp() * (-0.5 * lo * (t + hi)).exp()
}

/// `exp(y^2)` with the same splitting as [`exp_neg_half_sq`].
fn exp_sq(y: f64) -> f64 {
    let hi = f64::from_bits(y.to_bits() & 0xffff_ffff_f800_0000);
    let lo = y - hi;
    (hi * hi).exp() * (lo * (y + hi)).exp()
}

/// Scaled complementary error function `exp(y^2) erfc(y)`.
pub fn erfcx(y: f64) -> f64 {
    if y.is_nan() {
        return y;
    }
    if y < 0.0 {
        // overflows to +inf below y ~ -26.6, matching the true value
        return 2.0 * exp_sq(y) - erfcx(-y);
    }
    if y < ERFCX_CF_SWITCH {
        return libm::erfc(y) * exp_sq(y);
    }
    if y.is_infinite() {
        return 0.0;
    }
    // sqrt(pi) erfcx(y) = 1/(y + (1/2)/(y + 1/(y + (3/2)/(y + ...))))
    let mut tail = y;
    for k in (1..=ERFCX_CF_TERMS).rev() {
        tail = y + 0.5 * k as f64 / tail;
    }
    FRAC_1_SQRT_PI / tail
}

/// Standard normal density.
pub fn std_normal_pdf(t: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp_neg_half_sq(t)
}

/// Standard normal distribution function.
pub fn std_normal_cdf(t: f64) -> f64 {
    if t.is_nan() {
        return t;
    }
    if t < 0.0 {
        0.5 * exp_neg_half_sq(t) * erfcx(-t * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * libm::erfc(t * FRAC_1_SQRT_2)
    }
}

/// Standard normal survival function `1 - Phi(t)`, computed without subtraction.
pub fn std_normal_sf(t: f64) -> f64 {
    std_normal_cdf(-t)
}

/// `ln Phi(t)`, finite for every finite `t`.
pub fn ln_std_normal_cdf(t: f64) -> f64 {
    if t.is_nan() {
        return t;
    }
    if t < 0.0 {
        -0.5 * t * t + (0.5 * erfcx(-t * FRAC_1_SQRT_2)).ln()
    } else {
        (-0.5 * libm::erfc(t * FRAC_1_SQRT_2)).ln_1p()
    }
}

/// `ln phi(t)`.
pub fn ln_std_normal_pdf(t: f64) -> f64 {
    -0.5 * t * t - 0.5 * (2.0 * PI).ln()
}

/// `R(-u) - u` for `u >= 20` by the continued fraction
/// `1/(u + 2/(u + 3/(u + ...)))`.
fn lower_tail_excess(u: f64) -> f64 {
    let mut tail = u;
    for k in (2..=MILLS_CF_TERMS).rev() {
        tail = u + k as f64 / tail;
    }
    1.0 / tail
}

/// Inverse Mills ratio `R(t) = phi(t) / Phi(t)`.
///
/// Positive, nonincreasing and convex with `R(t) >= -t`. Underflows to zero
/// only once the exact value leaves the f64 range (t above ~38.5).
pub fn inverse_mills(t: f64) -> f64 {
    if t.is_nan() {
        return t;
    }
    if t <= MILLS_CF_SWITCH {
        let u = -t;
        return u + lower_tail_excess(u);
    }
    if t < 0.0 {
        SQRT_2_OVER_PI / erfcx(-t * FRAC_1_SQRT_2)
    } else {
        std_normal_pdf(t) / std_normal_cdf(t)
    }
}

/// `t + R(t)`, kept accurate in the lower tail where both terms are large
/// and nearly cancel. It lies in `(0, 1)` wherever `R` is representable.
pub fn mills_excess(t: f64) -> f64 {
    if t <= MILLS_CF_SWITCH {
        lower_tail_excess(-t)
    } else {
        t + inverse_mills(t)
    }
}

/// `R'(t) = -R(t) (t + R(t))`, which lies in `(-1, 0)`.
pub fn inverse_mills_deriv(t: f64) -> f64 {
    -inverse_mills(t) * mills_excess(t)
}

/// Risk kernel `T(s) = R(s) (R(s) + 2s)`.
///
/// Exactly one sign change, from negative to positive, as `s` crosses the
/// root of `R(s) + 2s`.
pub fn t_fn(s: f64) -> f64 {
    let r = inverse_mills(s);
    r * (mills_excess(s) + s)
}

/// `T'(s) = 2 R(s) (1 - (s + R(s))^2)`.
pub fn t_fn_deriv(s: f64) -> f64 {
    let e = mills_excess(s);
    2.0 * inverse_mills(s) * (1.0 - e) * (1.0 + e)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

fn check_gamma_params(shape: f64, rate: f64) -> Result<()> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::domain("shape", shape, "must be positive and finite"));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain("rate", rate, "must be positive and finite"));
    }
    Ok(())
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

/// `exp(-x + a ln x - ln Gamma(a))`, the common prefactor of both branches.
fn gamma_prefactor(a: f64, x: f64) -> f64 {
    (a * x.ln() - x - ln_gamma(a)).exp()
}

/// Lower regularized incomplete gamma by its power series (x < a + 1).
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * gamma_prefactor(a, x)
}

/// Upper regularized incomplete gamma by modified Lentz continued fraction
/// (x >= a + 1).
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    gamma_prefactor(a, x) * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x.is_nan() || a.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x.is_nan() || a.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

/// CDF of Gamma(shape, rate) at `x`.
pub fn gamma_cdf(shape: f64, rate: f64, x: f64) -> Result<f64> {
    check_gamma_params(shape, rate)?;
    Ok(gamma_p(shape, rate * x.max(0.0)))
}

/// Survival function of Gamma(shape, rate) at `x`, from the upper branch.
pub fn gamma_sf(shape: f64, rate: f64, x: f64) -> Result<f64> {
    check_gamma_params(shape, rate)?;
    Ok(gamma_q(shape, rate * x.max(0.0)))
}

/// Log-density of Gamma(shape, rate); `-inf` off the support.
pub fn gamma_ln_pdf(shape: f64, rate: f64, x: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    if x == 0.0 {
        return match shape.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => rate.ln(),
            _ => f64::NEG_INFINITY,
        };
    }
    shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)
}

/// Density of Gamma(shape, rate).
pub fn gamma_pdf(shape: f64, rate: f64, x: f64) -> f64 {
    gamma_ln_pdf(shape, rate, x).exp()
}
