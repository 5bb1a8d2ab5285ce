//! Double-double (~32 significant digits) arithmetic and high-precision
//! reference values for the normal special functions.
//!
//! Test-only. Shares no code with the library: the inverse Mills ratio is
//! built from the Laplace continued fraction (2000 terms, evaluated backwards)
//! for the lower tail and from the odd power series of Phi near the origin.
#![allow(dead_code)]

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn sqr(x: f64) -> Dd {
        let (p, e) = two_prod(x, x);
        Dd { hi: p, lo: e }
    }

    pub fn scale_pow2(self, k: i32) -> Dd {
        // two steps so 2^k itself never under/overflows
        let h = k / 2;
        let a = 2f64.powi(h);
        let b = 2f64.powi(k - h);
        Dd {
            hi: self.hi * a * b,
            lo: self.lo * a * b,
        }
    }

    pub fn sqrt(self) -> Dd {
        let s = Dd::new(self.hi.sqrt());
        s + (self - s * s) / (s + s)
    }

    pub fn sqrt_2pi() -> Dd {
        (Dd::PI + Dd::PI).sqrt()
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// exp in double-double via k*ln2 reduction, 2^-10 scaling and Taylor series.
pub fn exp(x: Dd) -> Dd {
    if x.hi < -1500.0 {
        return Dd::ZERO;
    }
    let k = (x.hi / std::f64::consts::LN_2).round();
    let r = x - Dd::LN2 * Dd::new(k);
    let r = r.scale_pow2(-10);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for n in 1..30 {
        term = term * r / Dd::new(n as f64);
        sum = sum + term;
        if term.hi.abs() < 1e-36 {
            break;
        }
    }
    for _ in 0..10 {
        sum = sum * sum;
    }
    sum.scale_pow2(k as i32)
}

/// phi(t) = exp(-t^2/2) / sqrt(2 pi)
pub fn normal_pdf(t: f64) -> Dd {
    exp(-(Dd::sqr(t).scale_pow2(-1))) / Dd::sqrt_2pi()
}

/// Upper-tail Mills ratio reciprocal: phi(u)/(1-Phi(u)) = u + 1/(u + 2/(u + 3/(u + ...))).
fn hazard_cf(u: f64) -> Dd {
    let u = Dd::new(u);
    let mut tail = u;
    for k in (1..=2000).rev() {
        tail = u + Dd::new(k as f64) / tail;
    }
    tail
}

/// sum_{n>=0} t^(2n+1) / (2n+1)!!, so that Phi(t) = 1/2 + phi(t) * series.
fn odd_series(t: f64) -> Dd {
    let t2 = Dd::sqr(t);
    let mut term = Dd::new(t);
    let mut sum = term;
    for n in 1..2000 {
        term = term * t2 / Dd::new((2 * n + 1) as f64);
        sum = sum + term;
        if term.hi.abs() < 1e-34 * sum.hi.abs() {
            break;
        }
    }
    sum
}

/// High-precision inverse Mills ratio phi(t)/Phi(t).
pub fn inverse_mills(t: f64) -> Dd {
    if t <= -5.0 {
        hazard_cf(-t)
    } else if t <= 5.0 {
        // 1/R = Phi/phi = 1/(2 phi) + series
        let half_over_pdf = (Dd::new(0.5) / normal_pdf(t)) + odd_series(t);
        half_over_pdf.recip()
    } else {
        // Phi(t) = 1 - phi(t) / hazard(t)
        let pdf = normal_pdf(t);
        let upper = pdf / hazard_cf(t);
        pdf / (Dd::ONE - upper)
    }
}

/// High-precision Phi(t) = phi(t) / R(t).
pub fn normal_cdf(t: f64) -> Dd {
    if t > 5.0 {
        Dd::ONE - normal_pdf(t) / hazard_cf(t)
    } else {
        normal_pdf(t) / inverse_mills(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_exp_matches_known_constants() {
        let e = exp(Dd::ONE);
        assert_eq!(e.hi, std::f64::consts::E);
        let err = (e.lo - 1.445_646_891_729_250_2e-16).abs();
        assert!(err < 1e-27, "lo error {err:e}");
    }
}
