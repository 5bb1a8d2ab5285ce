//! Poisson model with an uncertain lower bound and Gamma-type priors:
//!
//! ```text
//! X | theta ~ Poisson(theta)
//! g1(theta) ∝ theta^(a-1) exp(-b theta),   a > 0, b > -1
//! g2(alpha) ∝ alpha^(c-1) exp(-d alpha),   c > 0, d >= 0
//! ```
//!
//! The posterior of `theta` is the `Gamma(a + x, 1 + b)` density weighted by
//! the `Gamma(c, d)` CDF. The posterior of `alpha` is `alpha^(c-1) e^(-d alpha)`
//! times the `Gamma(x + a, 1 + b)` survival function; for integer `a` it is a
//! finite Gamma mixture whose weights are truncated negative binomial.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_split, Tolerance};
use crate::special_fn::{gamma_ln_pdf, gamma_p, gamma_q, ln_gamma};

const POSTERIOR_TOL: Tolerance = Tolerance::new(1e-15, 1e-14);

/// Gamma-type hyperparameters. JSON form `{"a": .., "b": .., "c": .., "d": ..}`;
/// the key `c` is the bound's shape `c_alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PriorJson", into = "PriorJson")]
pub struct PoissonPrior {
    a: f64,
    b: f64,
    c_alpha: f64,
    d: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorJson {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TryFrom<PriorJson> for PoissonPrior {
    type Error = Error;
    fn try_from(j: PriorJson) -> Result<Self> {
        PoissonPrior::new(j.a, j.b, j.c, j.d)
    }
}

impl From<PoissonPrior> for PriorJson {
    fn from(p: PoissonPrior) -> Self {
        PriorJson {
            a: p.a,
            b: p.b,
            c: p.c_alpha,
            d: p.d,
        }
    }
}

/// `sum_y weights[y] * Gamma(shapes[y], rate)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaMixture {
    pub weights: Vec<f64>,
    pub shapes: Vec<f64>,
    pub rate: f64,
}

impl GammaMixture {
    pub fn pdf(&self, alpha: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.shapes)
            .map(|(w, &k)| w * gamma_ln_pdf(k, self.rate, alpha).exp())
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.shapes)
            .map(|(w, k)| w * k)
            .sum::<f64>()
            / self.rate
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn ln_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl PoissonPrior {
    pub fn new(a: f64, b: f64, c_alpha: f64, d: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain("a", a, "must be positive and finite"));
        }
        if !(b > -1.0 && b.is_finite()) {
            return Err(Error::domain("b", b, "must be finite and greater than -1"));
        }
        if !(c_alpha > 0.0 && c_alpha.is_finite()) {
            return Err(Error::domain("c", c_alpha, "must be positive and finite"));
        }
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::domain("d", d, "must be finite and nonnegative"));
        }
        Ok(PoissonPrior { a, b, c_alpha, d })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn a_is_integer(&self) -> bool {
        self.a.fract() == 0.0
    }

    /// Posterior shape and rate of `theta` without the bound.
    fn theta_gamma(&self, x: u64) -> (f64, f64) {
        (self.a + x as f64, 1.0 + self.b)
    }

    /// Rate of every mixture component, `1 + b + d`.
    pub fn mixture_rate(&self) -> f64 {
        1.0 + self.b + self.d
    }

    /// `rho = (1 + b) / (1 + b + d)`.
    pub fn rho(&self) -> f64 {
        (1.0 + self.b) / self.mixture_rate()
    }

    /// Unbounded posterior density times the bound's prior CDF at `theta`
    /// (unnormalized). With `d = 0` the weight is `theta^c / c` up to a
    /// constant, folded into the Gamma shape.
    fn theta_kernel(&self, x: u64, theta: f64) -> f64 {
        let (shape, rate) = self.theta_gamma(x);
        if self.d == 0.0 {
            return gamma_ln_pdf(shape + self.c_alpha, rate, theta).exp();
        }
        gamma_ln_pdf(shape, rate, theta).exp() * gamma_p(self.c_alpha, self.d * theta)
    }

    fn theta_breakpoints(&self, x: u64) -> Vec<f64> {
        let (shape, rate) = self.theta_gamma(x);
        let mean = shape / rate;
        let sd = shape.sqrt() / rate;
        let mut pts = vec![mean, mean - 4.0 * sd, mean + 8.0 * sd];
        if self.d > 0.0 {
            pts.push(self.c_alpha / self.d);
        }
        pts.retain(|p| *p > 0.0);
        pts
    }

    /// Normalizer of [`Self::theta_kernel`]: `E[P(c, d Theta)]` under `Gamma(a + x, 1 + b)`.
    fn theta_normalizer(&self, x: u64) -> f64 {
        if self.d == 0.0 {
            return 1.0;
        }
        integrate_split(
            |t| self.theta_kernel(x, t),
            &self.theta_breakpoints(x),
            0.0,
            f64::INFINITY,
            POSTERIOR_TOL,
        )
        .value
    }

    /// Posterior density of `theta`, normalized by quadrature.
    ///
    /// With `d = 0` it is exactly `Gamma(a + x + c, 1 + b)`; as `d -> inf`
    /// it tends to `Gamma(a + x, 1 + b)`.
    pub fn theta_posterior_pdf(&self, x: u64, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        self.theta_kernel(x, theta) / self.theta_normalizer(x)
    }

    /// Posterior density of `theta` on a set of points, sharing one normalization.
    pub fn theta_posterior_pdf_many(&self, x: u64, thetas: &[f64]) -> Vec<f64> {
        let z = self.theta_normalizer(x);
        thetas
            .iter()
            .map(|&t| {
                if t > 0.0 {
                    self.theta_kernel(x, t) / z
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Closed form for `c = 1`, `d > 0`:
    /// `k theta^(a+x-1) e^(-theta(1+b)) (1 - e^(-d theta))` with
    /// `1/k = Gamma(a+x) ((1+b)^-(a+x) - (1+b+d)^-(a+x))`.
    pub fn theta_posterior_pdf_closed_form(&self, x: u64, theta: f64) -> Result<f64> {
        if self.c_alpha != 1.0 || self.d == 0.0 {
            return Err(Error::Degenerate("closed form needs c = 1 and d > 0"));
        }
        if theta <= 0.0 {
            return Ok(0.0);
        }
        let (s, r) = self.theta_gamma(x);
        let ln_inv_k = ln_gamma(s) - s * r.ln() + (-(s * self.rho().ln()).exp_m1()).ln();
        let ln_body = (s - 1.0) * theta.ln() - theta * r - ln_inv_k;
        Ok(ln_body.exp() * -(-self.d * theta).exp_m1())
    }

    /// Posterior mean of `theta` by quadrature (closed form when `d = 0`).
    pub fn theta_posterior_mean(&self, x: u64) -> f64 {
        let (shape, rate) = self.theta_gamma(x);
        if self.d == 0.0 {
            return (shape + self.c_alpha) / rate;
        }
        let num = integrate_split(
            |t| t * self.theta_kernel(x, t),
            &self.theta_breakpoints(x),
            0.0,
            f64::INFINITY,
            POSTERIOR_TOL,
        )
        .value;
        num / self.theta_normalizer(x)
    }

    /// Closed-form posterior mean of `theta` for `c = 1`, `d > 0`:
    /// `s/(1+b) (1 - rho^(s+1)) / (1 - rho^s)` with `s = a + x`.
    pub fn theta_posterior_mean_closed_form(&self, x: u64) -> Result<f64> {
        if self.c_alpha != 1.0 || self.d == 0.0 {
            return Err(Error::Degenerate("closed form needs c = 1 and d > 0"));
        }
        let (s, r) = self.theta_gamma(x);
        let lr = self.rho().ln();
        Ok(s / r * ((s + 1.0) * lr).exp_m1() / (s * lr).exp_m1())
    }

    /// `ln` of the unnormalized bound posterior
    /// `alpha^(c-1) e^(-d alpha) Q(x + a, (1 + b) alpha)`.
    fn alpha_ln_kernel(&self, x: u64, alpha: f64) -> f64 {
        if alpha <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let s = self.a + x as f64;
        (self.c_alpha - 1.0) * alpha.ln() - self.d * alpha + gamma_q(s, (1.0 + self.b) * alpha).ln()
    }

    fn alpha_scale(&self, x: u64) -> (f64, Vec<f64>) {
        let s = self.a + x as f64;
        let guess = (self.c_alpha + 0.5 * s) / self.mixture_rate();
        let reference = (-20..=20)
            .map(|k| self.alpha_ln_kernel(x, guess * 2f64.powi(k)))
            .fold(f64::NEG_INFINITY, f64::max);
        let pts = vec![
            guess,
            self.c_alpha / self.mixture_rate(),
            s / (1.0 + self.b),
        ];
        (reference, pts)
    }

    /// Normalized bound posterior from its defining integral, by quadrature.
    /// Valid for any `a > 0`.
    pub fn alpha_posterior_pdf(&self, x: u64, alpha: f64) -> f64 {
        self.alpha_posterior_pdf_many(x, &[alpha])[0]
    }

    /// [`Self::alpha_posterior_pdf`] on many points with one normalization.
    pub fn alpha_posterior_pdf_many(&self, x: u64, alphas: &[f64]) -> Vec<f64> {
        let (reference, pts) = self.alpha_scale(x);
        let kernel = |al: f64| (self.alpha_ln_kernel(x, al) - reference).exp();
        let z = integrate_split(kernel, &pts, 0.0, f64::INFINITY, POSTERIOR_TOL).value;
        alphas.iter().map(|&al| kernel(al) / z).collect()
    }

    /// Posterior mean of the bound by quadrature of the defining integral.
    pub fn alpha_mean_quadrature(&self, x: u64) -> f64 {
        let (reference, pts) = self.alpha_scale(x);
        let kernel = |al: f64| (self.alpha_ln_kernel(x, al) - reference).exp();
        let z = integrate_split(kernel, &pts, 0.0, f64::INFINITY, POSTERIOR_TOL).value;
        let m = integrate_split(
            |al| al * kernel(al),
            &pts,
            0.0,
            f64::INFINITY,
            POSTERIOR_TOL,
        )
        .value;
        m / z
    }

    /// Finite Gamma-mixture form of the bound posterior (integer `a` only):
    /// components `Gamma(c + y, 1 + b + d)`, `y = 0..x+a-1`, weights
    /// `p_y ∝ rho^y Gamma(c + y) / y!`, computed in log space.
    pub fn alpha_posterior_mixture(&self, x: u64) -> Result<GammaMixture> {
        if !self.a_is_integer() {
            return Err(Error::domain(
                "a",
                self.a,
                "the mixture form needs a positive integer",
            ));
        }
        let n = x + self.a as u64;
        let ln_rho = self.rho().ln();
        let ln_w: Vec<f64> = (0..n)
            .map(|y| {
                let y = y as f64;
                y * ln_rho + ln_gamma(self.c_alpha + y) - ln_gamma(y + 1.0)
            })
            .collect();
        let total = ln_sum_exp(&ln_w);
        Ok(GammaMixture {
            weights: ln_w.iter().map(|w| (w - total).exp()).collect(),
            shapes: (0..n).map(|y| self.c_alpha + y as f64).collect(),
            rate: self.mixture_rate(),
        })
    }

    /// Posterior mean of the bound: the mixture mean
    /// `c/(1+b+d) + E(Y | Y <= x+a-1)/(1+b+d)` for integer `a`, quadrature otherwise.
    pub fn alpha_bayes_estimate(&self, x: u64) -> f64 {
        match self.alpha_posterior_mixture(x) {
            Ok(m) => m.mean(),
            Err(_) => self.alpha_mean_quadrature(x),
        }
    }

    /// `(2c + x + a - 1) / (2 (1 + b + d))`: the bound's posterior mean when
    /// the mixture weights are uniform (`c = 1`, `d = 0`, integer `a`).
    /// The literal `d` of the prior is used in the denominator.
    pub fn alpha_flat_closed_form(&self, x: u64) -> Option<f64> {
        (self.c_alpha == 1.0 && self.d == 0.0 && self.a_is_integer())
            .then(|| (2.0 * self.c_alpha + x as f64 + self.a - 1.0) / (2.0 * self.mixture_rate()))
    }
}
