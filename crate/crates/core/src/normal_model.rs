//! Normal model with an uncertain lower bound:
//!
//! ```text
//! X | theta ~ N(theta, sigma2)
//! theta | alpha ~ N(mu, tau2) truncated to [alpha, inf)   (or flat on [alpha, inf))
//! alpha ~ N(alpha_mu, alpha_sigma2)                       (alpha_sigma2 = 0: fixed bound)
//! ```
//!
//! Without the bound the posterior is `N(mu_hat(x), tau_prime2)`. With it,
//! `(theta - mu_hat) / tau'` follows the extended skew-normal law with
//! `psi1 = (mu_hat - alpha_mu) / sigma_alpha` and `psi2 = tau' / sigma_alpha`,
//! so every Bayes estimate is a Mills-ratio correction of `mu_hat`.
//!
//! A sample of `n` observations with known variance reduces to this model by
//! sufficiency: use `x = mean` and `sigma2 / n`.
//!
//! The formulas for general `alpha_mu` follow from the same computation as
//! for `alpha_mu = 0` after translating the bound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::esn::{ExtendedSkewNormal, LocScaleEsn};
use crate::special_fn::{inverse_mills, mills_excess, std_normal_cdf, std_normal_pdf};

/// Prior variance of `g1`: a finite `tau2`, or the flat prior `g1 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PriorVariance {
    Finite(f64),
    Flat,
}

impl Serialize for PriorVariance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PriorVariance::Finite(v) => s.serialize_f64(*v),
            PriorVariance::Flat => s.serialize_str("flat"),
        }
    }
}

impl<'de> Deserialize<'de> for PriorVariance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(PriorVariance::Finite(v)),
            Raw::Str(s) if s == "flat" => Ok(PriorVariance::Flat),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "tau2 must be a number or \"flat\", got \"{s}\""
            ))),
        }
    }
}

/// Hyperparameters of the normal model.
///
/// JSON form: `{"sigma2": .., "prior": {"mu": .., "tau2": ..|"flat"}, "alpha": {"mu": .., "sigma2": ..}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigJson", into = "ConfigJson")]
pub struct NormalConfig {
    sigma2: f64,
    prior_mu: f64,
    prior_tau2: PriorVariance,
    alpha_mu: f64,
    alpha_sigma2: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigJson {
    sigma2: f64,
    prior: PriorJson,
    alpha: AlphaJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorJson {
    #[serde(default)]
    mu: f64,
    tau2: PriorVariance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaJson {
    #[serde(default)]
    mu: f64,
    sigma2: f64,
}

impl TryFrom<ConfigJson> for NormalConfig {
    type Error = Error;
    fn try_from(j: ConfigJson) -> Result<Self> {
        NormalConfig::new(
            j.sigma2,
            j.prior.mu,
            j.prior.tau2,
            j.alpha.mu,
            j.alpha.sigma2,
        )
    }
}

impl From<NormalConfig> for ConfigJson {
    fn from(c: NormalConfig) -> Self {
        ConfigJson {
            sigma2: c.sigma2,
            prior: PriorJson {
                mu: c.prior_mu,
                tau2: c.prior_tau2,
            },
            alpha: AlphaJson {
                mu: c.alpha_mu,
                sigma2: c.alpha_sigma2,
            },
        }
    }
}

/// Conjugate update without the bound: `N(mu_hat, tau_prime2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PosteriorParams {
    pub mu_hat: f64,
    pub tau_prime2: f64,
}

impl PosteriorParams {
    pub fn tau_prime(&self) -> f64 {
        self.tau_prime2.sqrt()
    }
}

/// `N(mean, sd^2)` truncated to `[lower, inf)`; the `theta` posterior when
/// the bound is known exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncatedNormal {
    pub mean_untruncated: f64,
    pub sd: f64,
    pub lower: f64,
}

impl TruncatedNormal {
    fn standardized_gap(&self) -> f64 {
        (self.mean_untruncated - self.lower) / self.sd
    }

    /// `mu + sd R((mu - lower) / sd)`.
    pub fn mean(&self) -> f64 {
        self.mean_untruncated + self.sd * inverse_mills(self.standardized_gap())
    }

    pub fn variance(&self) -> f64 {
        let g = self.standardized_gap();
        self.sd * self.sd * (1.0 - inverse_mills(g) * mills_excess(g))
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        if theta < self.lower {
            return 0.0;
        }
        std_normal_pdf((theta - self.mean_untruncated) / self.sd)
            / (self.sd * std_normal_cdf(self.standardized_gap()))
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, v, "must be positive and finite"))
    }
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, v, "must be finite"))
    }
}

impl NormalConfig {
    pub fn new(
        sigma2: f64,
        prior_mu: f64,
        prior_tau2: PriorVariance,
        alpha_mu: f64,
        alpha_sigma2: f64,
    ) -> Result<Self> {
        check_positive("sigma2", sigma2)?;
        check_finite("prior_mu", prior_mu)?;
        if let PriorVariance::Finite(t) = prior_tau2 {
            check_positive("prior_tau2", t)?;
        }
        check_finite("alpha_mu", alpha_mu)?;
        if !(alpha_sigma2 >= 0.0 && alpha_sigma2.is_finite()) {
            return Err(Error::domain(
                "alpha_sigma2",
                alpha_sigma2,
                "must be finite and nonnegative",
            ));
        }
        Ok(NormalConfig {
            sigma2,
            prior_mu,
            prior_tau2,
            alpha_mu,
            alpha_sigma2,
        })
    }

    /// Flat `g1` on `[alpha, inf)`.
    pub fn flat(sigma2: f64, alpha_mu: f64, alpha_sigma2: f64) -> Result<Self> {
        Self::new(sigma2, 0.0, PriorVariance::Flat, alpha_mu, alpha_sigma2)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn prior_mu(&self) -> f64 {
        self.prior_mu
    }

    pub fn prior_tau2(&self) -> PriorVariance {
        self.prior_tau2
    }

    pub fn alpha_mu(&self) -> f64 {
        self.alpha_mu
    }

    pub fn alpha_sigma2(&self) -> f64 {
        self.alpha_sigma2
    }

    pub fn is_flat(&self) -> bool {
        self.prior_tau2 == PriorVariance::Flat
    }

    /// `mu_hat = (tau2 x + sigma2 mu) / (tau2 + sigma2)`,
    /// `tau_prime2 = sigma2 tau2 / (tau2 + sigma2)`; `(x, sigma2)` when flat.
    pub fn posterior_update(&self, x: f64) -> PosteriorParams {
        match self.prior_tau2 {
            PriorVariance::Flat => PosteriorParams {
                mu_hat: x,
                tau_prime2: self.sigma2,
            },
            PriorVariance::Finite(tau2) => {
                let total = tau2 + self.sigma2;
                PosteriorParams {
                    mu_hat: (tau2 * x + self.sigma2 * self.prior_mu) / total,
                    tau_prime2: self.sigma2 * tau2 / total,
                }
            }
        }
    }

    /// Posterior of `theta` as `mu_hat + tau' Z`, `Z ~ ESN(psi1, psi2)`.
    pub fn theta_posterior(&self, x: f64) -> Result<LocScaleEsn> {
        if self.alpha_sigma2 == 0.0 {
            return Err(Error::Degenerate(
                "alpha_sigma2 = 0: the theta posterior is a truncated normal",
            ));
        }
        let p = self.posterior_update(x);
        let sa = self.alpha_sigma2.sqrt();
        let tp = p.tau_prime();
        let standard = ExtendedSkewNormal::new((p.mu_hat - self.alpha_mu) / sa, tp / sa)?;
        LocScaleEsn::new(standard, p.mu_hat, tp)
    }

    /// Posterior of `theta` when the bound is fixed at `alpha_mu`.
    pub fn theta_posterior_truncated(&self, x: f64) -> Result<TruncatedNormal> {
        if self.alpha_sigma2 != 0.0 {
            return Err(Error::Degenerate(
                "alpha_sigma2 > 0: the theta posterior is extended skew-normal",
            ));
        }
        let p = self.posterior_update(x);
        Ok(TruncatedNormal {
            mean_untruncated: p.mu_hat,
            sd: p.tau_prime(),
            lower: self.alpha_mu,
        })
    }

    /// `E(theta | x) = mu_hat + tau'^2 / s R((mu_hat - alpha_mu) / s)`,
    /// `s = sqrt(tau'^2 + sigma_alpha^2)`. Covers the fixed bound and the
    /// flat prior with the same expression.
    pub fn theta_bayes_estimate(&self, x: f64) -> f64 {
        let p = self.posterior_update(x);
        let s = (p.tau_prime2 + self.alpha_sigma2).sqrt();
        p.mu_hat + p.tau_prime2 / s * inverse_mills((p.mu_hat - self.alpha_mu) / s)
    }

    /// Posterior of the bound.
    ///
    /// Its density is proportional to `phi((alpha - alpha_mu)/sigma_alpha)
    /// Phi((mu_hat - alpha)/tau')`, so `alpha = alpha_mu - sigma_alpha V`
    /// with `V ~ ESN((mu_hat - alpha_mu)/tau', sigma_alpha/tau')`. The result
    /// is therefore a reflected location-scale ESN.
    pub fn alpha_posterior(&self, x: f64) -> Result<LocScaleEsn> {
        if self.alpha_sigma2 == 0.0 {
            return Err(Error::Degenerate(
                "alpha_sigma2 = 0: the bound is known exactly",
            ));
        }
        let p = self.posterior_update(x);
        let sa = self.alpha_sigma2.sqrt();
        let tp = p.tau_prime();
        let standard = ExtendedSkewNormal::new((p.mu_hat - self.alpha_mu) / tp, sa / tp)?;
        LocScaleEsn::with_orientation(standard, self.alpha_mu, sa, true)
    }

    /// `E(alpha | x) = alpha_mu - sigma_alpha^2 / s R((mu_hat - alpha_mu) / s)`.
    ///
    /// Never above `alpha_mu`, and close to it once `mu_hat` sits well above
    /// the bound.
    pub fn alpha_bayes_estimate(&self, x: f64) -> f64 {
        if self.alpha_sigma2 == 0.0 {
            return self.alpha_mu;
        }
        let p = self.posterior_update(x);
        let s = (p.tau_prime2 + self.alpha_sigma2).sqrt();
        self.alpha_mu - self.alpha_sigma2 / s * inverse_mills((p.mu_hat - self.alpha_mu) / s)
    }

    /// The `delta_c` coefficient `sigma / sqrt(sigma2 + alpha_sigma2)` for which
    /// `delta_c` coincides with this configuration's Bayes estimator. Only
    /// defined for the flat prior with the bound centred at zero.
    pub fn equivalent_delta_c(&self) -> Option<f64> {
        (self.is_flat() && self.alpha_mu == 0.0)
            .then(|| (self.sigma2 / (self.sigma2 + self.alpha_sigma2)).sqrt())
    }
}

/// A point-estimation rule `x -> delta(x)` for the normal mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Estimator {
    /// `delta_0(x) = x`.
    Unbiased,
    /// `max(0, x)`.
    MlePositive,
    /// `x + sigma R(x / sigma)`, the flat-prior Bayes rule on `[0, inf)`.
    Katz,
    /// `x + c sigma R(c x / sigma)`, `c` in `[0, 1]`.
    DeltaC(f64),
    /// `max(0, delta_c(x))`.
    TruncatedDeltaC(f64),
    /// Posterior mean under a hierarchical configuration; uses the
    /// configuration's own `sigma2`.
    HierBayes(NormalConfig),
}

fn check_c(c: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&c) {
        Ok(c)
    } else {
        Err(Error::domain("c", c, "must lie in [0, 1]"))
    }
}

fn delta_c(c: f64, x: f64, sigma: f64) -> f64 {
    x + c * sigma * inverse_mills(c * x / sigma)
}

impl Estimator {
    pub fn delta_c(c: f64) -> Result<Self> {
        Ok(Estimator::DeltaC(check_c(c)?))
    }

    pub fn truncated_delta_c(c: f64) -> Result<Self> {
        Ok(Estimator::TruncatedDeltaC(check_c(c)?))
    }

    /// Value of the rule at `x` when `X ~ N(theta, sigma^2)`.
    pub fn evaluate(&self, x: f64, sigma: f64) -> f64 {
        match *self {
            Estimator::Unbiased => x,
            Estimator::MlePositive => x.max(0.0),
            Estimator::Katz => delta_c(1.0, x, sigma),
            Estimator::DeltaC(c) => delta_c(c, x, sigma),
            Estimator::TruncatedDeltaC(c) => delta_c(c, x, sigma).max(0.0),
            Estimator::HierBayes(cfg) => cfg.theta_bayes_estimate(x),
        }
    }

    /// Points in `x` where the rule is not differentiable.
    pub fn kinks(&self, sigma: f64) -> Vec<f64> {
        match *self {
            Estimator::MlePositive => vec![0.0],
            Estimator::TruncatedDeltaC(c) => delta_c_root(c, sigma).into_iter().collect(),
            _ => Vec::new(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, Estimator::MlePositive | Estimator::TruncatedDeltaC(_))
    }

    /// Identifier accepted by [`Estimator::parse`].
    pub fn id(&self) -> String {
        match self {
            Estimator::Unbiased => "unbiased".into(),
            Estimator::MlePositive => "mle+".into(),
            Estimator::Katz => "katz".into(),
            Estimator::DeltaC(c) => format!("delta_c:{c}"),
            Estimator::TruncatedDeltaC(c) => format!("delta_c+:{c}"),
            Estimator::HierBayes(_) => "bayes".into(),
        }
    }

    /// Parse an id: `unbiased`, `mle+`, `katz`, `delta_c:<c>`, `delta_c+:<c>`
    /// or `bayes` (which needs a configuration).
    pub fn parse(id: &str, bayes: Option<&NormalConfig>) -> Result<Self> {
        let id = id.trim();
        let coef = |s: &str| -> Result<f64> {
            let c: f64 = s
                .parse()
                .map_err(|_| Error::UnknownEstimator(id.to_string()))?;
            check_c(c)
        };
        match id {
            "unbiased" => Ok(Estimator::Unbiased),
            "mle+" => Ok(Estimator::MlePositive),
            "katz" => Ok(Estimator::Katz),
            "bayes" => bayes
                .map(|cfg| Estimator::HierBayes(*cfg))
                .ok_or_else(|| Error::UnknownEstimator("bayes (no configuration given)".into())),
            _ => {
                if let Some(rest) = id.strip_prefix("delta_c+:") {
                    Ok(Estimator::TruncatedDeltaC(coef(rest)?))
                } else if let Some(rest) = id.strip_prefix("delta_c:") {
                    Ok(Estimator::DeltaC(coef(rest)?))
                } else {
                    Err(Error::UnknownEstimator(id.to_string()))
                }
            }
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Estimator::parse(s, None)
    }
}

/// Root of `delta_c(x) = 0`; `None` for `c = 1` where `x + R(x) > 0`.
fn delta_c_root(c: f64, sigma: f64) -> Option<f64> {
    if c >= 1.0 {
        return None;
    }
    if c == 0.0 {
        return Some(0.0);
    }
    let f = |x: f64| delta_c(c, x, sigma);
    // delta_c(0) > 0 and delta_c(x) ~ (1 - c^2) x far left
    let mut lo = -sigma;
    while f(lo) > 0.0 {
        lo *= 2.0;
        if lo < -1e12 * sigma {
            return None;
        }
    }
    let mut hi = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
