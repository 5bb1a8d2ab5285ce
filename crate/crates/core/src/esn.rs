//! The extended skew-normal family
//!
//! ```text
//! f(z) = phi(z) Phi(psi1 + psi2 z) / Phi(gamma0),
//! gamma0 = psi1 / sqrt(1 + psi2^2),  gamma1 = psi2 / sqrt(1 + psi2^2)
//! ```
//!
//! Every posterior law of the normal model is an affine image of a member of
//! this family. `psi1 = 0` is Azzalini's skew-normal `2 phi(z) Phi(psi2 z)`,
//! `psi2 = 0` is the standard normal. The public type keeps `psi2 >= 0`; the
//! mirror image `f_{psi1,-psi2}(z) = f_{psi1,psi2}(-z)` is expressed through
//! [`LocScaleEsn::reflected`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_split, Tolerance};
use crate::special_fn::{
    inverse_mills, ln_std_normal_cdf, ln_std_normal_pdf, mills_excess, std_normal_cdf,
};

/// Rejection sampling refuses to run below this acceptance probability.
pub const MIN_ACCEPTANCE: f64 = 1e-12;

const CDF_TOL: Tolerance = Tolerance::new(1e-14, 1e-13);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEsn")]
pub struct ExtendedSkewNormal {
    psi1: f64,
    psi2: f64,
}

#[derive(Deserialize)]
struct RawEsn {
    psi1: f64,
    psi2: f64,
}

impl TryFrom<RawEsn> for ExtendedSkewNormal {
    type Error = Error;
    fn try_from(raw: RawEsn) -> Result<Self> {
        ExtendedSkewNormal::new(raw.psi1, raw.psi2)
    }
}

impl ExtendedSkewNormal {
    pub fn new(psi1: f64, psi2: f64) -> Result<Self> {
        if !psi1.is_finite() {
            return Err(Error::domain("psi1", psi1, "must be finite"));
        }
        if !(psi2 >= 0.0 && psi2.is_finite()) {
            return Err(Error::domain(
                "psi2",
                psi2,
                "must be finite and nonnegative",
            ));
        }
        Ok(ExtendedSkewNormal { psi1, psi2 })
    }

    /// The standard normal, `psi1 = psi2 = 0`.
    pub fn standard_normal() -> Self {
        ExtendedSkewNormal {
            psi1: 0.0,
            psi2: 0.0,
        }
    }

    pub fn psi1(&self) -> f64 {
        self.psi1
    }

    pub fn psi2(&self) -> f64 {
        self.psi2
    }

    pub fn gamma0(&self) -> f64 {
        self.psi1 / self.psi2.hypot(1.0)
    }

    pub fn gamma1(&self) -> f64 {
        self.psi2 / self.psi2.hypot(1.0)
    }

    /// `Phi(gamma0)`: the normalizing constant, which is also the acceptance
    /// probability of the rejection sampler.
    pub fn acceptance_probability(&self) -> f64 {
        std_normal_cdf(self.gamma0())
    }

    pub fn ln_pdf(&self, z: f64) -> f64 {
        ln_std_normal_pdf(z) + ln_std_normal_cdf(self.psi1 + self.psi2 * z)
            - ln_std_normal_cdf(self.gamma0())
    }

    pub fn pdf(&self, z: f64) -> f64 {
        if z.is_infinite() {
            return 0.0;
        }
        self.ln_pdf(z).exp()
    }

    /// `E[exp(tZ)] = exp(t^2/2) Phi(gamma1 t + gamma0) / Phi(gamma0)`.
    pub fn mgf(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        let g0 = self.gamma0();
        (0.5 * t * t + ln_std_normal_cdf(self.gamma1() * t + g0) - ln_std_normal_cdf(g0)).exp()
    }

    /// `E[Z] = gamma1 R(gamma0)`.
    pub fn mean(&self) -> f64 {
        self.gamma1() * inverse_mills(self.gamma0())
    }

    /// `Var[Z] = 1 - gamma1^2 R(gamma0) (gamma0 + R(gamma0))`.
    pub fn variance(&self) -> f64 {
        let g0 = self.gamma0();
        let g1 = self.gamma1();
        1.0 - g1 * g1 * inverse_mills(g0) * mills_excess(g0)
    }

    /// Points where the density changes character: the mean and, when
    /// skewed, the hinge `psi1 + psi2 z = 0` of the Phi factor.
    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.mean()];
        if self.psi2 > 0.0 {
            pts.push(-self.psi1 / self.psi2);
        }
        pts
    }

    /// `P(Z <= z)` by adaptive quadrature of the density.
    pub fn cdf(&self, z: f64) -> f64 {
        if z.is_nan() {
            return z;
        }
        if z == f64::INFINITY {
            return 1.0;
        }
        let q = integrate_split(
            |u| self.pdf(u),
            &self.breakpoints(),
            f64::NEG_INFINITY,
            z,
            CDF_TOL,
        );
        q.value.clamp(0.0, 1.0)
    }

    /// `P(Z > z)`, integrated over the upper tail directly.
    pub fn sf(&self, z: f64) -> f64 {
        if z.is_nan() {
            return z;
        }
        if z == f64::NEG_INFINITY {
            return 1.0;
        }
        let q = integrate_split(
            |u| self.pdf(u),
            &self.breakpoints(),
            z,
            f64::INFINITY,
            CDF_TOL,
        );
        q.value.clamp(0.0, 1.0)
    }

    /// CDF at many nondecreasing points, accumulating the density between
    /// consecutive points rather than integrating each from `-inf`.
    pub fn cdf_sorted(&self, zs: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(zs.len());
        let Some(&first) = zs.first() else {
            return out;
        };
        let mut acc = self.cdf(first);
        out.push(acc);
        for w in zs.windows(2) {
            debug_assert!(w[0] <= w[1], "cdf_sorted expects sorted input");
            acc += integrate(|u| self.pdf(u), w[0], w[1], CDF_TOL).value;
            out.push(acc.min(1.0));
        }
        out
    }

    /// `n` exact draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Ok(self.sample_with(&mut rng, n)?.values)
    }

    /// Rejection sampler from the conditioning representation: draw
    /// independent standard normals `(u1, u2)` and keep `u1` whenever
    /// `u2 <= psi1 + psi2 u1`. The acceptance probability is `Phi(gamma0)`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<SampleRun> {
        let acceptance = self.acceptance_probability();
        if acceptance < MIN_ACCEPTANCE {
            return Err(Error::DegenerateTail {
                acceptance,
                floor: MIN_ACCEPTANCE,
            });
        }
        let mut values = Vec::with_capacity(n);
        let mut proposals = 0u64;
        while values.len() < n {
            let u1: f64 = rng.sample(StandardNormal);
            let u2: f64 = rng.sample(StandardNormal);
            proposals += 1;
            if u2 <= self.psi1 + self.psi2 * u1 {
                values.push(u1);
            }
        }
        Ok(SampleRun { values, proposals })
    }
}

/// Accepted draws together with the number of proposals spent on them.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRun {
    pub values: Vec<f64>,
    pub proposals: u64,
}

/// An affine image `location + scale * Z` (or `location - scale * Z` when
/// `reflected`) of a standard ESN variable `Z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocScaleEsn {
    #[serde(flatten)]
    pub standard: ExtendedSkewNormal,
    pub location: f64,
    pub scale: f64,
    pub reflected: bool,
}

impl LocScaleEsn {
    pub fn new(standard: ExtendedSkewNormal, location: f64, scale: f64) -> Result<Self> {
        Self::with_orientation(standard, location, scale, false)
    }

    pub fn with_orientation(
        standard: ExtendedSkewNormal,
        location: f64,
        scale: f64,
        reflected: bool,
    ) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain("scale", scale, "must be positive and finite"));
        }
        if !location.is_finite() {
            return Err(Error::domain("location", location, "must be finite"));
        }
        Ok(LocScaleEsn {
            standard,
            location,
            scale,
            reflected,
        })
    }

    fn sign(&self) -> f64 {
        if self.reflected {
            -1.0
        } else {
            1.0
        }
    }

    /// Standardized coordinate of `v`.
    pub fn standardize(&self, v: f64) -> f64 {
        self.sign() * (v - self.location) / self.scale
    }

    pub fn pdf(&self, v: f64) -> f64 {
        self.standard.pdf(self.standardize(v)) / self.scale
    }

    pub fn cdf(&self, v: f64) -> f64 {
        let z = self.standardize(v);
        if self.reflected {
            self.standard.sf(z)
        } else {
            self.standard.cdf(z)
        }
    }

    pub fn mean(&self) -> f64 {
        self.location + self.sign() * self.scale * self.standard.mean()
    }

    pub fn variance(&self) -> f64 {
        self.scale * self.scale * self.standard.variance()
    }

    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let s = self.sign() * self.scale;
        Ok(self
            .standard
            .sample(n, seed)?
            .into_iter()
            .map(|z| self.location + s * z)
            .collect())
    }
}
