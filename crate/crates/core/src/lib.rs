//! Hierarchical-Bayes inference for a parameter bounded below by an uncertain
//! bound: `theta | alpha` lives on `[alpha, inf)` and `alpha` itself has a
//! prior.
//!
//! * [`special_fn`]: normal pdf/cdf, inverse Mills ratio, risk kernel, incomplete Gamma.
//! * [`esn`]: the extended skew-normal family housing every normal-model posterior.
//! * [`normal_model`]: normal observations, posterior laws of `theta` and `alpha`,
//!   Bayes estimators and the `delta_c` family.
//! * [`poisson_model`]: Poisson observations with Gamma-type priors and the
//!   finite Gamma-mixture posterior of the bound.
//! * [`risk_engine`]: frequentist squared-error risk, the risk difference
//!   against the unbiased estimator, dominance cutoffs and minimaxity checks.

pub mod error;
pub mod esn;
pub mod normal_model;
pub mod poisson_model;
pub mod quadrature;
pub mod risk_engine;
pub mod special_fn;

pub use error::{Error, Result};
pub use esn::{ExtendedSkewNormal, LocScaleEsn};
pub use normal_model::{Estimator, NormalConfig, PosteriorParams, PriorVariance, TruncatedNormal};
pub use poisson_model::{GammaMixture, PoissonPrior};
pub use risk_engine::{DominanceReport, RiskCurve, RiskMethod};
