//! Frequentist squared-error risk of normal-mean estimators, and the
//! machinery that checks dominance of `delta_c` over the unbiased estimator
//! on `theta >= 0`.
//!
//! For `X ~ N(theta, 1)` Stein's identity turns the risk difference into
//!
//! ```text
//! Delta_c(theta) = R(theta, delta_c) - R(theta, X) = -c^2 E_theta[T(c X)],
//! T(s) = R(s) (R(s) + 2 s)
//! ```
//!
//! `T` has a single sign change, so `Delta_c` changes sign at most once, from
//! `+` to `-`. The root `theta_0(c)` is the dominance cutoff: `delta_c` beats
//! `X` for every `theta >= theta_0(c)`, and `theta_0(c) <= 0` makes `delta_c`
//! minimax on `[0, inf)`.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::normal_model::Estimator;
use crate::quadrature::{integrate_split, normal_expectation, Tolerance};
use crate::special_fn::{std_normal_pdf, t_fn};

/// Minimum Monte Carlo sample size.
pub const MIN_MC_DRAWS: usize = 1000;

/// Range scanned for the sign change of `Delta_c`.
pub const CUTOFF_SCAN: (f64, f64) = (-20.0, 20.0);
const CUTOFF_SCAN_STEP: f64 = 0.05;
const CUTOFF_TOL: f64 = 1e-6;

const KINK_TOL: Tolerance = Tolerance::new(1e-13, 1e-12);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMethod {
    Quadrature,
    MonteCarlo,
}

impl RiskMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RiskMethod::Quadrature => "quadrature",
            RiskMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// How a risk curve is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveMethod {
    Quadrature,
    /// `n` draws per grid point; streams derived from `seed`.
    MonteCarlo {
        n: usize,
        seed: u64,
    },
}

/// Risk of one estimator along a `theta` grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskCurve {
    pub estimator_id: String,
    pub sigma2: f64,
    pub theta_grid: Vec<f64>,
    pub risk: Vec<f64>,
    pub method: RiskMethod,
    pub mc_std_err: Option<Vec<f64>>,
}

/// Monte Carlo risk estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McRisk {
    pub estimate: f64,
    pub std_err: f64,
}

/// Outcome of [`minimax_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    pub c: f64,
    pub sigma2: f64,
    /// Root of `Delta_c` (scaled by `sigma`); `None` when `c = 0`.
    pub cutoff_theta0: Option<f64>,
    pub sup_risk_on_nonneg: f64,
    pub argsup_theta: f64,
    /// Risk at the right end of the grid.
    pub tail_risk: f64,
    /// `|tail_risk - sigma2| <= 1e-3 sigma2`.
    pub tail_converged: bool,
    /// `sup_risk_on_nonneg <= sigma2 (1 + 1e-6)`.
    pub dominates_on_nonneg: bool,
    /// `c = 0`: the rule is `X` itself and the risk is identically `sigma2`.
    pub boundary_case: bool,
}

/// An interval of the scan grid on which `Delta_c` changes sign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignChange {
    pub lo: f64,
    pub hi: f64,
    /// `true` when `Delta_c` is positive at `lo` and negative at `hi`.
    pub plus_to_minus: bool,
}

/// Equally spaced grid `from, from + step, ..., <= to`.
pub fn theta_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !from.is_finite() {
        return Err(Error::domain("from", from, "must be finite"));
    }
    if !(to.is_finite() && to >= from) {
        return Err(Error::domain("to", to, "must be finite and >= from"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::domain("step", step, "must be positive"));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| from + i as f64 * step).collect())
}

fn check_sigma2(sigma2: f64) -> Result<f64> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(sigma2.sqrt())
    } else {
        Err(Error::domain(
            "sigma2",
            sigma2,
            "must be positive and finite",
        ))
    }
}

fn check_c(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::domain("c", c, "must lie in [0, 1]"))
    }
}

/// Estimators whose rule commutes with rescaling, `delta(sigma x; sigma) = sigma delta(x; 1)`.
fn is_scale_equivariant(est: &Estimator) -> bool {
    !matches!(est, Estimator::HierBayes(_))
}

/// `E_theta[(delta(X) - theta)^2]` for `X = theta + sigma Z` at unit sigma;
/// smooth rules by Gauss–Hermite, rules with kinks by adaptive Gauss–Kronrod
/// split at the kinks.
fn unit_risk(est: &Estimator, theta: f64, sigma: f64) -> f64 {
    let loss = |z: f64| {
        let d = est.evaluate(theta + sigma * z, sigma) - theta;
        d * d
    };
    if est.is_smooth() {
        normal_expectation(loss).0
    } else {
        let cuts: Vec<f64> = est
            .kinks(sigma)
            .into_iter()
            .map(|k| (k - theta) / sigma)
            .collect();
        integrate_split(
            |z| std_normal_pdf(z) * loss(z),
            &cuts,
            f64::NEG_INFINITY,
            f64::INFINITY,
            KINK_TOL,
        )
        .value
    }
}

/// Squared-error risk of `est` at `theta` when `X ~ N(theta, sigma2)`.
///
/// Scale-equivariant rules are integrated at unit variance,
/// `R(theta; sigma2) = sigma2 R(theta / sigma; 1)`.
pub fn risk_quadrature(est: &Estimator, theta: f64, sigma2: f64) -> Result<f64> {
    let sigma = check_sigma2(sigma2)?;
    if !theta.is_finite() {
        return Err(Error::domain("theta", theta, "must be finite"));
    }
    Ok(match est {
        Estimator::Unbiased => sigma2,
        e if is_scale_equivariant(e) => sigma2 * unit_risk(e, theta / sigma, 1.0),
        e => {
            let loss = |z: f64| {
                let d = e.evaluate(theta + sigma * z, sigma) - theta;
                d * d
            };
            normal_expectation(loss).0
        }
    })
}

fn mc_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn mc_risk_with(
    est: &Estimator,
    theta: f64,
    sigma: f64,
    n: usize,
    rng: &mut ChaCha20Rng,
) -> McRisk {
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let z: f64 = StandardNormal.sample(rng);
        let d = est.evaluate(theta + sigma * z, sigma) - theta;
        let loss = d * d;
        let delta = loss - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (loss - mean);
    }
    let var = m2 / (n - 1) as f64;
    McRisk {
        estimate: mean,
        std_err: (var / n as f64).sqrt(),
    }
}

/// Monte Carlo risk from `n` draws; deterministic in `seed`.
pub fn risk_monte_carlo(
    est: &Estimator,
    theta: f64,
    sigma2: f64,
    n: usize,
    seed: u64,
) -> Result<McRisk> {
    risk_monte_carlo_stream(est, theta, sigma2, n, seed, 0)
}

/// [`risk_monte_carlo`] on an explicit substream of the master seed, so
/// grid evaluations are reproducible in any order and on any thread.
pub fn risk_monte_carlo_stream(
    est: &Estimator,
    theta: f64,
    sigma2: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<McRisk> {
    let sigma = check_sigma2(sigma2)?;
    if n < MIN_MC_DRAWS {
        return Err(Error::domain("n", n as f64, "needs at least 1000 draws"));
    }
    Ok(mc_risk_with(
        est,
        theta,
        sigma,
        n,
        &mut mc_rng(seed, stream),
    ))
}

/// `Delta_c(theta) = -c^2 E_theta[T(c X)]` at unit variance, by Stein's identity.
pub fn risk_difference_stein(c: f64, theta: f64) -> Result<f64> {
    check_c(c)?;
    if c == 0.0 {
        return Ok(0.0);
    }
    let (e, _) = normal_expectation(|z| t_fn(c * (theta + z)));
    Ok(-c * c * e)
}

/// `R(theta, delta_c) - R(theta, X)` at unit variance from the two risks.
pub fn risk_difference_direct(c: f64, theta: f64) -> Result<f64> {
    check_c(c)?;
    Ok(risk_quadrature(&Estimator::DeltaC(c), theta, 1.0)? - 1.0)
}

/// Brackets where `Delta_c` changes sign along `grid` (zeros are skipped).
/// A single `+ -> -` bracket is the expected outcome.
pub fn sign_change_scan(c: f64, grid: &[f64]) -> Result<Vec<SignChange>> {
    check_c(c)?;
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Degenerate("scan grid must be strictly increasing"));
    }
    let values = grid
        .par_iter()
        .map(|&t| risk_difference_stein(c, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(brackets(grid, &values))
}

fn brackets(grid: &[f64], values: &[f64]) -> Vec<SignChange> {
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&t, &v) in grid.iter().zip(values) {
        if v == 0.0 {
            continue;
        }
        if let Some((lt, lv)) = last {
            if lv.signum() != v.signum() {
                out.push(SignChange {
                    lo: lt,
                    hi: t,
                    plus_to_minus: lv > 0.0,
                });
            }
        }
        last = Some((t, v));
    }
    out
}

/// Root `theta_0(c)` of `Delta_c` (unit variance), bisected to `1e-6`.
pub fn dominance_cutoff(c: f64) -> Result<f64> {
    check_c(c)?;
    if c == 0.0 {
        return Err(Error::domain("c", c, "must be positive"));
    }
    let (lo, hi) = CUTOFF_SCAN;
    let grid = theta_grid(lo, hi, CUTOFF_SCAN_STEP)?;
    let changes = sign_change_scan(c, &grid)?;
    let bracket = changes
        .iter()
        .find(|b| b.plus_to_minus)
        .ok_or(Error::NotBracketed { lo, hi })?;
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    while b - a > CUTOFF_TOL {
        let mid = 0.5 * (a + b);
        let v = risk_difference_stein(c, mid)?;
        if v > 0.0 {
            a = mid;
        } else if v < 0.0 {
            b = mid;
        } else {
            return Ok(mid);
        }
    }
    Ok(0.5 * (a + b))
}

/// Check `R(theta, delta_c) <= sigma2 (1 + 1e-6)` on `[0, theta_max]`.
pub fn minimax_check(c: f64, sigma2: f64, theta_max: f64, step: f64) -> Result<DominanceReport> {
    check_c(c)?;
    let sigma = check_sigma2(sigma2)?;
    if !(theta_max >= 10.0 && theta_max.is_finite()) {
        return Err(Error::domain("theta_max", theta_max, "must be at least 10"));
    }
    if !(step > 0.0 && step <= 0.05) {
        return Err(Error::domain("step", step, "must lie in (0, 0.05]"));
    }
    let est = Estimator::DeltaC(c);
    let grid = theta_grid(0.0, theta_max, step)?;
    let risks = grid
        .par_iter()
        .map(|&t| risk_quadrature(&est, t, sigma2))
        .collect::<Result<Vec<f64>>>()?;
    let (argsup_theta, sup) =
        grid.iter()
            .zip(&risks)
            .fold((grid[0], f64::NEG_INFINITY), |acc, (&t, &r)| {
                if r > acc.1 {
                    (t, r)
                } else {
                    acc
                }
            });
    let tail_risk = *risks.last().expect("grid is nonempty");
    let cutoff_theta0 = if c > 0.0 {
        Some(sigma * dominance_cutoff(c)?)
    } else {
        None
    };
    Ok(DominanceReport {
        c,
        sigma2,
        cutoff_theta0,
        sup_risk_on_nonneg: sup,
        argsup_theta,
        tail_risk,
        tail_converged: (tail_risk - sigma2).abs() <= 1e-3 * sigma2,
        dominates_on_nonneg: sup <= sigma2 * (1.0 + 1e-6),
        boundary_case: c == 0.0,
    })
}

/// Risk curves over `theta_grid(theta_min, theta_max, step)`, one per
/// estimator. Grid points are evaluated in parallel; the output order is the
/// grid order and Monte Carlo streams depend only on (estimator, point).
pub fn risk_curve(
    estimators: &[Estimator],
    sigma2: f64,
    theta_min: f64,
    theta_max: f64,
    step: f64,
    method: CurveMethod,
) -> Result<Vec<RiskCurve>> {
    check_sigma2(sigma2)?;
    let grid = theta_grid(theta_min, theta_max, step)?;
    estimators
        .iter()
        .enumerate()
        .map(|(i, est)| {
            let (risk, mc_std_err, method) = match method {
                CurveMethod::Quadrature => {
                    let risk = grid
                        .par_iter()
                        .map(|&t| risk_quadrature(est, t, sigma2))
                        .collect::<Result<Vec<f64>>>()?;
                    (risk, None, RiskMethod::Quadrature)
                }
                CurveMethod::MonteCarlo { n, seed } => {
                    let runs = grid
                        .par_iter()
                        .enumerate()
                        .map(|(j, &t)| {
                            let stream = ((i as u64) << 32) | j as u64;
                            risk_monte_carlo_stream(est, t, sigma2, n, seed, stream)
                        })
                        .collect::<Result<Vec<McRisk>>>()?;
                    (
                        runs.iter().map(|r| r.estimate).collect(),
                        Some(runs.iter().map(|r| r.std_err).collect()),
                        RiskMethod::MonteCarlo,
                    )
                }
            };
            Ok(RiskCurve {
                estimator_id: est.id(),
                sigma2,
                theta_grid: grid.clone(),
                risk,
                method,
                mc_std_err,
            })
        })
        .collect()
}

/// 17 significant digits; parses back to the identical f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV rows `estimator,theta,risk,method,std_err` with a header line.
pub fn write_csv<W: Write>(curves: &[RiskCurve], mut out: W) -> io::Result<()> {
    writeln!(out, "estimator,theta,risk,method,std_err")?;
    for curve in curves {
        for (j, (&t, &r)) in curve.theta_grid.iter().zip(&curve.risk).enumerate() {
            let se = curve
                .mc_std_err
                .as_ref()
                .map(|s| fmt_f64(s[j]))
                .unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                curve.estimator_id,
                fmt_f64(t),
                fmt_f64(r),
                curve.method.as_str(),
                se
            )?;
        }
    }
    Ok(())
}
