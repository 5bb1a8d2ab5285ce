//! `ubound`: estimates, posterior summaries, ESN sampling and frequentist
//! risk analysis from the command line.
//!
//! Data goes to stdout (JSON for estimates and posteriors, CSV for curves
//! and samples); diagnostics go to stderr. Exit codes: `0` success, `1` a
//! computation that ran but did not succeed (no cutoff bracketed, a violated
//! minimax bound, I/O failure), `2` invalid arguments or configuration.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use uncertain_bound::normal_model::{Estimator, NormalConfig, PriorVariance};
use uncertain_bound::poisson_model::PoissonPrior;
use uncertain_bound::risk_engine::{self, fmt_f64, CurveMethod};
use uncertain_bound::{Error, ExtendedSkewNormal, LocScaleEsn};

/// Captured result of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "ubound",
    version,
    about = "Hierarchical-Bayes estimation under an uncertain lower bound, and risk analysis of the delta_c family"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Posterior means of theta and of the bound under the normal model (JSON).
    #[command(allow_negative_numbers = true)]
    EstimateNormal {
        /// Observation.
        #[arg(long)]
        x: f64,
        #[command(flatten)]
        model: NormalModelArgs,
    },
    /// Posterior means of theta and of the bound under the Poisson model (JSON).
    #[command(allow_negative_numbers = true)]
    EstimatePoisson {
        /// Observed count.
        #[arg(long)]
        x: u64,
        #[command(flatten)]
        model: PoissonModelArgs,
    },
    /// Full posterior law of theta or of the bound (JSON).
    #[command(subcommand)]
    Posterior(PosteriorCommand),
    /// Draw from an extended skew-normal law by rejection (CSV column `value`).
    #[command(allow_negative_numbers = true)]
    Sample(SampleArgs),
    /// Risk of estimators over a theta grid (CSV).
    #[command(allow_negative_numbers = true)]
    RiskCurve(RiskCurveArgs),
    /// Dominance cutoff theta_0(c) of delta_c over X (JSON).
    #[command(allow_negative_numbers = true)]
    Dominance {
        /// Shrinkage coefficient in (0, 1].
        #[arg(long)]
        c: f64,
        /// Sampling variance; the cutoff scales with sigma.
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
    },
    /// Check sup_{0 <= theta <= theta_max} risk(delta_c) <= sigma2 (JSON; exit 1 when violated).
    #[command(allow_negative_numbers = true)]
    MinimaxCheck {
        /// Shrinkage coefficient in [0, 1].
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        /// Right end of the theta grid (at least 10).
        #[arg(long, default_value_t = 10.0)]
        theta_max: f64,
        /// Grid step (at most 0.05).
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
}

#[derive(Subcommand, Debug)]
enum PosteriorCommand {
    /// Normal observation model.
    #[command(allow_negative_numbers = true)]
    Normal {
        #[arg(long, value_enum)]
        param: Param,
        #[arg(long)]
        x: f64,
        /// Evaluate the posterior density at these points.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
        #[command(flatten)]
        model: NormalModelArgs,
    },
    /// Poisson observation model.
    #[command(allow_negative_numbers = true)]
    Poisson {
        #[arg(long, value_enum)]
        param: Param,
        #[arg(long)]
        x: u64,
        /// Evaluate the posterior density at these points.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
        #[command(flatten)]
        model: PoissonModelArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Param {
    Theta,
    Alpha,
}

#[derive(Args, Debug)]
struct NormalModelArgs {
    /// JSON configuration: {"sigma2", "prior": {"mu", "tau2" | "flat"}, "alpha": {"mu", "sigma2"}}.
    #[arg(long, conflicts_with_all = ["sigma2", "prior_mu", "prior_tau2", "flat_prior", "alpha_mu", "alpha_sigma2"])]
    config: Option<PathBuf>,
    /// Sampling variance of x.
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Mean of the normal prior on theta.
    #[arg(long, default_value_t = 0.0)]
    prior_mu: f64,
    /// Variance of the normal prior on theta.
    #[arg(long, conflicts_with = "flat_prior")]
    prior_tau2: Option<f64>,
    /// Flat prior on theta above the bound.
    #[arg(long)]
    flat_prior: bool,
    /// Prior mean of the bound.
    #[arg(long, default_value_t = 0.0)]
    alpha_mu: f64,
    /// Prior variance of the bound (0 for a known bound).
    #[arg(long)]
    alpha_sigma2: Option<f64>,
}

#[derive(Args, Debug)]
struct PoissonModelArgs {
    /// JSON configuration: {"a", "b", "c", "d"}.
    #[arg(long, conflicts_with_all = ["a", "b", "c", "d"])]
    config: Option<PathBuf>,
    /// Shape of the Gamma-type prior on theta.
    #[arg(long)]
    a: Option<f64>,
    /// Rate offset of the prior on theta (> -1).
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    /// Shape of the Gamma prior on the bound.
    #[arg(long)]
    c: Option<f64>,
    /// Rate of the Gamma prior on the bound.
    #[arg(long)]
    d: Option<f64>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    psi1: f64,
    #[arg(long, default_value_t = 0.0)]
    psi2: f64,
    /// Location of the affine image `location + scale * Z`.
    #[arg(long, default_value_t = 0.0)]
    location: f64,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Use `location - scale * Z` instead.
    #[arg(long)]
    reflected: bool,
    /// Number of draws.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Quadrature,
    MonteCarlo,
}

#[derive(Args, Debug)]
struct RiskCurveArgs {
    /// Comma-separated ids: unbiased, mle+, katz, delta_c:<c>, delta_c+:<c>, bayes.
    #[arg(long, value_delimiter = ',', required = true)]
    estimators: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = -3.0)]
    from: f64,
    #[arg(long, default_value_t = 4.0)]
    to: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, value_enum, default_value_t = Method::Quadrature)]
    method: Method,
    /// Monte Carlo draws per grid point.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Master seed; required with `--method monte-carlo`.
    #[arg(long)]
    seed: Option<u64>,
    /// Normal-model configuration for the `bayes` estimator.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// A failure with its exit code and the option it concerns.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(option: &str, message: impl fmt::Display) -> Self {
        Failure {
            code: 2,
            message: format!("invalid value for --{option}: {message}"),
        }
    }

    fn runtime(message: impl fmt::Display) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }
}

/// Library errors map to the option that carried the offending value.
fn from_lib(err: Error) -> Failure {
    match &err {
        Error::Domain { name, .. } => Failure::usage(&name.replace('_', "-"), &err),
        Error::UnknownEstimator(_) => Failure::usage("estimators", &err),
        Error::DegenerateTail { .. } => Failure::usage("psi1", &err),
        Error::Degenerate(_) | Error::NotBracketed { .. } => Failure::runtime(&err),
    }
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage("config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage("config", format!("{}: {e}", path.display())))
}

impl NormalModelArgs {
    fn resolve(&self) -> Result<NormalConfig, Failure> {
        if let Some(path) = &self.config {
            return read_config(path);
        }
        let prior = match (self.flat_prior, self.prior_tau2) {
            (true, _) => PriorVariance::Flat,
            (false, Some(t)) => PriorVariance::Finite(t),
            (false, None) => {
                return Err(Failure::usage(
                    "prior-tau2",
                    "give --prior-tau2, --flat-prior or --config",
                ))
            }
        };
        let alpha_sigma2 = self
            .alpha_sigma2
            .ok_or_else(|| Failure::usage("alpha-sigma2", "required unless --config is given"))?;
        NormalConfig::new(
            self.sigma2,
            self.prior_mu,
            prior,
            self.alpha_mu,
            alpha_sigma2,
        )
        .map_err(from_lib)
    }
}

impl PoissonModelArgs {
    fn resolve(&self) -> Result<PoissonPrior, Failure> {
        if let Some(path) = &self.config {
            return read_config(path);
        }
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Failure::usage(name, "required unless --config is given"))
        };
        PoissonPrior::new(
            need(self.a, "a")?,
            self.b,
            need(self.c, "c")?,
            need(self.d, "d")?,
        )
        .map_err(from_lib)
    }
}

fn to_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn with_pdf(mut obj: Map<String, Value>, at: &[f64], pdf: impl Fn(f64) -> f64) -> Value {
    if !at.is_empty() {
        obj.insert("at".into(), json!(at));
        obj.insert(
            "pdf".into(),
            json!(at.iter().map(|&v| pdf(v)).collect::<Vec<_>>()),
        );
    }
    Value::Object(obj)
}

fn esn_json(law: &LocScaleEsn, at: &[f64]) -> Value {
    let mut obj = Map::new();
    obj.insert("family".into(), json!("extended_skew_normal"));
    obj.insert("psi1".into(), json!(law.standard.psi1()));
    obj.insert("psi2".into(), json!(law.standard.psi2()));
    obj.insert("location".into(), json!(law.location));
    obj.insert("scale".into(), json!(law.scale));
    obj.insert("reflected".into(), json!(law.reflected));
    obj.insert("mean".into(), json!(law.mean()));
    obj.insert("variance".into(), json!(law.variance()));
    with_pdf(obj, at, |v| law.pdf(v))
}

fn check_finite(option: &str, values: &[f64]) -> Result<(), Failure> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Failure::usage(option, format!("{v} is not finite"))),
        None => Ok(()),
    }
}

fn posterior_normal(
    param: Param,
    x: f64,
    at: &[f64],
    cfg: &NormalConfig,
) -> Result<Value, Failure> {
    check_finite("at", at)?;
    if cfg.alpha_sigma2() == 0.0 {
        return Ok(match param {
            Param::Theta => {
                let tn = cfg.theta_posterior_truncated(x).map_err(from_lib)?;
                let mut obj = Map::new();
                obj.insert("family".into(), json!("truncated_normal"));
                obj.insert("mean_untruncated".into(), json!(tn.mean_untruncated));
                obj.insert("sd".into(), json!(tn.sd));
                obj.insert("lower".into(), json!(tn.lower));
                obj.insert("mean".into(), json!(tn.mean()));
                obj.insert("variance".into(), json!(tn.variance()));
                with_pdf(obj, at, |v| tn.pdf(v))
            }
            Param::Alpha => json!({ "family": "point_mass", "value": cfg.alpha_mu() }),
        });
    }
    let law = match param {
        Param::Theta => cfg.theta_posterior(x),
        Param::Alpha => cfg.alpha_posterior(x),
    }
    .map_err(from_lib)?;
    Ok(esn_json(&law, at))
}

fn posterior_poisson(
    param: Param,
    x: u64,
    at: &[f64],
    prior: &PoissonPrior,
) -> Result<Value, Failure> {
    check_finite("at", at)?;
    Ok(match param {
        Param::Theta => {
            let mut obj = Map::new();
            obj.insert("family".into(), json!("gamma_times_gamma_cdf"));
            obj.insert("shape".into(), json!(prior.a() + x as f64));
            obj.insert("rate".into(), json!(1.0 + prior.b()));
            obj.insert("mean".into(), json!(prior.theta_posterior_mean(x)));
            if !at.is_empty() {
                obj.insert("at".into(), json!(at));
                obj.insert("pdf".into(), json!(prior.theta_posterior_pdf_many(x, at)));
            }
            Value::Object(obj)
        }
        Param::Alpha => match prior.alpha_posterior_mixture(x) {
            Ok(mix) => {
                let mut obj = Map::new();
                obj.insert("family".into(), json!("gamma_mixture"));
                obj.insert("weights".into(), json!(mix.weights));
                obj.insert("shapes".into(), json!(mix.shapes));
                obj.insert("rate".into(), json!(mix.rate));
                obj.insert("mean".into(), json!(mix.mean()));
                with_pdf(obj, at, |v| mix.pdf(v))
            }
            Err(_) => {
                let mut obj = Map::new();
                obj.insert("family".into(), json!("gamma_times_gamma_sf"));
                obj.insert("mean".into(), json!(prior.alpha_mean_quadrature(x)));
                if !at.is_empty() {
                    obj.insert("at".into(), json!(at));
                    obj.insert("pdf".into(), json!(prior.alpha_posterior_pdf_many(x, at)));
                }
                Value::Object(obj)
            }
        },
    })
}

fn sample(args: &SampleArgs) -> Result<String, Failure> {
    let standard = ExtendedSkewNormal::new(args.psi1, args.psi2).map_err(from_lib)?;
    let law = LocScaleEsn::with_orientation(standard, args.location, args.scale, args.reflected)
        .map_err(from_lib)?;
    let draws = law.sample(args.n, args.seed).map_err(from_lib)?;
    let mut out = String::with_capacity(24 * (draws.len() + 1));
    out.push_str("value\n");
    for v in draws {
        out.push_str(&fmt_f64(v));
        out.push('\n');
    }
    Ok(out)
}

fn risk_curve(args: &RiskCurveArgs) -> Result<String, Failure> {
    let method = match (args.method, args.seed) {
        (Method::Quadrature, _) => CurveMethod::Quadrature,
        (Method::MonteCarlo, Some(seed)) => {
            if args.n < risk_engine::MIN_MC_DRAWS {
                return Err(Failure::usage("n", "Monte Carlo needs at least 1000 draws"));
            }
            CurveMethod::MonteCarlo { n: args.n, seed }
        }
        (Method::MonteCarlo, None) => {
            return Err(Failure::usage("seed", "required with --method monte-carlo"))
        }
    };
    let bayes = match &args.config {
        Some(path) => Some(read_config::<NormalConfig>(path)?),
        None => None,
    };
    let estimators = args
        .estimators
        .iter()
        .map(|id| Estimator::parse(id.trim(), bayes.as_ref()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(from_lib)?;
    let curves = risk_engine::risk_curve(
        &estimators,
        args.sigma2,
        args.from,
        args.to,
        args.step,
        method,
    )
    .map_err(from_lib)?;
    let mut buf = Vec::new();
    risk_engine::write_csv(&curves, &mut buf).map_err(Failure::runtime)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

fn dispatch(cmd: Command) -> Result<(String, u8), Failure> {
    let json_ok = |v: Value| Ok((to_json(&v), 0));
    match cmd {
        Command::EstimateNormal { x, model } => {
            let cfg = model.resolve()?;
            check_finite("x", &[x])?;
            json_ok(json!({
                "estimate": cfg.theta_bayes_estimate(x),
                "alpha_estimate": cfg.alpha_bayes_estimate(x),
            }))
        }
        Command::EstimatePoisson { x, model } => {
            let prior = model.resolve()?;
            let method = if prior.a_is_integer() {
                "mixture"
            } else {
                "quadrature"
            };
            json_ok(json!({
                "theta_estimate": prior.theta_posterior_mean(x),
                "alpha_estimate": prior.alpha_bayes_estimate(x),
                "alpha_method": method,
            }))
        }
        Command::Posterior(PosteriorCommand::Normal {
            param,
            x,
            at,
            model,
        }) => {
            let cfg = model.resolve()?;
            check_finite("x", &[x])?;
            json_ok(posterior_normal(param, x, &at, &cfg)?)
        }
        Command::Posterior(PosteriorCommand::Poisson {
            param,
            x,
            at,
            model,
        }) => {
            let prior = model.resolve()?;
            json_ok(posterior_poisson(param, x, &at, &prior)?)
        }
        Command::Sample(args) => Ok((sample(&args)?, 0)),
        Command::RiskCurve(args) => Ok((risk_curve(&args)?, 0)),
        Command::Dominance { c, sigma2 } => {
            if !(sigma2 > 0.0 && sigma2.is_finite()) {
                return Err(Failure::usage("sigma2", "must be positive and finite"));
            }
            let theta0 = risk_engine::dominance_cutoff(c).map_err(from_lib)?;
            json_ok(json!({ "c": c, "sigma2": sigma2, "theta0": sigma2.sqrt() * theta0 }))
        }
        Command::MinimaxCheck {
            c,
            sigma2,
            theta_max,
            step,
        } => {
            let report =
                risk_engine::minimax_check(c, sigma2, theta_max, step).map_err(from_lib)?;
            let value = serde_json::to_value(report).expect("report serializes");
            Ok((
                to_json(&value),
                if report.dominates_on_nonneg { 0 } else { 1 },
            ))
        }
    }
}

/// Parse `argv` (program name first) and execute it.
pub fn run<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Output {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command) {
        // only minimax-check reports a nonzero code from a completed run
        Ok((stdout, code)) => Output {
            code,
            stdout,
            stderr: if code == 0 {
                String::new()
            } else {
                "error: minimax bound violated on [0, theta_max]\n".into()
            },
        },
        Err(f) => Output {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}
