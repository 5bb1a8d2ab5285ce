//! Python bindings: special functions, the ESN family, both observation
//! models and the risk engine.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use uncertain_bound::normal_model::{Estimator, NormalConfig, PriorVariance};
use uncertain_bound::poisson_model::PoissonPrior;
use uncertain_bound::risk_engine::{self, CurveMethod, DominanceReport};
use uncertain_bound::{special_fn, Error, ExtendedSkewNormal, LocScaleEsn};

create_exception!(
    uncertain_bound,
    DegenerateTailError,
    PyValueError,
    "Rejection sampling would essentially never accept."
);
create_exception!(
    uncertain_bound,
    NotBracketedError,
    PyRuntimeError,
    "No sign change of the risk difference was bracketed."
);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::DegenerateTail { .. } => DegenerateTailError::new_err(err.to_string()),
        Error::NotBracketed { .. } => NotBracketedError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

#[pyfunction]
fn std_normal_pdf(t: f64) -> f64 {
    special_fn::std_normal_pdf(t)
}

#[pyfunction]
fn std_normal_cdf(t: f64) -> f64 {
    special_fn::std_normal_cdf(t)
}

/// Inverse Mills ratio phi(t) / Phi(t).
#[pyfunction]
fn inverse_mills(t: f64) -> f64 {
    special_fn::inverse_mills(t)
}

#[pyfunction]
fn inverse_mills_deriv(t: f64) -> f64 {
    special_fn::inverse_mills_deriv(t)
}

/// T(s) = R(s) (R(s) + 2 s).
#[pyfunction]
fn t_fn(s: f64) -> f64 {
    special_fn::t_fn(s)
}

#[pyfunction]
fn t_fn_deriv(s: f64) -> f64 {
    special_fn::t_fn_deriv(s)
}

#[pyfunction]
fn gamma_cdf(shape: f64, rate: f64, x: f64) -> PyResult<f64> {
    special_fn::gamma_cdf(shape, rate, x).map_err(to_py)
}

#[pyfunction]
fn gamma_sf(shape: f64, rate: f64, x: f64) -> PyResult<f64> {
    special_fn::gamma_sf(shape, rate, x).map_err(to_py)
}

/// Extended skew-normal law phi(z) Phi(psi1 + psi2 z) / Phi(gamma0).
#[pyclass(name = "ExtendedSkewNormal", frozen)]
struct PyEsn {
    inner: ExtendedSkewNormal,
}

#[pymethods]
impl PyEsn {
    #[new]
    fn new(psi1: f64, psi2: f64) -> PyResult<Self> {
        Ok(PyEsn {
            inner: ExtendedSkewNormal::new(psi1, psi2).map_err(to_py)?,
        })
    }

    #[getter]
    fn psi1(&self) -> f64 {
        self.inner.psi1()
    }

    #[getter]
    fn psi2(&self) -> f64 {
        self.inner.psi2()
    }

    #[getter]
    fn gamma0(&self) -> f64 {
        self.inner.gamma0()
    }

    #[getter]
    fn gamma1(&self) -> f64 {
        self.inner.gamma1()
    }

    #[getter]
    fn acceptance_probability(&self) -> f64 {
        self.inner.acceptance_probability()
    }

    fn pdf(&self, z: f64) -> f64 {
        self.inner.pdf(z)
    }

    fn cdf(&self, z: f64) -> f64 {
        self.inner.cdf(z)
    }

    fn mgf(&self, t: f64) -> f64 {
        self.inner.mgf(t)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    fn sample(&self, py: Python<'_>, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        let d = self.inner;
        py.detach(|| d.sample(n, seed)).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "ExtendedSkewNormal(psi1={}, psi2={})",
            self.inner.psi1(),
            self.inner.psi2()
        )
    }
}

fn esn_dict<'py>(py: Python<'py>, law: &LocScaleEsn) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("family", "extended_skew_normal")?;
    d.set_item("psi1", law.standard.psi1())?;
    d.set_item("psi2", law.standard.psi2())?;
    d.set_item("location", law.location)?;
    d.set_item("scale", law.scale)?;
    d.set_item("reflected", law.reflected)?;
    d.set_item("mean", law.mean())?;
    d.set_item("variance", law.variance())?;
    Ok(d)
}

/// Normal observation model with an uncertain lower bound on theta.
/// `prior_tau2=None` selects the flat prior on theta.
#[pyclass(name = "NormalConfig", frozen)]
struct PyNormalConfig {
    inner: NormalConfig,
}

#[pymethods]
impl PyNormalConfig {
    #[new]
    #[pyo3(signature = (sigma2, alpha_sigma2, prior_tau2=None, prior_mu=0.0, alpha_mu=0.0))]
    fn new(
        sigma2: f64,
        alpha_sigma2: f64,
        prior_tau2: Option<f64>,
        prior_mu: f64,
        alpha_mu: f64,
    ) -> PyResult<Self> {
        let prior = prior_tau2.map_or(PriorVariance::Flat, PriorVariance::Finite);
        Ok(PyNormalConfig {
            inner: NormalConfig::new(sigma2, prior_mu, prior, alpha_mu, alpha_sigma2)
                .map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyNormalConfig {
            inner: from_json(text)?,
        })
    }

    fn theta_estimate(&self, x: f64) -> f64 {
        self.inner.theta_bayes_estimate(x)
    }

    fn alpha_estimate(&self, x: f64) -> f64 {
        self.inner.alpha_bayes_estimate(x)
    }

    fn equivalent_delta_c(&self) -> Option<f64> {
        self.inner.equivalent_delta_c()
    }

    /// Posterior of theta as a dict (ESN, or truncated normal for a known bound).
    fn theta_posterior<'py>(&self, py: Python<'py>, x: f64) -> PyResult<Bound<'py, PyDict>> {
        if self.inner.alpha_sigma2() == 0.0 {
            let tn = self.inner.theta_posterior_truncated(x).map_err(to_py)?;
            let d = PyDict::new(py);
            d.set_item("family", "truncated_normal")?;
            d.set_item("mean_untruncated", tn.mean_untruncated)?;
            d.set_item("sd", tn.sd)?;
            d.set_item("lower", tn.lower)?;
            d.set_item("mean", tn.mean())?;
            d.set_item("variance", tn.variance())?;
            return Ok(d);
        }
        esn_dict(py, &self.inner.theta_posterior(x).map_err(to_py)?)
    }

    /// Posterior of the bound as a dict (reflected ESN).
    fn alpha_posterior<'py>(&self, py: Python<'py>, x: f64) -> PyResult<Bound<'py, PyDict>> {
        esn_dict(py, &self.inner.alpha_posterior(x).map_err(to_py)?)
    }
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Poisson observation model with Gamma-type priors.
#[pyclass(name = "PoissonPrior", frozen)]
struct PyPoissonPrior {
    inner: PoissonPrior,
}

#[pymethods]
impl PyPoissonPrior {
    #[new]
    fn new(a: f64, b: f64, c: f64, d: f64) -> PyResult<Self> {
        Ok(PyPoissonPrior {
            inner: PoissonPrior::new(a, b, c, d).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyPoissonPrior {
            inner: from_json(text)?,
        })
    }

    fn theta_estimate(&self, x: u64) -> f64 {
        self.inner.theta_posterior_mean(x)
    }

    fn theta_pdf(&self, x: u64, thetas: Vec<f64>) -> Vec<f64> {
        self.inner.theta_posterior_pdf_many(x, &thetas)
    }

    fn alpha_estimate(&self, x: u64) -> f64 {
        self.inner.alpha_bayes_estimate(x)
    }

    fn alpha_pdf(&self, x: u64, alphas: Vec<f64>) -> Vec<f64> {
        self.inner.alpha_posterior_pdf_many(x, &alphas)
    }

    /// Gamma-mixture posterior of the bound (integer `a` only).
    fn alpha_mixture<'py>(&self, py: Python<'py>, x: u64) -> PyResult<Bound<'py, PyDict>> {
        let m = self.inner.alpha_posterior_mixture(x).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("mean", m.mean())?;
        d.set_item("weights", m.weights)?;
        d.set_item("shapes", m.shapes)?;
        d.set_item("rate", m.rate)?;
        Ok(d)
    }

    fn alpha_flat_closed_form(&self, x: u64) -> Option<f64> {
        self.inner.alpha_flat_closed_form(x)
    }
}

fn estimator(id: &str, config: Option<&Bound<'_, PyNormalConfig>>) -> PyResult<Estimator> {
    let cfg = config.map(|c| c.get().inner);
    Estimator::parse(id, cfg.as_ref()).map_err(to_py)
}

/// `x + c sigma R(c x / sigma)`.
#[pyfunction]
#[pyo3(signature = (x, c, sigma=1.0))]
fn delta_c(x: f64, c: f64, sigma: f64) -> PyResult<f64> {
    Ok(Estimator::delta_c(c).map_err(to_py)?.evaluate(x, sigma))
}

/// Squared-error risk of an estimator id at `theta` by quadrature.
#[pyfunction]
#[pyo3(signature = (estimator_id, theta, sigma2=1.0, config=None))]
fn risk_quadrature(
    py: Python<'_>,
    estimator_id: &str,
    theta: f64,
    sigma2: f64,
    config: Option<&Bound<'_, PyNormalConfig>>,
) -> PyResult<f64> {
    let est = estimator(estimator_id, config)?;
    py.detach(|| risk_engine::risk_quadrature(&est, theta, sigma2))
        .map_err(to_py)
}

/// Monte Carlo risk; returns `(estimate, std_err)`.
#[pyfunction]
#[pyo3(signature = (estimator_id, theta, n, seed, sigma2=1.0, config=None))]
fn risk_monte_carlo(
    py: Python<'_>,
    estimator_id: &str,
    theta: f64,
    n: usize,
    seed: u64,
    sigma2: f64,
    config: Option<&Bound<'_, PyNormalConfig>>,
) -> PyResult<(f64, f64)> {
    let est = estimator(estimator_id, config)?;
    let r = py
        .detach(|| risk_engine::risk_monte_carlo(&est, theta, sigma2, n, seed))
        .map_err(to_py)?;
    Ok((r.estimate, r.std_err))
}

/// `-c^2 E_theta[T(c X)]` at unit variance.
#[pyfunction]
fn risk_difference_stein(c: f64, theta: f64) -> PyResult<f64> {
    risk_engine::risk_difference_stein(c, theta).map_err(to_py)
}

/// Root theta_0(c) of the risk difference (unit variance).
#[pyfunction]
fn dominance_cutoff(py: Python<'_>, c: f64) -> PyResult<f64> {
    py.detach(|| risk_engine::dominance_cutoff(c))
        .map_err(to_py)
}

fn report_dict<'py>(py: Python<'py>, r: &DominanceReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("c", r.c)?;
    d.set_item("sigma2", r.sigma2)?;
    d.set_item("cutoff_theta0", r.cutoff_theta0)?;
    d.set_item("sup_risk_on_nonneg", r.sup_risk_on_nonneg)?;
    d.set_item("argsup_theta", r.argsup_theta)?;
    d.set_item("tail_risk", r.tail_risk)?;
    d.set_item("tail_converged", r.tail_converged)?;
    d.set_item("dominates_on_nonneg", r.dominates_on_nonneg)?;
    d.set_item("boundary_case", r.boundary_case)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (c, sigma2=1.0, theta_max=10.0, step=0.01))]
fn minimax_check<'py>(
    py: Python<'py>,
    c: f64,
    sigma2: f64,
    theta_max: f64,
    step: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| risk_engine::minimax_check(c, sigma2, theta_max, step))
        .map_err(to_py)?;
    report_dict(py, &r)
}

/// Risk curves; Monte Carlo when `seed` is given (with `n` draws per point).
#[pyfunction]
#[pyo3(signature = (estimator_ids, sigma2=1.0, theta_min=-3.0, theta_max=4.0, step=0.01, seed=None, n=100_000, config=None))]
#[allow(clippy::too_many_arguments)]
fn risk_curve<'py>(
    py: Python<'py>,
    estimator_ids: Vec<String>,
    sigma2: f64,
    theta_min: f64,
    theta_max: f64,
    step: f64,
    seed: Option<u64>,
    n: usize,
    config: Option<&Bound<'_, PyNormalConfig>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let ests = estimator_ids
        .iter()
        .map(|id| estimator(id, config))
        .collect::<PyResult<Vec<_>>>()?;
    let method = match seed {
        Some(seed) => CurveMethod::MonteCarlo { n, seed },
        None => CurveMethod::Quadrature,
    };
    let curves = py
        .detach(|| risk_engine::risk_curve(&ests, sigma2, theta_min, theta_max, step, method))
        .map_err(to_py)?;
    curves
        .into_iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("estimator", c.estimator_id)?;
            d.set_item("sigma2", c.sigma2)?;
            d.set_item("theta", c.theta_grid)?;
            d.set_item("risk", c.risk)?;
            d.set_item("method", c.method.as_str())?;
            d.set_item("std_err", c.mc_std_err)?;
            Ok(d)
        })
        .collect()
}

#[pymodule(name = "uncertain_bound")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("DegenerateTailError", py.get_type::<DegenerateTailError>())?;
    m.add("NotBracketedError", py.get_type::<NotBracketedError>())?;
    m.add_class::<PyEsn>()?;
    m.add_class::<PyNormalConfig>()?;
    m.add_class::<PyPoissonPrior>()?;
    m.add_function(wrap_pyfunction!(std_normal_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(std_normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_mills, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_mills_deriv, m)?)?;
    m.add_function(wrap_pyfunction!(t_fn, m)?)?;
    m.add_function(wrap_pyfunction!(t_fn_deriv, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_sf, m)?)?;
    m.add_function(wrap_pyfunction!(delta_c, m)?)?;
    m.add_function(wrap_pyfunction!(risk_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(risk_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(risk_difference_stein, m)?)?;
    m.add_function(wrap_pyfunction!(dominance_cutoff, m)?)?;
    m.add_function(wrap_pyfunction!(minimax_check, m)?)?;
    m.add_function(wrap_pyfunction!(risk_curve, m)?)?;
    Ok(())
}
