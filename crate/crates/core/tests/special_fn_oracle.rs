//! Special functions against the double-double oracle in `common::dd`.

mod common;

use common::dd;
use uncertain_bound::special_fn::{
    inverse_mills, inverse_mills_deriv, ln_std_normal_cdf, mills_excess, std_normal_cdf,
    std_normal_sf, t_fn, t_fn_deriv,
};

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[test]
fn inverse_mills_tracks_oracle_across_the_line() {
    for t in linspace(-40.0, 37.0, 3001) {
        let exact = dd::inverse_mills(t).to_f64();
        let got = inverse_mills(t);
        let rel = ((got - exact) / exact).abs();
        assert!(
            rel <= 1e-13,
            "t={t} got={got:e} exact={exact:e} rel={rel:e}"
        );
    }
}

#[test]
fn normal_cdf_tracks_oracle() {
    for t in linspace(-37.5, 8.0, 2001) {
        let exact = dd::normal_cdf(t).to_f64();
        let got = std_normal_cdf(t);
        let rel = ((got - exact) / exact).abs();
        assert!(rel <= 1e-14, "t={t} rel={rel:e}");
        // upper tail computed directly, not as 1 - Phi
        let sf_rel = ((std_normal_sf(-t) - exact) / exact).abs();
        assert!(sf_rel <= 1e-14, "t={t} sf rel={sf_rel:e}");
    }
}

#[test]
fn log_cdf_stays_finite_deep_in_the_tail() {
    for &t in &[-50.0, -200.0, -1e4] {
        let v = ln_std_normal_cdf(t);
        assert!(v.is_finite() && v < 0.0);
        // ln Phi(t) = ln phi(t) - ln R(t)
        let alt = -0.5 * t * t - 0.5 * (2.0 * std::f64::consts::PI).ln() - inverse_mills(t).ln();
        assert!(((v - alt) / v).abs() < 1e-14, "t={t}");
    }
}

#[test]
fn mills_excess_is_accurate_where_it_cancels() {
    // t + R(t) for t << 0 loses every digit if formed as a difference
    for t in linspace(-40.0, -5.0, 351) {
        let exact = (dd::inverse_mills(t) + dd::Dd::new(t)).to_f64();
        let got = mills_excess(t);
        assert!(
            ((got - exact) / exact).abs() < 1e-12,
            "t={t} got={got:e} exact={exact:e}"
        );
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let h = 1e-5;
    for t in linspace(-12.0, 12.0, 241) {
        let fd = (inverse_mills(t + h) - inverse_mills(t - h)) / (2.0 * h);
        assert!((fd - inverse_mills_deriv(t)).abs() < 1e-6, "R' at {t}");
        let fd = (t_fn(t + h) - t_fn(t - h)) / (2.0 * h);
        assert!((fd - t_fn_deriv(t)).abs() < 1e-6, "T' at {t}");
    }
}

#[test]
fn t_fn_against_oracle() {
    for t in linspace(-20.0, 8.0, 281) {
        let r = dd::inverse_mills(t);
        let exact = (r * (r + dd::Dd::new(2.0 * t))).to_f64();
        let got = t_fn(t);
        let scale = exact.abs().max(1e-300);
        assert!(
            ((got - exact) / scale).abs() < 1e-11,
            "t={t} got={got:e} exact={exact:e}"
        );
    }
}
