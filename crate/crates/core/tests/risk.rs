//! Risk-engine invariants: sign changes, dominance, scale equivariance,
//! Monte Carlo agreement and deterministic parallel evaluation.

use uncertain_bound::normal_model::Estimator;
use uncertain_bound::risk_engine::{
    dominance_cutoff, minimax_check, risk_curve, risk_difference_direct, risk_difference_stein,
    risk_monte_carlo, risk_quadrature, sign_change_scan, theta_grid, write_csv, CurveMethod,
};

#[test]
fn stein_form_equals_direct_difference_on_full_grid() {
    for i in 1..=10 {
        let c = i as f64 / 10.0;
        for k in -3..=3 {
            let t = k as f64;
            let s = risk_difference_stein(c, t).unwrap();
            let d = risk_difference_direct(c, t).unwrap();
            assert!((s - d).abs() < 1e-7, "c={c} theta={t}");
        }
    }
}

#[test]
fn single_plus_to_minus_change() {
    // theta_0(c) falls below -6 once c drops under about 0.1
    let grid = theta_grid(-20.0, 20.0, 0.01).unwrap();
    for &c in &[0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0] {
        let changes = sign_change_scan(c, &grid).unwrap();
        assert_eq!(changes.len(), 1, "c={c}: {changes:?}");
        assert!(changes[0].plus_to_minus);
    }
    let half = sign_change_scan(0.5, &grid).unwrap()[0];
    assert!(half.lo <= -0.939 && -0.939 <= half.hi + 0.01);
}

#[test]
fn cutoff_moves_toward_zero_as_c_grows() {
    let t75 = dominance_cutoff(0.75).unwrap();
    let t90 = dominance_cutoff(0.9).unwrap();
    let t50 = dominance_cutoff(0.5).unwrap();
    assert!(t50 < t75 && t75 < t90 && t90 < 0.0, "{t50} {t75} {t90}");
    for &c in &[0.5, 0.75] {
        let r = dominance_cutoff(c).unwrap();
        assert!(risk_difference_stein(c, r - 1e-3).unwrap() > 0.0);
        assert!(risk_difference_stein(c, r + 1e-3).unwrap() < 0.0);
    }
}

#[test]
fn cutoff_risk_difference_is_zero_under_monte_carlo() {
    // common random numbers: same seed for both estimators
    let c = 0.75;
    let root = dominance_cutoff(c).unwrap();
    let a = risk_monte_carlo(&Estimator::DeltaC(c), root, 1.0, 400_000, 99).unwrap();
    let b = risk_monte_carlo(&Estimator::Unbiased, root, 1.0, 400_000, 99).unwrap();
    let se = (a.std_err.powi(2) + b.std_err.powi(2)).sqrt();
    assert!((a.estimate - b.estimate).abs() <= 3.0 * se, "{a:?} {b:?}");
}

#[test]
fn dominance_on_nonnegative_half_line() {
    for &c in &[0.1, 0.3, 0.5, 0.8, 1.0] {
        let r = minimax_check(c, 1.0, 10.0, 0.05).unwrap();
        assert!(r.dominates_on_nonneg, "c={c} sup={}", r.sup_risk_on_nonneg);
        assert!(r.cutoff_theta0.unwrap() <= 1e-4);
    }
    let katz = minimax_check(1.0, 2.0, 10.0, 0.05).unwrap();
    assert_eq!(katz.argsup_theta, 0.0);
    assert!((katz.sup_risk_on_nonneg - 2.0).abs() < 2e-6);
    assert!(katz.tail_converged);
}

#[test]
fn scale_equivariance() {
    for &c in &[0.25, 0.5, 1.0] {
        for &s2 in &[0.25, 4.0, 9.0] {
            let s = f64::sqrt(s2);
            for &t in &[-2.0, 0.0, 1.5] {
                let big = risk_quadrature(&Estimator::DeltaC(c), t, s2).unwrap();
                let unit = risk_quadrature(&Estimator::DeltaC(c), t / s, 1.0).unwrap();
                assert!((big - s2 * unit).abs() <= 1e-12 * s2, "c={c} s2={s2} t={t}");
            }
        }
    }
}

#[test]
fn quadrature_and_monte_carlo_agree() {
    let ests = [
        Estimator::DeltaC(0.75),
        Estimator::MlePositive,
        Estimator::TruncatedDeltaC(0.5),
        Estimator::Unbiased,
    ];
    for (k, est) in ests.iter().enumerate() {
        for &t in &[-1.0, 0.0, 1.0, 2.0] {
            let q = risk_quadrature(est, t, 1.0).unwrap();
            let mc = risk_monte_carlo(est, t, 1.0, 200_000, 1000 + k as u64).unwrap();
            assert!(
                (mc.estimate - q).abs() <= 4.0 * mc.std_err,
                "{} theta={t}",
                est.id()
            );
        }
    }
}

#[test]
fn parallel_curves_are_bitwise_sequential() {
    let ests = [Estimator::DeltaC(0.5), Estimator::MlePositive];
    let mc = CurveMethod::MonteCarlo { n: 2000, seed: 5 };
    let par = risk_curve(&ests, 1.0, -1.0, 1.0, 0.25, mc).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let seq = pool
        .install(|| risk_curve(&ests, 1.0, -1.0, 1.0, 0.25, mc))
        .unwrap();
    assert_eq!(par, seq);
    let q_par = risk_curve(&ests, 1.0, -1.0, 1.0, 0.25, CurveMethod::Quadrature).unwrap();
    let q_seq = pool
        .install(|| risk_curve(&ests, 1.0, -1.0, 1.0, 0.25, CurveMethod::Quadrature))
        .unwrap();
    assert_eq!(q_par, q_seq);
}

#[test]
fn csv_numbers_round_trip() {
    let curves = risk_curve(
        &[Estimator::DeltaC(0.5)],
        1.0,
        -0.3,
        0.3,
        0.1,
        CurveMethod::MonteCarlo { n: 1000, seed: 3 },
    )
    .unwrap();
    let mut buf = Vec::new();
    write_csv(&curves, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    for (j, line) in text.lines().skip(1).enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], "delta_c:0.5");
        assert_eq!(cols[1].parse::<f64>().unwrap(), curves[0].theta_grid[j]);
        assert_eq!(cols[2].parse::<f64>().unwrap(), curves[0].risk[j]);
        assert_eq!(cols[3], "monte_carlo");
        assert_eq!(
            cols[4].parse::<f64>().unwrap(),
            curves[0].mc_std_err.as_ref().unwrap()[j]
        );
    }
}

#[test]
fn mle_positive_curve_anchor() {
    let c = risk_curve(
        &[Estimator::MlePositive, Estimator::Unbiased],
        1.0,
        0.0,
        0.0,
        0.1,
        CurveMethod::Quadrature,
    )
    .unwrap();
    assert!((c[0].risk[0] - 0.5).abs() < 1e-12);
    assert_eq!(c[1].risk[0], 1.0);
}
