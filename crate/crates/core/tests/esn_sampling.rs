//! Rejection sampler behaviour: acceptance rate, moments, posterior draws.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use uncertain_bound::normal_model::NormalConfig;
use uncertain_bound::{Error, ExtendedSkewNormal};

#[test]
fn acceptance_rate_is_phi_of_gamma0() {
    for &(p1, p2) in &[(0.0, 0.0), (-1.0, 0.5), (1.0, 2.0), (-2.5, 1.0)] {
        let d = ExtendedSkewNormal::new(p1, p2).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let run = d.sample_with(&mut rng, 50_000).unwrap();
        let p = d.acceptance_probability();
        let rate = run.values.len() as f64 / run.proposals as f64;
        let se = (p * (1.0 - p) / run.proposals as f64).sqrt();
        assert!(
            (rate - p).abs() <= 3.0 * se,
            "({p1},{p2}) rate={rate} p={p}"
        );
    }
}

#[test]
fn sample_moments_converge() {
    for &(p1, p2) in &[(0.0, 0.0), (1.0, 1.0), (-2.0, 2.0)] {
        let d = ExtendedSkewNormal::new(p1, p2).unwrap();
        let xs = d.sample(200_000, 3).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (d.variance() / n).sqrt();
        assert!((mean - d.mean()).abs() <= 4.0 * se, "({p1},{p2})");
        assert!((var - d.variance()).abs() <= 0.02 * d.variance());
    }
}

#[test]
fn degenerate_tail_is_an_error_not_a_hang() {
    let d = ExtendedSkewNormal::new(-9.0, 0.1).unwrap();
    match d.sample(10, 1) {
        Err(Error::DegenerateTail { acceptance, floor }) => assert!(acceptance < floor),
        other => panic!("expected degenerate tail, got {other:?}"),
    }
}

#[test]
fn posterior_draws_match_closed_form_means() {
    let cfg = NormalConfig::flat(1.0, 0.0, 1.0).unwrap();
    let x = -0.5;
    let theta = cfg.theta_posterior(x).unwrap();
    let alpha = cfg.alpha_posterior(x).unwrap();
    for (law, want) in [
        (theta, cfg.theta_bayes_estimate(x)),
        (alpha, cfg.alpha_bayes_estimate(x)),
    ] {
        let xs = law.sample(200_000, 8).unwrap();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        assert!((mean - want).abs() <= 4.0 * (law.variance() / n).sqrt());
    }
}
