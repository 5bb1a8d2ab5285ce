use std::io::Write;

use serde_json::Value;
use ubound_cli::{run, Output};

fn ubound(args: &[&str]) -> Output {
    run(std::iter::once("ubound").chain(args.iter().copied()))
}

fn json(out: &Output) -> Value {
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn estimate_normal_known_bound_is_katz() {
    let out = ubound(&[
        "estimate-normal",
        "--x",
        "1.0",
        "--sigma2",
        "1",
        "--flat-prior",
        "--alpha-sigma2",
        "0",
    ]);
    let v = json(&out);
    // x + R(1)
    assert!((v["estimate"].as_f64().unwrap() - 1.287_599_970_939_178_4).abs() < 1e-12);
    assert_eq!(v["alpha_estimate"].as_f64().unwrap(), 0.0);
}

#[test]
fn estimate_normal_accepts_negative_values_and_config() {
    let a = json(&ubound(&[
        "estimate-normal",
        "--x",
        "-2",
        "--flat-prior",
        "--alpha-sigma2",
        "3",
    ]));
    let mut file = tempfile::NamedTempFile::new().unwrap();
    write!(
        file,
        r#"{{"sigma2": 1, "prior": {{"tau2": "flat"}}, "alpha": {{"sigma2": 3}}}}"#
    )
    .unwrap();
    let b = json(&ubound(&[
        "estimate-normal",
        "--x",
        "-2",
        "--config",
        file.path().to_str().unwrap(),
    ]));
    assert_eq!(a, b);
}

#[test]
fn estimate_poisson_flat_closed_form() {
    let v = json(&ubound(&[
        "estimate-poisson",
        "--x",
        "3",
        "--a",
        "1",
        "--c",
        "1",
        "--d",
        "0",
    ]));
    assert!((v["alpha_estimate"].as_f64().unwrap() - 2.5).abs() < 1e-12);
    assert_eq!(v["alpha_method"], "mixture");
}

#[test]
fn posterior_outputs() {
    let v = json(&ubound(&[
        "posterior",
        "normal",
        "--param",
        "alpha",
        "--x",
        "1",
        "--flat-prior",
        "--alpha-sigma2",
        "1",
        "--at",
        "-1,0",
    ]));
    assert_eq!(v["family"], "extended_skew_normal");
    assert_eq!(v["reflected"], true);
    assert_eq!(v["pdf"].as_array().unwrap().len(), 2);
    let v = json(&ubound(&[
        "posterior",
        "normal",
        "--param",
        "theta",
        "--x",
        "1",
        "--flat-prior",
        "--alpha-sigma2",
        "0",
    ]));
    assert_eq!(v["family"], "truncated_normal");
    let v = json(&ubound(&[
        "posterior",
        "poisson",
        "--param",
        "alpha",
        "--x",
        "3",
        "--a",
        "2",
        "--c",
        "2",
        "--d",
        "1",
    ]));
    assert_eq!(v["family"], "gamma_mixture");
    assert_eq!(v["weights"].as_array().unwrap().len(), 5);
}

#[test]
fn risk_curve_csv_and_determinism() {
    let args = [
        "risk-curve",
        "--estimators",
        "delta_c:0.5,delta_c:0.75,delta_c:1",
        "--from",
        "-3",
        "--to",
        "4",
        "--step",
        "0.01",
    ];
    let out = ubound(&args);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "estimator,theta,risk,method,std_err");
    assert_eq!(lines.len(), 1 + 3 * 701);
    assert_eq!(ubound(&args), out);

    let mc = [
        "risk-curve",
        "--estimators",
        "mle+",
        "--to",
        "-2",
        "--method",
        "monte-carlo",
        "--n",
        "2000",
        "--seed",
        "4",
    ];
    let first = ubound(&mc);
    assert_eq!(first.code, 0, "{}", first.stderr);
    assert_eq!(ubound(&mc).stdout, first.stdout);
    // every number parses back
    for line in first.stdout.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        for c in [cols[1], cols[2], cols[4]] {
            let v: f64 = c.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), c);
        }
    }
}

#[test]
fn dominance_and_minimax() {
    let v = json(&ubound(&["dominance", "--c", "0.5"]));
    assert!((v["theta0"].as_f64().unwrap() + 0.939).abs() < 0.005);
    let v = json(&ubound(&[
        "minimax-check",
        "--c",
        "0.5",
        "--theta-max",
        "10",
        "--step",
        "0.05",
    ]));
    assert_eq!(v["dominates_on_nonneg"], true);
    let v = json(&ubound(&["minimax-check", "--c", "0", "--step", "0.05"]));
    assert_eq!(v["boundary_case"], true);
}

#[test]
fn sample_is_seeded() {
    let args = [
        "sample", "--psi1", "-1", "--psi2", "0.5", "--n", "50", "--seed", "9",
    ];
    let a = ubound(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout.lines().count(), 51);
    assert_eq!(ubound(&args), a);
    assert_ne!(
        ubound(&["sample", "--psi1", "-1", "--psi2", "0.5", "--n", "50", "--seed", "10"]).stdout,
        a.stdout
    );
}

fn assert_usage_error(out: &Output, option: &str) {
    assert_eq!(out.code, 2, "stdout: {}", out.stdout);
    assert!(out.stdout.is_empty());
    assert!(
        out.stderr.contains(option),
        "{option} not named in: {}",
        out.stderr
    );
}

#[test]
fn validation_errors_exit_two() {
    assert_usage_error(&ubound(&["bogus"]), "bogus");
    assert_usage_error(&ubound(&["sample", "--psi1", "0", "--n", "5"]), "--seed");
    assert_usage_error(
        &ubound(&[
            "risk-curve",
            "--estimators",
            "mle+",
            "--method",
            "monte-carlo",
        ]),
        "--seed",
    );
    assert_usage_error(
        &ubound(&["risk-curve", "--estimators", "nope"]),
        "--estimators",
    );
    assert_usage_error(
        &ubound(&["risk-curve", "--estimators", "katz", "--step", "0"]),
        "--step",
    );
    assert_usage_error(&ubound(&["dominance", "--c", "1.5"]), "--c");
    assert_usage_error(
        &ubound(&["minimax-check", "--c", "0.5", "--theta-max", "5"]),
        "--theta-max",
    );
    assert_usage_error(
        &ubound(&[
            "estimate-normal",
            "--x",
            "1",
            "--sigma2",
            "-1",
            "--flat-prior",
            "--alpha-sigma2",
            "0",
        ]),
        "--sigma2",
    );
    assert_usage_error(
        &ubound(&["estimate-normal", "--x", "1", "--flat-prior"]),
        "--alpha-sigma2",
    );
    assert_usage_error(
        &ubound(&[
            "estimate-normal",
            "--x",
            "1",
            "--config",
            "/nonexistent/cfg.json",
        ]),
        "--config",
    );
    assert_usage_error(
        &ubound(&[
            "estimate-poisson",
            "--x",
            "1",
            "--a",
            "2",
            "--c",
            "1",
            "--d",
            "-1",
        ]),
        "--d",
    );
    assert_usage_error(
        &ubound(&[
            "sample", "--psi1", "-9", "--psi2", "0.1", "--n", "5", "--seed", "1",
        ]),
        "--psi1",
    );
}

#[test]
fn help_for_every_subcommand() {
    for sub in [
        "estimate-normal",
        "estimate-poisson",
        "posterior",
        "sample",
        "risk-curve",
        "dominance",
        "minimax-check",
    ] {
        let out = ubound(&[sub, "--help"]);
        assert_eq!(out.code, 0, "{sub}");
        assert!(out.stdout.contains("Usage"), "{sub}");
    }
    assert_eq!(ubound(&["--help"]).code, 0);
}
