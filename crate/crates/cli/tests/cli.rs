//! End-to-end runs of the `ordgap` binary.

use std::process::{Command, Output};

use ordgap::Method;
use ordgap_cli::{parse_gaps_csv, sequence_from_csv};

fn ordgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordgap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gaps_csv_for_exponential() {
    let o = ordgap(&[
        "gaps",
        "--dist",
        "exp:lambda=1",
        "--n",
        "2..6",
        "--method",
        "direct,stieltjes,mc",
        "--out",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_gaps_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 15);
    let direct: Vec<_> = rows.iter().filter(|r| r.method == Method::Direct).collect();
    assert_eq!(direct.len(), 5);
    assert!(direct.iter().all(|r| (r.value - 1.0).abs() <= 1e-8));
    // sorted by n, then method
    let keys: Vec<_> = rows.iter().map(|r| (r.n, r.method)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in rows.iter().filter(|r| r.method == Method::Mc) {
        assert!((r.value - 1.0).abs() <= 4.0 * r.err_estimate);
    }
}

#[test]
fn check_json_for_uniform() {
    let o = ordgap(&[
        "check",
        "--dist",
        "uniform:a=0,b=1",
        "--n",
        "2..20",
        "--max-order",
        "6",
        "--out",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["report"];
    assert_eq!(r["decreasing"]["verdict"], "pass");
    assert_eq!(r["log_convex"]["verdict"], "pass");
    assert_eq!(r["completely_monotone_to_order"], 6);
    assert_eq!(v["any_fail"], false);
    assert_eq!(v["ihr"]["is_ihr"], true);
}

#[test]
fn check_fails_for_oscillating_family() {
    let o = ordgap(&[
        "check",
        "--dist",
        "oscexp:eps=0.5",
        "--n",
        "2..500",
        "--max-order",
        "2",
        "--out",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["decreasing"]["verdict"], "fail");
    let w = &v["report"]["decrease_witness"];
    assert!(w["r_next"].as_f64().unwrap() > w["r_n"].as_f64().unwrap());
}

#[test]
fn csv_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gaps.csv");
    let o = ordgap(&[
        "gaps",
        "--dist",
        "weibull:shape=2",
        "--n",
        "2..12",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let seq = sequence_from_csv(&text, Method::Direct).unwrap();
    let d = ordgap::dist::make_builtin("weibull:shape=2").unwrap();
    let cfg = ordgap::QuadratureConfig::default();
    for (i, n) in (2..=12).enumerate() {
        let g = ordgap::gaps::r_direct(&d, n, &cfg).unwrap();
        assert_eq!(seq.values[i].to_bits(), g.value.to_bits());
        assert_eq!(seq.err_estimates[i].to_bits(), g.err_estimate.to_bits());
    }
}

#[test]
fn general_gaps_and_continuous_argument() {
    let o = ordgap(&[
        "gaps",
        "--dist",
        "uniform:a=0,b=1",
        "--n",
        "3..5",
        "--k",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for r in parse_gaps_csv(&stdout(&o)).unwrap() {
        assert!((r.value - 1.0 / (r.n as f64 + 1.0)).abs() < 1e-10);
    }
    let o = ordgap(&[
        "gaps",
        "--dist",
        "exp:lambda=2",
        "--u",
        "3.5",
        "--out",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-8);
}

#[test]
fn mc_and_approx_commands() {
    let o = ordgap(&[
        "mc",
        "--dist",
        "uniform:a=0,b=1",
        "--n",
        "3",
        "--k",
        "1",
        "--samples",
        "20000",
        "--shards",
        "4",
        "--out",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mean = v[0]["mean"].as_f64().unwrap();
    let se = v[0]["stderr"].as_f64().unwrap();
    assert!((mean - 0.25).abs() <= 4.0 * se);
    assert_eq!(v[0]["shards"], 4);

    let o = ordgap(&[
        "approx",
        "--dist",
        "uniform:a=0,b=1",
        "--n",
        "4",
        "--out",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["rows"][0]["abs_gap"].as_f64().unwrap() - 0.05).abs() < 1e-10);

    let o = ordgap(&[
        "approx",
        "--dist",
        "oscexp:eps=0.2",
        "--n",
        "2..30",
        "--out",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["fit"]["constant"].as_f64().unwrap() > 0.0);
}

#[test]
fn distribution_listing_and_probe() {
    let o = ordgap(&["dist-list"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("oscexp"));
    let o = ordgap(&[
        "dist-probe",
        "--dist",
        "exp:lambda=2",
        "--x",
        "-1,0.5",
        "--out",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["in_support"], false);
    assert_eq!(v[1]["inverse_hazard"], 0.5);
}

#[test]
fn exit_codes() {
    assert_eq!(ordgap(&[]).status.code(), Some(2));
    assert_eq!(ordgap(&["gaps"]).status.code(), Some(2));
    assert_eq!(
        ordgap(&["gaps", "--dist", "exp:lambda=1", "--n", "5..2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ordgap(&["gaps", "--dist", "nosuch:a=1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ordgap(&["gaps", "--dist", "exp:lambda=1", "--method", "simpson"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ordgap(&["gaps", "--dist", "exp:lambda=1", "--out", "xml"])
            .status
            .code(),
        Some(2)
    );
    let o = ordgap(&[
        "gaps",
        "--dist",
        "weibull:shape=0.5",
        "--method",
        "stieltjes",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr)
        .unwrap()
        .contains("increasing hazard"));
    assert_eq!(
        ordgap(&["gaps", "--dist", "exp:lambda=0"]).status.code(),
        Some(1)
    );
    assert_eq!(ordgap(&["--help"]).status.code(), Some(0));
}
