//! End-to-end tests of the command-line surface: flags, envelope layout,
//! exit codes, and output determinism.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frackell"))
        .args(args)
        .env_remove("FRACKELL_DIGITS")
        .output()
        .expect("spawn frackell")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON envelope")
}

fn payload_f64(v: &Value) -> f64 {
    v.as_str().expect("decimal string").parse().expect("parseable number")
}

#[test]
fn ml_exponential_value() {
    let out = run(&["ml", "--mu", "1", "--z", "1"]);
    assert!(out.status.success());
    let doc = json_of(&out);
    let value = doc["payload"]["value"].as_str().unwrap();
    assert!(value.starts_with("2.71828182845904523536028747135266"), "{value}");
    assert_eq!(doc["metadata"]["digits"], 50);
    assert_eq!(doc["metadata"]["mu"], "1");
    // envelope echoes the full resolved parameter set
    assert_eq!(doc["metadata"]["params"]["derivative"], 0);
    assert_eq!(doc["metadata"]["params"]["z"], "1");
}

#[test]
fn ml_at_zero_and_half_order() {
    let out = run(&["ml", "--mu", "0.7", "--z", "0"]);
    assert!(out.status.success());
    let doc = json_of(&out);
    assert_eq!(payload_f64(&doc["payload"]["value"]), 1.0);

    let out = run(&["ml", "--mu", "0.5", "--z", "-1"]);
    let doc = json_of(&out);
    let v = payload_f64(&doc["payload"]["value"]);
    assert!((v - 0.4275835761558070).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_two() {
    // mu outside (0,1]
    let out = run(&["ml", "--mu", "2", "--z", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    // missing required flag
    let out = run(&["ml", "--mu", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown suite
    let out = run(&["check", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // unknown subcommand
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_three() {
    // far outside the decay horizon: the term cap trips first
    let out = run(&["ml", "--mu", "0.25", "--z", "30"]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("converge"), "stderr: {msg}");
}

#[test]
fn pmf_reduces_to_poisson() {
    let out = run(&["pmf", "--mu", "1", "--nu", "1", "--t", "1", "--max-n", "5"]);
    assert!(out.status.success());
    let doc = json_of(&out);
    let masses = doc["payload"]["masses"].as_array().unwrap();
    assert_eq!(masses.len(), 6);
    let mut fact = 1.0f64;
    for (n, m) in masses.iter().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        let expect = (-1.0f64).exp() / fact;
        let got = payload_f64(&m["mass"]);
        assert!((got - expect).abs() < 1e-12 * expect, "n={n}");
    }
}

#[test]
fn pmf_degenerate_time_zero() {
    let out = run(&["pmf", "--mu", "0.5", "--nu", "1", "--t", "0", "--max-n", "3"]);
    let doc = json_of(&out);
    let masses = doc["payload"]["masses"].as_array().unwrap();
    assert_eq!(payload_f64(&masses[0]["mass"]), 1.0);
    for m in &masses[1..] {
        assert_eq!(payload_f64(&m["mass"]), 0.0);
    }
}

#[test]
fn bell_numbers_classic_row() {
    let out = run(&["bell-numbers", "--mu", "1", "--max-m", "4"]);
    let doc = json_of(&out);
    let values = doc["payload"]["values"].as_array().unwrap();
    let got: Vec<f64> = values.iter().map(|v| payload_f64(&v["value"])).collect();
    assert_eq!(got, vec![1.0, 1.0, 2.0, 5.0, 15.0]);
}

#[test]
fn bell_polynomials_at_zero_and_reference() {
    let out = run(&["bell", "--mu", "0.5", "--x", "0", "--max-m", "3"]);
    let doc = json_of(&out);
    let got: Vec<f64> = doc["payload"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| payload_f64(&v["value"]))
        .collect();
    assert_eq!(got, vec![1.0, 0.0, 0.0, 0.0]);

    let out = run(&["bell", "--mu", "0.5", "--x", "1", "--max-m", "2"]);
    let doc = json_of(&out);
    let got: Vec<f64> = doc["payload"]["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| payload_f64(&v["value"]))
        .collect();
    assert!((got[0] - 1.0).abs() < 1e-15);
    assert!((got[1] - 1.1283791670955126).abs() < 1e-15);
    assert!((got[2] - 3.1283791670955126).abs() < 1e-15);
}

#[test]
fn stirling_triangle_csv_shape() {
    let out = run(&["stirling", "--mu", "0.5", "--max-m", "3", "--exact", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# denominator: Gamma(mu*l+1)");
    assert_eq!(lines[1], "m/l,1,2,3");
    assert_eq!(lines[2], "1,1,,");
    assert_eq!(lines[3], "2,1,2,");
    assert_eq!(lines[4], "3,1,6,6");
}

#[test]
fn check_suites_pass_through_cli() {
    let out = run(&["check", "--suite", "mu1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json_of(&out);
    assert_eq!(doc["payload"]["passed"], true);

    let out = run(&["check", "--suite", "stirling-gf", "--mu", "0.5", "--digits", "40"]);
    assert!(out.status.success());
}

#[test]
fn sample_is_reproducible_and_degenerate_case_is_zero() {
    let args = ["sample", "--mu", "0.5", "--nu", "1", "--t", "0", "--count", "10", "--seed", "1"];
    let a = run(&args);
    assert!(a.status.success());
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout, "same flags must give byte-identical output");
    let doc = json_of(&a);
    let moments = doc["payload"]["moments"].as_array().unwrap();
    // degenerate law: every sample is zero, so m >= 1 moments vanish
    assert_eq!(payload_f64(&moments[0]["empirical"]), 1.0);
    for m in &moments[1..] {
        assert_eq!(payload_f64(&m["empirical"]), 0.0);
    }
}

#[test]
fn sample_moments_track_analytic_values() {
    let out = run(&[
        "sample", "--mu", "1", "--nu", "1", "--t", "1", "--count", "100000", "--seed", "7",
        "--moments", "2", "--digits", "30",
    ]);
    assert!(out.status.success());
    let doc = json_of(&out);
    let moments = doc["payload"]["moments"].as_array().unwrap();
    for m in &moments[1..] {
        let emp = payload_f64(&m["empirical"]);
        let ana = payload_f64(&m["analytic"]);
        let se: f64 = m["std_error"].as_str().unwrap().parse().unwrap();
        assert!((emp - ana).abs() <= 4.0 * se, "empirical {emp} vs {ana} (se {se})");
    }
    assert_eq!(doc["payload"]["rng"], frackell::sampler::RNG_ALGORITHM);
}

#[test]
fn digits_flag_beats_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_frackell"))
        .args(["ml", "--mu", "1", "--z", "1"])
        .env("FRACKELL_DIGITS", "30")
        .output()
        .unwrap();
    let doc = json_of(&out);
    assert_eq!(doc["metadata"]["digits"], 30);

    let out = Command::new(env!("CARGO_BIN_EXE_frackell"))
        .args(["ml", "--mu", "1", "--z", "1", "--digits", "20"])
        .env("FRACKELL_DIGITS", "30")
        .output()
        .unwrap();
    let doc = json_of(&out);
    assert_eq!(doc["metadata"]["digits"], 20);
}

#[test]
fn json_values_round_trip_at_stated_precision() {
    for args in [
        vec!["ml", "--mu", "0.5", "--z", "-1"],
        vec!["ml", "--mu", "0.25", "--z", "2", "--digits", "35"],
        vec!["bell", "--mu", "0.75", "--x", "2.5", "--max-m", "4"],
    ] {
        let out = run(&args);
        let doc = json_of(&out);
        let digits = doc["metadata"]["digits"].as_u64().unwrap() as u32;
        let strings: Vec<String> = match &doc["payload"] {
            v if v.get("value").is_some() => vec![v["value"].as_str().unwrap().into()],
            v => v["values"]
                .as_array()
                .unwrap()
                .iter()
                .map(|e| e["value"].as_str().unwrap().into())
                .collect(),
        };
        for s in strings {
            let parsed = frackell::PrecReal::parse(&s, digits).unwrap();
            assert_eq!(
                parsed.to_decimal_string(),
                s,
                "round trip at {digits} digits"
            );
        }
    }
}
