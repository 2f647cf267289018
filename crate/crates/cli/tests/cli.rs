use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasitool"))
        .args(args)
        .current_dir(dir)
        .env_remove("QUASITOOL_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

const DECOMPOSITION: &str = r#"{"lattice": {"basis": [["1"]]}, "parts": [
  {"theta": ["0"], "poly": {"terms": [{"freq": ["0"], "re": 1.0, "im": 0.0}, {"freq": ["1/4"], "re": 0.5, "im": -0.25}]}},
  {"theta": ["sqrt2"], "poly": {"terms": [{"freq": ["3/8"], "re": -1.0, "im": 0.5}]}}
]}"#;

#[test]
fn fibonacci_preset_reports_density() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen", "preset", "fib", "--R", "200", "-o", "fib.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fib.json")).unwrap()).unwrap();
    assert!((v["density"].as_f64().unwrap() - 0.4472).abs() < 1e-4);
    assert_eq!(v["header"]["config"]["command"]["gen"]["preset"]["name"], "fib");
    assert!(v["header"]["threads"].as_u64().unwrap() >= 1);
}

#[test]
fn poisson_on_integers() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["poisson", "--lattice", "Z", "--f", "gauss:1", "--R", "30"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["report"]["abs_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn decompose_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.json"), DECOMPOSITION).unwrap();
    let out = run(&["gen", "synth", "--decomposition", "d.json", "--R", "150", "-o", "synth.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let args = ["decompose", "--input", "synth.json", "--lattice", "Z", "--offsets", "0,sqrt2", "--K", "64", "--expect", "d.json"];
    let a = run(&args, dir.path());
    let b = run(&args, dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["comparison"]["max_coefficient_error"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["decomposition"]["parts"].as_array().unwrap().len(), 2);
}

#[test]
fn floats_use_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["poisson", "--R", "30"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"lhs\":[1.0864348112133082e0,"), "{text}");
}

#[test]
fn alternating_comb_peaks_at_half_integers() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "preset", "altsign", "--R", "200", "-o", "alt.json"], dir.path());
    let out = run(&["diffract", "--input", "alt.json", "--grid=-1:1:401", "--csv", "scan.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let peaks: Vec<f64> = json(&out)["peaks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["location"][0].as_f64().unwrap())
        .collect();
    assert_eq!(peaks.len(), 2);
    assert!(peaks.iter().all(|t| (t.abs() - 0.5).abs() < 1e-6));
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert!(csv.starts_with("t1,re,im,abs"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["poisson", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&[], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["poisson", "--lattice", "Q7"], dir.path()).status.code(), Some(1));
    // density condition fails
    assert_eq!(run(&["gapcert", "--lambda=-1,1", "--R", "4", "--delta", "1", "--a", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["verify"], dir.path()).status.code(), Some(0));
}

#[test]
fn gap_certificate_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gapcert", "--lambda=-7,2.5,11", "--R", "60", "--delta", "1", "--a", "6"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["certificate"]["report"]["max_on_lambda"].as_f64().unwrap() < 1e-12);
}

#[test]
fn analyze_and_autocorr_on_fibonacci() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "modelset", "--scheme", "fib", "--R", "200", "-o", "fib.json"], dir.path());
    let out = run(&["analyze", "--input", "fib.json", "--csv", "dens.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let d = v["densities"]["d_sharp"].as_array().unwrap();
    assert!(d.iter().all(|x| (x.as_f64().unwrap() - 0.4472).abs() < 0.05));
    assert_eq!(v["meyer"]["success"], true);
    let out = run(&["autocorr", "--input", "fib.json", "--h", "tau"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["count"].as_u64().unwrap() > 0);
}

#[test]
fn every_subcommand_help_names_its_construct() {
    let dir = tempfile::tempdir().unwrap();
    let expect = [
        ("gen", "cut-and-project"),
        ("analyze", "Meyer"),
        ("diffract", "diffraction"),
        ("poisson", "Poisson summation"),
        ("gapcert", "Spectral-gap certificate"),
        ("autocorr", "Autocorrelation measure"),
        ("decompose", "trigonometric-polynomial"),
        ("verify", "invariant suite"),
    ];
    for (cmd, needle) in expect {
        let out = run(&[cmd, "--help"], dir.path());
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains(needle), "{cmd}: {text}");
    }
}
