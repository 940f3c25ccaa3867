use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

const SMALL_MEASURE: &str = "atoms:0.3:0.2,0.6:0.6,1:1";

fn skpha(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skpha")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn parisi_at_high_temperature_matches_the_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = skpha(&["parisi", "--beta", "0.3", "--out", "p"], tmp.path());
    ok(&out);
    let m = manifest(&tmp.path().join("p"));
    let p = m["results"]["functional"].as_f64().unwrap();
    assert!((p - (2f64.ln() + 0.045)).abs() <= 1e-3, "{p}");
    assert!(tmp.path().join("p/measure.csv").exists());
    assert_eq!(m["command"], "parisi");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn optimize_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |dir| vec!["optimize", "--n", "1000", "--beta", "2", "--eta", "0.01", "--seed", "3", "--out", dir];
    ok(&skpha(&args("a"), tmp.path()));
    ok(&skpha(&args("b"), tmp.path()));
    let (a, b) = (manifest(&tmp.path().join("a")), manifest(&tmp.path().join("b")));
    let e = a["results"]["energy"].as_f64().unwrap();
    assert_eq!(e, b["results"]["energy"].as_f64().unwrap());
    assert!(e > 0.0);
    let ta = std::fs::read_to_string(tmp.path().join("a/trajectory.csv")).unwrap();
    assert_eq!(ta, std::fs::read_to_string(tmp.path().join("b/trajectory.csv")).unwrap());
}

#[test]
fn gen_then_optimize_on_the_saved_instance() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&skpha(&["gen", "--n", "80", "--seed", "11", "--out", "g"], tmp.path()));
    let inst = tmp.path().join("g/instance.bin");
    assert!(inst.exists());
    let common = ["--n", "80", "--beta", "1.5", "--measure", SMALL_MEASURE, "--eta", "0.05"];
    let mut from_file = vec!["optimize", "--instance", inst.to_str().unwrap(), "--out", "f"];
    from_file.extend(common);
    ok(&skpha(&from_file, tmp.path()));
    let mut sampled = vec!["optimize", "--seed", "11", "--out", "s"];
    sampled.extend(common);
    ok(&skpha(&sampled, tmp.path()));
    let (f, s) = (manifest(&tmp.path().join("f")), manifest(&tmp.path().join("s")));
    // Same couplings, but the step noise is seeded from `--seed` (0 versus 11).
    assert_eq!(f["results"]["n"], 80);
    assert!(s["results"]["energy"].as_f64().unwrap().is_finite());
    let csv = std::fs::read_to_string(tmp.path().join("f/trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + f["results"]["steps"].as_u64().unwrap() as usize + 1);
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("run.cfg"), "beta = 0.5\nmeasure = delta0\nseed = 4  # kept\n").unwrap();
    ok(&skpha(&["parisi", "--config", "run.cfg", "--beta", "0.3", "--out", "c"], tmp.path()));
    let m = manifest(&tmp.path().join("c"));
    assert_eq!(m["config"]["beta"], 0.3);
    assert_eq!(m["config"]["seed"], 4);
    assert_eq!(m["config"]["measure"], "delta0");
    let p = m["results"]["functional"].as_f64().unwrap();
    assert!((p - (2f64.ln() + 0.045)).abs() < 1e-4);
}

#[test]
fn bad_invocations_exit_nonzero_with_a_message() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["optimize", "--bogus", "1"],
        &["frobnicate"],
        &["optimize", "--instance", "missing.bin", "--measure", "delta1", "--n", "10"],
        &["parisi", "--config", "missing.cfg"],
        &["parisi", "--delta", "0.5"],
        &["parisi", "--beta", "-1"],
        &["optimize", "--backend", "dense", "--n", "5000"],
        &["parisi", "--measure", "atoms:0.5:0.9,1:0.2"],
        &["replay", "missing.json"],
    ];
    for args in cases {
        let out = skpha(args, tmp.path());
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty(), "{args:?} printed nothing");
    }
}

#[test]
fn instance_size_must_match() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&skpha(&["gen", "--n", "20", "--out", "g"], tmp.path()));
    let out = skpha(&["optimize", "--instance", "g/instance.bin", "--n", "30", "--measure", "delta1"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n = 20"));
}

#[test]
fn replay_reproduces_the_results() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["optimize", "--n", "60", "--beta", "1.5", "--measure", SMALL_MEASURE, "--eta", "0.05", "--seed", "9", "--out", "r"];
    ok(&skpha(&args, tmp.path()));
    ok(&skpha(&["replay", "r/manifest.json", "--out", "r2"], tmp.path()));
    let (a, b) = (manifest(&tmp.path().join("r")), manifest(&tmp.path().join("r2")));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(b["config"]["out"], "r2");
}

#[test]
fn sde_and_bench_write_their_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let common = ["--n", "120", "--beta", "1.5", "--measure", SMALL_MEASURE, "--eta", "0.05"];
    let mut sde = vec!["sde", "--paths", "400", "--out", "s"];
    sde.extend(common);
    ok(&skpha(&sde, tmp.path()));
    let m = manifest(&tmp.path().join("s"));
    assert!(m["results"]["max_w2"].as_f64().unwrap() > 0.0);
    for f in ["sde_summary.csv", "convergence.csv", "trajectory.csv", "measure.csv"] {
        assert!(tmp.path().join("s").join(f).exists(), "{f}");
    }
    let mut bench = vec!["bench", "--seeds", "2", "--trials", "20", "--out", "b"];
    bench.extend(common);
    ok(&skpha(&bench, tmp.path()));
    let m = manifest(&tmp.path().join("b"));
    assert_eq!(m["seeds"], serde_json::json!([0, 1]));
    let rows = std::fs::read_to_string(tmp.path().join("b/bench.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(m["results"]["mean_top_eigvec"].as_f64().unwrap() > m["results"]["mean_random"].as_f64().unwrap());
}

#[test]
fn fast_verification_suite_passes_within_ten_minutes() {
    let tmp = tempfile::tempdir().unwrap();
    let clock = Instant::now();
    let out = skpha(&["verify", "--suite", "fast", "--out", "v"], tmp.path());
    let secs = clock.elapsed().as_secs_f64();
    ok(&out);
    assert!(secs <= 600.0, "took {secs} s");
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("v/verify_report.json")).unwrap()).unwrap();
    assert!(report["checks"].as_array().unwrap().len() >= 15);
    assert_eq!(manifest(&tmp.path().join("v"))["ok"], true);
}
