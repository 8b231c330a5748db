use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_boltzlab");

const SMALL_CONFIG: &str = r#"{
  "kernel": {"s": 1, "cutoff": 8},
  "grid": {"radius": 3, "points": 9},
  "quadrature": {"panels": 12, "order": 4, "azimuth": 8},
  "time": {"horizon": 0.2}
}"#;

const EXAMPLE_MEASURE: &str = r#"{
  "atoms": [
    {"x": [1, 0, 0], "w": 0.08333333333333333}, {"x": [-1, 0, 0], "w": 0.08333333333333333},
    {"x": [0, 1, 0], "w": 0.08333333333333333}, {"x": [0, -1, 0], "w": 0.08333333333333333},
    {"x": [0, 0, 1], "w": 0.08333333333333333}, {"x": [0, 0, -1], "w": 0.08333333333333334}
  ],
  "gaussians": [{"mean": [0, 0, 0], "var": 1.0, "w": 0.5}]
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], threads: &str) -> Output {
    Command::new(BIN).args(args).env("BOLTZLAB_THREADS", threads).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn version_reports_artifact_format() {
    let out = run(&["--version"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("artifact format version 1"), "{text}");
}

#[test]
fn missing_config_exits_two() {
    let out = run(&["evolve", "--config", "/definitely/not/here.json", "--init", "x.json", "--out-dir", "/tmp/none"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));
}

#[test]
fn malformed_config_names_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", &SMALL_CONFIG.replace("\"cutoff\": 8", "\"cutof\": 8"));
    let init = write(dir.path(), "init.json", EXAMPLE_MEASURE);
    let out = run(&["evolve", "--config", &cfg, "--init", &init, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cutof") && err.contains("line 2"), "{err}");
}

#[test]
fn no_subcommand_and_bad_flags_exit_two() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["moments", "--alpha-list", "one"])), 2);
    assert_eq!(code(&run_env(&["moments", "--s", "1"], "zero")), 2);
}

#[test]
fn moments_table_meets_tolerance_and_is_deterministic() {
    let out = run(&["moments", "--s", "2", "--alpha-list", "1,2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,s,quadrature,analytic,rel_err"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let rel: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rel <= 1e-8, "{row}");
    }
    assert_eq!(run(&["moments", "--s", "2", "--alpha-list", "1,2"]).stdout, out.stdout);
    assert_eq!(code(&run(&["--oracle", "moments", "--s", "2", "--alpha-list", "1,2"])), 0);
}

#[test]
fn moments_json_with_eps_rows() {
    let out = run(&["moments", "--s", "1", "--alpha-list", "1,2", "--eps-list", "0.1,0.01", "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["moments"].as_array().unwrap().len(), 2);
    let eps = v["eps"].as_array().unwrap();
    assert_eq!(eps.len(), 4);
    let l2 = eps.iter().find(|r| r["alpha"] == 2.0 && r["eps"] == 0.01).unwrap();
    // cos² + sin² = 1, so λ_{ε,2} is the outside mass a_ε.
    let (l, a) = (l2["lambda_eps_alpha"].as_f64().unwrap(), l2["a_eps"].as_f64().unwrap());
    assert!(((l - a) / a).abs() < 1e-12);
}

#[test]
fn probe_prints_consistent_split() {
    let out = run(&["probe", "--xi", "0.9,0.2,-1.1", "--eps", "0.01"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["decomposition_defect"].as_f64().unwrap() < 1e-10);
    assert!(v["split"]["a_eps"].as_f64().unwrap() > 0.0);
    assert_eq!(code(&run(&["probe", "--xi", "1,0", "--eps", "0.01"])), 2);
}

#[test]
fn evolve_then_diagnose_from_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL_CONFIG);
    let init = write(dir.path(), "init.json", EXAMPLE_MEASURE);
    let traj = dir.path().join("traj");
    let t = traj.to_str().unwrap();
    assert_eq!(code(&run(&["evolve", "--config", &cfg, "--init", &init, "--out-dir", t])), 0);
    let csv = fs::read_to_string(traj.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,alpha,knorm,shell_sup,conservation_residual\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    assert!(traj.join("final.bin").exists() && traj.join("final.bin.json").exists());

    let coercive = run(&["coercivity", "--trajectory-dir", t]);
    assert_eq!(code(&coercive), 0);
    let report: serde_json::Value = serde_json::from_slice(&coercive.stdout).unwrap();
    assert!(report["d_t"].as_f64().unwrap() > 0.0);

    let smooth = run(&["smoothing", "--trajectory-dir", t, "--N", "4", "--delta", "0.01"]);
    assert_eq!(code(&smooth), 0);
    let text = String::from_utf8(smooth.stdout).unwrap();
    assert!(text.starts_with("t,weighted_l2,baseline,envelope\n"));
    let footer = text.lines().last().unwrap().trim_start_matches("# ");
    let footer: serde_json::Value = serde_json::from_str(footer).unwrap();
    assert!(footer["fitted_c"].as_f64().unwrap().is_finite());

    assert_eq!(code(&run(&["coercivity", "--trajectory-dir", dir.path().to_str().unwrap()])), 2);
}

#[test]
fn evolve_output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL_CONFIG);
    let init = write(dir.path(), "init.json", EXAMPLE_MEASURE);
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "2", "1"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{k}"));
        let o = run_env(&["evolve", "--config", &cfg, "--init", &init, "--out-dir", out_dir.to_str().unwrap()], threads);
        assert_eq!(code(&o), 0);
        outputs.push((fs::read(out_dir.join("trajectory.csv")).unwrap(), fs::read(out_dir.join("final.bin")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn stability_of_identical_data_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL_CONFIG);
    let init = write(dir.path(), "init.json", EXAMPLE_MEASURE);
    let out = run(&["stability", "--config", &cfg, "--init-a", &init, "--init-b", &init, "--alpha", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,distance,envelope,ratio\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0.000000000")));
}

#[test]
fn cutoff_sweep_requires_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let init = write(dir.path(), "init.json", r#"{"atoms":[{"x":[0,0,0],"w":1}]}"#);
    let plain = write(dir.path(), "plain.json", SMALL_CONFIG);
    assert_eq!(code(&run(&["cutoff-sweep", "--config", &plain, "--init", &init])), 2);
    let with = write(dir.path(), "sched.json", &SMALL_CONFIG.replace("\"cutoff\": 8", "\"cutoff\": 8, \"schedule\": [4, 8]"));
    let out = run(&["cutoff-sweep", "--config", &with, "--init", &init]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "k,n_k,n_next,difference\n0,4,8,0.000000000000e0\n");
}

#[test]
fn example_pipeline_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["example", "--points", "9", "--horizon", "0.2", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["failures"].as_array().unwrap().is_empty());
    assert!((v["knorm2_minus_one"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-4);
    assert!(dir.path().join("example.json").exists());
}
