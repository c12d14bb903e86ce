use std::fs;
use std::path::Path;
use std::process::Command;

use spectral_shoot::cli::RunConfig;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_spectral-shoot");

const EVAL: &str = r#"{
  "potential": { "builtin": "exp_wall" },
  "command": "eval",
  "grid": { "re_min": -20.0, "re_max": 150.0, "n": 9, "im_min": -3.0, "im_max": 3.0, "n_im": 2 }
}"#;

fn run(dir: &Path, config: &str, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = Command::new(BIN)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .env_remove("SPECTRAL_SHOOT_THREADS")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

#[test]
fn eval_output_is_identical_across_runs_and_thread_counts() {
    let mut csvs = Vec::new();
    for threads in ["1", "4", "4"] {
        let dir = TempDir::new().unwrap();
        let (code, text) = run(dir.path(), EVAL, &["--threads", threads]);
        assert_eq!(code, 0, "{text}");
        csvs.push(fs::read(dir.path().join("out/samples.csv")).unwrap());
    }
    assert!(!csvs[0].is_empty());
    assert!(csvs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn meta_records_the_config_hash() {
    let dir = TempDir::new().unwrap();
    let (code, text) = run(dir.path(), EVAL, &[]);
    assert_eq!(code, 0, "{text}");
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/meta.json")).unwrap()).unwrap();
    let expected = RunConfig::from_json(EVAL).unwrap().hash();
    assert_eq!(meta["config_sha256"], expected.as_str());
    assert_eq!(meta["status"], "ok");
    assert_eq!(meta["command"], "eval");
    assert!(meta["certificates"]["fd_checked"].as_u64().unwrap() >= 1);
}

#[test]
fn eigs_rows_carry_small_residuals() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"potential": {"builtin": "exp_wall"}, "command": "eigs", "eigs": {"e_min": 0.0, "e_max": 200.0, "n": 120}}"#;
    let (code, text) = run(dir.path(), config, &[]);
    assert_eq!(code, 0, "{text}");
    let mut reader = csv::Reader::from_path(dir.path().join("out/eigenvalues.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "residual").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 2);
    for row in rows {
        assert!(row[col].parse::<f64>().unwrap() <= 1e-8);
    }
}

#[test]
fn exit_codes_follow_the_error_family() {
    let cases: [(&str, &[&str], i32); 5] = [
        (EVAL, &["--command", "frobnicate"], 10),
        (
            r#"{"potential": {"builtin": "exp_wall"}, "command": "eval", "grid": {"re_min": 10.0, "re_max": 20.0, "n": 2},
                "pipeline": {"tail": {"horizon": 0.5}}}"#,
            &[],
            20,
        ),
        (
            r#"{"potential": {"builtin": "exp_wall"}, "command": "eval", "grid": {"re_min": 10.0, "re_max": 20.0, "n": 2},
                "pipeline": {"slope": {"max_iters": 1}}}"#,
            &[],
            30,
        ),
        (
            r#"{"potential": {"builtin": "truncated_morse", "kappa": 2.25}, "command": "oracle-compare",
                "grid": {"re_min": -60.0, "re_max": -4.0, "n": 4}, "oracle": {"reference_energy": -5.0, "tol": 1e-12}}"#,
            &[],
            40,
        ),
        (r#"{"potential": {"builtin": "harmonic"}, "command": "eval"}"#, &[], 10),
    ];
    for (config, extra, want) in cases {
        let dir = TempDir::new().unwrap();
        let (code, text) = run(dir.path(), config, extra);
        assert_eq!(code, want, "{config}\n{text}");
    }
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(BIN)
        .arg("--config")
        .arg(dir.path().join("absent.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(10));
}
