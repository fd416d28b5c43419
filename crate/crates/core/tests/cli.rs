use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beltrami-lab"))
        .args(args)
        .arg("--set")
        .arg(format!("output_dir={}", dir.display()))
        .env_remove("BELTRAMI_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn boundary_samples(dir: &Path, header: &str, row: impl Fn(f64) -> String) -> std::path::PathBuf {
    let mut csv = format!("{header}\n");
    for k in 0..256 {
        let t = std::f64::consts::TAU * k as f64 / 256.0;
        csv.push_str(&format!("{t},{}\n", row(t)));
    }
    let path = dir.join("input.csv");
    fs::write(&path, csv).unwrap();
    path
}

#[test]
fn trivial_solve_recovers_the_identity_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["solve", "--set", "boundary.expr=cos(theta)"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trace = rows(&dir.path().join("trace.csv"));
    assert_eq!(trace.len(), 256);
    for row in trace {
        assert!((row[1] - row[0].cos()).abs() < 1e-10);
        assert!((row[2] - row[0].sin()).abs() < 1e-10);
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(
        report["report"]["norms"]["beltrami_residual"].as_f64().unwrap() < 1e-10,
        "{report}"
    );
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "solve",
        "--set",
        r#"coefficient={"kind":"radial","a":0.5}"#,
        "--set",
        "boundary.expr=sin(2*theta)",
    ];
    assert_eq!(code(&lab(a.path(), &args)), 0);
    assert_eq!(code(&lab(b.path(), &args)), 0);
    for name in ["field.csv", "trace.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn radial_oracle_block_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        dir.path(),
        &[
            "solve",
            "--set",
            r#"coefficient={"kind":"radial","a":0.5}"#,
            "--set",
            "oracle=true",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let errors: Vec<f64> = report["oracle"]["rings"]
        .as_array()
        .expect("oracle block")
        .iter()
        .map(|ring| ring["relative_l2_error"].as_f64().unwrap())
        .collect();
    assert!(!errors.is_empty(), "{text}");
    assert!(errors.iter().all(|e| *e < 1e-8), "{text}");
}

#[test]
fn hilbert_of_cosine_is_sine() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&lab(dir.path(), &["hilbert"])), 0);
    for row in rows(&dir.path().join("hilbert.csv")) {
        assert!((row[2] - row[0].sin()).abs() < 1e-10);
    }
}

#[test]
fn incompatible_neumann_data_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&lab(dir.path(), &["neumann", "--set", "boundary.expr=1 + cos(theta)"])),
        3
    );
    assert_eq!(
        code(&lab(dir.path(), &["neumann", "--set", "boundary.expr=cos(theta)"])),
        0
    );
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let spec = format!(r#"boundary={{"kind":"csv","path":"{}"}}"#, missing.display());
    assert_eq!(code(&lab(dir.path(), &["solve", "--set", &spec])), 2);
    assert_eq!(code(&lab(dir.path(), &["solve", "--set", "grid.n_theta=100"])), 2);
    assert_eq!(code(&lab(dir.path(), &["verify", "--only", "no_such_criterion"])), 2);
}

#[test]
fn csv_boundary_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = boundary_samples(dir.path(), "theta,value", |t| t.cos().to_string());
    let spec = format!(r#"boundary={{"kind":"csv","path":"{}"}}"#, path.display());
    let out = lab(dir.path(), &["hilbert", "--set", &spec]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for row in rows(&dir.path().join("hilbert.csv")) {
        assert!((row[2] - row[0].sin()).abs() < 1e-10);
    }
}

#[test]
fn config_file_with_partial_sections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"boundary": {"kind": "expression", "expr": "cos(2*theta)"}, "grid": {"n_theta": 128}}"#,
    )
    .unwrap();
    let out = lab(dir.path(), &["--config", cfg.to_str().unwrap(), "hilbert"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let table = rows(&dir.path().join("hilbert.csv"));
    assert_eq!(table.len(), 128);
    for row in table {
        assert!((row[2] - (2.0 * row[0]).sin()).abs() < 1e-10);
    }
}

#[test]
fn density_trend_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&lab(dir.path(), &["density"])), 0);
    let trend = rows(&dir.path().join("trend.csv"));
    assert_eq!(trend.len(), 4);
    for w in trend.windows(2) {
        assert!(w[1][0] < w[0][0] && w[1][1] > w[0][1], "{trend:?}");
    }
}

#[test]
fn factorize_certificates_hold() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(
        dir.path(),
        &[
            "factorize",
            "--set",
            r#"coefficient={"kind":"expression","nu":"0.2*x*y + 0.1*x"}"#,
            "--set",
            "boundary.expr=2 + 0.3*cos(theta)",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let holds: Vec<bool> = text
        .match_indices("\"holds\":")
        .map(|(i, _)| text[i + 8..].trim_start().starts_with("true"))
        .collect();
    assert!(!holds.is_empty() && holds.iter().all(|h| *h), "{text}");
    for name in ["w.csv", "s.csv", "f.csv"] {
        assert!(dir.path().join(name).exists());
    }
}

#[test]
fn verify_subset_passes_and_coarse_grid_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["verify", "--only", "classical", "--only", "estims"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["all_passed"], true);
    assert!(dir.path().join("verify.json").exists());

    let out = lab(dir.path(), &["verify", "--set", "grid.n_theta=16"]);
    assert_eq!(code(&out), 1);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let passed = |id: &str| {
        json["criteria"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["id"] == id)
            .unwrap()["passed"]
            .as_bool()
            .unwrap()
    };
    assert!(passed("classical") && passed("constant_sigma"));
    assert!(!passed("density") && !passed("duality"));
}

#[test]
fn operator_on_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = boundary_samples(dir.path(), "theta,re,im", |t| format!("{},0", (3.0 * t).cos()));
    let out = lab(
        dir.path(),
        &["op", "--operator", "conjugation_h0", "--input", input.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for row in rows(&dir.path().join("op.csv")) {
        assert!((row[1] - (3.0 * row[0]).sin()).abs() < 1e-10);
    }
}
