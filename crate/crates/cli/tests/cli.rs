use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ppaas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppaas"))
        .args(args)
        .env_remove("PPAAS_OUT_DIR")
        .env_remove("CI")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn blobs(dir: &Path) -> String {
    let path = dir.join("blobs.csv");
    let o = ppaas(&["generate", "blobs", "--seed", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    path.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn evaluate_releases_at_zero_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let input = blobs(dir.path());
    let out = dir.path().join("out");
    let o = ppaas(&[
        "evaluate", "--input", &input, "--label", "class", "--fi-threshold", "0.0", "--seed", "7", "--out-dir", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "rank_table.csv", "released.csv", "released.provenance.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["released"], true);
    assert_eq!(report["rounds_used"], 1);
    assert_eq!(report["provenance"]["seed"], 7);
    assert_eq!(report["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    let side: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("released.provenance.json")).unwrap()).unwrap();
    assert_eq!(side["run"]["config_hash"], report["provenance"]["config_hash"]);
}

#[test]
fn unreachable_threshold_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = blobs(dir.path());
    let out = dir.path().join("out");
    // a stale release from an earlier run must not survive a miss
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join("released.csv"), "stale").unwrap();
    let o = ppaas(&[
        "evaluate", "--input", &input, "--fi-threshold", "1.01", "--max-rounds", "2", "--seed", "7", "--out-dir", s(&out),
    ]);
    assert_eq!(code(&o), 2);
    assert!(out.join("report.json").is_file());
    assert!(!out.join("released.csv").exists());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["released"], false);
    assert_eq!(report["rounds_used"], 2);
}

#[test]
fn errors_exit_one() {
    let o = ppaas(&["evaluate", "--input", "/definitely/not/here.csv"]);
    assert_eq!(code(&o), 1);
    let o = ppaas(&["evaluate", "--no-such-flag"]);
    assert_eq!(code(&o), 1);
    let dir = tempfile::tempdir().unwrap();
    let input = blobs(dir.path());
    let o = ppaas(&["evaluate", "--input", &input, "--pool", "rotation,teleport", "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("teleport"));
}

#[test]
fn evaluate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = blobs(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = ppaas(&["evaluate", "--input", &input, "--seed", "7", "--max-rounds", "1", "--out-dir", s(&out)]);
        assert!(matches!(code(&o), 0 | 2));
        out
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
    let table = fs::read_to_string(a.join("rank_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert_eq!(table, fs::read_to_string(b.join("rank_table.csv")).unwrap());
}

#[test]
fn released_file_matches_winner() {
    let dir = tempfile::tempdir().unwrap();
    let input = blobs(dir.path());
    let out = dir.path().join("out");
    let o = ppaas(&[
        "evaluate", "--input", &input, "--fi-threshold", "0", "--seed", "3", "--pool", "additive_noise", "--out-dir", s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let p = dir.path().join("p.csv");
    let o = ppaas(&["perturb", "--input", &input, "--algo", "additive-noise", "--sigma", "0.3", "--seed", "0", "--out", s(&p)]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    let seed = report["rounds"][0]["instances"][0]["provenance"]["seed"].as_u64().unwrap();
    let p2 = dir.path().join("p2.csv");
    let o = ppaas(&[
        "perturb", "--input", &input, "--algo", "additive-noise", "--sigma", "0.3", "--seed", &seed.to_string(), "--out", s(&p2),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(out.join("released.csv")).unwrap(), fs::read(&p2).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let input = blobs(dir.path());
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        r#"
        input = "blobs.csv"
        label = "class"
        seed = 1
        fi_threshold = 1.01
        max_rounds = 1
        [[perturbator]]
        algorithm = "laplace_ldp"
        epsilon = 2.0
        [[perturbator]]
        algorithm = "additive_noise"
        sigma = 0.5
        [[attack]]
        attack = "naive"
        [[classifier]]
        kind = "knn"
        k = 3
        "#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = ppaas(&["evaluate", "--config", s(&cfg), "--fi-threshold", "0", "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["fi_threshold"], 0.0);
    assert_eq!(report["config"]["perturbators"].as_array().unwrap().len(), 2);
    assert_eq!(report["config"]["classifiers"][0]["k"], 3);
    assert_eq!(fs::read_to_string(out.join("rank_table.csv")).unwrap().lines().count(), 3);
    let _ = input;
}

#[test]
fn fis_subcommand() {
    let o = ppaas(&["fis", "1.0", "1.0", "1.0"]);
    assert_eq!(code(&o), 0);
    let fi: f64 = stdout(&o).trim().trim_start_matches("FI = ").parse().unwrap();
    assert!(fi >= 0.85);
    let o = ppaas(&["fis", "0.0", "1.0", "1.0"]);
    let fi: f64 = stdout(&o).trim().trim_start_matches("FI = ").parse().unwrap();
    assert!(fi <= 0.20);

    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("fis.toml");
    let o = ppaas(&["fis", "--print-config"]);
    fs::write(&doc, o.stdout).unwrap();
    let o = ppaas(&["fis", "1", "1", "1", "--fis", s(&doc)]);
    assert_eq!(stdout(&o).trim(), format!("FI = {fi_default:.6}", fi_default = {
        let d = ppaas(&["fis", "1", "1", "1"]);
        stdout(&d).trim().trim_start_matches("FI = ").parse::<f64>().unwrap()
    }));
    fs::write(&doc, "[[rule]]\nif = { privacy = \"VERYHIGH\" }\nthen = \"HIGH\"\n").unwrap();
    let o = ppaas(&["fis", "1", "1", "1", "--fis", s(&doc)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rule[0].if.privacy"));
}

#[test]
fn perturb_is_deterministic_and_attack_recovers_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let input = blobs(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = ppaas(&["perturb", "--input", &input, "--algo", "rotation", "--seed", "7", "--out-dir", s(d)]);
        assert_eq!(code(&o), 0);
    }
    for f in ["perturbed.csv", "perturbed.provenance.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
    let o = ppaas(&[
        "attack",
        "--input",
        s(&a.join("perturbed.csv")),
        "--original",
        &input,
        "--attack",
        "known-io",
        "--known-fraction",
        "0.1",
        "--out-dir",
        s(&a),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o).lines().find(|l| l.starts_with("Var(P)_min")).unwrap().to_string();
    let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(v < 1e-10, "{line}");
    assert!(a.join("reconstruction.csv").is_file());
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.join("attack.json")).unwrap()).unwrap();
    assert_eq!(summary["attack"], "known_io");
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = blobs(dir.path());
    let env_out = dir.path().join("env_out");
    let o = Command::new(env!("CARGO_BIN_EXE_ppaas"))
        .args(["evaluate", "--input", &input, "--seed", "2", "--fi-threshold", "0", "--pool", "additive_noise"])
        .env("PPAAS_OUT_DIR", &env_out)
        .env_remove("CI")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(env_out.join("report.json").is_file());
}
