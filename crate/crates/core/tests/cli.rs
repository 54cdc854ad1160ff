use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_convex-evasion"))
}

fn rows_without_wall_time(path: &std::path::Path) -> Vec<String> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let wall = reader.headers().unwrap().iter().position(|h| h == "wall_ms").unwrap();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            r.iter()
                .enumerate()
                .filter(|(i, _)| *i != wall)
                .map(|(_, f)| f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

#[test]
fn evade_is_reproducible_and_honours_env_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = bin()
            .args(["evade", "--algorithm", "kmls", "--dim", "8", "--accuracy", "0.05", "--trials", "4", "--seed", "9"])
            .env("EVASION_OUT_DIR", &out)
            .status()
            .unwrap();
        assert!(status.success());
        rows.push(rows_without_wall_time(&out.join("trials.csv")));
    }
    assert_eq!(rows[0].len(), 4);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    fs::write(
        &config,
        "algorithm = \"convex-search\"\naccuracy = 0.2\n[cost]\ndim = 3\n[classifier]\nkind = \"cost-ball\"\nthreshold = 2.5\n",
    )
    .unwrap();
    let status = bin()
        .args(["evade", "--config"])
        .arg(&config)
        .args(["--accuracy", "0.01", "--csv", "run.csv", "--out-dir"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let mut reader = csv::Reader::from_path(dir.path().join("run.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let row = reader.records().next().unwrap().unwrap();
    let get = |name: &str| row[headers.iter().position(|h| h == name).unwrap()].to_string();
    assert_eq!(get("epsilon"), "0.01");
    assert_eq!(get("D"), "3");
    assert_eq!(get("mac_reference"), "2.5");
    assert_eq!(get("termination"), "converged");
}

#[test]
fn invalid_config_exits_nonzero_with_field_name() {
    let out = bin().args(["evade", "--accuracy", "0"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("accuracy"));
}

#[test]
fn bench_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["bench", "--algorithms", "kmls,convex-search", "--dims", "10", "--accuracies", "0.1,0.01", "--seeds", "1,2"])
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(rows_without_wall_time(&dir.path().join("trials.csv")).len(), 8);
    let summary = fs::read_to_string(dir.path().join("trials.summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
}

#[test]
fn verify_exit_codes() {
    let ok = bin().args(["verify", "--suite", "cost-axioms,halfspace-mac"]).output().unwrap();
    assert!(ok.status.success());
    let text = String::from_utf8_lossy(&ok.stdout);
    assert!(text.contains("PASS cost-axioms") && text.contains("PASS halfspace-mac"));
    assert!(!text.contains("vertex-witness"));

    let bad = bin().args(["verify", "--suite", "vertex-witness", "--inject-bug"]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL vertex-witness"));
}
