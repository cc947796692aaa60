use std::path::Path;
use std::process::{Command, Output};

use neontrap_cli::table::ParsedTable;
use neontrap_cli::Format;

fn neontrap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neontrap"))
        .current_dir(dir)
        .env_remove("NEONTRAP_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn read(path: &Path) -> ParsedTable {
    ParsedTable::parse(&std::fs::read(path).unwrap(), Format::Csv).unwrap()
}

#[test]
fn potential_profiles_hit_the_analytic_limits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[sweep]\nthickness = [\"0 nm\", \"inf nm\"]\n[grid]\nz_max = \"5 nm\"\n",
    );
    let out = neontrap(dir.path(), &["potential-z", "--config", &cfg, "--out", "pz"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let at_one = |file: &str| -> (f64, usize) {
        let t = read(&dir.path().join(file));
        let row = t.rows.iter().find(|r| r[1] == "1").expect("z = 1 nm row");
        (row[2].parse().unwrap(), t.rows.len())
    };
    let (bulk, rows) = at_one("pz_Linf.csv");
    assert!((bulk + 39.14).abs() < 0.01);
    assert_eq!(rows, 478);
    let (mirror, _) = at_one("pz_L0.csv");
    assert!((mirror + 359.99).abs() < 0.01);
    assert!(dir.path().join("pz.config.toml").exists());
}

#[test]
fn ground_sweep_rows_are_sorted_and_unbound_points_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[sweep]\nthickness = [\"inf nm\", \"10 nm\"]\nfield = [\"0 V/m\", \"-1e7 V/m\"]\n",
    );
    let out = neontrap(dir.path(), &["ground-sweep", "--config", &cfg, "--out", "gs.csv"]);
    assert!(out.status.success());
    let t = read(&dir.path().join("gs.csv"));
    let keys: Vec<(String, String)> = t.rows.iter().map(|r| (r[0].clone(), r[1].clone())).collect();
    let expected = [("10", "-10000000"), ("10", "0"), ("inf", "-10000000"), ("inf", "0")];
    assert_eq!(keys, expected.map(|(a, b)| (a.to_string(), b.to_string())));
    assert_eq!(t.rows[0][5], "unbound");
    assert_eq!(t.rows[0][2], "nan");
    assert_eq!(t.rows[1][5], "ok");
    assert_eq!(t.metadata["flagged_rows"], "2");
}

#[test]
fn json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = neontrap(dir.path(), &["growth", "--out", "g"]);
    let json = neontrap(dir.path(), &["growth", "--out", "g", "--format", "json"]);
    assert!(csv.status.success() && json.status.success());
    let a = read(&dir.path().join("g.csv"));
    let b = ParsedTable::parse(&std::fs::read(dir.path().join("g.json")).unwrap(), Format::Json).unwrap();
    assert_eq!(a.header, b.header);
    assert_eq!(a.metadata, b.metadata);
    assert!(a.compare(&b, 1e-9).is_none());
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["command"], "growth");
    assert_eq!(doc["columns"][0]["name"], "quantity");
}

#[test]
fn verify_accepts_fresh_output_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[sweep]\nthickness = [\"10 nm\"]\n");
    assert!(neontrap(dir.path(), &["ground-sweep", "--config", &cfg, "--out", "gs"])
        .status
        .success());
    let ok = neontrap(dir.path(), &["verify", "gs.csv", "--config", &cfg]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let path = dir.path().join("gs.csv");
    let text = std::fs::read_to_string(&path).unwrap().replace("-44.37", "-45.37");
    std::fs::write(&path, text).unwrap();
    assert_eq!(
        neontrap(dir.path(), &["verify", "gs.csv", "--config", &cfg])
            .status
            .code(),
        Some(3)
    );

    let other = write_config(dir.path(), "[sweep]\nthickness = [\"20 nm\"]\n");
    assert_eq!(
        neontrap(dir.path(), &["verify", "gs.csv", "--config", &other])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn verify_reads_json_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(neontrap(dir.path(), &["growth", "--out", "g", "--format", "json"])
        .status
        .success());
    assert_eq!(neontrap(dir.path(), &["verify", "g.json"]).status.code(), Some(0));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        "[grid]\nz_max = \"40\"\n",
        "[grid]\nunknown = 1\n",
        "[sweep]\nfield = [\"1e5 nm\"]\n",
        "[lateral]\nalpha_max = 0\n",
        "not toml at all",
    ] {
        let cfg = write_config(dir.path(), bad);
        let out = neontrap(dir.path(), &["growth", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    }
    let out = neontrap(dir.path(), &["growth", "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_neontrap"))
        .current_dir(dir.path())
        .env("NEONTRAP_THREADS", "lots")
        .arg("growth")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_files_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        neontrap(dir.path(), &["growth", "--config", "absent.toml"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(neontrap(dir.path(), &["verify", "absent.csv"]).status.code(), Some(1));
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[growth]\nradius = \"-20 nm\"\n");
    assert!(neontrap(dir.path(), &["growth", "--config", &cfg, "--out", "a"])
        .status
        .success());
    assert!(
        neontrap(dir.path(), &["growth", "--config", "a.config.toml", "--out", "b"])
            .status
            .success()
    );
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}
