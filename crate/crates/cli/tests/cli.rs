use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn bittery(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bittery"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn thermal_maxwork_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = config("thermal.json");
    let o = bittery(&["maxwork", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().next().unwrap().starts_with("w_max=0.000000 k_star=0"));
    assert!(dir.path().join("maxwork.json").exists());
}

#[test]
fn sweep_has_nine_rows_with_scheme_independent_work() {
    let dir = TempDir::new().unwrap();
    let cfg = config("sweep.json");
    let o = bittery(&["sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# bittery "));
    assert!(lines.next().unwrap().starts_with("epsilon,scheme,"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 9);
    for chunk in rows.chunks(3) {
        assert!(chunk.iter().all(|r| r[0] == chunk[0][0] && r[3] == chunk[0][3]));
    }
}

#[test]
fn outputs_are_byte_identical() {
    let cfg = config("sweep.json");
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert!(bittery(&["sweep", "--config", cfg.to_str().unwrap(), "--jobs", "1"], a.path()).status.success());
    assert!(bittery(&["sweep", "--config", cfg.to_str().unwrap(), "--jobs", "3"], b.path()).status.success());
    assert_eq!(fs::read(a.path().join("sweep.csv")).unwrap(), fs::read(b.path().join("sweep.csv")).unwrap());
}

#[test]
fn corrupted_config_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = config("corrupted.json");
    let o = bittery(&["maxwork", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("\"kind\":\"schema\""), "{err}");
}

#[test]
fn unknown_key_and_task_mismatch_are_rejected() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"system": {"levels": [[0, 1]]}, "colour": "red"}"#).unwrap();
    let o = bittery(&["maxwork", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let cfg = config("sweep.json");
    let o = bittery(&["maxwork", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"kind\":\"config\""));
}

#[test]
fn landauer_reports_distance_to_bit_energy() {
    let dir = TempDir::new().unwrap();
    let cfg = config("landauer.json");
    let o = bittery(&["landauer", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    let last = out.lines().last().unwrap();
    let value: f64 = last.trim_start_matches("|W - ln2| = ").trim_end_matches(" kT").parse().unwrap();
    assert!(value <= 5e-4, "{last}");
    let rows = data_rows(&fs::read_to_string(dir.path().join("landauer.csv")).unwrap());
    assert_eq!(rows.len(), 6);
}

#[test]
fn addwork_and_ledger_write_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = config("addwork.json");
    assert!(bittery(&["addwork", "--config", cfg.to_str().unwrap()], dir.path()).status.success());
    let rows = data_rows(&fs::read_to_string(dir.path().join("addwork.csv")).unwrap());
    assert_eq!(rows[0][3], "0");
    assert_eq!(rows[3][3], rows[4][3]);

    let cfg = config("ledger.json");
    let o = bittery(&["ledger", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().filter(|l| l.starts_with("bittery")).all(|l| l.contains("decreases=true")));
    assert!(dir.path().join("ledger.json").exists());
}

#[test]
fn oracle_verify_agrees() {
    let dir = TempDir::new().unwrap();
    let cfg = config("oracle.json");
    let o = bittery(&["oracle-verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("disagreements=0"));
}

#[test]
fn verify_all_verdicts_do_not_depend_on_the_seed() {
    let mut verdicts = Vec::new();
    for seed in 0..10u64 {
        let dir = TempDir::new().unwrap();
        let o = bittery(&["verify-all", "--seed", &seed.to_string()], dir.path());
        assert!(o.status.success(), "seed {seed}: {}", stdout(&o));
        let v: Vec<String> = stdout(&o).lines().map(|l| l.split(':').next().unwrap().to_string()).collect();
        verdicts.push(v);
    }
    assert!(verdicts.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(verdicts[0].len(), 9);
    assert!(verdicts[0].iter().all(|l| l.starts_with("[PASS]")));
}

#[test]
fn verify_all_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert!(bittery(&["verify-all", "--seed", "5"], a.path()).status.success());
    assert!(bittery(&["verify-all", "--seed", "5", "--jobs", "2"], b.path()).status.success());
    assert_eq!(fs::read(a.path().join("verify.json")).unwrap(), fs::read(b.path().join("verify.json")).unwrap());
}
