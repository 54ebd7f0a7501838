use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybridsum"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out-dir").arg(out).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("cfg.json");
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"{"p": 101, "curve": "y - x", "g": "x", "f": "x*y", "chi_order": 2, "psi_k": 1, "H": 10}"#;

#[test]
fn points_on_the_circle_over_f5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("circle_p5.json");
    let o = run(&["points", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("points.csv")).unwrap();
    assert_eq!(csv, "x,y\n0,1\n0,4\n1,0\n4,0\n");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "points");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_time_secs"].as_f64().is_some());
}

#[test]
fn tuples_prints_the_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("tuples_h3.json");
    let o = run(&["tuples", cfg.to_str().unwrap(), "--j", "2"], dir.path());
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout), "15\n");
}

#[test]
fn moments_on_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("diagonal.json");
    let o = run(&["moments", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("moments.json")).unwrap()).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for key in ["k", "re_M", "im_M", "normalized", "mu_k", "deviation"] {
        assert!(rows[1].get(key).is_some(), "missing {key}");
    }
    assert_eq!(rows[1]["k"], 2);
    let m2 = rows[1]["normalized"].as_f64().unwrap();
    assert!((0.5..1.5).contains(&m2), "normalized second moment {m2}");
}

#[test]
fn validation_errors_exit_2_with_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"chi_order\": 2", "\"chi_order\": 3"));
    let o = run(&["sums", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("chi_order"));
    assert!(!dir.path().join("out").exists());

    let cfg = write_config(dir.path(), "{\"p\": 101,");
    let o = run(&["sums", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hypothesis_failure_exits_3_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("x*y", "x + y"));
    let o = run(&["sums", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(!dir.path().join("sums.csv").exists());
    let o = bin()
        .args(["sums", cfg.to_str().unwrap(), "--force", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("sums.csv").exists());
}

#[test]
fn reruns_and_cache_hits_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let files = ["sums.csv", "hypotheses.json"];
    let read = |d: &Path| files.map(|f| fs::read(d.join(f)).unwrap());

    let a = dir.path().join("a");
    assert!(run(&["sums", cfg.to_str().unwrap(), "--no-cache"], &a).status.success());
    let b = dir.path().join("b");
    assert!(run(&["sums", cfg.to_str().unwrap(), "--no-cache"], &b).status.success());
    assert_eq!(read(&a), read(&b));

    // second run in the same directory is served from the cache
    assert!(run(&["sums", cfg.to_str().unwrap()], &a).status.success());
    let first = read(&a);
    assert!(run(&["sums", cfg.to_str().unwrap()], &a).status.success());
    let manifest = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"cached\": true"));
    assert_eq!(read(&a), first);
    assert_eq!(first, read(&b));
}

#[test]
fn no_wrap_truncates_windows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert!(run(&["sums", cfg.to_str().unwrap()], &dir.path().join("w")).status.success());
    assert!(run(&["sums", cfg.to_str().unwrap(), "--no-wrap"], &dir.path().join("t")).status.success());
    let last = |d: &str| {
        let csv = fs::read_to_string(dir.path().join(d).join("sums.csv")).unwrap();
        csv.lines().last().unwrap().to_string()
    };
    // n = 100: the wrapped window holds 10 points, the truncated one none
    assert!(last("w").ends_with(",10,0"), "{}", last("w"));
    assert!(last("t").ends_with(",0,0"), "{}", last("t"));
}

#[test]
fn partial_outputs_are_removed_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    // a directory where sums.csv should go makes the second write fail
    fs::create_dir_all(out.join("sums.csv")).unwrap();
    let o = run(&["sums", cfg.to_str().unwrap(), "--no-cache"], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.join("hypotheses.json").exists());
    assert!(!out.join("manifest.json").exists());
    let leftovers: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.contains(".tmp-"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = bin().env("HYBRIDSUM_THREADS", "1").args(["points", cfg.to_str().unwrap(), "--out-dir"]).arg(dir.path()).output().unwrap();
    assert!(o.status.success());
    let o = bin().env("HYBRIDSUM_THREADS", "zero").args(["points", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_filter_runs_only_matching_checks() {
    let o = bin().args(["verify", "--filter", "moments"]).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8_lossy(&o.stdout);
    let names: Vec<&str> = out
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(names, ["acceptance.1.moments_identity", "acceptance.10.gaussian_moments"]);
}

#[test]
fn verify_detects_a_corrupted_field_table() {
    let o = bin().args(["verify", "--filter", "field", "--fault", "corrupt-log-table"]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL  field.log_table"));
    let o = bin().args(["verify", "--filter", "field"]).output().unwrap();
    assert!(o.status.success());
}
