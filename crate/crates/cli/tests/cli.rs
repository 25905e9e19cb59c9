use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qidle");

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn qidle(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = r#"
master_seed = 11
neighborhood_radius = 1
shot_grid = [500, 1000]
n_boot = 200

[spam]
p_prep = 0.01
p_readout = 0.02

[samples_per_stratum]
P = [6, 5]
R = [6, 5]
"#;

#[test]
fn minimal_exact_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    fs::write(
        &cfg,
        "master_seed = 1\nexact_mode = true\nshot_grid = [1]\n[samples_per_stratum]\nP = [1]\nR = [0]\n",
    )
    .unwrap();
    let out = qidle(&["run", s(&cfg), "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let archive = dir.path().join("one.archive");
    let csv = fs::read_to_string(archive.join("samples.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "sample_index,device_label,target,kind,members,n_shots,wait_time_ns,chi_S,chi_SQ,delta_chi,seed");
    assert!(lines[1].contains(",P,") && lines[1].contains(",0,800.0,"));
    assert!(!archive.join("raw").read_dir().unwrap().any(|_| true));
    assert!(archive.join("metadata.json").exists() && archive.join("config.toml").exists());
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(qidle(&["run", s(&cfg), "--out", s(&a), "-q"]).status.success());
    assert!(qidle(&["run", s(&cfg), "--out", s(&b), "-q"]).status.success());
    for f in ["samples.csv", "report.json", "fits.csv", "config.toml"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::read_to_string(a.join("samples.csv")).unwrap().lines().count(), 23);
    assert_eq!(a.join("raw").read_dir().unwrap().count(), 44);

    // existing archive is kept unless forced
    let again = qidle(&["run", s(&cfg), "--out", s(&a), "-q"]);
    assert_eq!(again.status.code(), Some(3));
    assert!(qidle(&["run", s(&cfg), "--out", s(&a), "-q", "--force"]).status.success());
}

#[test]
fn raw_dictionaries_reproduce_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let run = dir.path().join("run");
    assert!(qidle(&["run", s(&cfg), "--out", s(&run), "-q"]).status.success());
    let ingested = dir.path().join("ingested");
    let out = qidle(&["ingest", s(&run.join("raw")), "--out", s(&ingested)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read_to_string(run.join("samples.csv")).unwrap(),
        fs::read_to_string(ingested.join("samples.csv")).unwrap()
    );
}

#[test]
fn analyze_echoes_thresholds_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let a = dir.path().join("a");
    assert!(qidle(&["run", s(&cfg), "--out", s(&a), "-q"]).status.success());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["filter_K"], 4.0);
    assert_eq!(report["bad_qubit_threshold"], 0.12);
    assert_eq!(report["tail"], "normal");
    assert_eq!(report["welch"].as_array().unwrap().len(), 2);
    assert!(a.join("histograms/P_500.csv").exists());

    let out = qidle(&["analyze", s(&a), "--filter-k", "2.5", "--tail", "student-t"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("Welch"));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["filter_K"], 2.5);
    assert_eq!(report["tail"], "student_t");

    let out = qidle(&["report", s(&a)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("K = 2.5"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "master_seed = 1\nfilter_k = 2.0\n").unwrap();
    assert_eq!(qidle(&["run", s(&cfg)]).status.code(), Some(2));
    fs::write(&cfg, "master_seed = 1\n[spam]\np_prep = 1.5\np_readout = 0.0\n").unwrap();
    assert_eq!(qidle(&["run", s(&cfg)]).status.code(), Some(2));
    fs::write(&cfg, "shot_grid = [10]\n").unwrap();
    assert_eq!(qidle(&["run", s(&cfg)]).status.code(), Some(2));
    assert_eq!(qidle(&["run", s(&dir.path().join("missing.toml"))]).status.code(), Some(3));
    assert_eq!(qidle(&["report", s(dir.path())]).status.code(), Some(3));
    assert_eq!(qidle(&["ingest", s(&dir.path().join("nowhere"))]).status.code(), Some(3));
}

#[test]
fn ingest_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("counts");
    fs::create_dir(&src).unwrap();
    fs::copy(fixtures().join("worked_example/dictionaries.json"), src.join("dictionaries.json")).unwrap();
    fs::write(src.join("broken.json"), "{\"register\": [0], \"n_shots\": 2, \"dictionaries\": [{\"basis\": \"I\", \"counts\": {\"0\": 2}}]}").unwrap();
    fs::write(src.join("notes.txt"), "ignored").unwrap();
    let out_dir = dir.path().join("out");
    let out = qidle(&["ingest", s(&src), "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json"));

    let log = fs::read_to_string(out_dir.join("verification.log")).unwrap();
    let line = log.lines().find(|l| l.split('\t').nth(1) == Some("XIY")).expect("XIY logged");
    let cols: Vec<&str> = line.split('\t').collect();
    assert_eq!(cols[2], "1/3");
    assert_eq!(cols[4], "30");
    assert_eq!(cols[5], "01:7 10:3 11:20");
    assert!(log.lines().any(|l| l.contains("\tXXY\t")));

    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["ingested"], serde_json::json!(["dictionaries.json"]));
    assert_eq!(manifest["errors"][0]["file"], "broken.json");
    assert_eq!(fs::read_to_string(out_dir.join("samples.csv")).unwrap().lines().count(), 1);
}

#[test]
fn ingest_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("empty");
    fs::create_dir(&src).unwrap();
    let out = qidle(&["ingest", s(&src)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let archive = dir.path().join("empty.archive");
    assert_eq!(fs::read_to_string(archive.join("samples.csv")).unwrap().lines().count(), 1);
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(archive.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["warnings"].as_array().unwrap().len(), 1);
}
