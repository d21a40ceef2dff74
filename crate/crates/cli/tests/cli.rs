use std::path::Path;
use std::process::{Command, Output};

use lowdeg_cli::record::{collect, ResultEntry, ResultRecord, REPORT_HEADER};

fn lowdeg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowdeg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn ortho_verify_passes_and_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = lowdeg(dir.path(), &["ortho-verify", "--set", "n=10,20", "--seed", "3", "--out", "res"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(dir.path().join("res/ortho-verify-3.json")).unwrap();
    let rec: ResultRecord = serde_json::from_str(&json).unwrap();
    assert!(rec.pass);
    assert_eq!(rec.seed, 3);
    assert_eq!(rec.experiment, "ortho-verify");
    let csv = std::fs::read_to_string(dir.path().join("res/ortho-verify-3.csv")).unwrap();
    assert_eq!(csv, String::from_utf8(o.stdout).unwrap());
}

#[test]
fn json_format_prints_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let o = lowdeg(dir.path(), &["binom-tv", "--set", "n=32", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let rec: ResultRecord = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec.experiment, "binom-tv");
    assert!(!rec.results.is_empty());
}

#[test]
fn same_seed_gives_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "ldlr", "--set", "model=spiked-mean", "--set", "n=30", "--set", "degree=3", "--set", "samples=3000",
        "--seed", "11",
    ];
    let a = lowdeg(dir.path(), &args);
    let b = lowdeg(dir.path(), &[&args[..], &["--threads", "1"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = lowdeg(dir.path(), &[&args[..10], &["--seed", "12"]].concat());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_file_is_read_and_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "kind = binom-tv\nn = 24\neps = 0.3\nseed = 5\n").unwrap();
    let o = lowdeg(dir.path(), &["binom-tv", "--config", cfg.to_str().unwrap(), "--seed", "6", "--dry-run"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("n = 24\n"));
    assert!(text.contains("seed = 6\n"));
}

#[test]
fn config_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&lowdeg(dir.path(), &["sweep", "--set", "nonsense=1"])), 3);
    assert_eq!(code(&lowdeg(dir.path(), &["sweep", "--set", "gamma=abc"])), 3);
    assert_eq!(code(&lowdeg(dir.path(), &["ldlr", "--set", "model=unknown"])), 3);
    assert_eq!(code(&lowdeg(dir.path(), &["ldlr", "--set", "model=spiked-mean", "--set", "degree=40"])), 3);
    let cfg = dir.path().join("wrong.cfg");
    std::fs::write(&cfg, "kind = sweep\n").unwrap();
    assert_eq!(code(&lowdeg(dir.path(), &["ldlr", "--config", cfg.to_str().unwrap()])), 3);
}

#[test]
fn budget_overflow_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = lowdeg(
        dir.path(),
        &["ldlr", "--set", "model=null-wigner", "--set", "n=400", "--set", "degree=4", "--set", "samples=10"],
    );
    assert_eq!(code(&o), 4);
    assert!(!dir.path().join("results").exists());
}

fn write_record(dir: &Path, name: &str, experiment: &str, entries: Vec<ResultEntry>) {
    let rec = ResultRecord {
        tool: "lowdeg".into(),
        version: "0".into(),
        experiment: experiment.into(),
        seed: 1,
        config: String::new(),
        results: entries,
        pass: true,
        wall_time_s: 0.0,
    };
    std::fs::write(dir.join(name), serde_json::to_string(&rec).unwrap()).unwrap();
}

#[test]
fn report_on_no_records_is_empty_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = format!("{}/*.json", dir.path().display());
    let rep = collect(&[pattern.clone()]).unwrap();
    assert!(rep.rows.is_empty());
    assert_eq!(rep.csv(), format!("{REPORT_HEADER}\n"));
    let o = lowdeg(dir.path(), &["report", &pattern, "--out", "agg"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("agg/report.csv")).unwrap();
    assert_eq!(csv, format!("{REPORT_HEADER}\n"));
}

#[test]
fn report_on_one_record_lists_its_entries() {
    let dir = tempfile::tempdir().unwrap();
    write_record(dir.path(), "a.json", "sweep", vec![ResultEntry::new("x", 1.5, 0.1).at(64, Some(0.3))]);
    let rep = collect(&[format!("{}/*.json", dir.path().display())]).unwrap();
    assert_eq!(rep.rows.len(), 1);
    assert_eq!(rep.rows[0].value, 1.5);
    assert_eq!(rep.rows[0].n, Some(64));
}

#[test]
fn report_sorts_by_experiment_n_eps_and_skips_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    write_record(
        dir.path(),
        "b.json",
        "sweep",
        vec![
            ResultEntry::new("late", 0.0, 0.0).at(128, Some(0.1)),
            ResultEntry::new("mid", 0.0, 0.0).at(64, Some(0.5)),
            ResultEntry::new("early", 0.0, 0.0).at(64, Some(0.1)),
        ],
    );
    write_record(dir.path(), "c.json", "binom-tv", vec![ResultEntry::new("first", 0.0, 0.0).at(512, None)]);
    std::fs::write(dir.path().join("broken.json"), "{ not json").unwrap();
    let rep = collect(&[format!("{}/*.json", dir.path().display())]).unwrap();
    let names: Vec<&str> = rep.rows.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, ["first", "early", "mid", "late"]);
    assert_eq!(rep.malformed.len(), 1);
}
