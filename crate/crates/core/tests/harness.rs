use std::fs;
use std::path::Path;

use capops_core::harness::{
    emit_plots, emit_plots_in, read_report, run_experiment, run_suite, ExperimentConfig, RunOptions, SeedSource,
    REPORT_FILE, SUITE_FILE,
};
use capops_core::Error;

const MATA: &str = "kind = \"mata\"\n[params]\nsigma = [1.0, 1.0]\nbound = 6.0\n";
const GOOD_REINHARDT: &str = "kind = \"good_reinhardt\"\n[params]\ndomain = \"pob:1,2\"\nsamples = 300\np_max = 12\n";

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn reruns_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(GOOD_REINHARDT, "gr").unwrap();
    let a = run_experiment(
        &cfg,
        &RunOptions {
            out_root: tmp.path().join("a"),
            seed: Some(99),
        },
    )
    .unwrap();
    let b = run_experiment(
        &cfg,
        &RunOptions {
            out_root: tmp.path().join("b"),
            seed: Some(99),
        },
    )
    .unwrap();
    assert_eq!(a.seed_source, SeedSource::Override);
    let csv = |r: &capops_core::harness::ExperimentReport| fs::read(r.output_dir.join("good_reinhardt.csv")).unwrap();
    assert_eq!(csv(&a), csv(&b));
    assert_eq!(a.verdicts, b.verdicts);
    assert_eq!(
        serde_json::to_string(&a.summary).unwrap(),
        serde_json::to_string(&b.summary).unwrap()
    );
    // a different seed draws different points
    let c = run_experiment(
        &cfg,
        &RunOptions {
            out_root: tmp.path().join("c"),
            seed: Some(100),
        },
    )
    .unwrap();
    assert_ne!(csv(&a), csv(&c));
}

#[test]
fn seed_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let with_seed = ExperimentConfig::parse(&format!("seed = 5\n{GOOD_REINHARDT}"), "gr").unwrap();
    let r = run_experiment(&with_seed, &RunOptions::new(tmp.path())).unwrap();
    assert_eq!((r.seed, r.seed_source), (5, SeedSource::Config));
    let plain = ExperimentConfig::parse(GOOD_REINHARDT, "gr2").unwrap();
    let r = run_experiment(&plain, &RunOptions::new(tmp.path())).unwrap();
    assert_eq!(r.seed_source, SeedSource::Default);
}

#[test]
fn mata_counts_match_golden_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(MATA, "mata").unwrap();
    let report = run_experiment(&cfg, &RunOptions::new(tmp.path())).unwrap();
    let got = fs::read_to_string(report.output_dir.join("counts.csv")).unwrap();
    let golden = include_str!("golden/mata_counts.csv");
    assert_eq!(got, golden);
    // every row of the golden file is a simplex count
    for line in golden.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let bound: f64 = cols[0].parse().unwrap();
        let k = (bound + 1e-9).floor() as u64;
        assert_eq!(cols[1].parse::<u64>().unwrap(), (k + 1) * (k + 2) / 2, "{line}");
    }
}

#[test]
fn report_round_trips_and_lists_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(MATA, "mata").unwrap();
    let report = run_experiment(&cfg, &RunOptions::new(tmp.path())).unwrap();
    let back = read_report(&report.output_dir.join(REPORT_FILE)).unwrap();
    assert_eq!(back, report);
    assert_eq!(report.artifacts.len(), 1);
    assert_eq!(report.artifacts[0].columns, ["bound", "count", "asymptotic", "ratio"]);
    let header = fs::read_to_string(report.output_dir.join(&report.artifacts[0].file)).unwrap();
    assert!(header.starts_with("bound,count,asymptotic,ratio\n"));
}

#[test]
fn plots_follow_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(MATA, "mata").unwrap();
    let report = run_experiment(&cfg, &RunOptions::new(tmp.path())).unwrap();
    let written = emit_plots(&report).unwrap();
    assert_eq!(written.len(), 1);
    let script = fs::read_to_string(&written[0]).unwrap();
    assert!(script.contains("counts.csv") && script.contains("matplotlib"));

    let mut empty = report.clone();
    empty.artifacts.clear();
    let other = tmp.path().join("empty");
    fs::create_dir_all(&other).unwrap();
    assert!(emit_plots_in(&empty, &other).unwrap().is_empty());
    assert_eq!(fs::read_dir(&other).unwrap().count(), 0);
}

#[test]
fn strict_configs() {
    let unknown_key = "kind = \"mata\"\n[params]\nsigma = [1.0]\nbound = 3.0\nbogus = 1\n";
    assert!(matches!(
        ExperimentConfig::parse(unknown_key, "x"),
        Err(Error::Config { .. }) | Err(Error::Parse(_))
    ));
    let unknown_kind = "kind = \"nope\"\n";
    assert!(ExperimentConfig::parse(unknown_kind, "x").is_err());
    let top_level = "kind = \"mata\"\ncolour = 3\n[params]\nsigma = [1.0]\nbound = 3.0\n";
    assert!(ExperimentConfig::parse(top_level, "x").is_err());
    let bad_value = "kind = \"mata\"\n[params]\nsigma = [-1.0]\nbound = 3.0\n";
    assert!(ExperimentConfig::parse(bad_value, "x")
        .and_then(|c| c.validate())
        .is_err());
    let bad_domain = "kind = \"widths\"\n[params]\ndomain = \"disk:2\"\n";
    assert!(ExperimentConfig::parse(bad_domain, "x")
        .and_then(|c| c.validate())
        .is_err());
}

#[test]
fn suite_runs_configs_and_reports_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("configs");
    fs::create_dir_all(&dir).unwrap();
    write(&dir, "a_gr.toml", GOOD_REINHARDT);
    write(&dir, "b_mata.toml", MATA);
    write(
        &dir,
        "c_broken.toml",
        "kind = \"mata\"\n[params]\nsigma = []\nbound = 1.0\n",
    );
    let out = tmp.path().join("out");
    let suite = run_suite(&dir, &RunOptions::new(&out), 3).unwrap();
    let names: Vec<&str> = suite.entries.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["a_gr", "b_mata", "c_broken"]);
    assert!(suite.entries[0].passed && suite.entries[0].error.is_none());
    assert!(!suite.entries[1].passed);
    assert!(suite.entries[2].error.is_some());
    assert!(!suite.passed);
    assert!(out.join(SUITE_FILE).exists());
    assert!(out.join("a_gr").join(REPORT_FILE).exists());
}

#[test]
fn suite_rejects_colliding_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("configs");
    fs::create_dir_all(&dir).unwrap();
    write(&dir, "one.toml", &format!("output = \"same\"\n{MATA}"));
    write(&dir, "two.toml", &format!("output = \"same\"\n{MATA}"));
    assert!(run_suite(&dir, &RunOptions::new(tmp.path().join("out")), 2).is_err());
}
