use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const PASSING: &str =
    "kind = \"capacity\"\n[params]\nmethod = \"product_rule\"\ndomain = \"polydisk:2\"\nlevels = [0.5, 0.3]\n";
const FAILING: &str = "kind = \"mata\"\n[params]\nsigma = [1.0, 1.0]\nbound = 6.0\n";

fn capops(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_capops"));
    cmd.args(args).env_remove("CAPOPS_OUT");
    if let Some(p) = out_env {
        cmd.env("CAPOPS_OUT", p);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let pass = tmp.path().join("pass.toml");
    let fail = tmp.path().join("fail.toml");
    fs::write(&pass, PASSING).unwrap();
    fs::write(&fail, FAILING).unwrap();
    let o = out.to_str().unwrap();

    let r = capops(&["--out", o, "run", pass.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(0), "{}", stdout(&r));
    assert!(out.join("pass/report.json").exists());

    let r = capops(&["--out", o, "run", fail.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(1));
    assert!(stdout(&r).contains("FAIL"));

    let r = capops(
        &["--out", o, "run", tmp.path().join("missing.toml").to_str().unwrap()],
        None,
    );
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("error"));
}

#[test]
fn out_root_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("env_case.toml");
    fs::write(&cfg, PASSING).unwrap();
    let env_out = tmp.path().join("from_env");
    let r = capops(&["run", cfg.to_str().unwrap()], Some(&env_out));
    assert_eq!(r.status.code(), Some(0));
    assert!(env_out.join("env_case/report.json").exists());

    // the flag wins over the variable
    let flag_out = tmp.path().join("from_flag");
    let r = capops(
        &["--out", flag_out.to_str().unwrap(), "run", cfg.to_str().unwrap()],
        Some(&env_out),
    );
    assert_eq!(r.status.code(), Some(0));
    assert!(flag_out.join("env_case/report.json").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("gr.toml");
    fs::write(
        &cfg,
        "kind = \"good_reinhardt\"\nseed = 3\n[params]\ndomain = \"ball:2\"\nsamples = 100\np_max = 8\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let r = capops(
        &[
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "41",
            "run",
            cfg.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(r.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("gr/report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 41);
    assert_eq!(report["seed_source"], "override");
}

#[test]
fn suite_and_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("configs");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("cap.toml"), PASSING).unwrap();
    fs::write(dir.join("mata.toml"), FAILING).unwrap();
    let out = tmp.path().join("out");
    let o = out.to_str().unwrap();

    let r = capops(&["--out", o, "--workers", "2", "suite", dir.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(1));
    let text = stdout(&r);
    assert!(text.contains("PASS  cap") && text.contains("FAIL  mata"), "{text}");
    assert!(out.join("suite.json").exists());

    fs::remove_file(dir.join("mata.toml")).unwrap();
    let r = capops(&["--out", o, "suite", dir.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(0));

    let report = out.join("mata/report.json");
    let r = capops(&["plot", report.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(0));
    assert!(out.join("mata/plot_counts.py").exists());

    let r = capops(&["plot", out.join("cap/report.json").to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).contains("no plottable artifacts"));
}

#[test]
fn shipped_configs_pass() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    let r = capops(
        &[
            "--out",
            tmp.path().to_str().unwrap(),
            "--workers",
            "4",
            "suite",
            configs.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(r.status.code(), Some(0), "{}", stdout(&r));
    let suite: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("suite.json")).unwrap()).unwrap();
    assert_eq!(suite["entries"].as_array().unwrap().len(), 11);
}
