use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn metgov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metgov")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn example(name: &str) -> String {
    fs::read_to_string(fixtures().join("examples").join(format!("{name}.toml"))).unwrap()
}

#[test]
fn builtin_examples_report_each_check() {
    let out = metgov(&["examples", "verify"]);
    let text = stdout(&out);
    for fixture in ["rate", "plurality", "swf", "star", "hrule", "monotonicity", "multidim", "committee"] {
        assert!(text.lines().any(|l| l.starts_with(fixture) && l.contains("PASS")), "{fixture}:\n{text}");
    }
    // The running example and the freelancer gap do not reproduce.
    assert_eq!(code(&out), 1, "{text}");
    assert!(stderr(&out).contains("running/median_wins"), "{}", stderr(&out));
    assert!(stderr(&out).contains("freelancer_gap/"), "{}", stderr(&out));
}

#[test]
fn passing_fixture_directory_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["rate", "plurality", "swf", "star", "hrule", "monotonicity", "multidim", "committee"] {
        write(dir.path(), &format!("{name}.toml"), &example(name));
    }
    let out = metgov(&["examples", "verify", "--dir", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("0 failed"));
}

#[test]
fn tampered_distance_is_named() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "rate.toml", &example("rate"));
    let tampered = example("monotonicity").replace(r#"["v4", "w", 9.99]"#, r#"["v4", "w", 12.0]"#);
    assert_ne!(tampered, example("monotonicity"));
    write(dir.path(), "monotonicity.toml", &tampered);
    let out = metgov(&["examples", "verify", "--dir", path(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("monotonicity/member_4_moves_to_w"), "{}", stderr(&out));
    assert!(!stderr(&out).contains("rate/"));
}

#[test]
fn json_results() {
    let out = metgov(&["examples", "verify", "--json"]);
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.len() >= 20);
    assert!(lines.iter().all(|v| v["fixture"].is_string() && v["passed"].is_boolean()));
}

#[test]
fn rate_epoch_elects_eighteen_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("examples/rate.toml");
    let out = metgov(&["epoch", "run", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(summary["outcome"], serde_json::json!(18.0));
    assert_eq!(summary["termination"], "same_winner");
    let trace = dir.path().join("trace.jsonl");
    let verify = metgov(&["epoch", "verify", "--trace", path(&trace)]);
    assert_eq!(code(&verify), 0, "{}", stderr(&verify));
    let check = metgov(&["schema-check", path(&trace), path(&dir.path().join("outcome.json"))]);
    assert_eq!(code(&check), 0, "{}", stderr(&check));
}

#[test]
fn tampered_trace_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("examples/rate.toml");
    assert_eq!(code(&metgov(&["epoch", "run", "--config", path(&cfg), "--out", path(dir.path())])), 0);
    let trace = dir.path().join("trace.jsonl");
    let text = fs::read_to_string(&trace).unwrap();
    let tampered = text.replacen("\"winning_score\":2.0", "\"winning_score\":3.0", 1);
    assert_ne!(text, tampered);
    fs::write(&trace, tampered).unwrap();
    let out = metgov(&["epoch", "verify", "--trace", path(&trace)]);
    assert_eq!(code(&out), 1, "{}{}", stdout(&out), stderr(&out));
}

const RANDOM_EPOCH: &str = r#"
name = "random"

[components.fee]
space = { kind = "scalar", lo = 0.0, hi = 10.0 }
status_quo = 5.0
sigma = 0.5

[profiles.all]
component = "fee"
votes = [1.0, 2.5, 6.0, 7.5, 9.0]

[epoch]
profile = "all"
sources = [{ kind = "random", rate = 0.7 }, { kind = "heuristic" }]
"#;

#[test]
fn seeded_epochs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "random.toml", RANDOM_EPOCH);
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = metgov(&["epoch", "run", "--config", path(&cfg), "--out", path(&out), "--seed", seed]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        fs::read(out.join("trace.jsonl")).unwrap()
    };
    let a = run("a", "42");
    assert_eq!(a, run("b", "42"));
    assert_ne!(a, run("c", "43"));
    let verify = metgov(&["epoch", "verify", "--trace", path(&dir.path().join("a/trace.jsonl"))]);
    assert_eq!(code(&verify), 0, "{}", stderr(&verify));
}

#[test]
fn random_source_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "random.toml", RANDOM_EPOCH);
    let out = metgov(&["epoch", "run", "--config", path(&cfg), "--out", path(&dir.path().join("o"))]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = RANDOM_EPOCH.replace("votes = [1.0, 2.5, 6.0, 7.5, 9.0]", "votes = []");
    let cfg = write(dir.path(), "empty.toml", &empty);
    let out = metgov(&["epoch", "run", "--config", path(&cfg), "--out", path(&dir.path().join("o")), "--seed", "1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let bad_sigma = RANDOM_EPOCH.replace("sigma = 0.5", "sigma = 0.4");
    let cfg = write(dir.path(), "sigma.toml", &bad_sigma);
    let out = metgov(&["epoch", "run", "--config", path(&cfg), "--out", path(&dir.path().join("o")), "--seed", "1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let dangling = RANDOM_EPOCH.replace("component = \"fee\"", "component = \"rent\"");
    let cfg = write(dir.path(), "dangling.toml", &dangling);
    let out = metgov(&["epoch", "run", "--config", path(&cfg), "--out", path(&dir.path().join("o")), "--seed", "1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let missing = metgov(&["epoch", "run", "--config", "/nonexistent.toml", "--out", path(dir.path())]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn sweeps_are_deterministic_and_schema_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("sweeps/smoke.toml");
    let run = |sub: &str, extra: &[&str]| {
        let out = dir.path().join(sub);
        let mut args = vec!["sweep", "--config", path(&cfg), "--out", path(&out), "--seed", "7"];
        args.extend_from_slice(extra);
        let o = metgov(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (fs::read(out.join("summary.csv")).unwrap(), fs::read(out.join("records.jsonl")).unwrap())
    };
    let a = run("a", &[]);
    assert_eq!(a, run("b", &[]));
    assert_eq!(a, run("serial", &["--jobs", "1"]));
    assert_eq!(a, run("two", &["--jobs", "2"]));
    let csv = String::from_utf8(a.0).unwrap();
    assert_eq!(csv.lines().next(), Some("setting,n,profiles,positive_cg_freq,gap_closing_ratio,hit_rate"));
    assert_eq!(csv.lines().count(), 3);

    let files = [dir.path().join("a/summary.csv"), dir.path().join("a/records.jsonl")];
    let ok = metgov(&["schema-check", path(&files[0]), path(&files[1])]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));

    let broken = csv.replacen("euclid2d,5,20,", "euclid2d,5,twenty,", 1);
    assert_ne!(broken, csv);
    let bad = write(dir.path(), "bad.csv", &broken);
    assert_eq!(code(&metgov(&["schema-check", path(&bad)])), 1);
    let header = write(dir.path(), "header.csv", &csv.replacen("hit_rate", "hits", 1));
    assert_eq!(code(&metgov(&["schema-check", path(&header)])), 1);
}

#[test]
fn sweep_needs_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixtures().join("sweeps/smoke.toml");
    let out = metgov(&["sweep", "--config", path(&cfg), "--out", path(dir.path())]);
    assert_eq!(code(&out), 2);
}

#[test]
fn full_sweep_document_lists_every_row() {
    let text = fs::read_to_string(fixtures().join("sweeps/full.toml")).unwrap();
    let cfg = metgov_cli::config::ExperimentConfig::parse(&text).unwrap();
    assert_eq!(cfg.sweep.unwrap().rows().unwrap().len(), 28);
}

#[test]
fn hrule_modes() {
    let both = metgov(&["hrule", "--sigma", "0.5", "--votes", "0.6,0.6,0.6,0.75,0.75"]);
    assert_eq!(code(&both), 0, "{}", stderr(&both));
    assert!(stdout(&both).contains("dense_grid: 0.6"), "{}", stdout(&both));
    let dense = metgov(&["hrule", "--sigma", "0.5", "--votes", "0.5,0.5,0.6666666666666666,0.6666666666666666,0.6666666666666666", "--mode", "dense-grid"]);
    assert_eq!(stdout(&dense).trim(), "dense_grid: 0.6");
    let voted = metgov(&["hrule", "--sigma", "0.5", "--votes", "0.5,0.5,0.6666666666666666,0.6666666666666666,0.6666666666666666", "--mode", "voted-values"]);
    assert_eq!(stdout(&voted).trim(), "voted_values: 0.5");
    let lower = metgov(&["hrule", "--sigma", "0.6666666666666666", "--votes", "0.5,0.5,0.5,0.5,0.6666666666666666", "--mode", "voted-values"]);
    assert_eq!(stdout(&lower).trim(), "voted_values: 0.5");
    assert_eq!(code(&metgov(&["hrule", "--sigma", "0.5", "--votes", "0.6,1.2"])), 2);
    assert_eq!(code(&metgov(&["hrule", "--sigma", "0.3", "--votes", "0.6"])), 2);
}

#[test]
fn unknown_files_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "notes.txt", "hello");
    assert_eq!(code(&metgov(&["schema-check", path(&f)])), 2);
}
