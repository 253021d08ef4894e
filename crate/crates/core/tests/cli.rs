mod common;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use common::fixtures;
use touchless::exercise::read_templates;

fn engine() -> Command {
    Command::new(env!("CARGO_BIN_EXE_engine"))
}

fn with_stdin(mut cmd: Command, input: &str) -> Output {
    let mut child = cmd
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // the engine may exit before reading everything, e.g. in strict mode
    let _ = child.stdin.take().unwrap().write_all(input.as_bytes());
    child.wait_with_output().unwrap()
}

fn fixture(name: &str) -> std::path::PathBuf {
    fixtures().join(format!("{name}.ndjson"))
}

fn config_of(name: &str) -> std::path::PathBuf {
    fixtures().join("configs").join(format!("{name}.toml"))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stats(o: &Output) -> serde_json::Value {
    let line = stderr(o).lines().last().expect("stats line").to_string();
    serde_json::from_str(&line).expect("stats are JSON")
}

#[test]
fn help_lists_the_subcommands() {
    let o = engine().arg("--help").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for sub in ["run", "replay", "record-template"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn replay_writes_the_expected_log() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["pinch_click", "blink_wink", "gaming_cycling", "idle_hand"] {
        let out = dir.path().join(format!("{name}.log"));
        let o = engine()
            .args(["replay", "--fixture"])
            .arg(fixture(name))
            .arg("--config")
            .arg(config_of(name))
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        let expected = fs::read(fixtures().join(format!("{name}.expected.ndjson"))).unwrap();
        assert!(fs::read(&out).unwrap() == expected, "{name} log differs");
        assert_eq!(
            stats(&o)["frames"],
            fs::read_to_string(fixture(name)).unwrap().lines().count() as u64 - 1
        );
    }
}

fn run_stdin(args: &[&str], config: &Path, input: &str, log: &Path) -> Output {
    let mut cmd = engine();
    cmd.arg("run")
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--sink")
        .arg(format!("log:{}", log.display()));
    with_stdin(cmd, input)
}

#[test]
fn run_reads_stdin_until_eof() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("out.log");
    let input = fs::read_to_string(fixture("pinch_click")).unwrap();
    let o = run_stdin(&[], &config_of("pinch_click"), &input, &log);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(&log).unwrap(),
        fs::read_to_string(fixtures().join("pinch_click.expected.ndjson")).unwrap()
    );
}

#[test]
fn malformed_lines_are_skipped_unless_strict() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("out.log");
    let mut input = fs::read_to_string(fixture("squat_reps")).unwrap();
    input.insert_str(input.find('\n').unwrap() + 1, "{\"t\": \"soon\"}\n");
    let o = run_stdin(&[], &config_of("squat_reps"), &input, &log);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stats(&o)["warnings"], 1);
    assert_eq!(
        fs::read_to_string(&log).unwrap(),
        fs::read_to_string(fixtures().join("squat_reps.expected.ndjson")).unwrap()
    );

    let o = run_stdin(&["--strict"], &config_of("squat_reps"), &input, &log);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn profile_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("out.log");
    let input = fs::read_to_string(fixture("gaming_cycling")).unwrap();
    let o = run_stdin(
        &["--profile", "clinical"],
        &config_of("gaming_cycling"),
        &input,
        &log,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&log).unwrap(), "");

    let o = run_stdin(
        &["--profile", "office"],
        &config_of("gaming_cycling"),
        &input,
        &log,
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("office"));
}

#[test]
fn null_sink_and_empty_input_exit_cleanly() {
    let mut cmd = engine();
    cmd.args(["run", "--sink", "null"]);
    let o = with_stdin(cmd, "");
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stats(&o)["frames"], 0);
}

#[test]
fn bad_arguments_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[hand]\npinch_on = 2.0\n").unwrap();
    let o = with_stdin(
        {
            let mut c = engine();
            c.arg("run").arg("--config").arg(&bad);
            c
        },
        "",
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("pinch_on"));

    let o = with_stdin(
        {
            let mut c = engine();
            c.args(["run", "--input", "udp://x"]);
            c
        },
        "",
    );
    assert!(!o.status.success());
    let o = engine()
        .args(["replay", "--fixture", "/no/such/file", "--out"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert!(!o.status.success());
}

#[test]
fn record_template_prints_or_appends() {
    let o = engine()
        .args(["record-template", "--fixture"])
        .arg(fixture("squat_reps"))
        .args(["--from", "2800", "--to", "3200", "--name", "squat_hold"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let printed = read_templates(&o.stdout[..]).unwrap();
    let shipped = read_templates(
        fs::File::open(fixtures().join("templates.ndjson"))
            .map(std::io::BufReader::new)
            .unwrap(),
    )
    .unwrap();
    assert_eq!(printed, shipped);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.ndjson");
    for (name, mode) in [("a", "hold"), ("b", "rep")] {
        let o = engine()
            .args(["record-template", "--fixture"])
            .arg(fixture("squat_reps"))
            .args([
                "--from", "0", "--to", "1500", "--name", name, "--mode", mode, "--out",
            ])
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let names: Vec<String> = read_templates(std::io::BufReader::new(fs::File::open(&out).unwrap()))
        .unwrap()
        .into_iter()
        .map(|t| t.name)
        .collect();
    assert_eq!(names, ["a", "b"]);

    // a window with no pose frames has nothing to learn from
    let o = engine()
        .args(["record-template", "--fixture"])
        .arg(fixture("pinch_click"))
        .args(["--from", "0", "--to", "1000", "--name", "x"])
        .output()
        .unwrap();
    assert!(!o.status.success());
}
