use std::fs;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsbm-lab")).args(args).output().expect("binary runs")
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        &["trial", "--lambda", "2", "--a", "1.5", "--b", "0.1"][..],
        &["trial", "--a", "0.9", "--b", "0.1"],
        &["sweep", "--lambda", "2", "--a", "0.5", "--b", "0.5"],
        &["threshold", "--a", "0.3", "--b", "0.3"],
        &["params", "--lambda", "2", "--a", "0.9", "--b", "0.1", "--estimator", "oracle"],
    ] {
        let out = lab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unreadable_config_file_is_a_config_error() {
    let out = lab(&["sweep", "--config", "/nonexistent/gsbm.conf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let args: Vec<&str> =
        "sweep --lambda 3,4 --a 0.9 --b 0.1 --n 2000 --trials 3 --seed 7 --chi practical".split_whitespace().collect();
    let first = lab(&args);
    let second = lab(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // header, then three trials and a summary per point
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert!(lines[0].starts_with("trial_id,seed,d,lambda"));
    assert!(lines[4].starts_with("summary,3,"));
    assert!(lines[8].starts_with("summary,3,"));
}

#[test]
fn flags_override_config_file_and_out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("sweep.conf");
    let csv = dir.path().join("out.csv");
    fs::write(&conf, "# grid\nlambda = 1, 2\na = 0.9\nb = 0.1\nn = 1500\ntrials = 2\nseed = 3\nchi = practical\n")
        .unwrap();
    let out = lab(&["sweep", "--config", conf.to_str().unwrap(), "--lambda", "3", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3);
    assert!(text.lines().nth(1).unwrap().contains(",1,3,1500,0.9,0.1,"));
}

#[test]
fn threshold_reports_critical_intensity() {
    let out = lab(&["threshold", "--a", "0.9", "--b", "0.1", "--d", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    // (sqrt(a) - sqrt(b))^2 + (sqrt(1-a) - sqrt(1-b))^2 = 0.8 at (0.9, 0.1); critical = 1/(2 * 0.8)
    assert!((value("critical_lambda") - 1.25).abs() < 1e-9);
    assert!((value("achievable_above") - 1.25).abs() < 1e-9);
}

#[test]
fn params_lists_derived_constants() {
    let out = lab(&["params", "--lambda", "3", "--a", "0.9", "--b", "0.1", "--n", "100000"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["regime = achievable", "chi = ", "delta = ", "m_budget = ", "k_visible = "] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}
