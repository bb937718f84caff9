use std::process::Command;

fn trapscale(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_trapscale"))
        .args(args)
        .env("TRAPSCALE_WORKERS", "1")
        .output()
        .expect("binary runs")
}

#[test]
fn env_output_is_deterministic_lf_csv() {
    let a = trapscale(&["env", "--range", "-3..3", "--seed", "4"]);
    let b = trapscale(&["env", "--range", "-3..3", "--seed", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8, "{text}");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 2));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.csv");
    let stdout = trapscale(&["env", "--range", "0..5"]).stdout;
    let status = trapscale(&["env", "--range", "0..5", "--out", path.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "alpha = 0.3\nseed = 7\n").unwrap();
    let from_file = trapscale(&["env", "--range", "0..3", "--config", cfg.to_str().unwrap()]);
    let direct = trapscale(&["env", "--range", "0..3", "--alpha", "0.3", "--seed", "7"]);
    assert_eq!(from_file.stdout, direct.stdout);
    let overridden = trapscale(&["env", "--range", "0..3", "--config", cfg.to_str().unwrap(), "--seed", "8"]);
    assert_ne!(overridden.stdout, direct.stdout);
}

#[test]
fn invalid_input_is_a_usage_error() {
    for args in [
        vec!["env", "--range", "5..1"],
        vec!["env", "--range", "0..3", "--alpha", "1.5"],
        vec!["simulate", "--beta", "0", "--mu", "2"],
        vec!["verify", "--filter", "nothing-matches-this"],
        vec!["no-such-command"],
    ] {
        let out = trapscale(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn every_subcommand_runs() {
    let cases: [&[&str]; 8] = [
        &["env", "--range", "0..2"],
        &["simulate", "--bigN", "100", "--reps", "3", "--t", "0.5,1"],
        &["hitting", "--bigN", "100", "--reps", "3", "--x", "5"],
        &["segments", "--bigN", "100", "--reps", "2", "--horizon", "2"],
        &["ageing", "--bigN", "100", "--beta", "0.25", "--reps", "5", "--draws", "100", "--j-max", "20"],
        &["fin", "--reps", "3"],
        &["subordinator", "--reps", "3", "--mode", "inverse"],
        &["verify", "--filter", "A18"],
    ];
    for args in cases {
        let out = trapscale(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn segment_rows_are_well_formed() {
    let out = trapscale(&["segments", "--bigN", "1000", "--beta", "0.25", "--reps", "2", "--horizon", "3", "--seed", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r[2] >= 0.0 && r[3] >= 0.0 && r[4] >= 0.0 && r[5] >= 1.0, "{r:?}");
    }
}
