use std::path::Path;
use std::process::{Command, Output};

fn fjlimit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fjlimit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn scaling_constant_l_gives_b_squared() {
    let o = fjlimit(&["scaling", "--alpha", "0.5", "--q", "1", "--beta", "2", "--L", "const:1", "--n", "8103"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,b_N,c_N,residual,iterations"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let b: f64 = row[1].parse().unwrap();
    let c: f64 = row[2].parse().unwrap();
    assert_eq!(row[0], "8103");
    assert!((c / (b * b) - 1.0).abs() < 1e-12);
    let summary = String::from_utf8(o.stderr).unwrap();
    assert!(summary.contains("runtime=") && summary.contains("output=stdout"));
}

#[test]
fn limit_law_and_holder_examples() {
    let o = fjlimit(&["limit-law", "--kind", "steady", "--beta", "2", "--mu", "1", "--x", "1"]);
    assert!(o.status.success());
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let surv: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((surv - 0.632121).abs() < 1e-6);

    let o = fjlimit(&["holder-profile", "--alpha", "2", "--b", "3,4"]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 5.0).abs() < 1e-14);
}

#[test]
fn exit_codes() {
    assert_eq!(fjlimit(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(fjlimit(&["scaling", "--bogus"]).status.code(), Some(1));
    assert_eq!(fjlimit(&["simulate-fj", "--alpha", "1.5"]).status.code(), Some(1));
    assert_eq!(fjlimit(&["simulate-fj", "--budget", "100"]).status.code(), Some(2));
    assert_eq!(fjlimit(&["scaling", "--n", "1"]).status.code(), Some(1));
    assert_eq!(fjlimit(&["--help"]).status.code(), Some(0));
}

#[test]
fn dump_config_round_trips_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.conf");
    let again = dir.path().join("again.conf");
    let o = fjlimit(&["simulate-fj", "--n", "32", "--seed", "9", "--mu", "0.7", "--L", "log", "--dump-config", path_str(&cfg)]);
    assert!(o.status.success());
    let o = fjlimit(&["simulate-fj", "--config", path_str(&cfg), "--dump-config", path_str(&again)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&cfg).unwrap(), std::fs::read(&again).unwrap());

    let o = fjlimit(&["simulate-fj", "--config", path_str(&cfg), "--seed", "10", "--dump-config", path_str(&again)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&again).unwrap();
    assert!(text.contains("run.seed = 10") && text.contains("model.L = log") && text.contains("model.n = 32"));

    std::fs::write(&cfg, "model.alpha = 0.5\nmodel.colour = red\n").unwrap();
    assert_eq!(fjlimit(&["simulate-fj", "--config", path_str(&cfg)]).status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, fmt) in [("simulate-fj", "csv"), ("simulate-aux", "json"), ("simulate-limit", "csv"), ("steady-state", "json")] {
        let a = dir.path().join(format!("{cmd}-a.{fmt}"));
        let b = dir.path().join(format!("{cmd}-b.{fmt}"));
        for p in [&a, &b] {
            let o = fjlimit(&[
                cmd, "--n", "16", "--reps", "40", "--seed", "3", "--grid-step", "0.25", "--format", fmt, "--out", path_str(p),
            ]
            .into_iter()
            .filter(|s| !(cmd == "steady-state" && (*s == "--grid-step" || *s == "0.25")))
            .collect::<Vec<_>>());
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{cmd}");
    }
}

#[test]
fn csv_reals_round_trip_and_compare_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fj.csv");
    let o = fjlimit(&["simulate-limit", "--reps", "300", "--horizon", "1", "--grid-step", "0.5", "--h", "0.01", "--out", path_str(&csv)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("replication,t,value"));
    assert_eq!(text.lines().count(), 1 + 300 * 3);

    let o = fjlimit(&["compare", "--sample", path_str(&csv), "--kind", "transient", "--t", "1"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["report"]["n"], 300);
    let d = report["report"]["statistic"].as_f64().unwrap();
    assert!(d < 0.15, "{d}");

    let o = fjlimit(&["compare", "--sample", path_str(&csv), "--against", path_str(&csv), "--at", "0.5"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["report"]["statistic"], 0.0);
}
