use std::process::Command;

use recovery_core::report::Report;

fn recover(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_recover")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn solves_t1_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let (code, stdout, _) =
        recover(&["--instance", "t1", "--report", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("total 8.00"), "{stdout}");
    let rep = Report::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rep.metrics.unwrap().total_cost, 8.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("method,status"));
}

#[test]
fn exit_codes() {
    assert_eq!(recover(&["--instance", "hub:0", "--method", "seq-oe", "--alpha", "0.1"]).0, 3);
    assert_eq!(recover(&["--instance", "hub:0", "--method", "seq-ue", "--alpha", "0.9"]).0, 0);
    assert_eq!(recover(&["--instance", "hub:0", "--time-limit", "0"]).0, 2);
    assert_eq!(recover(&["--instance", "/no/such/file.json"]).0, 4);
    assert_eq!(recover(&["--instance", "t1", "--delay-interval", "7"]).0, 4);
    assert_eq!(recover(&["--instance", "random:x"]).0, 4);
}

#[test]
fn malformed_file_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"airports\": [,]\n}").unwrap();
    let (code, _, stderr) = recover(&["--instance", path.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn emitted_instance_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("desk.json");
    assert_eq!(recover(&["--instance", "random:6:2", "--emit-instance", path.to_str().unwrap()]).0, 0);
    let (code, a, _) = recover(&["--instance", path.to_str().unwrap(), "--method", "oracle"]);
    let (_, b, _) = recover(&["--instance", "random:6:2"]);
    assert_eq!(code, 0);
    let total = |s: &str| s.split("total ").nth(1).unwrap().split(' ').next().unwrap().to_string();
    assert_eq!(total(&a), total(&b));
}

#[test]
fn ablation_flags_keep_the_optimum() {
    let (_, base, _) = recover(&["--instance", "hub:1"]);
    for flags in
        [&["--no-separation"][..], &["--no-certificate"], &["--addini", "0"], &["--cuts", "llc"], &["--no-occupancy"]]
    {
        let mut args = vec!["--instance", "hub:1"];
        args.extend_from_slice(flags);
        let (code, out, _) = recover(&args);
        assert_eq!(code, 0, "{flags:?}");
        assert_eq!(out.split(", cancelled").next(), base.split(", cancelled").next(), "{flags:?}");
    }
}
