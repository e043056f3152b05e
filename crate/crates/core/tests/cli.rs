use reactive_time::cli::run_in;

fn error_kind(out: &std::path::Path) -> String {
    let text = std::fs::read_to_string(out.join("error.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn default_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(run_in(&out, &["densities"]), 0);
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("U >= |X|"));
    assert!(out.join("densities.csv").exists());
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[generator]\nkind = \"multimode\"\nmodes = [{ omega = 1.0, amplitude = 1.0 }, { omega = 2.0, amplitude = 1.0 }]\n\
         [scales]\nmin = 0.01\nmax = 10.0\ncount = 16\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(run_in(&out, &["scan", "--config", cfg.to_str().unwrap()]), 1);
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("Wm non-increasing in s") && l.contains("FAIL")));
}

#[test]
fn malformed_estf_exits_two_with_kind() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.estf");
    std::fs::write(&input, b"{not json\n").unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("input = {:?}\n", input.to_str().unwrap())).unwrap();
    let out = dir.path().join("out");
    assert_eq!(run_in(&out, &["transform", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(error_kind(&out), "estf_header");
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "surprise = true\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(run_in(&out, &["gen", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn truncated_payload_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen");
    assert_eq!(run_in(&out, &["gen"]), 0);
    let mut bytes = std::fs::read(out.join("field.estf")).unwrap();
    bytes.truncate(bytes.len() - 8);
    let input = dir.path().join("short.estf");
    std::fs::write(&input, bytes).unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("input = {:?}\n", input.to_str().unwrap())).unwrap();
    let out = dir.path().join("out");
    assert_eq!(run_in(&out, &["densities", "--config", cfg.to_str().unwrap()]), 2);
    assert_eq!(error_kind(&out), "estf_payload");
}
