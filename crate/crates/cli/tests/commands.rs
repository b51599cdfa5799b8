use std::path::Path;
use std::process::{Command, Output};

fn qkd_lsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkd-lsm"))
        .args(args)
        .output()
        .unwrap()
}

fn fixtures_dir() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/fixtures")
        .display()
        .to_string()
}

#[test]
fn distance_sweep_to_stdout() {
    let out = qkd_lsm(&["distance-sweep"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(
        "distance_km,rate_nominal,rate_modified,rate_lowtemp,rate_lowtemp_modified,reason\n"
    ));
    assert_eq!(text.lines().count(), 1 + 76);
}

#[test]
fn json_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.json");
    let out = qkd_lsm(&[
        "eta-grid",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["columns"][2], "max_distance_km");
    assert_eq!(v["rows"].as_array().unwrap().len(), 81);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "monitor.eta1 = 0.5\nmonitor.eta2 = 0.6\n").unwrap();
    let out = qkd_lsm(&["bounds", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("monitor.eta2"));

    assert_eq!(
        qkd_lsm(&["bounds", "--config", "/nonexistent.conf"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(qkd_lsm(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        qkd_lsm(&["bounds", "--format", "xml"]).status.code(),
        Some(1)
    );
}

#[test]
fn fixture_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("dcr.csv");
    std::fs::write(&fixture, "t_min,value\n0,5e-4\n0,6e-4\n").unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "fixtures.room_dcr = dcr.csv\n").unwrap();
    let out = qkd_lsm(&["distance-sweep", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dcr.csv"));

    assert_eq!(qkd_lsm(&["fixture-range"]).status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    // more zero-click events than the dark count allows
    std::fs::write(&conf, "measured.signal = 1.0, 0.9, 0.8\n").unwrap();
    let out = qkd_lsm(&["bounds", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn fixture_range_table() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(
        &conf,
        format!(
            "fixtures.room_dcr = {0}/room_dcr.csv\nfixtures.low_dcr = {0}/low_dcr.csv\n",
            fixtures_dir()
        ),
    )
    .unwrap();
    let out = qkd_lsm(&["fixture-range", "--config", conf.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let lo: f64 = rows[0][9].parse().unwrap();
    let hi: f64 = rows[0][10].parse().unwrap();
    assert!((lo + 0.0862).abs() < 1e-4 && (hi - 0.0690).abs() < 1e-4);
}

#[test]
fn seed_flag_changes_montecarlo_only() {
    let run = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("run.conf");
        std::fs::write(&conf, "sweep.mc_pulses = 50000\nsweep.mc_configs = 2\n").unwrap();
        let mc = qkd_lsm(&[
            "montecarlo",
            "--config",
            conf.to_str().unwrap(),
            "--seed",
            seed,
        ])
        .stdout;
        let grid = qkd_lsm(&["eta-grid", "--seed", seed]).stdout;
        (mc, grid)
    };
    let (a_mc, a_grid) = run("1");
    let (b_mc, b_grid) = run("2");
    assert_ne!(a_mc, b_mc);
    assert_eq!(a_grid, b_grid);
    assert_eq!(run("1").0, a_mc);
}

#[test]
fn shipped_config_runs() {
    let conf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/lab.conf");
    let out = qkd_lsm(&["distance-sweep", "--config", conf.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "sweep.mc_pulses = 100000\nsweep.mc_configs = 3\n").unwrap();
    for cmd in ["distance-sweep", "dcr-drift", "montecarlo"] {
        let outputs: Vec<Vec<u8>> = ["1", "4"]
            .iter()
            .map(|jobs| {
                let path = dir.path().join(format!("{cmd}-{jobs}.csv"));
                let args = [
                    cmd,
                    "--config",
                    conf.to_str().unwrap(),
                    "--jobs",
                    jobs,
                    "--seed",
                    "9",
                    "--out",
                    path.to_str().unwrap(),
                ];
                assert!(qkd_lsm(&args).status.success());
                std::fs::read(path).unwrap()
            })
            .collect();
        assert_eq!(outputs[0], outputs[1], "{cmd}");
    }
}
