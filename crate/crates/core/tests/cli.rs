use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sagnac-qfc"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = head
        .iter()
        .position(|h| *h == name)
        .unwrap_or_else(|| panic!("no column {name} in {head:?}"));
    lines
        .map(|l| l.split(',').nth(k).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn spectrum_to_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let conf = configs().join("spectrum-decay.conf");
    let o = run(&[
        "spectrum",
        "--config",
        conf.to_str().unwrap(),
        "--set",
        "decay=0",
        "--set",
        "delta_count=3",
        "--set",
        "delta_min=-1",
        "--set",
        "delta_max=1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(!csv.contains('\r'));
    let row = csv.lines().nth(2).unwrap();
    assert!(row.starts_with("0.00000000,"));
    assert_eq!(column(&csv, "T2_sq")[1], 1.0);
    assert_eq!(column(&csv, "P_loss")[1], 0.0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("spectrum:"));
}

#[test]
fn decay_point_matches_derived_value() {
    let conf = configs().join("spectrum-decay.conf");
    let o = run(&["spectrum", "--config", conf.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    let deltas = column(&csv, "delta");
    let k = deltas.iter().position(|d| *d == 0.0).unwrap();
    assert_eq!(
        csv.lines().nth(k + 1).unwrap().split(',').nth(6).unwrap(),
        "0.865332612"
    );
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["spectrum", "--set", "delta_count=0"][..],
        &["spectrum", "--set", "delta_min=1", "--set", "delta_max=1"],
        &["spectrum", "--set", "rabbi1=1"],
        &[
            "grid2d",
            "--config",
            configs().join("grid-equal.conf").to_str().unwrap(),
            "--set",
            "constraint.rabi1=bogus",
        ],
        &["design", "--set", "target=0.6,0.6"],
        &["wstate"],
        &["nonsense"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = run(&[
        "grid2d",
        "--config",
        configs().join("grid-equal.conf").to_str().unwrap(),
        "--set",
        "constraint.rabi1=bogus",
    ]);
    assert!(stderr(&o).contains("rabi1 = bogus"), "{}", stderr(&o));
}

#[test]
fn parse_errors_name_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "gamma2 = 2\nrabi1 = two\n").unwrap();
    let o = run(&["spectrum", "--config", conf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 2") && e.contains("rabi1"), "{e}");
}

#[test]
fn missing_config_is_an_io_error() {
    let o = run(&["spectrum", "--config", "/nonexistent/x.conf"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn design_reports_ratios() {
    let o = run(&[
        "design",
        "--config",
        configs().join("design-w.conf").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    let ratio = column(&csv, "rabi_ratio");
    assert!((ratio[1] - 0.517638).abs() < 1e-6);
    assert!((column(&csv, "F")[0] - 1.0).abs() < 1e-9);
    let o = run(&["design", "--set", "target=0.5,0.5"]);
    assert!(
        stderr(&o).contains("rabi1/rabi2 = 2.41421356"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn unreachable_design_exits_3_with_best_iterate() {
    let o = run(&[
        "design",
        "--set",
        "target=0.05,0.8",
        "--set",
        "gamma2=2",
        "--set",
        "rabi1=2",
        "--set",
        "decay=0.2",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("rabi ratios"), "{}", stderr(&o));
}

#[test]
fn oracle_exit_codes() {
    let conf = configs().join("oracle.conf");
    let o = run(&[
        "oracle",
        "--config",
        conf.to_str().unwrap(),
        "--set",
        "deltas=0,0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("max_abs_err"));
    let o = run(&[
        "oracle",
        "--config",
        conf.to_str().unwrap(),
        "--set",
        "deltas=0",
        "--set",
        "sigma=0.2",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let o = run(&[
        "oracle",
        "--config",
        conf.to_str().unwrap(),
        "--set",
        "deltas=0",
        "--set",
        "dt=2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("reduce dt"), "{}", stderr(&o));
}

#[test]
fn shipped_configs_run() {
    for (cmd, conf) in [
        ("wstate", "rb87.conf"),
        ("spectrum", "rb87.conf"),
        ("grid2d", "grid-sqrt2.conf"),
        ("grid2d", "grid-equal.conf"),
        ("spectrum", "spectrum-decay.conf"),
        ("wstate", "wstate-ratio.conf"),
        ("wstate", "wstate-decay.conf"),
        ("design", "design-w.conf"),
    ] {
        let o = run(&[
            cmd,
            "--config",
            configs().join(conf).to_str().unwrap(),
            "--workers",
            "2",
        ]);
        assert!(o.status.success(), "{cmd} {conf}: {}", stderr(&o));
    }
    let o = run(&[
        "wstate",
        "--config",
        configs().join("wstate-decay.conf").to_str().unwrap(),
    ]);
    let f = column(&String::from_utf8(o.stdout).unwrap(), "F");
    assert!((f.last().unwrap() - 0.9232).abs() < 1e-4);
}

#[test]
fn grid_output_is_independent_of_workers() {
    let conf = configs().join("grid-sqrt2.conf");
    let a = run(&[
        "grid2d",
        "--config",
        conf.to_str().unwrap(),
        "--workers",
        "1",
    ]);
    let b = run(&[
        "grid2d",
        "--config",
        conf.to_str().unwrap(),
        "--workers",
        "8",
    ]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}
