use std::fs;
use std::process::{Command, Output};

fn movant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_movant")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fixed_sweep_writes_csv_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("evm.csv");
    let o = movant(&[
        "evm",
        "--drops",
        "2",
        "--values",
        "0.05,1",
        "--strategies",
        "sparse_upa,compact_upa",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# movant sweep=evm\n# seed=1\n# config_sha256="));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "sweep_value,strategy,mean_rate,std_error,drops,limit");
    assert_eq!(rows.len(), 5);
    // EVM = 1 carries no information
    assert!(rows.iter().any(|r| r.starts_with("1,sparse_upa,0,")));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["subcarriers", "--profile", "smoke", "--drops", "1", "--values", "4", "--seed", "9"];
    let a = movant(&args);
    let b = movant(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = movant(&["subcarriers", "--profile", "smoke", "--drops", "1", "--values", "4", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_file_overrides_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "drops = 1\nstrategies = [\"compact_upa\"]\n[system]\nantennas = 4\n[sweep]\nvariable = \"power\"\nvalues = [0.1]\n")
        .unwrap();
    let o = movant(&["power", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("\n0.1,compact_upa,"));

    let shown = movant(&["config", "--sweep", "power", "--config", cfg.to_str().unwrap()]);
    assert!(stdout(&shown).contains("antennas = 4"));
}

#[test]
fn configuration_errors_exit_with_2() {
    assert_eq!(movant(&["power", "--drops", "0"]).status.code(), Some(2));
    assert_eq!(movant(&["evm", "--strategies", "fluid"]).status.code(), Some(2));
    assert_eq!(movant(&["evm", "--values", "1.5"]).status.code(), Some(2));
    assert_eq!(movant(&["evm", "--config", "/nonexistent/run.toml"]).status.code(), Some(2));
    assert_eq!(movant(&["frobnicate"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[system]\nantenas = 16\n").unwrap();
    let o = movant(&["evm", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("antenas"));

    // a sweep variable that does not match the subcommand
    fs::write(&cfg, "[sweep]\nvariable = \"evm\"\nvalues = [0.1]\n").unwrap();
    assert_eq!(movant(&["power", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_3() {
    // regions smaller than half a wavelength cannot host a movable antenna
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, "[system]\nregion_side_wavelengths = 0.1\nregion_pitch_wavelengths = 0.2\n").unwrap();
    let o = movant(&["layout", "--strategy", "movable", "--profile", "smoke", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn layout_and_scenario_exports_parse_back() {
    let layout = stdout(&movant(&["layout", "--strategy", "sparse_ula"]));
    let parsed = movant_core::geometry::read_layout::<f64, _>(layout.as_bytes()).unwrap();
    assert_eq!(parsed.len(), 16);
    assert!(parsed.positions().iter().all(|p| p.z == 0.0));

    let table = stdout(&movant(&["scenario", "--scenario", "nlos", "--drop", "3"]));
    let users = movant_core::channel::read_paths::<f64, _>(table.as_bytes()).unwrap();
    assert_eq!(users.len(), 10);
    assert!(users.iter().all(|u| u.len() == 201));
}

#[test]
fn optimised_layout_is_feasible() {
    let o = movant(&["layout", "--strategy", "movable", "--profile", "smoke", "--seed", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let layout = movant_core::geometry::read_layout::<f64, _>(o.stdout.as_slice()).unwrap();
    let grid = movant_core::experiment::SystemConfig::default().region_grid().unwrap();
    assert!(movant_core::geometry::check_feasible(&layout, &grid).unwrap().is_feasible());
}
