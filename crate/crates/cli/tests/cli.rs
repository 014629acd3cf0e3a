use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn phcavity(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phcavity"))
        .args(args)
        .env("PHCAVITY_OUT", out)
        .output()
        .expect("binary runs")
}

/// A small, fast cavity: two rings at ten cells per lattice constant.
const SMALL: &str = r#"
name = "small"
seed = 3

[structure.crystal]
a = 10
r_over_a = 0.3
d_over_a = 0.6
n_slab = 3.4
num_layers = 2

[[structure.defects]]
kind = "radius_change"
r_def_over_a = 0.15

[solver]
absorber_cells = 8
discovery_periods = 30.0
source_bandwidth = 0.08
settle_periods = 4.0
measure_periods = 10.0

[analysis]
farfield = false
"#;

#[test]
fn presets_list_names_every_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let o = phcavity(&["presets", "list"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["table1-row2", "dislocation-sweep", "four-hole", "coupled-x", "coupled-y", "bands", "farfield-comparison"] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn preset_show_round_trips_through_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = phcavity(&["presets", "show", "table1-row2"], dir.path());
    assert!(o.status.success());
    let cfg = dir.path().join("row2.toml");
    fs::write(&cfg, &o.stdout).unwrap();
    let text = fs::read_to_string(&cfg).unwrap();
    assert!(text.contains("r_def_over_a = 0.2"));
}

#[test]
fn invalid_defect_radius_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, SMALL.replace("r_def_over_a = 0.15", "r_def_over_a = 0.35")).unwrap();
    let o = phcavity(&["simulate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("r_def_over_a <= r_over_a"), "{err}");
}

#[test]
fn parse_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, SMALL.replace("num_layers = 2", "num_layers = two")).unwrap();
    let o = phcavity(&["simulate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 10"), "{err}");
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let o = phcavity(
        &["sweep", "--config", cfg.to_str().unwrap(), "--parameter", "r_def_over_a", "--values", ""],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("small/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("parameter,value,status,structure_id,p,a_over_lambda"));
}

#[test]
fn unknown_sweep_parameter_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let o = phcavity(
        &["sweep", "--config", cfg.to_str().unwrap(), "--parameter", "height", "--values", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn same_config_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let mut reports = Vec::new();
    for run in ["one", "two"] {
        let out = dir.path().join(run);
        let o = phcavity(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        reports.push(fs::read(out.join("small/report.csv")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let text = String::from_utf8(reports[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn sweep_rows_are_sorted_by_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let o = phcavity(
        &[
            "sweep", "--config", cfg.to_str().unwrap(), "--parameter", "r_def_over_a", "--values", "0.2,0.1", "--workers", "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("small/sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "0.1");
    assert_eq!(rows[1][1], "0.2");
    for r in &rows {
        assert_eq!(r[2], "ok");
        assert_eq!(r.len(), csv.lines().next().unwrap().split(',').count());
    }
}

#[test]
fn readme_configuration_example_parses() {
    let readme = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    let start = readme.find("```toml\n").expect("toml example") + "```toml\n".len();
    let len = readme[start..].find("```").unwrap();
    let cfg = phcavity::config::RunConfig::from_toml(&readme[start..start + len]).unwrap();
    assert_eq!(cfg.outputs.slices.len(), 1);
}
