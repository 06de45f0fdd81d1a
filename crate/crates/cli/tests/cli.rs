use std::path::Path;
use std::process::{Command, Output};

use fbxlab::mesh::GridFunction;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbxlab"))
        .args(args)
        .env("FBXLAB_OUT", dir.join("out"))
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn solve_writes_field_and_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["solve", "--bc", "linear", "--a", "0", "--lambda", "1", "--n", "33"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("out/solve");
    assert!(out.join("field.txt").is_file());
    let energy = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    assert!(energy.starts_with("# fbxlab"));
    assert!(energy.contains("lambda_plus=1"));
    let rows = data_rows(&out.join("energy.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0][3].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn zero_penalty_matches_aharmonic() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(tmp.path(), &["solve", "--lambda", "0", "--a", "0.3", "--n", "33"])), 0);
    assert_eq!(code(&run(tmp.path(), &["aharmonic", "--lambda", "0", "--a", "0.3", "--n", "33"])), 0);
    let u = GridFunction::load(&tmp.path().join("out/solve/field.txt")).unwrap();
    let v = GridFunction::load(&tmp.path().join("out/aharmonic/field.txt")).unwrap();
    let diff = u.values.iter().zip(&v.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-8, "{diff}");
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.toml"), "a = 0.1\nlamda = 2\n").unwrap();
    let o = run(tmp.path(), &["solve", "--config", "c.toml"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lamda"));
}

#[test]
fn flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.toml"), "a = 0.1\ngrid_n = 33\nlambda_plus = 3\n").unwrap();
    let o = run(tmp.path(), &["barrier", "--config", "c.toml", "--a", "0.2", "--eps", "0.01"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(tmp.path().join("out/barrier/barrier.csv")).unwrap();
    assert!(text.contains("a=0.2 lambda_plus=3"), "{text}");
}

#[test]
fn invalid_values_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(tmp.path(), &["solve", "--n", "32"])), 2);
    assert_eq!(code(&run(tmp.path(), &["solve", "--a", "1.5"])), 2);
    assert_eq!(code(&run(tmp.path(), &["solve", "--bc", "wobbly"])), 2);
    assert_eq!(code(&run(tmp.path(), &["diagnose", "--field", "missing.txt"])), 2);
    assert_eq!(code(&run(tmp.path(), &["spectrum", "--domain", "disk"])), 2);
    assert_eq!(code(&run(tmp.path(), &["frobnicate"])), 2);
}

#[test]
fn diagnose_presets() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["diagnose", "--preset", "x1", "--n", "65"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for row in data_rows(&tmp.path().join("out/diagnose/almgren.csv")) {
        assert!((row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-8);
    }
    let o = run(tmp.path(), &["diagnose", "--preset", "zero", "--n", "33"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn diagnose_stored_minimizer() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(tmp.path(), &["solve", "--n", "65", "--a", "0"])), 0);
    let o = run(tmp.path(), &["diagnose", "--field", "out/solve/field.txt", "--n", "65"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tmp.path().join("out/diagnose");
    for f in ["almgren.csv", "weiss.csv", "scaled_odd.csv", "scaled_even.csv", "phases.csv", "fits.csv"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let fits = data_rows(&dir.join("fits.csv"));
    assert_eq!(fits.len(), 4);
}

#[test]
fn spectrum_upper_arc() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["spectrum", "--a", "0.5", "--domain", "upper", "--k", "3"]);
    assert_eq!(code(&o), 0);
    let rows = data_rows(&tmp.path().join("out/spectrum/spectrum.csv"));
    assert_eq!(rows.len(), 3);
    assert!((rows[0][2].parse::<f64>().unwrap() - 0.5).abs() < 1e-3);
    assert!(tmp.path().join("out/spectrum/eigenfunction_3.csv").is_file());
}

#[test]
fn sweep_separation_grows_with_lambda() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["sweep", "--lambda", "0.25,0.5,1,2", "--n", "65", "--jobs", "3"]);
    assert_eq!(code(&o), 0);
    let rows = data_rows(&tmp.path().join("out/sweep/sweep.csv"));
    assert_eq!(rows.len(), 4);
    let sep: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(sep.windows(2).all(|w| w[1] >= w[0]), "{sep:?}");
    assert!(rows.iter().all(|r| r[6] == "ok"));
}

#[test]
fn sweep_records_failures_without_aborting() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["sweep", "--a-values", "0,1.5", "--lambda", "1", "--n", "33"]);
    assert_eq!(code(&o), 0);
    let rows = data_rows(&tmp.path().join("out/sweep/sweep.csv"));
    assert_eq!(rows[0][6], "ok");
    assert!(rows[1][6].starts_with("error"));
}

#[test]
fn runs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["sweep", "--lambda", "0.5,1", "--n", "33", "--jobs", "2"];
    assert_eq!(code(&run(tmp.path(), &args)), 0);
    let first = std::fs::read(tmp.path().join("out/sweep/sweep.csv")).unwrap();
    assert_eq!(code(&run(tmp.path(), &args)), 0);
    let second = std::fs::read(tmp.path().join("out/sweep/sweep.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn barrier_values_decrease() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["barrier", "--eps", "0.04,0.01,0.0025"]);
    assert_eq!(code(&o), 0);
    let rows = data_rows(&tmp.path().join("out/barrier/barrier.csv"));
    let j: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(j.len(), 3);
    assert!(j[0] > j[1] && j[1] > j[2]);
}

#[test]
fn symmetrize_report() {
    let tmp = tempfile::tempdir().unwrap();
    let g = fbxlab::mesh::Grid::new(17).unwrap();
    let u = GridFunction::from_fn(&g, 0.0, |[x, y]| 1.0 - (1.0 - x * x) * (1.0 - y * y) * (1.0 + x));
    u.save(&tmp.path().join("u.txt")).unwrap();
    let o = run(tmp.path(), &["symmetrize", "--field", "u.txt", "--level", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&tmp.path().join("out/symmetrize/symmetrize.csv"));
    let before: f64 = rows[0][0].parse().unwrap();
    let after: f64 = rows[0][1].parse().unwrap();
    assert!(after <= before + 1e-10);
    let o = run(tmp.path(), &["symmetrize", "--field", "u.txt", "--level", "0.5"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["selftest"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
