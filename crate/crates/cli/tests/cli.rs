use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn levelpass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levelpass")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<Vec<f64>> {
    stdout(o).lines().skip(1).map(|l| l.split(',').map(|t| t.parse().unwrap()).collect()).collect()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("levelpass-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn local_table_for_a_quadratic_has_one_row() {
    let o = levelpass(&["solve-local", "--problem", "quadratic-saddle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("i,f_x,M,gap_ratio,dist\n"));
    let r = rows(&o);
    assert_eq!(r.len(), 1);
    assert!(r[0][1].abs() <= 1e-12);
}

#[test]
fn local_table_for_the_bidiagonal_file() {
    let path = tmp("b5.txt");
    let text = "5\n\
        0.461+0.650j 0.006+0.625j 0 0 0\n\
        0 0.457+0.983j 0.297+0.733j 0 0\n\
        0 0 0.451+0.553j 0.049+0.376j 0\n\
        0 0 0 0.412+0.400j 0.693+0.010j\n\
        0 0 0 0 0.902+0.199j\n";
    std::fs::write(&path, text).unwrap();
    let o = levelpass(&["solve-local", "--matrix", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&o);
    assert!((3..=4).contains(&r.len()), "{}", stdout(&o));
    let last = r.last().unwrap();
    assert!((last[1] - 6.151109286142e-4).abs() <= 1e-9 * 6.151109286142e-4);
}

#[test]
fn malformed_input_exits_one_without_output() {
    let bad = tmp("bad.txt");
    std::fs::write(&bad, "2\n1 2\n3\n").unwrap();
    let out = tmp("never.csv");
    let o = levelpass(&["solve-local", "--matrix", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert!(!o.stderr.is_empty());

    assert_eq!(levelpass(&["solve-local", "--problem", "no-such-problem"]).status.code(), Some(1));
    assert_eq!(levelpass(&["solve-local", "--problem", "quadratic-saddle", "--matrix", "x"]).status.code(), Some(1));
    assert_eq!(levelpass(&["solve-local", "--problem", "quadratic-saddle", "--tol-gap", "0"]).status.code(), Some(1));
}

#[test]
fn bisection_table_halves() {
    let o = levelpass(&["solve-bisect", "--problem", "quadratic-saddle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("i,lower,upper,dist\n"));
    let r = rows(&o);
    for w in r.windows(2) {
        assert_eq!(w[1][2] - w[1][1], 0.5 * (w[0][2] - w[0][1]));
    }
    assert!(r.last().unwrap()[2] - r.last().unwrap()[1] <= 1e-6);
}

#[test]
fn bisection_bracket_on_the_double_well() {
    let o = levelpass(&["solve-bisect", "--problem", "double-well-curve"]);
    // the third midpoint is the pass value itself, where the grid cannot
    // separate the components; the rows so far are still printed
    assert_eq!(o.status.code(), Some(2));
    let last = rows(&o).pop().unwrap();
    assert!(last[1] <= 0.0 && 0.0 <= last[2]);

    let o = levelpass(&["solve-bisect", "--problem", "double-well-curve", "--upper", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let last = rows(&o).pop().unwrap();
    assert!(last[1] <= 0.0 && 0.0 <= last[2]);

    let o = levelpass(&["solve-bisect", "--problem", "quadratic-3d"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn wilkinson_reports() {
    let o = levelpass(&["wilkinson", "--matrix", "diag-0-2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["best"]["epsilon_bar_estimate"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    let z = &v["best"]["coalescence_point"];
    assert!((z[0].as_f64().unwrap() - 1.0).abs() <= 1e-9 && z[1].as_f64().unwrap().abs() <= 1e-9);

    let o = levelpass(&["wilkinson", "--matrix", "bidiagonal-10", "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["heuristic"]["pair"].is_array());
    assert!(v["best"]["chosen_pair"].is_array());
    assert_ne!(v["heuristic"]["pair"], v["best"]["chosen_pair"]);
    assert_eq!(v["alternatives"].as_array().unwrap().len(), 45);
}

#[test]
fn repeated_eigenvalue_gives_zero() {
    let path = tmp("jordan.txt");
    std::fs::write(&path, "2\n1 1\n0 1\n").unwrap();
    let pert = tmp("jordan-pert.json");
    let o = levelpass(&["wilkinson", "--matrix", path.to_str().unwrap(), "--perturbation", pert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["best"]["epsilon_bar_estimate"].as_f64(), Some(0.0));
    let p: Value = serde_json::from_str(&std::fs::read_to_string(&pert).unwrap()).unwrap();
    assert_eq!(p["norm"].as_f64(), Some(0.0));
}

#[test]
fn psgrid_of_a_scalar() {
    let path = tmp("zero.txt");
    std::fs::write(&path, "1\n0\n").unwrap();
    let o =
        levelpass(&["psgrid", "--matrix", path.to_str().unwrap(), "--grid", "3", "3", "--box", "-1", "-1", "1", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("x,y,sigma\n"));
    let r = rows(&o);
    assert_eq!(r.len(), 9);
    assert_eq!(r[4], vec![0.0, 0.0, 0.0]);
    assert_eq!(r[0][2], 2f64.sqrt());
    // x runs fastest
    assert_eq!((r[1][0], r[1][1]), (0.0, -1.0));
}

#[test]
fn psgrid_minimum_is_below_the_estimate() {
    let o = levelpass(&["psgrid", "--matrix", "bidiagonal-5", "--grid", "80", "80"]);
    assert_eq!(o.status.code(), Some(0));
    let min = rows(&o).iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    assert!(min <= 6.151109286142e-4);
}

#[test]
fn list_problems_names_everything() {
    let o = levelpass(&["list-problems", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for n in ["quadratic-saddle", "double-well-curve", "sqrt-cusp-2d", "bidiagonal-5", "bidiagonal-10"] {
        assert!(names.contains(&n), "{n}");
    }
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let path = tmp("local.csv");
    let o = levelpass(&["solve-local", "--problem", "perturbed-quadratic", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let direct = levelpass(&["solve-local", "--problem", "perturbed-quadratic"]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}
