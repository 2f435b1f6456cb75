use std::process::{Command, Output};

use serde_json::Value;

fn rmtk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmtk")).args(args).env_remove("RMTK_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<csv::StringRecord> {
    let text = stdout(o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap()).collect()
}

fn num(r: &csv::StringRecord, i: usize) -> f64 {
    r[i].parse().unwrap()
}

#[test]
fn kernel_csv_round_trips() {
    let o = rmtk(&["kernel", "--beta", "2", "--n", "1", "--xp", "0,0.5", "--xq", "0,-0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("beta,N,x_p,x_q,method,value,uncertainty\n"));
    let r = rows(&o);
    assert_eq!(r.len(), 2);
    assert_eq!(num(&r[0], 5), 1.0 / std::f64::consts::PI.sqrt());
    assert_eq!(&r[0][4], "analytic");
    assert_eq!(num(&r[0], 5), rmtk::kernel_gue(1, 0.0, 0.0));
}

#[test]
fn kernel_routes_agree() {
    let args = ["kernel", "--beta", "1", "--n", "3", "--xp", "0.2,-0.7", "--xq", "0.9,0.4"];
    let a = rows(&rmtk(&args));
    let mut sup = args.to_vec();
    sup.extend(["--method", "superint"]);
    let s = rows(&rmtk(&sup));
    for (x, y) in a.iter().zip(&s) {
        assert!((num(x, 5) - num(y, 5)).abs() < 1e-8);
    }
}

#[test]
fn kernel_json_output() {
    let o = rmtk(&["kernel", "--beta", "4", "--n", "2", "--xp", "0.1", "--xq", "0.3", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "kernel");
    let row = &v["rows"][0];
    assert_eq!(row["beta"], 4);
    let want = rmtk::kernel_gse(2, 0.1, 0.3);
    assert!((row["value"].as_f64().unwrap() - want).abs() < 1e-15);
}

#[test]
fn kernel_grid_skips_the_diagonal() {
    let r = rows(&rmtk(&["kernel", "--grid", "-1:1:1", "--n", "2"]));
    assert_eq!(r.len(), 6);
    assert!(r.iter().all(|x| x[2] != x[3]));
}

#[test]
fn mc_output_is_independent_of_workers() {
    let base = ["kernel", "--method", "mc", "--beta", "4", "--n", "3", "--xp", "0.5,1.0", "--xq", "-0.5,0.0", "--samples", "4000"];
    let a = rmtk(&base);
    let mut more = base.to_vec();
    more.extend(["--workers", "4"]);
    let b = rmtk(&more);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_rmtk")).args(base).env("RMTK_THREADS", "3").output().unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn histogram_mass_and_outside_row() {
    let o = rmtk(&["histogram", "--beta", "1", "--n", "5", "--grid", "-2:2:0.5", "--samples", "2000", "--workers", "2"]);
    assert!(o.status.success());
    let r = rows(&o);
    let last = r.last().unwrap();
    assert_eq!(&last[0], "outside");
    let mass: f64 = r.iter().map(|x| num(x, 4)).sum();
    assert!((mass - 5.0).abs() < 1e-12);
}

#[test]
fn density_is_even_and_normalized() {
    let r = rows(&rmtk(&["density", "--beta", "4", "--n", "3", "--grid", "-6:6:0.01"]));
    let n = r.len();
    for i in 0..n / 2 {
        assert!((num(&r[i], 1) - num(&r[n - 1 - i], 1)).abs() < 1e-13);
    }
    let mass: f64 = r.iter().map(|x| num(x, 2)).sum();
    assert!((mass - 3.0).abs() < 1e-6);
}

#[test]
fn corr_analytic_and_mc() {
    let o = rmtk(&["corr", "--beta", "2", "--n", "2", "--points", "0.3,-0.4", "--points", "0.1,0.8"]);
    let r = rows(&o);
    assert_eq!(r.len(), 2);
    assert_eq!(&r[0][2], "2");
    let mc = rows(&rmtk(&["corr", "--method", "mc", "--n", "2", "--points", "0.3,-0.4", "--samples", "20000"]));
    let (v, e) = (num(&mc[0], 5), num(&mc[0], 6));
    assert!((v - num(&r[0], 5)).abs() < 4.0 * e + 0.02);
}

#[test]
fn verify_reports_json() {
    let o = rmtk(&["verify", "identities"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["suite"], "identities");
    assert_eq!(v["summary"]["failed"], 0);
    let o = rmtk(&["verify", "superint", "--beta", "2", "--n", "3", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(rows(&o).len(), 1);
}

#[test]
fn constants_table() {
    let r = rows(&rmtk(&["constants", "--n-max", "5"]));
    for x in &r {
        if &x[0] == "c" {
            assert!(num(x, 4) < 1e-8, "{x:?}");
        }
    }
    assert!(r.iter().any(|x| &x[0] == "omega_1(0)"));
}

#[test]
fn out_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("rmtk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k.csv");
    let o = rmtk(&["kernel", "--xp", "0.1", "--xq", "0.2", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().count() == 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(rmtk(&["kernel", "--bogus"]).status.code(), Some(2));
    assert_eq!(rmtk(&["kernel", "--beta", "3", "--xp", "0", "--xq", "1"]).status.code(), Some(2));
    assert_eq!(rmtk(&["kernel", "--xp", "0,1", "--xq", "1"]).status.code(), Some(2));
    assert_eq!(rmtk(&["kernel", "--method", "mc", "--xp", "0", "--xq", "1", "--samples", "10"]).status.code(), Some(2));
    assert_eq!(rmtk(&["kernel", "--method", "mc", "--xp", "0.2", "--xq", "0.2"]).status.code(), Some(4));
    assert_eq!(rmtk(&["corr", "--points", "0.1,0.1"]).status.code(), Some(4));
    assert_eq!(rmtk(&["verify", "superint", "--n", "3", "--abs-tol", "0", "--rel-tol", "0"]).status.code(), Some(2));
    assert_eq!(rmtk(&["--help"]).status.code(), Some(0));
}

#[test]
fn failing_checks_exit_one() {
    // a tolerance far below what quadrature can reach makes the closure check fail
    let o = rmtk(&["verify", "superint", "--beta", "1", "--n", "5", "--abs-tol", "1e-300", "--rel-tol", "1e-300"]);
    assert!(matches!(o.status.code(), Some(1) | Some(3)), "{:?}", o.status);
}
