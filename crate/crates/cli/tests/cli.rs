use std::path::PathBuf;
use std::process::{Command, Output};

use copoly_core::deloc::{solve_deloc, DelocParams};
use copoly_core::entropy::model_constants;

fn copoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copoly")).args(args).output().expect("run copoly")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o).lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("copoly-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn constants_table() {
    let o = copoly(&["constants"]);
    assert!(o.status.success());
    let c = model_constants().unwrap();
    let expected = format!(
        "name,value\nkappa_star,0.804718956217\na_star,2.5\nslope_const,0.293893332451\nmu_sup,{}\nmu_sup_value,{}\nalpha0,{}\nalpha1,{}\n",
        copoly_cli::output::fmt_float(c.mu_sup),
        copoly_cli::output::fmt_float(c.mu_sup_value),
        copoly_cli::output::fmt_float(c.alpha0),
        copoly_cli::output::fmt_float(c.alpha1),
    );
    assert_eq!(stdout(&o), expected);
    let m: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(m["command"], "constants");
    for k in ["command", "params", "seed", "version", "elapsed_s"] {
        assert!(m.get(k).is_some(), "manifest key {k}");
    }
}

#[test]
fn deloc_row_matches_the_solver() {
    let o = copoly(&["deloc", "--alpha", "1", "--beta", "0", "--rho", "0.5"]);
    assert!(o.status.success());
    let r = rows(&o);
    assert_eq!(r[0].join(","), "alpha,beta,rho,x_bar,y_bar,F,residual1,residual2,x_unbounded");
    assert_eq!(r.len(), 2);
    let s = solve_deloc(DelocParams::new(1.0, 0.0, 0.5).unwrap()).unwrap();
    let f = |i: usize| r[1][i].parse::<f64>().unwrap();
    assert!((f(3) - s.x_bar).abs() < 1e-10 && (f(4) - s.y_bar).abs() < 1e-10 && (f(5) - s.f).abs() < 1e-10);
    assert!(f(6).abs() < 1e-10 && f(7).abs() < 1e-10);
    assert_eq!(r[1][8], "false");
}

#[test]
fn phase_example_sweep() {
    let o = copoly(&["phase", "--p", "0.7", "--alpha-max", "3", "--beta-max", "3", "--res", "0.05"]);
    assert!(o.status.success());
    let r = rows(&o);
    let h = &r[0];
    assert_eq!(h.len(), 17);
    assert_eq!(r.len() - 1, 61 * 121);
    let (a, b, st, err) = (col(h, "alpha"), col(h, "beta"), col(h, "state"), col(h, "error"));
    let alpha0 = model_constants().unwrap().alpha0;
    let mut diagonal = 0;
    for row in &r[1..] {
        assert_eq!(row.len(), 17);
        let (x, y): (f64, f64) = (row[a].parse().unwrap(), row[b].parse().unwrap());
        if x == y && x < alpha0 {
            assert_eq!(row[st], "Delocalized", "{row:?}");
            diagonal += 1;
        }
        // β > α maps to density 0.3, which needs ρ*(0.3)
        assert_eq!(row[err].is_empty(), y <= x, "{row:?}");
    }
    assert_eq!(diagonal, 3);
    // canonical order: α outer, β inner
    assert_eq!((r[1][a].as_str(), r[1][b].as_str()), ("0", "-3"));
    assert_eq!((r[2][a].as_str(), r[2][b].as_str()), ("0", "-2.95"));
}

#[test]
fn usage_and_parameter_errors_exit_1() {
    let o = copoly(&["deloc", "--alpha", "1", "--beta", "0", "--rho", "0.5", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(copoly(&["nope"]).status.code(), Some(1));
    assert_eq!(copoly(&["deloc", "--alpha", "1", "--beta", "0", "--rho", "1.5"]).status.code(), Some(1));
    assert_eq!(copoly(&["entropy", "--a", "1.5"]).status.code(), Some(1));
    assert_eq!(copoly(&["blocks", "--alpha", "1", "--beta", "0", "--a", "3", "--kind", "AA"]).status.code(), Some(1));
    assert_eq!(copoly(&["--help"]).status.code(), Some(0));
}

#[test]
fn strict_undecided_query_exits_3() {
    let args = ["phase", "--p", "0.7", "--alpha-min", "0.5", "--alpha-max", "0.5", "--beta-min", "0.45", "--beta-max", "0.45"];
    let o = copoly(&args);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Undecided"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(copoly(&strict).status.code(), Some(3));
    // a decided cell keeps exit 0 under --strict
    let o = copoly(&["phase", "--p", "0.7", "--alpha-max", "0.1", "--beta-min", "0", "--beta-max", "0.1", "--strict"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn convergence_failures_map_to_exit_2() {
    let e = copoly_cli::CliError::from(copoly_core::Error::Convergence("x".into()));
    assert_eq!(e.exit_code(), 2);
    let e = copoly_cli::CliError::from(copoly_core::Error::Domain("x".into()));
    assert_eq!(e.exit_code(), 1);
}

#[test]
fn random_commands_need_a_seed() {
    for args in [
        vec!["percolation", "--p", "0.5"],
        vec!["interface", "--alpha", "1", "--beta", "0", "--mu", "2", "--L", "40"],
        vec!["blocks", "--alpha", "1", "--beta", "0", "--L", "40"],
        vec!["phase", "--p", "0.3", "--steps", "400"],
        vec!["phase", "--alpha-star", "--p", "0.3", "--steps", "400"],
    ] {
        let o = copoly(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"), "{args:?}");
    }
}

#[test]
fn output_is_independent_of_threads() {
    let runs = [
        vec!["percolation", "--p", "0.5,0.7", "--steps", "400", "--replicas", "6", "--seed", "9"],
        vec!["phase", "--p", "0.4", "--alpha-max", "1", "--beta-max", "1", "--res", "0.25", "--steps", "400", "--seed", "2"],
        vec!["interface", "--alpha", "1", "--beta", "0.5", "--mu", "1.5,2", "--L", "60", "--replicas", "6", "--seed", "4"],
    ];
    for args in runs {
        let mut one = vec!["--threads", "1"];
        one.extend(&args);
        let mut four = vec!["--threads", "4"];
        four.extend(&args);
        let (a, b) = (copoly(&one), copoly(&four));
        assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_writes_csv_and_manifest_side_by_side() {
    let base = scratch("perc");
    let o = copoly(&[
        "percolation", "--p", "0.6", "--steps", "400", "--replicas", "4", "--seed", "5", "--out", base.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    assert!(csv.starts_with("p,steps,replicas,seed,rho_quarter,rho_half,rho_full,stderr_full,intercept,slope,residual,is_pc\n"));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap()).unwrap();
    assert_eq!(m["command"], "percolation");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["params"]["steps"], 400);
    // rerunning from the manifest's parameters reproduces the CSV byte for byte
    let again = copoly(&["percolation", "--p", "0.6", "--steps", "400", "--replicas", "4", "--seed", "5"]);
    assert_eq!(stdout(&again), csv);
}

#[test]
fn help_documents_columns() {
    for (cmd, cols) in [
        ("deloc", "alpha,beta,rho,x_bar,y_bar,F,residual1,residual2,x_unbounded"),
        ("constants", "name,value"),
        ("phase", "Curve columns: alpha,beta_lower,beta_upper"),
        ("oracle", "a,b,L,rate,restricted_rate"),
    ] {
        let o = copoly(&[cmd, "--help"]);
        assert!(stdout(&o).contains(cols), "{cmd}");
    }
}

#[test]
fn alpha_star_and_curve_modes() {
    let o = copoly(&["phase", "--alpha-star", "--rho", "0.000001,0.999999"]);
    let r = rows(&o);
    assert_eq!(r[0].join(","), "p,rho,alpha_star");
    let a: Vec<f64> = r[1..].iter().map(|x| x[2].parse().unwrap()).collect();
    assert!((a[0] - 0.1253).abs() < 2e-3 && (a[1] - 0.1541).abs() < 2e-3, "{a:?}");
    let o = copoly(&["phase", "--curve", "--alpha-max", "2", "--res", "0.5"]);
    let r = rows(&o);
    assert_eq!(r[0].join(","), "alpha,beta_lower,beta_upper,beta_estimate,beta_estimate_err,diagonal");
    assert_eq!(r.len(), 6);
    for x in &r[1..] {
        let (lo, hi): (f64, f64) = (x[1].parse().unwrap(), x[2].parse().unwrap());
        assert!(lo <= hi);
        // bounds only: a point estimate exists only where the diagonal is certified
        assert_eq!(x[3].is_empty(), x[5] == "false", "{x:?}");
    }
}
