use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fiblucas"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).env_remove("FIBLUCAS_OUT").env_remove("FIBLUCAS_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every error path prints exactly one `ERROR <CODE>: text` line.
fn assert_error(o: &Output, code: &str) {
    assert_eq!(o.status.code(), Some(2), "{}", stderr(o));
    let err = stderr(o);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{}", err);
    assert!(lines[0].starts_with(&format!("ERROR {}: ", code)), "{}", err);
}

#[test]
fn table_lists_specialized_polynomials() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["table", "--family", "F", "--variant", "zeta", "--n-max", "4"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o), "n\tpolynomial\n1\t1\n2\tzeta\n3\tzeta^2 + 1\n4\tzeta^3 + 2*zeta\n");
}

#[test]
fn stages_chain_through_json_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = run(&["reduce", "--case", "case1", "--out", "a"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(d.join("a/ode.json").exists());

    let o = run(&["balance", "--ode", "a/ode.json", "--out", "a"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR E_BALANCE: "));
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("a/balance.json")).unwrap()).unwrap();
    assert_eq!(rec["attempts"].as_array().unwrap().len(), 3);

    let o = run(&["solve", "--ode", "a/ode.json", "--n", "1", "--mode", "strict", "--out", "a"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let branches: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("a/branches.json")).unwrap()).unwrap();
    assert_eq!(branches.as_array().unwrap().len(), 4);

    let o = run(&["verify", "--case", "case1", "--branches", "a/branches.json", "--out", "b"], d);
    assert!(o.status.success(), "{}", stdout(&o));
    let reports: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("b/report.json")).unwrap()).unwrap();
    for r in reports.as_array().unwrap() {
        assert!(r["report"]["max_abs_residual"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn pipeline_writes_artifacts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["r1", "r2"] {
        let o = run(&["pipeline", "--case", "case4", "--n-range", "-2..2", "--out", out], d);
        // No branch survives screening, so the run reports failure.
        assert_eq!(o.status.code(), Some(1));
        assert!(stdout(&o).contains("E_NO_SOLUTION"));
    }
    for f in ["branches.json", "report.json", "grid.csv"] {
        let a = std::fs::read(d.join("r1").join(f)).unwrap();
        let b = std::fs::read(d.join("r2").join(f)).unwrap();
        assert_eq!(a, b, "{} differs between runs", f);
    }
}

#[test]
fn empty_candidate_range_has_no_admissible_index() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["pipeline", "--case", "case1", "--n-range", "1..0", "--out", "e"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("E_NO_ADMISSIBLE_INDEX"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["reduce", "--case", "case2"])
        .current_dir(dir.path())
        .env("FIBLUCAS_OUT", "envout")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("envout/ode.json").exists());
}

#[test]
fn plot_data_emits_figure_grids() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["plot-data", "--case", "case4", "--out", "p", "--grid", "x=0.1:2:3,t=0.1:2:3"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("p/fig5.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.starts_with("x,t,u,in_domain\n"));
    assert!(dir.path().join("p/fig5.report.json").exists());
}

#[test]
fn inline_pde_verifies_an_expression() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "verify",
            "--pde",
            "u_t - u_xx = 0",
            "--transform",
            "zeta = x/sqrt(t)",
            "--grid",
            "x=0:1:5,t=0.5:1:5",
            "--expr",
            "exp(-t)*sin(x)",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v[0]["report"]["max_abs_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn error_paths_print_one_coded_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_error(&run(&["reduce", "--pde", "u_t - (u^2_xx", "--transform", "eta=t/x^2", "--grid", "x=1:2:3,t=1:2:3"], d), "E_SYNTAX");
    assert_error(&run(&["reduce", "--pde", "u_t - w = 0", "--transform", "eta=t/x^2", "--grid", "x=1:2:3,t=1:2:3"], d), "E_UNKNOWN_SYMBOL");
    assert_error(&run(&["reduce", "--case", "nope.json"], d), "E_IO");
    assert_error(&run(&["plot-data", "--case", "case1", "--grid", "x=1:2:1,t=0:1:3"], d), "E_CONFIG");
    assert_error(&run(&["table", "--family", "F", "--n-max", "0"], d), "E_OUT_OF_RANGE");
    assert_error(&run(&["pipeline", "--case", "case1", "--n-range", "1-3"], d), "E_CONFIG");
}
