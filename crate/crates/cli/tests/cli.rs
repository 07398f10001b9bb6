use std::process::{Command, Output};

use satnls_cli::{branch_csv, branch_json, export_branch, read_branch_json, Format, BRANCH_HEADER};
use satnls_core::{continue_branch, find_bifurcation_points, Branch, ContinuationConfig, Params, RadialGrid};

fn satnls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satnls"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn short_branch(steps: usize) -> Branch {
    let params = Params::new(1.0, 0.25, 1.0, 1.0, 0.5, 1).unwrap();
    let grid = RadialGrid::new(30.0, 1201).unwrap();
    let s = satnls_core::log_spaced(0.5, 0.9, 12);
    let search = find_bifurcation_points(&params, 1..=1, &s, 1e-10, &grid).unwrap();
    let cfg = ContinuationConfig {
        max_steps: steps,
        ..Default::default()
    };
    continue_branch(search.first(1).unwrap(), &params, &cfg, 1).unwrap()
}

#[test]
fn check_conditions_reports_corollary_two() {
    let out = satnls(&[
        "check-conditions",
        "--n",
        "1",
        "--lambda1",
        "1",
        "--lambda2",
        "0.25",
        "--alpha",
        "1",
        "--beta",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let c2 = v["corollary2"].as_array().unwrap();
    assert_eq!(c2[0]["k0"], 0);
    assert_eq!(c2[0]["holds"], false);
    assert_eq!(c2[1]["k0"], 1);
    assert_eq!(c2[1]["holds"], true);
}

#[test]
fn eigencurves_header_and_first_row() {
    let out = satnls(&[
        "eigencurves",
        "--kmax",
        "3",
        "--smin",
        "0.001",
        "--smax",
        "0.5",
        "--scount",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,mu_0,mu_1,mu_2"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    for k in 0..3 {
        let w = 0.5 + 2.0 * k as f64;
        let closed = 2.0 / (w * (w + 1.0));
        assert!(
            (first[k + 1] / closed - 1.0).abs() < 0.01,
            "k = {k}: {} vs {closed}",
            first[k + 1]
        );
    }
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn ground_state_outside_window_names_bound() {
    let out = satnls(&["ground-state", "--alpha", "2", "--lambda1", "1", "--s", "2.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("alpha/lambda1 = 2"), "{}", stderr(&out));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = satnls(&["spectrum", "--gamma", "1"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("Usage"));
}

#[test]
fn missing_command_is_usage_error() {
    assert_eq!(satnls(&["--s", "0.3"]).status.code(), Some(64));
}

#[test]
fn unwritable_output_exits_74() {
    let out = satnls(&["spectrum", "--out", "/nonexistent-dir/out.csv"]);
    assert_eq!(out.status.code(), Some(74));
}

#[test]
fn invalid_parameters_exit_1() {
    assert_eq!(satnls(&["spectrum", "--lambda1=-1"]).status.code(), Some(1));
    assert_eq!(satnls(&["spectrum", "--n", "4"]).status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let kv = dir.path().join("run.cfg");
    std::fs::write(&kv, "# comment\nlambda2 = 0.25\ns = 0.3\nkmax = 2\nformat = json\n").unwrap();
    let js = dir.path().join("run.json");
    std::fs::write(&js, r#"{"lambda2": 0.25, "s": 0.3, "kmax": 2, "format": "json"}"#).unwrap();

    let a = satnls(&["spectrum", "--config", kv.to_str().unwrap(), "--s", "0.4"]);
    let b = satnls(&["spectrum", "--config", js.to_str().unwrap(), "--s", "0.4"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["s"], 0.4);
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 2);

    std::fs::write(&kv, "gamma = 1\n").unwrap();
    assert_eq!(
        satnls(&["spectrum", "--config", kv.to_str().unwrap()]).status.code(),
        Some(64)
    );
    assert_eq!(
        satnls(&["spectrum", "--config", "/nonexistent.cfg"]).status.code(),
        Some(74)
    );
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("box.csv");
    let out = satnls(&[
        "box-oracle",
        "--lambda2",
        "1",
        "--eps",
        "0.2,0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("eps,mu_0,distance\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn empty_branch_is_header_only() {
    let mut branch = short_branch(2);
    branch.points.clear();
    assert_eq!(branch_csv(&branch), format!("{BRANCH_HEADER}\n"));
}

#[test]
fn branch_rows_in_step_order_and_json_round_trip() {
    let branch = short_branch(6);
    let csv = branch_csv(&branch);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), branch.points.len());
    for (row, p) in rows.iter().zip(&branch.points) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 10);
        assert_eq!(f[0].parse::<usize>().unwrap(), p.step);
        assert_eq!(f[1].parse::<f64>().unwrap().to_bits(), p.s.to_bits());
        assert!(f[3].parse::<f64>().unwrap() <= ContinuationConfig::default().newton_tol);
    }

    let back = read_branch_json(&branch_json(&branch).unwrap()).unwrap();
    assert_eq!(back.points.len(), branch.points.len());
    for (a, b) in back.points.iter().zip(&branch.points) {
        assert_eq!(a.s.to_bits(), b.s.to_bits());
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        for (x, y) in a.state.u.values.iter().zip(&b.state.u.values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a.state.v.values.iter().zip(&b.state.v.values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    assert_eq!(back, branch);
    assert_eq!(back.origin.s_k.to_bits(), branch.origin.s_k.to_bits());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    export_branch(&branch, Some(&path), Format::Json).unwrap();
    assert_eq!(
        read_branch_json(&std::fs::read_to_string(&path).unwrap()).unwrap(),
        branch
    );
}

#[test]
fn export_to_unwritable_path_is_io_error() {
    let branch = short_branch(1);
    let err = export_branch(
        &branch,
        Some(std::path::Path::new("/nonexistent-dir/b.csv")),
        Format::Csv,
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 74);
}

#[test]
fn continue_branch_residuals_below_tol() {
    let args = [
        "continue-branch",
        "--k",
        "1",
        "--points",
        "1201",
        "--smin",
        "0.5",
        "--smax",
        "0.9",
        "--scount",
        "12",
        "--max-steps",
        "8",
        "--tol",
        "1e-9",
    ];
    let out = satnls(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some(BRANCH_HEADER));
    assert!(text.lines().count() > 2);
    for row in text.lines().skip(1) {
        let res: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(res <= 1e-9, "{row}");
    }
}
