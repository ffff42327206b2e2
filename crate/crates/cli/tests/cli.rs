use std::path::Path;
use std::process::{Command, Output};

use chernloc_cli::report::{RunReport, Status};

fn chernloc(args: &[&str], config: Option<&str>) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chernloc"));
    cmd.args(args).env("CHERN_THREADS", "1");
    if let Some(text) = config {
        let path = dir.path().join("scenario.txt");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    (cmd.output().unwrap(), dir)
}

fn report(out: &Output) -> RunReport {
    RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const WINDING: &str = "n = 1\nmap.kind = circle_winding\nmap.m = 2\n";

#[test]
fn winding_degree_report() {
    let (out, _dir) = chernloc(&["deg"], Some(WINDING));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r.scenario, "deg");
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.values[0].rounded, Some(-2));
    assert!(r.values[0].residual.unwrap() < 1e-10);
    assert_eq!(r.config["map.m"], "2");
    assert_eq!(r.config["grid.kind"], "default");
    assert!(r.tables.iter().all(|t| t.rows.len() >= 2));
    assert!(stderr(&out).contains("wall time"));
}

#[test]
fn identical_configs_give_identical_json() {
    let (a, _d1) = chernloc(&["deg"], Some(WINDING));
    let (b, _d2) = chernloc(&["deg"], Some(WINDING));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(RunReport::from_json(&r.to_json()).unwrap(), r);
    assert_eq!(r.to_json().as_bytes(), a.stdout.as_slice());
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.csv");
    let (out, _d) = chernloc(&["deg", "--format", "csv", "--out", out_path.to_str().unwrap()], Some(WINDING));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("table,resolution,re,im,delta"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("deg,32,"), "{first}");
    let second = lines.next().unwrap();
    assert!(second.starts_with("deg,64,"), "{second}");
}

#[test]
fn config_errors_exit_64_with_the_field() {
    let (out, _d) = chernloc(&["deg"], Some("n = 1\nmap.kind = circle_winding\nmap.q = 2\n"));
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("map.q"), "{}", stderr(&out));

    let (out, _d) = chernloc(&["deg-star"], Some("n = 4\nmap.kind = constant\n"));
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("n:"), "{}", stderr(&out));

    let (out, _d) = chernloc(&["deg"], Some("scenario = localize\nmap.kind = constant\n"));
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("scenario"), "{}", stderr(&out));

    let (out, _d) = chernloc(&["deg"], None);
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("--config"), "{}", stderr(&out));

    let (out, _d) = chernloc(&["deg", "--config", Path::new("/nonexistent/scenario").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn failed_oracle_exits_2() {
    let cfg = format!("{WINDING}tolerance.integrality = 1e-300\n");
    let (out, _d) = chernloc(&["deg"], Some(&cfg));
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert_eq!(report(&out).status, Status::OracleMismatch);
}

#[test]
fn unconverged_ladder_exits_3() {
    let cfg = "map.kind = split\nmap.f.kind = constant\nmap.h.kind = su2_identity\ngrid.kind = explicit\ngrid.resolution = 2,2,2\n";
    let (out, _d) = chernloc(&["deg-star"], Some(cfg));
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r.status, Status::Unconverged);
    assert!(r.checks.iter().any(|c| !c.passed && c.name == "deg* converged"));
}

#[test]
fn split_deg_star_matches_h() {
    let cfg = "map.kind = split\nmap.f.kind = circle_winding\nmap.f.m = 3\nmap.h.kind = su2_identity\n";
    let (out, _d) = chernloc(&["deg-star"], Some(cfg));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    let v = r.values.iter().find(|v| v.name == "deg*").unwrap();
    assert_eq!(v.rounded, Some(-1));
    assert!(r.checks.iter().any(|c| c.name == "deg* oracle" && c.passed));
}

#[test]
fn resolution_scale_and_seed_are_echoed() {
    let (out, _d) = chernloc(&["deg", "--resolution-scale", "2", "--seed", "7"], Some(WINDING));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r.config["seed"], "7");
    assert_eq!(r.config["resolution_scale"], "2");
    assert_eq!(r.tables[0].rows[1].resolution, vec![128]);
}

#[test]
fn point_case_on_the_circle() {
    let (out, _d) = chernloc(&["flz-point"], Some("n = 1\nmap.kind = circle_winding\nmap.m = 3\n"));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r.values[0].rounded, Some(-3));
    let w = r.values.iter().find(|v| v.name == "clutching_winding").unwrap();
    assert_eq!(w.rounded, Some(3));
}

#[test]
fn localize_report_carries_both_paths() {
    let cfg = "map.kind = split\nmap.f.kind = constant\nmap.h.kind = su2_identity\n";
    let (out, _d) = chernloc(&["localize"], Some(cfg));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    let get = |name: &str| r.values.iter().find(|v| v.name == name).unwrap().clone();
    assert_eq!(get("localize").rounded, Some(1));
    assert!((get("deg*_path").value[0] - 1.0).abs() < 1e-4);
    assert!((get("gamma_path").value[0] - 1.0).abs() < 1e-4);
    assert!(get("difference").value[0] < 1e-4);
}
