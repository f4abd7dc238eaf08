use std::fs;
use std::process::{Command, Output};

fn maxsurf(args: &[&str], env_tol: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_maxsurf"));
    c.args(args).env_remove("MAXSURF_TOL");
    if let Some(t) = env_tol {
        c.env("MAXSURF_TOL", t);
    }
    c.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn matrix_check_reports_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sinsin.txt");
    fs::write(&path, "1 0 0\n1 0 0\n0 1 1\n").unwrap();
    let o = maxsurf(&["matrix", "check", path.to_str().unwrap()], None);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("generating: yes"), "{s}");
    assert!(s.contains("class: parabolic"), "{s}");
    assert!(s.contains("discriminant: 2.5000000000000000e-1"), "{s}");
}

#[test]
fn tolerance_comes_from_flag_then_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("near.txt");
    // derived minors of order 1e-6 relative to the entries
    fs::write(&path, "1 0 0\n1 0 0\n0 1 1.000001\n").unwrap();
    let p = path.to_str().unwrap();
    assert!(stdout(&maxsurf(&["matrix", "check", p], None)).contains("generating: no"));
    assert!(stdout(&maxsurf(&["matrix", "check", p], Some("1e-3"))).contains("generating: yes"));
    assert!(stdout(&maxsurf(&["matrix", "check", p, "--tol", "1e-9"], Some("1e-3"))).contains("generating: no"));
    assert_eq!(maxsurf(&["matrix", "check", p], Some("abc")).status.code(), Some(2));
}

#[test]
fn bad_input_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.txt");
    fs::write(&path, "1 2 3 4").unwrap();
    assert_eq!(maxsurf(&["matrix", "check", path.to_str().unwrap()], None).status.code(), Some(2));
    assert_eq!(maxsurf(&["sample", "--surface", "nosuch"], None).status.code(), Some(2));
    assert_eq!(maxsurf(&["sample"], None).status.code(), Some(2));
    assert_eq!(maxsurf(&["sample", "--surface", "snsn", "--k", "1.5"], None).status.code(), Some(2));
    assert_eq!(maxsurf(&["bogus"], None).status.code(), Some(2));
}

#[test]
fn verify_passes_for_catalog_entries() {
    for name in ["snsn", "catenoid", "plane"] {
        let o = maxsurf(&["verify", name], None);
        assert!(o.status.success(), "{name}: {}", stdout(&o));
        assert!(stdout(&o).trim_end().ends_with("PASS"));
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "surface = catenoid\nn = 5\nwindow = -1,1,-1,1\n").unwrap();
    let c = cfg.to_str().unwrap();
    let rows = |o: &Output| stdout(o).lines().count() - 1;
    assert_eq!(rows(&maxsurf(&["sample", "--config", c], None)), 25);
    assert_eq!(rows(&maxsurf(&["sample", "--config", c, "--n", "3"], None)), 9);
}

#[test]
fn sample_writes_csv_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, obj) = (dir.path().join("s.csv"), dir.path().join("s.obj"));
    let o = maxsurf(
        &[
            "sample", "--surface", "catenoid", "--n", "11", "--out", csv.to_str().unwrap(), "--mesh", obj.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,z,zx,zy,grad_norm_sq,causal,residual"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 121);
    assert!(rows.iter().all(|r| r.len() == 8));
    // the grid node at the origin is the cone point
    let centre = &rows[60];
    assert_eq!(centre[6], "singular");
    let mesh = fs::read_to_string(&obj).unwrap();
    assert_eq!(mesh.lines().filter(|l| l.starts_with("v ")).count(), 121);
    assert_eq!(mesh.lines().filter(|l| l.starts_with("f ")).count(), 200);
    assert!(mesh.contains("# singular 61"));
}

#[test]
fn singular_and_levelset_reports() {
    let o = maxsurf(&["singular", "--surface", "cncn"], None);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("count=4"), "{s}");
    assert_eq!(s.matches("type=Type1").count(), 4);
    assert_eq!(s.matches("census_space_like=1\ncensus_time_like=0").count(), 4);

    let o = maxsurf(&["levelset", "--surface", "tanh-scherk", "--n", "64"], None);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("x,y\n"));
    assert!(s.contains("\n\n"), "expected several polylines");
}
