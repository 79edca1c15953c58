use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hartmann-ts"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("column {name}"))
}

#[test]
fn empty_eps_list_is_rejected_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "eps_list =\n").unwrap();
    let out_path = dir.path().join("out.csv");
    let out = run(&["sweep", "--config", conf.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps list is empty"));
    assert!(!out_path.exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    // beta outside the admissible range in the file, fixed on the command line
    std::fs::write(&conf, "regime = beta\nbeta = 0.2\nM = 1\n").unwrap();
    let out = run(&["validate", "--config", conf.to_str().unwrap(), "--eps", "1e-10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["validate", "--config", conf.to_str().unwrap(), "--eps", "1e-10", "--beta", "0.115"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn airy_table_schema_and_origin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("airy.csv");
    let out = run(&["airy-table", "--radius", "10", "--rings", "2", "--rays", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["k", "re_z", "im_z", "re_ai", "im_ai", "branch"]);
    assert_eq!(rows.len(), 4 * (1 + 2 * 3));
    // Ai(0) = 3^{−2/3}/Γ(2/3)
    let ai0: f64 = rows[0][3].parse().unwrap();
    assert!((ai0 - 0.355_028_053_887_817_2).abs() < 1e-15);
    assert_eq!(rows[0][5], "series");
}

#[test]
fn beta_sweep_certifies_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["sweep", "--regime", "beta", "--M", "1", "--beta", "0.115", "--eps-list", "1e-10,1e-12"];
    for p in [&a, &b] {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--out", p.to_str().unwrap()]);
        let out = run(&full);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (header, rows) = read_csv(&a);
    assert_eq!(header.len(), 19);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r[col(&header, "status")], "certified");
        assert_eq!(r[col(&header, "winding")], "1");
        assert!(!r[col(&header, "re_c_app")].is_empty());
    }
}

#[test]
fn failed_certification_reports_no_root() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    // at A = 2 the leading-order disk misses the root at 1e-8 and holds it at 1e-12
    let out = run(&["sweep", "--A", "2", "--eps-list", "1e-8,1e-12", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let (header, rows) = read_csv(&path);
    let status = col(&header, "status");
    assert!(rows[0][status].contains("winding 0"), "{}", rows[0][status]);
    assert!(rows[0][col(&header, "re_c_app")].is_empty());
    assert_eq!(rows[1][status], "certified");
    assert!(!rows[1][col(&header, "e1s_l2")].is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("# slope e1s_l2"));
}

#[test]
fn exported_mode_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mode.csv");
    let (eps, im_c) = (1e-12f64, 0.0057);
    let out = run(&[
        "export-mode",
        "--A",
        "2",
        "--eps",
        "1e-12",
        "--c-re",
        "0.0767",
        "--c-im",
        "0.0057",
        "--t-list",
        "0,2e-6,4e-6",
        "--nx",
        "64",
        "--ny",
        "401",
        "--y-extent",
        "1",
        "--grid-n",
        "2000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["t", "x", "y", "u", "v", "b1", "b2", "energy"]);
    let v: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|s| s.parse().unwrap()).collect()).collect();
    let (nx, ny) = (64, 401);
    assert_eq!(v.len(), 3 * nx * ny);
    let alpha = 2.0 * eps.powf(0.125);

    // energy grows exactly like e^{2α Im c t/√ε}
    assert_eq!(v[0][7], 1.0);
    for block in 0..3 {
        let row = &v[block * nx * ny];
        let predicted = (2.0 * alpha * im_c * row[0] / eps.sqrt()).exp();
        assert!((row[7] / predicted - 1.0).abs() < 1e-10, "t = {}", row[0]);
    }

    // the magnetic normal component vanishes on the wall
    for ix in 0..nx {
        assert!(v[ix * ny][6].abs() < 1e-12);
    }

    // discrete divergence of (u, v) at t = 0 against the size of its terms
    let at = |ix: usize, k: usize| &v[(ix % nx) * ny + k];
    let dx = at(1, 0)[1] - at(0, 0)[1];
    let dy = at(0, 1)[2] - at(0, 0)[2];
    let (mut div, mut scale) = (0.0f64, 0.0f64);
    for ix in 0..nx {
        for k in 1..ny - 1 {
            let dudx = (at(ix + 1, k)[3] - at(ix + nx - 1, k)[3]) / (2.0 * dx);
            let dvdy = (at(ix, k + 1)[4] - at(ix, k - 1)[4]) / (2.0 * dy);
            div = div.max((dudx + dvdy).abs());
            scale = scale.max(dudx.abs());
        }
    }
    assert!(div < 2e-2 * scale, "div {div:e} vs {scale:e}");
}

#[test]
fn validate_passes_at_defaults() {
    let out = run(&["validate", "--eps", "1e-10"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4);
}
