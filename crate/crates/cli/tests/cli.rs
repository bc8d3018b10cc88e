use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fraccomp"));
    c.env_remove("FRACCOMP_THREADS");
    c
}

fn job(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `(t, x, value, stderr?)` rows of a CSV artifact.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn header<'a>(text: &'a str, key: &str) -> Vec<&'a str> {
    let prefix = format!("# {key}: ");
    text.lines().filter_map(|l| l.strip_prefix(prefix.as_str())).collect()
}

#[test]
fn negative_order_is_a_validation_error_with_its_line() {
    let d = tempfile::tempdir().unwrap();
    let p = job(d.path(), "bad.toml", "t = [1.0]\nx = [1.0]\norders = [\n  [1.0, 0.5],\n  [1.0, -1.0],\n]\n");
    let o = run(&["inverse-density", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("nu_i must be > 0"), "{e}");
    assert!(e.contains("bad.toml:5:"), "{e}");
}

#[test]
fn unknown_keys_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    let p = job(d.path(), "u.toml", "alpha = 0.5\nz = [1.0]\ngamma = 2\n");
    let o = run(&["eval-ml", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("u.toml:3:"), "{}", stderr(&o));
}

#[test]
fn missing_kernel_is_a_numerical_failure() {
    let d = tempfile::tempdir().unwrap();
    let p = job(d.path(), "p.toml", "orders = [[1.0, 1.5]]\nt = [1.0]\nx = [0.5]\n");
    let o = run(&["density", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn inverse_density_of_order_one_half_is_gaussian() {
    let d = tempfile::tempdir().unwrap();
    let p = job(d.path(), "l.toml", "orders = [[1.0, 0.5]]\nt = [1.0]\nx = { from = 0.0, to = 5.0, n = 11 }\n");
    let out = d.path().join("l.csv");
    let o = run(&["inverse-density", "--spec", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(header(&text, "quantity"), ["inverse-density"]);
    let r = rows(&text);
    assert_eq!(r.len(), 11);
    for row in r {
        let exact = (-row[1] * row[1] / 4.0).exp() / std::f64::consts::PI.sqrt();
        assert!((row[2] - exact).abs() < 1e-10, "x = {}", row[1]);
    }
}

#[test]
fn solve_writes_both_routes_and_they_agree() {
    let d = tempfile::tempdir().unwrap();
    let p = job(
        d.path(),
        "s.toml",
        "symbol = { kind = \"frac_laplacian_sum\", terms = [[1.0, 1.0]] }\norders = [[1.0, 0.5]]\nt = [0.5, 1.0]\ngrid = { n = 256, length = 40.0, window = 4.0 }\n",
    );
    let out = d.path().join("sol.csv");
    let o = run(&["solve", "--spec", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = rows(&std::fs::read_to_string(d.path().join("sol-direct.csv")).unwrap());
    let b = rows(&std::fs::read_to_string(d.path().join("sol-composition.csv")).unwrap());
    assert_eq!(a.len(), b.len());
    let sup = a.iter().zip(&b).map(|(x, y)| (x[2] - y[2]).abs()).fold(0.0, f64::max);
    assert!(sup <= 1e-4, "{sup}");
    let stdout = String::from_utf8_lossy(&o.stdout);
    let reported: f64 = stdout.lines().find_map(|l| l.strip_prefix("sup_difference: ")).unwrap().parse().unwrap();
    assert_eq!(reported, sup);
}

#[test]
fn csv_values_round_trip_exactly() {
    let d = tempfile::tempdir().unwrap();
    let p = job(d.path(), "m.toml", "alpha = 0.7\nbeta = 1.3\nz = { from = -7.0, to = 2.0, n = 37 }\n");
    let csv = run(&["eval-ml", "--spec", p.to_str().unwrap()]);
    let pj = job(d.path(), "mj.toml", "alpha = 0.7\nbeta = 1.3\nz = { from = -7.0, to = 2.0, n = 37 }\nformat = \"json\"\n");
    let json = run(&["eval-ml", "--spec", pj.to_str().unwrap()]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let jrows = doc["rows"].as_array().unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(body.len(), jrows.len());
    for (line, jr) in body.iter().zip(jrows) {
        let cells: Vec<&str> = line.split(',').collect();
        for (c, j) in cells.iter().zip(jr.as_array().unwrap()) {
            let v: f64 = c.parse().unwrap();
            assert_eq!(format!("{v:e}"), *c);
            assert_eq!(j.as_str().unwrap(), *c);
        }
    }
}

#[test]
fn monte_carlo_output_is_byte_identical_across_runs_and_threads() {
    let d = tempfile::tempdir().unwrap();
    let p = job(d.path(), "mc.toml", "nu = 2.0\nbeta = 0.5\ndelta = 0.01\nsamples = 20000\nmu = [0.5, 1.0]\n");
    let p = p.to_str().unwrap();
    let a = run(&["mc-limit", "--spec", p, "--seed", "9", "--threads", "1"]);
    let b = bin().args(["mc-limit", "--spec", p, "--seed", "9"]).env("FRACCOMP_THREADS", "4").output().unwrap();
    let c = run(&["mc-limit", "--spec", p, "--seed", "10"]);
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(header(&text, "seed"), ["9"]);
    assert!(rows(&text).iter().all(|r| r.len() == 4));
}

#[test]
fn limit_check_reports_both_fields() {
    let d = tempfile::tempdir().unwrap();
    let p = job(
        d.path(),
        "lc.toml",
        "symbol = { kind = \"laplacian\" }\nnu_small = 0.01\nt = [0.5, 1.0]\ngrid = { n = 1024, length = 80.0, window = 5.0 }\n",
    );
    let out = d.path().join("lc.json");
    let pj = job(d.path(), "lcj.toml", &(std::fs::read_to_string(&p).unwrap() + "format = \"json\"\n"));
    let o = run(&["limit-check", "--spec", pj.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lim: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("lc-limit.json")).unwrap()).unwrap();
    assert_eq!(lim["header"]["quantity"], "stationary-limit");
    let v: f64 = lim["header"]["limit_t_variation"].as_str().unwrap().parse().unwrap();
    assert!(v <= 1e-10);
    assert!(d.path().join("lc-solution.json").exists());
}

#[test]
fn compose_check_matches_the_product_order() {
    let d = tempfile::tempdir().unwrap();
    let p = job(d.path(), "c.toml", "outer_nu = 0.5\ninner_nu = 0.5\nt = [1.0]\nx = [0.5, 1.0, 2.0]\n");
    let o = run(&["compose-check", "--spec", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let sup: f64 = header(&text, "sup_difference")[0].parse().unwrap();
    assert!(sup <= 1e-4, "{sup}");
}
