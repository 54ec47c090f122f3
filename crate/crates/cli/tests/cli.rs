use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lempertkit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lk-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const BALL: &str = r#"{"kind":"ball","n":2}"#;
const PERTURBED: &str = r#"{"kind":"perturbed-ball","n":2,"params":{"eps":0.1}}"#;

#[test]
fn ball_boundary_problem_certifies() {
    let dir = scratch("solve");
    let d = write(&dir, "d.json", BALL);
    let p = write(&dir, "p.json", r#"{"kind":"boundary","p":[[1,0],[0,0]],"v":[[0.6,0],[0.8,0]]}"#);
    let c = write(&dir, "c.json", r#"{"degree":32,"grid":128,"mu_degree":16}"#);
    let out = dir.join("g.json");
    let o = run(&["geodesic", "solve", "--domain", &d, "--problem", &p, "--config", &c, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let g: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    for (k, v) in g["residuals"].as_object().unwrap() {
        if k != "min_mu" {
            assert!(v.as_f64().unwrap() < 1e-10, "{k} = {v}");
        }
    }
    assert_eq!(g["certificate"]["pass"], true);
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 4, "temporary files left behind");

    let again = run(&["geodesic", "certify", "--domain", &d, "--pair", out.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    let wrong = write(&dir, "w.json", PERTURBED);
    let o = run(&["geodesic", "certify", "--domain", &wrong, "--pair", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("certificate FAIL"));
}

#[test]
fn near_tangential_direction_exits_2() {
    let dir = scratch("tangential");
    let d = write(&dir, "d.json", BALL);
    let p = write(&dir, "p.json", r#"{"kind":"boundary","p":[[1,0],[0,0]],"v":[[1e-5,0],[1,0]]}"#);
    let o = run(&["geodesic", "solve", "--domain", &d, "--problem", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("near-tangential"));
}

#[test]
fn malformed_inputs_exit_1() {
    let dir = scratch("malformed");
    let d = write(&dir, "d.json", r#"{"kind":"ball","n":"#);
    let p = write(&dir, "p.json", r#"{"kind":"boundary","p":[[1,0],[0,0]],"v":[[1,0],[0,0]]}"#);
    assert_eq!(run(&["geodesic", "solve", "--domain", &d, "--problem", &p]).status.code(), Some(1));
    let missing = dir.join("nope.json");
    assert_eq!(run(&["geodesic", "solve", "--domain", missing.to_str().unwrap(), "--problem", &p]).status.code(), Some(1));
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["rep", "map", "--domain", BALL, "--p", "1,0", "--z", "2,0"]).status.code(), Some(1));
    assert_eq!(run(&["distance", "--domain", BALL, "--z", "0,0", "--w", "0.1"]).status.code(), Some(1));
}

#[test]
fn ball_diameter_field_matches_closed_form() {
    let o = run(&["field", "--domain", BALL, "--p", "1,0", "--grid", "-1:1:41"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "i,j,s,t,re_z1,im_z1,re_z2,im_z2,value");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 41);
    for r in &rows[..40] {
        let x: f64 = r[4].parse().unwrap();
        let v: f64 = r[8].parse().unwrap();
        assert!((v + (1.0 + x) / (1.0 - x)).abs() < 1e-12 * (1.0 + v.abs()), "x = {x}: {v}");
    }
    assert_eq!(rows[40][8], "nan");
}

#[test]
fn field_is_independent_of_worker_count() {
    let args = ["field", "--domain", PERTURBED, "--p", "ray:1,0", "--grid", "-0.8:0.8:6,-0.4:0.4:3"];
    let one = bin().args(args).env("LEMPERTKIT_JOBS", "1").output().unwrap();
    let four = bin().args(args).args(["--jobs", "4"]).output().unwrap();
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    let values: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert!(values.iter().filter(|v| **v != "nan").all(|v| v.parse::<f64>().unwrap() <= 0.0));
}

#[test]
fn green_field_needs_a_pole() {
    let o = run(&["field", "--domain", BALL, "--p", "1,0", "--grid", "-0.5:0.5:3", "--kind", "green"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["field", "--domain", BALL, "--p", "1,0", "--grid", "-0.5:0.5:3", "--kind", "green", "--w", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[8].parse::<f64>().unwrap() - 0.5f64.ln()).abs() < 1e-8);
}

#[test]
fn verify_rigidity_is_reproducible_and_reports_shoikhet() {
    let dir = scratch("verify");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for out in [&a, &b] {
        let o = run(&["--seed", "7", "verify", "rigidity", "--samples", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&text).unwrap();
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.starts_with("shoikhet")));
}

#[test]
fn verify_ma_on_the_ball() {
    let o = run(&["verify", "ma", "--domain", BALL, "--samples", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let det = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "hessian.max_abs_det").unwrap();
    assert!(det["value"].as_f64().unwrap() < 1e-8);
}

#[test]
fn ma_verify_writes_a_passing_report() {
    let dir = scratch("ma");
    let out = dir.join("ma.json");
    let o = run(&["ma", "verify", "--domain", BALL, "--p", "0,1", "--samples", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["samples"].as_array().unwrap().len(), 4);
}

#[test]
fn rigidity_verify_reports_margins_and_verdict() {
    let o = run(&["rigidity", "verify", "--f", r#"{"kind":"shoikhet"}"#, "--grid", "16x64"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["verdict"], "PASS");
    assert!((r["f3_estimate"].as_f64().unwrap() + 0.6).abs() < 1e-6);
    assert!(r["margins"]["i"].as_f64().unwrap() >= -1e-10);
    let bad = run(&["rigidity", "verify", "--f", r#"{"kind":"shoikhet"}"#, "--grid", "16by64"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn rep_commands_on_the_perturbed_ball() {
    let o = run(&["rep", "map", "--domain", PERTURBED, "--p", "ray:1,0", "--z", "0.2,0.3i"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let point: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let w = point["w"].to_string();
    let o = run(&["rep", "inverse", "--domain", PERTURBED, "--p", "ray:1,0", "--w", &w]);
    assert_eq!(o.status.code(), Some(0));
    let back: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let z = back["z"].as_array().unwrap();
    assert!((z[0][0].as_f64().unwrap() - 0.2).abs() < 1e-7);
    assert!((z[1][1].as_f64().unwrap() - 0.3).abs() < 1e-7);

    let base = ["--domain", PERTURBED, "--p", "ray:1,0"];
    let o = bin().arg("horosphere").args(base).args(["--z0", "0,0", "--radius", "1", "--z", "0.5,0"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let h: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(h["member"], h["busemann"].as_f64().unwrap() < 0.0);
    let o = bin().args(["rep", "busemann"]).args(base).args(["--z", "0.3,0.1", "--z0", "0,0"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let b: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(b["agree"], true);
}

#[test]
fn distance_and_metric_on_the_ball() {
    let o = run(&["distance", "--domain", BALL, "--z", "0,0", "--w", "0.5,0"]);
    assert_eq!(o.status.code(), Some(0));
    let d: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((d["value"].as_f64().unwrap() - 0.5f64.atanh()).abs() < 1e-9);
    let o = run(&["metric", "--domain", BALL, "--z", "0,0", "--v", "0,2"]);
    let m: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((m["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

fn example(name: &str) -> String {
    format!("{}/../../docs/examples/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn documented_examples_run() {
    let cfg = example("config.json");
    for domain in ["ball.json", "perturbed-ball.json", "linear-ball.json"] {
        for problem in ["interior-point.json", "interior-direction.json"] {
            let o = run(&["geodesic", "solve", "--domain", &example(domain), "--problem", &example(problem), "--config", &cfg]);
            assert_eq!(o.status.code(), Some(0), "{domain} {problem}: {}", String::from_utf8_lossy(&o.stderr));
        }
    }
    let o = run(&["geodesic", "solve", "--domain", &example("ball.json"), "--problem", &example("boundary.json")]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["shoikhet.json", "contact-family.json"] {
        let o = run(&["rigidity", "verify", "--f", &example(f), "--grid", "16x64"]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
