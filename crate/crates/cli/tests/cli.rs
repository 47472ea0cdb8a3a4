use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn hykonv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hykonv")).args(args).env_remove("HYKONV_SEED").output().expect("run hykonv")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The single data row of a one-row CSV as (header, fields).
fn row(text: &str) -> Vec<(String, String)> {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from);
    let fields = lines.next().unwrap().split(',').map(String::from);
    header.zip(fields).collect()
}

fn field(text: &str, name: &str) -> f64 {
    row(text).into_iter().find(|(k, _)| k == name).unwrap().1.parse().unwrap()
}

struct Fixtures {
    dir: TempDir,
}

impl Fixtures {
    fn new() -> Self {
        let f = Fixtures { dir: TempDir::new().unwrap() };
        f.write("box123", r#"{"type":"box","lengths":[1,2,3]}"#);
        f.write("square", r#"{"type":"box","lengths":[1,1]}"#);
        f.write("ball4", r#"{"type":"ball","dim":4,"radius":1,"center":[0,0,0,0]}"#);
        f.write("disk", r#"{"type":"ball","dim":2,"radius":1,"center":[0,0]}"#);
        f.write("ball3", r#"{"type":"ball","dim":3,"radius":1,"center":[0,0,0]}"#);
        f.write("triangle", r#"{"type":"polytope","vertices":[[0,0],[1,0],[0,1]]}"#);
        f.write(
            "triangle_moved",
            r#"{"type":"sum","terms":[
                {"coef":2,"body":{"type":"polytope","vertices":[[0,0],[1,0],[0,1]]}},
                {"coef":1,"body":{"type":"polytope","vertices":[[3,-4]]}}]}"#,
        );
        f.write("segment", r#"{"type":"segment","from":[0,0],"to":[1,2]}"#);
        f.write(
            "hexagon",
            r#"{"type":"polytope","vertices":[[1,0],[0.5,0.8],[-0.5,0.8],[-1,0],[-0.5,-0.8],[0.5,-0.8]]}"#,
        );
        f
    }

    fn write(&self, name: &str, json: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, json).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(format!("{name}.json"))
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

#[test]
fn box_lemma_value() {
    let f = Fixtures::new();
    let out = stdout(&hykonv(&["volume", &f.arg("box123"), "-k", "2", "--method", "exact"]));
    assert_eq!(field(&out, "value"), 11.0);
}

#[test]
fn ball_mean_width_value() {
    let f = Fixtures::new();
    let out = stdout(&hykonv(&["volume", &f.arg("ball4"), "-k", "1"]));
    // 4 κ₄/κ₃ with κ₄ = π²/2 and κ₃ = 4π/3.
    let expected = 4.0 * (PI * PI / 2.0) / (4.0 * PI / 3.0);
    assert!((field(&out, "value") - expected).abs() < 1e-12);
}

#[test]
fn malliavin_square_within_error_and_reproducible() {
    let f = Fixtures::new();
    let args = ["volume", &f.arg("square"), "-k", "2", "--method", "malliavin", "--seed", "42"];
    let a = stdout(&hykonv(&args));
    let b = stdout(&hykonv(&args));
    assert_eq!(a, b);
    let (v, se) = (field(&a, "value"), field(&a, "std_error"));
    assert!(se > 0.0);
    assert!((v - 1.0).abs() < 3.0 * se, "{v} ± {se}");
}

#[test]
fn seed_from_environment() {
    let f = Fixtures::new();
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_hykonv"));
        c.args(["volume", &f.arg("square"), "--method", "malliavin", "--samples", "2000"]);
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        match env {
            Some(s) => c.env("HYKONV_SEED", s),
            None => c.env_remove("HYKONV_SEED"),
        };
        stdout(&c.output().unwrap())
    };
    assert_eq!(run(Some("7"), None), run(None, Some("7")));
    assert_ne!(run(Some("7"), None), run(None, None));
    assert_eq!(run(Some("7"), Some("9")), run(None, Some("9")));
}

#[test]
fn disk_vs_ball_distance() {
    let f = Fixtures::new();
    let out = stdout(&hykonv(&["distance", &f.arg("disk"), &f.arg("ball3")]));
    let expected = (PI / (2.0 * 2f64.sqrt())).acosh();
    assert!((field(&out, "distance") - expected).abs() < 1e-4);
    assert!((field(&out, "beta") - PI / (2.0 * 2f64.sqrt())).abs() < 1e-12);
    assert_eq!(field(&out, "v2_a"), PI);
    assert!(out.contains(",exact,"));
}

#[test]
fn homothetic_bodies_are_at_distance_zero() {
    let f = Fixtures::new();
    for method in ["auto", "exact", "quadrature"] {
        let out = stdout(&hykonv(&["distance", &f.arg("triangle"), &f.arg("triangle_moved"), "--method", method]));
        assert!(field(&out, "distance").abs() < 1e-6, "{method}: {out}");
    }
}

#[test]
fn quadrature_agrees_with_exact() {
    let f = Fixtures::new();
    let exact = stdout(&hykonv(&["distance", &f.arg("square"), &f.arg("hexagon"), "--method", "exact"]));
    let quad = stdout(&hykonv(&["distance", &f.arg("square"), &f.arg("hexagon"), "--method", "quadrature"]));
    assert!((field(&exact, "distance") - field(&quad, "distance")).abs() < 1e-9);
}

fn embed_fixture(f: &Fixtures) -> Vec<String> {
    ["square", "triangle", "disk", "ball3", "hexagon"].iter().map(|n| f.arg(n)).collect()
}

#[test]
fn five_body_embedding_round_trip() {
    let f = Fixtures::new();
    let mut args = vec!["embed".to_string()];
    args.extend(embed_fixture(&f));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = hykonv(&args);
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("label,t,x1"));
    let summary = String::from_utf8(o.stderr).unwrap();
    let err: f64 =
        summary.split_whitespace().find_map(|w| w.strip_prefix("max_roundtrip_error=")).unwrap().parse().unwrap();
    assert!(err < 1e-9, "{summary}");
}

#[test]
fn embed_from_kernel_file_and_base_choice() {
    let f = Fixtures::new();
    let kernel = f.dir.path().join("kernel.csv");
    let mut args = vec!["embed".to_string(), "--kernel-out".into(), kernel.display().to_string()];
    args.extend(embed_fixture(&f));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    stdout(&hykonv(&args));

    let k = kernel.display().to_string();
    let csv = stdout(&hykonv(&["embed", "--kernel", &k, "--base", "disk"]));
    let disk_row = csv.lines().find(|l| l.starts_with("disk,")).unwrap();
    let coords: Vec<f64> = disk_row.split(',').skip(1).map(|s| s.parse().unwrap()).collect();
    assert_eq!(coords[0], 1.0);
    assert!(coords[1..].iter().all(|c| *c == 0.0));

    assert_eq!(hykonv(&["embed", "--kernel", &k, "--base", "nosuch"]).status.code(), Some(2));
}

#[test]
fn embed_reads_directories_in_name_order() {
    let f = Fixtures::new();
    let sub = f.dir.path().join("family");
    fs::create_dir(&sub).unwrap();
    for n in ["square", "disk", "triangle"] {
        fs::copy(f.path(n), sub.join(format!("{n}.json"))).unwrap();
    }
    let csv = stdout(&hykonv(&["embed", &sub.display().to_string()]));
    let labels: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["disk", "square", "triangle"]);
}

#[test]
fn ball_sequence_experiment() {
    let f = Fixtures::new();
    let out = f.dir.path().join("balls.csv");
    let o = hykonv(&["experiment", "ball_sequence", "--n-max", "100", "--out", &out.display().to_string()]);
    let summary = stdout(&o);
    assert!(summary.starts_with("ball_sequence: rows=99"), "{summary}");
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 100);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "ratio").unwrap();
    let last = text.lines().last().unwrap();
    let ratio: f64 = last.split(',').nth(col).unwrap().parse().unwrap();
    assert!(last.starts_with("ball_sequence,100,"));
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
}

#[test]
fn rectangle_sections_cauchy_flags() {
    let geo = hykonv(&["experiment", "rectangle_sections", "--rule", "geometric(2)"]);
    assert!(String::from_utf8(geo.stderr).unwrap().contains("cauchy=false"));
    let constant = hykonv(&["experiment", "rectangle_sections", "--rule", "constant"]);
    assert!(String::from_utf8(constant.stderr).unwrap().contains("cauchy=true"));
}

#[test]
fn segment_ball_takes_a_radius_schedule() {
    let csv = stdout(&hykonv(&["experiment", "segment_ball", "--rule", "polynomial(-1)", "--n-max", "8"]));
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with("experiment,n,c,distance_to_ball,consecutive_distance\n"));
    let last_c: f64 = csv.lines().last().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((last_c - 0.125).abs() < 1e-15);
}

#[test]
fn box_ball_distance_is_monotone() {
    let csv = stdout(&hykonv(&["experiment", "box_ball", "--n-max", "60"]));
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "distance").unwrap();
    let d: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(d.len(), 58);
    assert!(d.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn estimate_subcommands_run() {
    let f = Fixtures::new();
    let sq = f.arg("square");
    let disk = f.arg("disk");
    let common = ["--samples", "4000"];
    let cases: Vec<Vec<&str>> = vec![
        vec!["estimate", "steiner", &sq],
        vec!["estimate", "chaos", &sq, "--index", "0:2"],
        vec!["estimate", "rayleigh", &sq],
        vec!["estimate", "ou", "--n", "3", "--direction", "0.6,-0.8"],
        vec!["estimate", "gb", "--family", "octahedron", "--rule", "polynomial(-1)", "--dims", "1,10,100"],
        vec!["estimate", "hausdorff", &sq, &disk],
        vec!["estimate", "vitale", &sq, &disk],
    ];
    for mut args in cases {
        args.extend(common);
        let out = stdout(&hykonv(&args));
        assert!(out.lines().count() >= 2, "{args:?}");
    }
}

#[test]
fn json_format_is_parseable() {
    let f = Fixtures::new();
    let o = hykonv(&["--format", "json", "distance", &f.arg("square"), &f.arg("disk")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v[0]["v2_a_std_error"].is_null());
    assert_eq!(v[0]["v2_a_source"], "exact");
    assert!(v[0]["distance"].as_f64().unwrap() > 0.0);
}

fn exit_code(args: &[&str]) -> Option<i32> {
    hykonv(args).status.code()
}

#[test]
fn exit_codes() {
    let f = Fixtures::new();
    let bad = f.write("bad", r#"{"type":"box","lengths":[1,"#);
    let unknown = f.write("unknown", r#"{"type":"torus","r":1}"#);
    let missing = f.dir.path().join("missing.json");
    for p in [&bad, &unknown, &missing] {
        assert_eq!(exit_code(&["volume", &p.display().to_string()]), Some(2), "{}", p.display());
    }
    assert_eq!(exit_code(&["experiment", "nosuch"]), Some(2));
    assert_eq!(exit_code(&["experiment", "rectangle_sections", "--rule", "geometric(-1)"]), Some(2));
    assert_eq!(exit_code(&["--seed", "0", "volume", &f.arg("square")]), Some(2));

    assert_eq!(exit_code(&["volume", &f.arg("ball4"), "--method", "tsirelson"]), Some(3));
    assert_eq!(exit_code(&["volume", &f.arg("square"), "-k", "1", "--method", "malliavin"]), Some(3));
    assert_eq!(exit_code(&["volume", &f.arg("square"), "-k", "3", "--method", "tsirelson"]), Some(3));
    assert_eq!(exit_code(&["distance", &f.arg("ball4"), &f.arg("square"), "--method", "quadrature"]), Some(3));

    assert_eq!(exit_code(&["distance", &f.arg("segment"), &f.arg("square")]), Some(4));
    let line = f.write("line", r#"{"type":"segment","from":[0],"to":[2]}"#);
    assert_eq!(exit_code(&["distance", &f.arg("disk"), &line.display().to_string()]), Some(4));

    let kernel = f.dir.path().join("corrupt.csv");
    fs::write(&kernel, "label,a,b,c\na,1,0.9,1.2\nb,0.9,1,1.1\nc,1.2,1.1,1\n").unwrap();
    assert_eq!(exit_code(&["embed", "--kernel", &kernel.display().to_string()]), Some(5));
}

fn run_to_file(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let o = out.display().to_string();
    full.extend(["--out", &o]);
    stdout(&hykonv(&full));
    fs::read(out).unwrap()
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let f = Fixtures::new();
    let d = f.dir.path();
    let sq = f.arg("square");
    let hex = f.arg("hexagon");
    let cases: Vec<Vec<&str>> = vec![
        vec!["volume", &sq, "--method", "tsirelson", "--samples", "20000"],
        vec!["distance", &sq, &hex, "--method", "malliavin", "--samples", "20000"],
        vec!["estimate", "steiner", &hex, "--samples", "20000"],
        vec!["experiment", "o_limit", "--n-max", "500"],
    ];
    for (i, case) in cases.iter().enumerate() {
        let mut one = case.clone();
        one.extend(["--threads", "1"]);
        let mut four = case.clone();
        four.extend(["--threads", "4"]);
        let a = run_to_file(d, &format!("a{i}"), case);
        let b = run_to_file(d, &format!("b{i}"), case);
        let c = run_to_file(d, &format!("c{i}"), &one);
        let e = run_to_file(d, &format!("e{i}"), &four);
        assert_eq!(a, b, "{case:?}");
        assert_eq!(a, c, "{case:?}");
        assert_eq!(a, e, "{case:?}");
    }
}
