use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_radar-lowrank")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should run")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn parse_pgm(bytes: &[u8]) -> (usize, usize, Vec<u8>) {
    let header_end = bytes
        .windows(4)
        .position(|w| w == b"255\n")
        .expect("maxval line")
        + 4;
    let header = std::str::from_utf8(&bytes[..header_end]).unwrap();
    let mut parts = header.split_ascii_whitespace();
    assert_eq!(parts.next(), Some("P5"));
    let w: usize = parts.next().unwrap().parse().unwrap();
    let h: usize = parts.next().unwrap().parse().unwrap();
    (w, h, bytes[header_end..].to_vec())
}

#[test]
fn full_pipeline_produces_consistent_artifacts() {
    let dir = TempDir::new().unwrap();
    let z = dir.path().join("z.csv");
    let pgm = dir.path().join("z.pgm");
    let sv = dir.path().join("sv.csv");
    let obs = dir.path().join("obs.csv");
    let xhat = dir.path().join("xhat.csv");
    let report = dir.path().join("report.json");

    ok(&[
        "synth", "--rows", "200", "--cols", "100", "--seed", "0", "--out", s(&z),
    ]);
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("z.csv.json")).unwrap()).unwrap();
    assert_eq!(sidecar["rows"], 200);
    assert_eq!(sidecar["cols"], 100);

    let before_render = fs::read(&z).unwrap();
    ok(&[
        "render", "--input", s(&z), "--out", s(&pgm), "--singular-values", s(&sv),
    ]);
    assert_eq!(fs::read(&z).unwrap(), before_render, "render must not mutate its input");
    let (w, h, px) = parse_pgm(&fs::read(&pgm).unwrap());
    assert_eq!((w, h), (100, 200));
    assert_eq!(px.len(), 20_000);
    let sv_lines: Vec<String> = fs::read_to_string(&sv)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    assert_eq!(sv_lines.len(), 100);
    let first: f64 = sv_lines[0].split(',').nth(1).unwrap().parse().unwrap();
    let last: f64 = sv_lines[99].split(',').nth(1).unwrap().parse().unwrap();
    assert!(first > last);

    ok(&[
        "sample", "--input", s(&z), "--fraction", "0.3333", "--seed", "1", "--out", s(&obs),
    ]);
    let obs_text = fs::read_to_string(&obs).unwrap();
    assert!(obs_text.starts_with("# 200 100"));

    ok(&[
        "complete", "--input", s(&obs), "--delta", "1.8", "--tolerance", "5e-3",
        "--out", s(&xhat),
    ]);
    let log = dir.path().join("xhat.csv.residuals.csv");
    let log_lines = fs::read_to_string(&log).unwrap().lines().count();
    assert!(log_lines >= 2, "residual log should list the iterations");

    ok(&[
        "eval", "--original", s(&z), "--lowrank", s(&z), "--reconstructed", s(&xhat),
        "--out", s(&report),
    ]);
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let e1 = rep["epsilon1"].as_f64().unwrap();
    let e2 = rep["epsilon2"].as_f64().unwrap();
    assert!(e1.is_finite() && e1 > 0.0);
    assert!((e1 - e2).abs() < 1e-15, "lowrank = original here");
    let edges = rep["histograms"]["bin_edges"].as_array().unwrap();
    let counts = rep["histograms"]["original"].as_array().unwrap();
    assert_eq!(edges.len(), counts.len() + 1);
    let total: u64 = counts.iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(total, 20_000);

    // Masked render: exactly |Ω| non-black pixels.
    let masked = dir.path().join("masked.pgm");
    ok(&[
        "render", "--input", s(&xhat), "--mask", s(&obs), "--out", s(&masked),
    ]);
    let (_, _, px) = parse_pgm(&fs::read(&masked).unwrap());
    let non_black = px.iter().filter(|&&b| b > 0).count();
    assert_eq!(non_black, 6666);
}

#[test]
fn eval_of_identical_inputs_reports_zero() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    ok(&["synth", "--rows", "20", "--cols", "10", "--seed", "5", "--out", s(&a)]);
    let out = ok(&[
        "eval", "--original", s(&a), "--lowrank", s(&a), "--reconstructed", s(&a),
    ]);
    let rep: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["epsilon1"].as_f64().unwrap(), 0.0);
    assert_eq!(rep["epsilon2"].as_f64().unwrap(), 0.0);
    assert_eq!(rep["same_order"].as_bool().unwrap(), true);
}

#[test]
fn same_seed_reproduces_bytes() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    ok(&["synth", "--rows", "30", "--cols", "20", "--seed", "9", "--out", s(&a)]);
    ok(&["synth", "--rows", "30", "--cols", "20", "--seed", "9", "--out", s(&b)]);
    ok(&["synth", "--rows", "30", "--cols", "20", "--seed", "10", "--out", s(&c)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn binary_format_is_read_back_transparently() {
    let dir = TempDir::new().unwrap();
    let zbin = dir.path().join("z.bin");
    let pgm = dir.path().join("z.pgm");
    ok(&[
        "synth", "--rows", "12", "--cols", "9", "--seed", "2", "--format", "bin",
        "--out", s(&zbin),
    ]);
    assert!(fs::read(&zbin).unwrap().starts_with(b"RLRM"));
    ok(&["render", "--input", s(&zbin), "--out", s(&pgm)]);
    let (w, h, _) = parse_pgm(&fs::read(&pgm).unwrap());
    assert_eq!((w, h), (9, 12));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "rows = 6\ncols = 5\nmean-dbz = 10  # comment\nunused_key = 1\n").unwrap();
    let z = dir.path().join("z.csv");
    ok(&[
        "synth", "--config", s(&cfg), "--rows", "8", "--out", s(&z),
    ]);
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("z.csv.json")).unwrap()).unwrap();
    assert_eq!(sidecar["rows"], 8, "flag beats config");
    assert_eq!(sidecar["cols"], 5, "config beats default");
    assert_eq!(sidecar["mean_dbz"], 10.0);
}

#[test]
fn validation_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    let z = dir.path().join("z.csv");
    ok(&["synth", "--rows", "10", "--cols", "10", "--out", s(&z)]);

    let bad_fraction = run(&[
        "sample", "--input", s(&z), "--fraction", "0", "--out",
        s(&dir.path().join("o.csv")),
    ]);
    assert_eq!(bad_fraction.status.code(), Some(2));

    let missing_rows = run(&["synth", "--cols", "4", "--out", s(&z)]);
    assert_eq!(missing_rows.status.code(), Some(2));

    let missing_file = run(&[
        "complete", "--input", s(&dir.path().join("nope.csv")), "--out",
        s(&dir.path().join("x.csv")),
    ]);
    assert_eq!(missing_file.status.code(), Some(2));

    let unknown_flag = run(&["synth", "--bogus", "1"]);
    assert_eq!(unknown_flag.status.code(), Some(2));
}

#[test]
fn solver_divergence_exits_three() {
    let dir = TempDir::new().unwrap();
    let z = dir.path().join("z.csv");
    let obs = dir.path().join("obs.csv");
    ok(&["synth", "--rows", "10", "--cols", "10", "--out", s(&z)]);
    ok(&["sample", "--input", s(&z), "--fraction", "0.5", "--out", s(&obs)]);
    let diverged = run(&[
        "complete", "--input", s(&obs), "--delta", "1e8", "--out",
        s(&dir.path().join("x.csv")),
    ]);
    assert_eq!(diverged.status.code(), Some(3));
}
