use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn isoprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoprob"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = isoprob(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(ok(args).trim()).unwrap()
}

fn fails_with(args: &[&str], needle: &str) {
    let out = isoprob(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains(needle),
        "stderr of {args:?} lacks '{needle}': {err}"
    );
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn analytic_resonant_zero() {
    assert_eq!(
        ok(&["analytic", "--model", "aeh", "--alpha", "1", "--beta", "0"]).trim(),
        "0"
    );
    assert_eq!(
        ok(&["analytic", "--model", "rabi", "--alpha", "0.5"]).trim(),
        "1"
    );
    let p: f64 = ok(&[
        "analytic", "--model", "lmsz", "--alpha", "1", "--beta", "-8",
    ])
    .trim()
    .parse()
    .unwrap();
    assert!((p - 0.324768093344).abs() < 1e-12);
}

#[test]
fn analytic_lmsz_needs_detuning() {
    fails_with(
        &["analytic", "--model", "lmsz", "--alpha", "1", "--beta", "0"],
        "beta = 0",
    );
}

#[test]
fn pictures_agree() {
    let base = [
        "simulate",
        "--class",
        "lmsz",
        "--row",
        "1",
        "--alpha",
        "1",
        "--beta",
        "1",
        "--picture",
    ];
    let p = |pic: &str| {
        let mut args = base.to_vec();
        args.push(pic);
        json(&args)["probability"].as_f64().unwrap()
    };
    assert!((p("phase") - p("detuning")).abs() < 1e-8);
}

#[test]
fn simulate_reports_aeh_oracle() {
    let v = json(&[
        "simulate", "--class", "aeh", "--row", "8", "--alpha", "1", "--beta", "1",
    ]);
    let t = std::f64::consts::PI.tanh();
    assert!((v["probability"].as_f64().unwrap() - t * t).abs() < 1e-6);
    assert_eq!(v["truncation"], "tail:1e-8");
    assert!(v["unitarity_defect"].as_f64().unwrap() < 1e-9);
}

#[test]
fn physical_units_match_dimensionless() {
    // Ω₀/2π = 10 MHz, Δ₀/2π = 5 MHz, τ = 1000/(π·10) ns gives α = 1, β = 0.5.
    let tau = (1000.0 / (std::f64::consts::PI * 10.0)).to_string();
    let a = json(&[
        "simulate",
        "--class",
        "aeh",
        "--row",
        "4",
        "--omega0-mhz",
        "10",
        "--delta0-mhz",
        "5",
        "--tau-ns",
        &tau,
    ]);
    let b = json(&[
        "simulate", "--class", "aeh", "--row", "4", "--alpha", "1", "--beta", "0.5",
    ]);
    let (pa, pb) = (
        a["probability"].as_f64().unwrap(),
        b["probability"].as_f64().unwrap(),
    );
    assert!((pa - pb).abs() < 1e-9, "{pa} vs {pb}");
}

#[test]
fn contradictory_parameters_rejected() {
    fails_with(
        &[
            "simulate", "--class", "aeh", "--row", "8", "--alpha", "1", "--beta", "1", "--tau-ns",
            "20",
        ],
        "not both",
    );
    fails_with(
        &["simulate", "--class", "aeh", "--row", "8", "--alpha", "1"],
        "together",
    );
    fails_with(
        &["simulate", "--class", "aeh", "--row", "8"],
        "missing drive parameters",
    );
}

#[test]
fn bad_inputs_are_reported() {
    fails_with(
        &[
            "simulate", "--class", "xyz", "--row", "8", "--alpha", "1", "--beta", "0",
        ],
        "unknown class",
    );
    fails_with(
        &[
            "simulate", "--class", "aeh", "--row", "17", "--alpha", "1", "--beta", "0",
        ],
        "no catalog row 17",
    );
    fails_with(
        &[
            "simulate", "--class", "aeh", "--row", "8", "--alpha", "1", "--beta", "0", "--bogus",
        ],
        "--bogus",
    );
    fails_with(
        &[
            "simulate",
            "--class",
            "aeh",
            "--row",
            "1",
            "--alpha",
            "1",
            "--beta",
            "1",
            "--truncation",
            "full",
        ],
        "domain error",
    );
    fails_with(&["frobnicate"], "frobnicate");
}

#[test]
fn guard_estimate_is_small() {
    let v = json(&[
        "simulate",
        "--class",
        "aeh",
        "--row",
        "1",
        "--alpha",
        "1",
        "--beta",
        "0.5",
        "--guard-estimate",
    ]);
    assert!(v["guard_error"].as_f64().unwrap() < 1e-6);
}

#[test]
fn trajectory_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "traj.csv");
    ok(&[
        "simulate",
        "--class",
        "lmsz",
        "--row",
        "1",
        "--alpha",
        "0.5",
        "--beta",
        "0",
        "--trajectory",
        &out,
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,re_c1,im_c1,re_c2,im_c2,p2"));
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((last[5] - 1.0).abs() < 1e-9);
}

#[test]
fn scan_is_deterministic_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, img) = (
        path(dir.path(), "a.csv"),
        path(dir.path(), "b.csv"),
        path(dir.path(), "a.pgm"),
    );
    let args = |out: &str| -> Vec<String> {
        let fixed = [
            "scan",
            "--class",
            "aeh",
            "--row",
            "8",
            "--alpha",
            "0.05:3:7",
            "--beta",
            "-2:2:5",
            "--picture",
            "phase",
            "--out",
        ];
        fixed
            .iter()
            .map(|s| s.to_string())
            .chain([out.to_string()])
            .collect()
    };
    let run = |args: &[String]| ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let mut first = args(&a);
    first.extend(["--image".to_string(), img.clone()]);
    run(&first);
    run(&args(&b));
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("# aeh,8,phase\n# alpha,0.05,3,7\n# beta,-2,2,5\n"));
    assert_eq!(text.lines().count(), 8);
    let pgm = std::fs::read(&img).unwrap();
    assert!(pgm.starts_with(b"P5\n7 5\n255\n"));

    let v = json(&["compare", &a, &a, "--align"]);
    assert_eq!(v["mse_pre"].as_f64(), Some(0.0));
    assert_eq!(v["mse_post"].as_f64(), Some(0.0));
    assert_eq!(v["dx"].as_i64(), Some(0));
    assert_eq!(v["dy"].as_i64(), Some(0));
    assert_eq!(v["trims_a"], serde_json::json!([0, 0, 0, 0]));
    assert_eq!(v["trims_b"], serde_json::json!([0, 0, 0, 0]));
}

#[test]
fn scan_in_physical_units() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "p.csv");
    // τ = 100/π ns turns 0:30 MHz into α ∈ [0, 3].
    let tau = (100.0 / std::f64::consts::PI).to_string();
    let args = [
        "scan",
        "--class",
        "lmsz",
        "--row",
        "1",
        "--omega0-mhz",
        "0:30:4",
        "--delta0-mhz",
        "-20:20:3",
        "--tau-ns",
        &tau,
        "--out",
        &out,
    ];
    ok(&args);
    let text = std::fs::read_to_string(&out).unwrap();
    let axis: Vec<f64> = text.lines().nth(1).unwrap()[2..]
        .split(',')
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((axis[0] - 0.0).abs() < 1e-12 && (axis[1] - 3.0).abs() < 1e-12 && axis[2] == 4.0);
}

#[test]
fn compare_resamples_and_writes_difference() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, d) = (
        path(dir.path(), "a.csv"),
        path(dir.path(), "b.csv"),
        path(dir.path(), "d.csv"),
    );
    ok(&[
        "scan",
        "--class",
        "lmsz",
        "--row",
        "1",
        "--alpha",
        "0.1:2.5:6",
        "--beta",
        "-2:2:5",
        "--out",
        &a,
    ]);
    ok(&[
        "scan",
        "--class",
        "lmsz",
        "--row",
        "4",
        "--alpha",
        "0.1:2.5:6",
        "--beta",
        "-2:2:5",
        "--out",
        &b,
    ]);
    let v = json(&["compare", &a, &b, "--resample", "21", "--diff", &d]);
    assert!(v["mse_pre"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["overlap_size"].as_u64(), Some(441));
    let diff = std::fs::read_to_string(&d).unwrap();
    assert!(diff.starts_with("# difference,21,21\n"));
    assert_eq!(diff.lines().count(), 22);
}

#[test]
fn compare_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.csv");
    std::fs::write(&bad, "# -,-,-\n# alpha,0,1,2\n# beta,0,1,2\n0,1\n0.5,1.2\n").unwrap();
    fails_with(&["compare", &bad, &bad], "line 5");
    fails_with(
        &["compare", &path(dir.path(), "missing.csv"), &bad],
        "cannot load",
    );
}

#[test]
fn catalog_listing() {
    let text = ok(&["catalog"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "row,name,domain_kind,has_closed_s");
    assert_eq!(lines.len(), 17);
    assert_eq!(lines[8], "8,sech,infinite,true");
    let audit = ok(&["catalog", "--audit"]);
    let rows: Vec<Value> = audit
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[10]["listed_integral"]["verdict"], "rejected");
    assert!(rows
        .iter()
        .all(|r| r["area_error"].as_f64().unwrap() < 1e-6));
}
