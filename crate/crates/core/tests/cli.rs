mod common;

use oism::io::{load_model, read_points_csv, save_model, ModelFile};
use oism::stats::{ks_test, uniform_torus_cdf};
use oism::{trig_basis_nd, Schedule, ScoreModel};
use std::path::Path;
use std::process::{Command, Output};

fn oism(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oism"))
        .current_dir(dir)
        .args(args)
        .env_remove("OISM_WORKERS")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = oism(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    oism(dir, args).status.code().unwrap()
}

fn theta(file: &ModelFile) -> Vec<f64> {
    let m = file.moments.as_ref().unwrap();
    m.theta_hat.iter().zip(&m.gamma).map(|(t, g)| t * g).collect()
}

#[test]
fn gen_data_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen-data", "--target", "bart-simpson", "--n", "2000", "--seed", "7", "--out", "a.csv"]);
    ok(d, &["gen-data", "--target", "bart-simpson", "--n", "2000", "--seed", "7", "--out", "b.csv"]);
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    assert_eq!(read_points_csv(&d.join("a.csv")).unwrap().nrows(), 2000);
    assert!(d.join("a.csv.provenance.json").exists());

    ok(d, &["gen-data", "--target", "pinwheel", "--n", "20000"]);
    let p = read_points_csv(&d.join("data.csv")).unwrap();
    assert_eq!(p.dim(), (20000, 2));
    assert!(common::on_torus_points(&p));
}

#[test]
fn fit_residuals_and_shrinkage_modes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen-data", "--target", "bart-simpson", "--n", "2000", "--seed", "7"]);
    let printed = ok(
        d,
        &["fit", "--data", "data.csv", "--basis", "trig", "--max-freq", "25", "--shrinkage", "modulation", "--out", "mod.json"],
    );
    assert!(printed.contains("max condition"));
    ok(d, &["fit", "--data", "data.csv", "--max-freq", "25", "--shrinkage", "none", "--out", "none.json"]);
    let (_, modulated) = load_model(&d.join("mod.json")).unwrap();
    let (_, plain) = load_model(&d.join("none.json")).unwrap();
    assert_eq!(modulated.diagnostics.len(), 1000);
    assert!(modulated.diagnostics.iter().all(|g| g.residual <= 1e-6));
    assert_ne!(theta(&modulated), theta(&plain));
    assert_eq!(modulated.provenance.as_ref().unwrap().n_samples, 2000);
}

#[test]
fn density_output_normalises() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen-data", "--target", "bart-simpson", "--n", "2000", "--seed", "3"]);
    ok(d, &["fit", "--data", "data.csv", "--max-freq", "25"]);
    ok(d, &["density", "--model", "model.json"]);
    let mut r = csv::Reader::from_path(d.join("density.csv")).unwrap();
    let rows: Vec<(f64, f64)> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4096);
    let h = 2.0 * std::f64::consts::PI / 4096.0;
    let mass: f64 = rows.iter().map(|(_, l)| l.exp() * h).sum();
    assert!((mass - 1.0).abs() < 0.02, "mass {mass}");
}

#[test]
fn zero_model_sampling_reproduces_the_prior() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let model = ScoreModel::zero(trig_basis_nd(1, -9.0).unwrap(), Schedule::ve(0.01, 50.0), 50).unwrap();
    save_model(&d.join("zero.json"), &ModelFile::from_model(&model, None, None)).unwrap();
    for method in ["pf-ode", "reverse-sde"] {
        ok(d, &["sample", "--model", "zero.json", "--n", "100000", "--method", method, "--sde-steps", "50"]);
        let x = read_points_csv(&d.join("samples.csv")).unwrap();
        let (_, p) = ks_test(&common::column(&x, 0), uniform_torus_cdf);
        assert!(p > 0.01, "{method}: p = {p}");
    }
}

#[test]
fn replay_from_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen-data", "--target", "two-moons", "--n", "3000", "--seed", "11"]);
    ok(d, &["--seed", "5", "fit", "--data", "data.csv", "--eigenvalue-floor", "-20", "--grid-size", "50"]);
    ok(d, &["--seed", "9", "sample", "--model", "model.json", "--n", "40", "--out", "s1.csv"]);
    // replaying the provenance file writes the same bytes to the recorded path
    let first = std::fs::read(d.join("s1.csv")).unwrap();
    std::fs::remove_file(d.join("s1.csv")).unwrap();
    ok(d, &["--config", "s1.csv.provenance.json", "sample"]);
    assert_eq!(first, std::fs::read(d.join("s1.csv")).unwrap());
}

#[test]
fn loss_study_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let printed = ok(d, &["--seed", "1", "loss-study", "--sizes", "2,4", "--replications", "2", "--n-data", "300"]);
    assert!(printed.contains("size"));
    let rows = csv::Reader::from_path(d.join("loss_study.csv")).unwrap().records().count();
    // 2 replications x 2 sizes x 2 default taus
    assert_eq!(rows, 8);
    assert!(d.join("loss_study.csv.summary.csv").exists());
    assert_eq!(oism::cli::RunConfig::default().replications, 50);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"seeed": 1}"#).unwrap();
    assert_eq!(code(d, &["--config", "bad.json", "eigen-report"]), 2);
    assert_eq!(code(d, &["fit"]), 2);
    assert_eq!(code(d, &["fit", "--data", "missing.csv"]), 2);
    assert_eq!(code(d, &["fit", "--data", "x.csv", "--grid-size", "1"]), 2);
    assert_eq!(code(d, &["loss-study", "--target", "standard-normal"]), 5);

    std::fs::write(d.join("nan.csv"), "x1\n0.5\nNaN\n0.1\n").unwrap();
    assert_eq!(code(d, &["fit", "--data", "nan.csv", "--max-freq", "3"]), 4);

    ok(d, &["gen-data", "--target", "standard-normal", "--dimension", "3", "--n", "500"]);
    ok(d, &["fit", "--data", "data.csv", "--basis", "hermite", "--order", "2", "--grid-size", "20"]);
    assert_eq!(code(d, &["density", "--model", "model.json"]), 5);
}

#[test]
fn eigen_report_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["eigen-report", "--dimension", "2", "--eigenvalue-floor", "-125"]);
    assert!(out.contains("basis functions (with constant): 401"));
    assert!(out.contains("canonical frequencies (each with cos and sin): 200"));
    let out = ok(dir.path(), &["eigen-report", "--max-freq", "25"]);
    assert!(out.contains("non-constant functions: 50"));
}
