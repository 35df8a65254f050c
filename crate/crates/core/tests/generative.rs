mod common;

use oism::generative::{log_density_batch, FlowField};
use oism::quadrature::periodic_nodes;
use oism::stats::{ks_test, uniform_torus_cdf};
use oism::targets::mixture_logpdf;
use oism::{
    log_density, sample_pf_ode, sample_reverse_sde, trig_basis_nd, IntegratorConfig, Schedule,
    ScoreModel, TorusPrior,
};
use ndarray::Array2;
use rand::Rng;
use std::f64::consts::PI;

fn zero_torus_model(d: usize) -> ScoreModel {
    ScoreModel::zero(trig_basis_nd(d, -4.0).unwrap(), Schedule::ve(0.01, 50.0), 100).unwrap()
}

fn var_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let var = oism::stats::variance(v);
    (var, var * (2.0 / n).sqrt())
}

#[test]
fn zero_model_transports_the_prior_unchanged() {
    let model = zero_torus_model(2);
    let cfg = IntegratorConfig::default();
    let x = sample_pf_ode(&model, 100_000, &cfg, TorusPrior::Uniform, 1).unwrap();
    assert!(common::on_torus_points(&x));
    for j in 0..2 {
        let (_, p) = ks_test(&common::column(&x, j), uniform_torus_cdf);
        assert!(p > 0.01, "pf-ode coordinate {j}: p = {p}");
    }
    let y = sample_reverse_sde(&model, 100_000, 100, TorusPrior::Uniform, 2).unwrap();
    assert!(common::on_torus_points(&y));
    for j in 0..2 {
        let (_, p) = ks_test(&common::column(&y, j), uniform_torus_cdf);
        assert!(p > 0.01, "reverse SDE coordinate {j}: p = {p}");
    }
    for x in [[0.0, 0.0], [3.0, -2.5], [-PI, PI]] {
        let ld = log_density(&model, &x, &cfg).unwrap();
        assert!((ld + 2.0 * (2.0 * PI).ln()).abs() < 1e-14);
    }
}

#[test]
fn gaussian_flow_samples_match_the_target() {
    let (model, _) = common::gaussian_model(0.5, 0.25, common::long_vp(), 1000);
    let x = sample_pf_ode(&model, 100_000, &IntegratorConfig::default(), TorusPrior::Uniform, 3).unwrap();
    let c = common::column(&x, 0);
    let (m, se) = common::mean_se(&c);
    assert!((m - 0.5).abs() < 4.0 * se, "mean {m} ± {se}");
    let (v, se) = var_se(&c);
    assert!((v - 0.25).abs() < 4.0 * se, "variance {v} ± {se}");
}

#[test]
fn gaussian_reverse_sde_matches_the_target() {
    let (model, _) = common::gaussian_model(0.5, 0.25, common::long_vp(), 1000);
    let x = sample_reverse_sde(&model, 100_000, 1000, TorusPrior::Uniform, 4).unwrap();
    let c = common::column(&x, 0);
    let m = oism::stats::mean(&c);
    let v = oism::stats::variance(&c);
    assert!((m - 0.5).abs() < 0.05 * 0.5, "mean {m}");
    assert!((v - 0.25).abs() < 0.05 * 0.25, "variance {v}");
}

#[test]
fn gaussian_log_density_is_exact() {
    let (model, target) = common::gaussian_model(0.5, 0.25, common::long_vp(), 1000);
    let cfg = IntegratorConfig::default();
    for i in 0..100 {
        let x = -1.0 + 3.0 * i as f64 / 99.0;
        let ld = log_density(&model, &[x], &cfg).unwrap();
        let exact = mixture_logpdf(&target, &[x]);
        assert!((ld - exact).abs() < 1e-3, "x = {x}: {ld} vs {exact}");
    }
}

#[test]
fn divergence_matches_finite_differences() {
    let model = common::bart_model(&common::bart_data(2000, 5));
    let mut field = FlowField::new(&model);
    let mut rng = common::rng(6);
    let h = 1e-5;
    let mut out = [0.0];
    for _ in 0..100 {
        let tau = rng.random_range(0.0..1.0);
        let x: f64 = rng.random_range(-3.0..3.0);
        let div = field.eval(&[x], tau, &mut out).unwrap();
        field.eval(&[x + h], tau, &mut out).unwrap();
        let up = out[0];
        field.eval(&[x - h], tau, &mut out).unwrap();
        let fd = (up - out[0]) / (2.0 * h);
        assert!((fd - div).abs() <= 1e-5 * div.abs().max(1.0), "tau {tau} x {x}: {fd} vs {div}");
    }
}

#[test]
fn fitted_density_normalises_and_tracks_the_target() {
    let model = common::bart_model(&common::bart_data(2000, 8));
    let (nodes, h) = periodic_nodes(4096);
    let pts = Array2::from_shape_vec((nodes.len(), 1), nodes.clone()).unwrap();
    let ld = log_density_batch(&model, &pts, &IntegratorConfig::default()).unwrap();
    let mass: f64 = ld.iter().map(|l| l.exp() * h).sum();
    assert!((mass - 1.0).abs() < 0.02, "mass {mass}");
    let l1: f64 = nodes
        .iter()
        .zip(&ld)
        .map(|(&x, l)| (l.exp() - common::bart_density(x)).abs() * h)
        .sum();
    assert!(l1 <= 0.15, "L1 {l1}");
}

#[test]
fn wrapped_gaussian_prior_stays_on_the_torus() {
    let model = common::bart_model(&common::bart_data(2000, 9));
    let x = sample_pf_ode(&model, 500, &IntegratorConfig::default(), TorusPrior::WrappedGaussian, 10).unwrap();
    assert!(common::on_torus_points(&x));
    let y = sample_reverse_sde(&model, 500, 200, TorusPrior::WrappedGaussian, 11).unwrap();
    assert!(common::on_torus_points(&y));
}

#[test]
fn sampling_is_reproducible_per_seed() {
    let model = common::bart_model(&common::bart_data(2000, 12));
    let cfg = IntegratorConfig::default();
    let a = sample_pf_ode(&model, 50, &cfg, TorusPrior::Uniform, 13).unwrap();
    let b = sample_pf_ode(&model, 50, &cfg, TorusPrior::Uniform, 13).unwrap();
    assert_eq!(a, b);
    let c = sample_pf_ode(&model, 60, &cfg, TorusPrior::Uniform, 13).unwrap();
    assert_eq!(a.row(49), c.row(49));
}
