#![allow(dead_code)]

use ndarray::Array2;
use oism::pipeline::{fit_model, FitSettings};
use oism::targets::{sample_mixture, DomainMap};
use oism::{
    analytic_moments, bart_simpson, hermite_univariate_basis, presolve_grid, BasisSpec,
    GaussianMixture, ProductTable, Schedule, ScoreModel, Shrinkage,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Long VP schedule: ρ_1 is within 1e-8 of N(0, 1) for unit-scale targets.
pub fn long_vp() -> Schedule {
    Schedule::vp(0.1, 40.0)
}

/// OISM(2) on a 1D Gaussian target with exact moments.
pub fn gaussian_model(mean: f64, var: f64, schedule: Schedule, n_grid: usize) -> (ScoreModel, GaussianMixture) {
    let target = GaussianMixture::gaussian(vec![mean], vec![var]).unwrap();
    let basis = hermite_univariate_basis(1, 2).unwrap();
    let table = ProductTable::build(&basis).unwrap();
    let m = analytic_moments(&target, &basis).unwrap();
    let model = presolve_grid(&basis, &table, &m, &schedule, n_grid).unwrap();
    (model, target)
}

pub fn bart_data(n: usize, seed: u64) -> Array2<f64> {
    let mut ds = sample_mixture(&bart_simpson(), n, &mut rng(seed)).unwrap();
    ds.wrap_into_torus();
    ds.points
}

/// The standard 1D protocol: 25 frequencies, VE(0.01, 50), modulation.
pub fn bart_model(data: &Array2<f64>) -> ScoreModel {
    let settings = FitSettings {
        basis: BasisSpec::trig_1d(25),
        schedule: Schedule::ve(0.01, 50.0),
        shrinkage: Shrinkage::Modulation,
        shrink_extended: true,
        grid_size: 1000,
    };
    fit_model(data, &settings, DomainMap::identity(1)).unwrap().model
}

pub fn column(a: &Array2<f64>, j: usize) -> Vec<f64> {
    a.column(j).to_vec()
}

pub fn mean_se(v: &[f64]) -> (f64, f64) {
    (oism::stats::mean(v), oism::stats::standard_error(v))
}

use oism::process::transition;
use oism::solver::{assemble, solve_coefficients, LossGrid, LossQuadrature, MixtureReference};
use oism::{assemble_a, trig_basis_1d, EigenBasis, Process};
use std::f64::consts::PI;

/// Largest |z| over functions and times of the Monte-Carlo eigenrelation
/// mean φ(X_t) − e^{λt} mean φ(X_0), using the per-draw differences (whose
/// exact mean is zero) for the standard error.
pub fn eigenrelation_worst_z(process: Process, n: usize, max_index: u32, times: &[f64], seed: u64) -> f64 {
    let (basis, target) = match process {
        Process::Ou => (
            hermite_univariate_basis(1, max_index).unwrap(),
            GaussianMixture::gaussian(vec![1.0], vec![0.25]).unwrap(),
        ),
        Process::TruncatedBm => (
            trig_basis_1d(max_index).unwrap(),
            GaussianMixture::gaussian(vec![0.5], vec![0.5]).unwrap(),
        ),
    };
    let eig: Vec<f64> = basis.functions().iter().map(|f| f.eigenvalue).collect();
    let m = basis.len();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for &t in times {
        let mut sum = vec![0.0; m];
        let mut sum_sq = vec![0.0; m];
        let pts = oism::targets::sample_mixture_points(&target, n, &mut r);
        for mut x0 in pts {
            if process == Process::TruncatedBm {
                oism::process::wrap_point(&mut x0);
            }
            let xt = transition(process, &x0, t, &mut r).unwrap();
            let v0 = basis.eval(&x0).unwrap().values;
            let vt = basis.eval(&xt).unwrap().values;
            for i in 0..m {
                let d = vt[i] - (eig[i] * t).exp() * v0[i];
                sum[i] += d;
                sum_sq[i] += d * d;
            }
        }
        let nf = n as f64;
        for i in 1..m {
            let mean = sum[i] / nf;
            let var = (sum_sq[i] / nf - mean * mean) * nf / (nf - 1.0);
            let se = (var / nf).sqrt();
            worst = worst.max(mean.abs() / se);
        }
    }
    worst
}

/// Largest |z| of closed-form A_t against a Monte-Carlo estimate of
/// E_{ρ_0}[Γ(φ_k, φ_l)(X_t)] on the 6-function trig basis, ρ_0 the wrapped
/// N(0, 0.25).
pub fn a_oracle_worst_z(n: usize, times: &[f64], seed: u64) -> f64 {
    let basis = trig_basis_1d(3).unwrap();
    let table = ProductTable::build(&basis).unwrap();
    let target = GaussianMixture::gaussian(vec![0.0], vec![0.25]).unwrap();
    let moments = analytic_moments(&target, &basis).unwrap();
    let p = basis.n_coefficients();
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for &t in times {
        let a = assemble_a(&basis, &table, &moments, t).unwrap();
        let mut sum = vec![0.0; p * p];
        let mut sum_sq = vec![0.0; p * p];
        for mut x0 in oism::targets::sample_mixture_points(&target, n, &mut r) {
            oism::process::wrap_point(&mut x0);
            let xt = transition(Process::TruncatedBm, &x0, t, &mut r).unwrap();
            let g = basis.eval(&xt).unwrap().gradients;
            for k in 0..p {
                for l in 0..p {
                    let v = g[[0, k + 1]] * g[[0, l + 1]];
                    sum[k * p + l] += v;
                    sum_sq[k * p + l] += v * v;
                }
            }
        }
        let nf = n as f64;
        for k in 0..p {
            for l in 0..p {
                let mean = sum[k * p + l] / nf;
                let var = (sum_sq[k * p + l] / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
                let se = (var / nf).sqrt();
                let diff = (a[(k, l)] - mean).abs();
                // Γ of a sine/cosine pair at the same frequency is deterministic
                let z = if se > 1e-12 { diff / se } else if diff < 1e-9 { 0.0 } else { f64::INFINITY };
                worst = worst.max(z);
            }
        }
    }
    worst
}

/// With ρ_0 = π: max |A_t − Λ| and max |b_t| over a few times and both
/// families (zero means exact).
pub fn invariant_limit_error() -> f64 {
    let mut worst: f64 = 0.0;
    for basis in [
        trig_basis_1d(6).unwrap(),
        oism::trig_basis_nd(2, -10.0).unwrap(),
        hermite_univariate_basis(2, 4).unwrap(),
    ] {
        let table = ProductTable::build(&basis).unwrap();
        let m = oism::MomentVector::invariant(basis.extended().len());
        for t in [1e-4, 0.1, 1.0, 7.0] {
            let sys = assemble(&basis, &table, &m, t).unwrap();
            for i in 0..sys.a.nrows() {
                for j in 0..sys.a.ncols() {
                    let target = if i == j { sys.lambda[i] } else { 0.0 };
                    worst = worst.max((sys.a[(i, j)] - target).abs());
                }
                worst = worst.max(sys.b[i].abs());
            }
        }
    }
    worst
}

/// Gaussian N(m, s²) under OU with an order-2 Hermite basis: the largest
/// coefficient error against m_t/v_t and (v_t − 1)/(√2 v_t), and the largest
/// score-matching loss, over 20 τ of a VP schedule.
pub fn gaussian_exactness(mean: f64, var: f64) -> (f64, f64) {
    let schedule = Schedule::vp(0.1, 20.0);
    let target = GaussianMixture::gaussian(vec![mean], vec![var]).unwrap();
    let basis = hermite_univariate_basis(1, 2).unwrap();
    let table = ProductTable::build(&basis).unwrap();
    let m = analytic_moments(&target, &basis).unwrap();
    let mut coef_err: f64 = 0.0;
    let mut loss: f64 = 0.0;
    for i in 0..20 {
        let tau = 0.01 + 0.99 * i as f64 / 19.0;
        let t = schedule.internal_time(tau);
        let sol = solve_coefficients(&assemble(&basis, &table, &m, t).unwrap()).unwrap();
        let mt = mean * (-t).exp();
        let vt = 1.0 + (var - 1.0) * (-2.0 * t).exp();
        coef_err = coef_err
            .max((sol.alpha[0] - mt / vt).abs())
            .max((sol.alpha[1] - (vt - 1.0) / (std::f64::consts::SQRT_2 * vt)).abs());
        let reference = MixtureReference::new(&target, Process::Ou, &schedule, tau).unwrap();
        let grid = LossGrid::new(&reference, LossQuadrature::Grid { nodes_per_dim: 2001 }).unwrap();
        loss = loss.max(grid.loss(&basis, &sol.alpha).unwrap());
    }
    (coef_err, loss)
}

/// γ²σ² + (1 − γ)² max(θ² − σ², 0), written out independently.
pub fn risk_1d(theta: f64, var: f64, gamma: f64) -> f64 {
    let excess = theta * theta - var;
    let excess = if excess > 0.0 { excess } else { 0.0 };
    gamma * gamma * var + (1.0 - gamma) * (1.0 - gamma) * excess
}

/// Largest |γ_closed − γ_grid| over `n` random inputs, grid step 1e-6.
pub fn modulation_grid_worst(n: usize, seed: u64) -> f64 {
    use rand::Rng;
    let mut r = rng(seed);
    let steps = 1_000_000;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let theta: f64 = r.random_range(-3.0..3.0);
        let var: f64 = r.random_range(0.01..2.0);
        let closed = oism::moments::modulation_weight(theta, var);
        let mut best = (f64::INFINITY, 0.0);
        for s in 0..=steps {
            let g = s as f64 / steps as f64;
            let v = risk_1d(theta, var, g);
            if v < best.0 {
                best = (v, g);
            }
        }
        worst = worst.max((closed - best.1).abs());
    }
    worst
}

/// Wrapped Bart Simpson density on the torus.
pub fn bart_density(x: f64) -> f64 {
    oism::targets::wrapped_logpdf_and_score(&bart_simpson(), &[x]).0.exp()
}

pub fn on_torus_points(m: &Array2<f64>) -> bool {
    m.iter().all(|v| v.abs() <= PI)
}

pub fn basis_of(model: &ScoreModel) -> &EigenBasis {
    model.basis()
}

/// Largest deviation of Σ_i w_i v_i[k] v_i[l] from δ_kl.
pub fn gram_error(values: &[Vec<f64>], weights: &[f64]) -> f64 {
    let m = values[0].len();
    let mut worst: f64 = 0.0;
    for k in 0..m {
        for l in k..m {
            let s: f64 = values.iter().zip(weights).map(|(v, w)| w * v[k] * v[l]).sum();
            let target = if k == l { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
        }
    }
    worst
}

/// Hermite functions to order 50 under 200-node Gauss–Hermite quadrature.
pub fn hermite_gram_error() -> f64 {
    let (x, w) = oism::quadrature::gauss_hermite(200);
    let values: Vec<Vec<f64>> = x.iter().map(|&x| oism::hermite_eval(50, x).unwrap()).collect();
    gram_error(&values, &w)
}

/// Trig functions to frequency 50 under the 4096-node periodic rule.
pub fn trig_gram_error() -> f64 {
    let basis = trig_basis_1d(50).unwrap();
    let (x, h) = oism::quadrature::periodic_nodes(4096);
    let w = vec![h / (2.0 * PI); x.len()];
    let values: Vec<Vec<f64>> = x.iter().map(|&x| basis.eval(&[x]).unwrap().values).collect();
    gram_error(&values, &w)
}

/// Largest |φ_k φ_l − Σ_h β_h φ_h| / (1 + |φ_k φ_l|) over table pairs and points.
pub fn product_identity_error(basis: &EigenBasis, points: &[Vec<f64>]) -> f64 {
    let table = ProductTable::build(basis).unwrap();
    let mut ws = oism::basis::Workspace::new(basis);
    let mut ext = vec![0.0; basis.extended().len()];
    let mut worst: f64 = 0.0;
    for x in points {
        basis.eval_extended_values(x, &mut ws, &mut ext);
        for k in 0..basis.len() {
            for l in k..basis.len() {
                let Some(terms) = table.get(k, l) else {
                    continue;
                };
                let lhs = ext[k] * ext[l];
                let rhs: f64 = terms.iter().map(|&(h, b)| b * ext[h]).sum();
                worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
            }
        }
    }
    worst
}

/// Relative gradient (central difference) and Laplacian (5-point stencil)
/// errors, each scaled by max(|exact|, 1).
pub fn derivative_errors(basis: &EigenBasis, points: &[Vec<f64>]) -> (f64, f64) {
    let d = basis.dimension();
    let h = 1e-5;
    let h2 = 1e-3;
    let (mut grad_err, mut lap_err): (f64, f64) = (0.0, 0.0);
    for x in points {
        let v = basis.eval(x).unwrap();
        for j in 0..d {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fp = basis.eval(&xp).unwrap().values;
            let fm = basis.eval(&xm).unwrap().values;
            for i in 0..basis.len() {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                let g = v.gradients[[j, i]];
                grad_err = grad_err.max((fd - g).abs() / g.abs().max(1.0));
            }
        }
        let mut lap = vec![0.0; basis.len()];
        for j in 0..d {
            let shifted = |s: f64| {
                let mut y = x.clone();
                y[j] += s;
                basis.eval(&y).unwrap().values
            };
            let (p2, p1, m1, m2) = (shifted(2.0 * h2), shifted(h2), shifted(-h2), shifted(-2.0 * h2));
            for i in 0..basis.len() {
                lap[i] += (-p2[i] + 16.0 * p1[i] - 30.0 * v.values[i] + 16.0 * m1[i] - m2[i])
                    / (12.0 * h2 * h2);
            }
        }
        for i in 0..basis.len() {
            let l = v.laplacians[i];
            lap_err = lap_err.max((lap[i] - l).abs() / l.abs().max(1.0));
        }
    }
    (grad_err, lap_err)
}
