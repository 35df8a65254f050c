//! Sampling and exact model log-densities through the probability-flow ODE,
//! and an Euler–Maruyama reverse-SDE sampler.
//!
//! In normalised time the flow of either process is
//! dx/dτ = −t′(τ) s̃_{t(τ)}(x), where s̃ ≈ ∇log(ρ_t/π) is the model score,
//! with divergence −t′(τ) Σ_k α̂_k(τ) Δφ_k(x).

use crate::basis::{Process, Workspace};
use crate::error::{OismError, Result};
use crate::integrator::{integrate, IntegratorConfig};
use crate::par;
use crate::process::{prior_log_density, sample_prior, wrap_point, Schedule};
use crate::solver::ScoreModel;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Starting distribution for sampling on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TorusPrior {
    #[default]
    Uniform,
    /// N(0, σ_1² I) wrapped onto the torus.
    WrappedGaussian,
}

/// Velocity and divergence of the probability-flow ODE of a model.
pub struct FlowField<'a> {
    model: &'a ScoreModel,
    alpha: Vec<f64>,
    ws: Workspace,
}

impl<'a> FlowField<'a> {
    pub fn new(model: &'a ScoreModel) -> Self {
        FlowField {
            model,
            alpha: vec![0.0; model.basis().n_coefficients()],
            ws: Workspace::new(model.basis()),
        }
    }

    /// Writes dx/dτ at (x, τ) into `out` and returns its divergence.
    pub fn eval(&mut self, x: &[f64], tau: f64, out: &mut [f64]) -> Result<f64> {
        let tau = tau.clamp(self.model.tau_min(), 1.0);
        self.model.alpha_into(tau, &mut self.alpha)?;
        let rate = self.model.schedule().internal_rate(tau);
        let (_, lap) = self
            .model
            .basis()
            .eval_weighted(x, &self.alpha, &mut self.ws, out);
        out.iter_mut().for_each(|v| *v *= -rate);
        Ok(-rate * lap)
    }
}

fn check_point(model: &ScoreModel, x: &[f64], row: usize) -> Result<()> {
    model.basis().check_point(x)?;
    if model.process() == Process::TruncatedBm && x.iter().any(|v| v.abs() > std::f64::consts::PI) {
        return Err(OismError::Domain {
            row,
            detail: format!("point {x:?} outside [-pi, pi]^d"),
        });
    }
    Ok(())
}

/// Carry `x` along the flow from τ_from to τ_to. Torus states are wrapped at
/// the end.
pub fn transport(
    model: &ScoreModel,
    x: &[f64],
    tau_from: f64,
    tau_to: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    for tau in [tau_from, tau_to] {
        if !(tau >= model.tau_min() && tau <= 1.0) {
            return Err(OismError::invalid(format!("tau = {tau} outside the model grid")));
        }
    }
    model.basis().check_point(x)?;
    let mut field = FlowField::new(model);
    let r = integrate(
        |tau, y, dy| field.eval(y, tau, dy).map(|_| ()),
        x,
        tau_from,
        tau_to,
        cfg,
    )?;
    let mut y = r.y;
    if model.process() == Process::TruncatedBm {
        wrap_point(&mut y);
    }
    Ok(y)
}

/// Model log-density with the accumulated local error estimate of its
/// log-det component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDensity {
    pub value: f64,
    pub error_estimate: f64,
}

/// log ρ̂_0(x0) = log π(x_1) + ∫_0^1 div(dx/dτ) dτ along the forward flow.
pub fn log_density_detailed(model: &ScoreModel, x0: &[f64], cfg: &IntegratorConfig) -> Result<LogDensity> {
    check_point(model, x0, 0)?;
    let d = model.dimension();
    let mut field = FlowField::new(model);
    let mut y0 = x0.to_vec();
    y0.push(0.0);
    let r = integrate(
        |tau, y, dy| {
            let div = field.eval(&y[..d], tau, &mut dy[..d])?;
            dy[d] = div;
            Ok(())
        },
        &y0,
        model.tau_min(),
        1.0,
        cfg,
    )?;
    let mut x1 = r.y[..d].to_vec();
    if model.process() == Process::TruncatedBm {
        wrap_point(&mut x1);
    }
    Ok(LogDensity {
        value: prior_log_density(model.process(), &x1) + r.y[d],
        error_estimate: r.error_estimate[d],
    })
}

pub fn log_density(model: &ScoreModel, x0: &[f64], cfg: &IntegratorConfig) -> Result<f64> {
    Ok(log_density_detailed(model, x0, cfg)?.value)
}

fn collect_rows(results: Vec<Result<Vec<f64>>>, d: usize) -> Result<Array2<f64>> {
    let total = results.len();
    let failed = results.iter().filter(|r| r.is_err()).count();
    if failed > 0 {
        let first = results.into_iter().find_map(|r| r.err()).expect("a failure");
        return Err(OismError::Trajectories {
            failed,
            total,
            first: Box::new(first),
        });
    }
    let flat: Vec<f64> = results.into_iter().flat_map(|r| r.expect("checked")).collect();
    Ok(Array2::from_shape_vec((total, d), flat).expect("rows share the dimension"))
}

/// Log-densities of many points; row order is preserved.
pub fn log_density_batch(model: &ScoreModel, points: &Array2<f64>, cfg: &IntegratorConfig) -> Result<Vec<f64>> {
    let out = par::map_range(points.nrows(), |i| {
        let x = points.row(i).to_vec();
        check_point(model, &x, i)?;
        log_density(model, &x, cfg).map(|v| vec![v])
    });
    Ok(collect_rows(out, 1)?.into_iter().collect())
}

/// Random stream of trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn draw_prior<R: Rng + ?Sized>(model: &ScoreModel, prior: TorusPrior, rng: &mut R) -> Vec<f64> {
    let d = model.dimension();
    match (model.process(), prior) {
        (Process::TruncatedBm, TorusPrior::WrappedGaussian) => {
            let sd = (2.0 * model.schedule().internal_time(1.0)).sqrt();
            let mut x: Vec<f64> = (0..d)
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect();
            wrap_point(&mut x);
            x
        }
        (p, _) => sample_prior(p, d, rng),
    }
}

/// `n` samples by integrating the flow from the prior at τ = 1 back to the
/// start of the grid. Trajectory i uses stream i of `seed`.
pub fn sample_pf_ode(
    model: &ScoreModel,
    n: usize,
    cfg: &IntegratorConfig,
    prior: TorusPrior,
    seed: u64,
) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(OismError::invalid("sample count must be at least 1"));
    }
    cfg.validate()?;
    let out = par::map_range(n, |i| {
        let mut rng = trajectory_rng(seed, i);
        let x1 = draw_prior(model, prior, &mut rng);
        transport(model, &x1, 1.0, model.tau_min(), cfg)
    });
    collect_rows(out, model.dimension())
}

/// Push data points forward along the flow to τ = 1.
pub fn push_forward(model: &ScoreModel, points: &Array2<f64>, cfg: &IntegratorConfig) -> Result<Array2<f64>> {
    let out = par::map_range(points.nrows(), |i| {
        let x = points.row(i).to_vec();
        check_point(model, &x, i)?;
        transport(model, &x, model.tau_min(), 1.0, cfg)
    });
    collect_rows(out, model.dimension())
}

/// Euler–Maruyama on the time-reversed SDE over `n_steps` uniform τ steps.
/// With internal-time increment h the update is
/// x ← x + (2 s̃ − b(x)) h + √(2h) z with b(x) = −x (OU) or 0 (torus).
pub fn sample_reverse_sde(
    model: &ScoreModel,
    n: usize,
    n_steps: usize,
    prior: TorusPrior,
    seed: u64,
) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(OismError::invalid("sample count must be at least 1"));
    }
    if n_steps < 10 {
        return Err(OismError::invalid("reverse SDE needs at least 10 steps"));
    }
    let schedule: Schedule = *model.schedule();
    let tau0 = model.tau_min();
    let taus: Vec<f64> = (0..=n_steps)
        .map(|i| tau0 + (1.0 - tau0) * i as f64 / n_steps as f64)
        .collect();
    let times: Vec<f64> = taus.iter().map(|&t| schedule.internal_time(t)).collect();
    let d = model.dimension();
    let process = model.process();
    let out = par::map_range(n, |i| {
        let mut rng = trajectory_rng(seed, i);
        let mut x = draw_prior(model, prior, &mut rng);
        let mut ws = Workspace::new(model.basis());
        let mut alpha = vec![0.0; model.basis().n_coefficients()];
        let mut s = vec![0.0; d];
        for step in (1..=n_steps).rev() {
            let h = times[step] - times[step - 1];
            model.alpha_into(taus[step], &mut alpha)?;
            model.basis().eval_weighted(&x, &alpha, &mut ws, &mut s);
            let sh = (2.0 * h).sqrt();
            for j in 0..d {
                let drift = match process {
                    Process::Ou => 2.0 * s[j] - x[j],
                    Process::TruncatedBm => 2.0 * s[j],
                };
                let z: f64 = rng.sample(StandardNormal);
                x[j] += drift * h + sh * z;
            }
            if process == Process::TruncatedBm {
                wrap_point(&mut x);
            }
        }
        Ok(x)
    });
    collect_rows(out, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::trig_basis_1d;
    use std::f64::consts::PI;

    fn zero_model() -> ScoreModel {
        ScoreModel::zero(trig_basis_1d(3).unwrap(), Schedule::ve(0.01, 50.0), 11).unwrap()
    }

    #[test]
    fn zero_field_density_is_uniform() {
        let m = zero_model();
        let cfg = IntegratorConfig::default();
        for &x in &[-3.0, 0.0, 1.2] {
            assert!((log_density(&m, &[x], &cfg).unwrap() + (2.0 * PI).ln()).abs() < 1e-12);
        }
        assert!(matches!(log_density(&m, &[3.5], &cfg), Err(OismError::Domain { .. })));
    }

    #[test]
    fn zero_field_samples_are_prior_draws() {
        let m = zero_model();
        let cfg = IntegratorConfig::default();
        let s = sample_pf_ode(&m, 50, &cfg, TorusPrior::Uniform, 4).unwrap();
        for (i, row) in s.outer_iter().enumerate() {
            let expect = sample_prior(Process::TruncatedBm, 1, &mut trajectory_rng(4, i));
            assert_eq!(row.to_vec(), expect);
        }
        let r = sample_reverse_sde(&m, 20, 10, TorusPrior::WrappedGaussian, 4).unwrap();
        assert!(r.iter().all(|v| v.abs() <= PI));
        assert!(sample_reverse_sde(&m, 20, 9, TorusPrior::Uniform, 4).is_err());
    }
}
