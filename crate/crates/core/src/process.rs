//! Forward processes, noise schedules and exact transitions.
//!
//! Internally both processes run in their own clock t: the OU process
//! dX = −X dt + √2 dW and Brownian motion dX = √2 dW (wrapped onto the torus
//! for the truncated variant). A schedule maps normalised time τ ∈ [0, 1] to t.

use crate::basis::Process;
use crate::error::{OismError, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Noise schedule over normalised time τ ∈ [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum Schedule {
    /// σ_τ = σ_min (σ_max/σ_min)^τ, internal time t = σ_τ²/2.
    #[serde(rename = "VE")]
    Ve { sigma_min: f64, sigma_max: f64 },
    /// t(τ) = β0 τ/2 + (β1 − β0) τ²/4.
    #[serde(rename = "VP")]
    Vp { beta0: f64, beta1: f64 },
}

/// α_τ, σ_τ and the internal time at one τ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Noise {
    pub alpha: f64,
    pub sigma: f64,
    pub t_internal: f64,
}

impl Schedule {
    pub fn ve(sigma_min: f64, sigma_max: f64) -> Self {
        Schedule::Ve {
            sigma_min,
            sigma_max,
        }
    }

    pub fn vp(beta0: f64, beta1: f64) -> Self {
        Schedule::Vp { beta0, beta1 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Ve {
                sigma_min,
                sigma_max,
            } => {
                if !(sigma_min > 0.0 && sigma_max > sigma_min && sigma_max.is_finite()) {
                    return Err(OismError::invalid(format!(
                        "VE schedule needs 0 < sigma_min < sigma_max, got ({sigma_min}, {sigma_max})"
                    )));
                }
            }
            Schedule::Vp { beta0, beta1 } => {
                if !(beta0 > 0.0 && beta1 > 0.0 && beta0.is_finite() && beta1.is_finite()) {
                    return Err(OismError::invalid(format!(
                        "VP schedule needs positive betas, got ({beta0}, {beta1})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Internal time t(τ); no range check.
    pub fn internal_time(&self, tau: f64) -> f64 {
        match *self {
            Schedule::Ve {
                sigma_min,
                sigma_max,
            } => {
                let s = sigma_min * (sigma_max / sigma_min).powf(tau);
                0.5 * s * s
            }
            Schedule::Vp { beta0, beta1 } => 0.5 * beta0 * tau + 0.25 * (beta1 - beta0) * tau * tau,
        }
    }

    /// dt/dτ.
    pub fn internal_rate(&self, tau: f64) -> f64 {
        match *self {
            Schedule::Ve {
                sigma_min,
                sigma_max,
            } => {
                let r = sigma_max / sigma_min;
                sigma_min * sigma_min * r.powf(2.0 * tau) * r.ln()
            }
            // β_τ / 2
            Schedule::Vp { beta0, beta1 } => 0.5 * (beta0 + tau * (beta1 - beta0)),
        }
    }

    /// The τ whose internal time equals `t`, if it lies in [0, 1].
    pub fn tau_for_internal_time(&self, t: f64) -> Option<f64> {
        let tau = match *self {
            Schedule::Ve {
                sigma_min,
                sigma_max,
            } => (2.0 * t / (sigma_min * sigma_min)).ln() / (2.0 * (sigma_max / sigma_min).ln()),
            Schedule::Vp { beta0, beta1 } => {
                let a = 0.25 * (beta1 - beta0);
                let b = 0.5 * beta0;
                if a.abs() < 1e-15 {
                    t / b
                } else {
                    (-b + (b * b + 4.0 * a * t).sqrt()) / (2.0 * a)
                }
            }
        };
        (tau.is_finite() && (0.0..=1.0).contains(&tau)).then_some(tau)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(OismError::invalid(format!("tau = {tau} outside [0, 1]")));
    }
    Ok(())
}

/// (α_τ, σ_τ, t) for the schedule at τ.
pub fn noise_at(schedule: &Schedule, tau: f64) -> Result<Noise> {
    check_tau(tau)?;
    let t = schedule.internal_time(tau);
    Ok(match *schedule {
        Schedule::Ve {
            sigma_min,
            sigma_max,
        } => Noise {
            alpha: 1.0,
            sigma: sigma_min * (sigma_max / sigma_min).powf(tau),
            t_internal: t,
        },
        Schedule::Vp { .. } => {
            let alpha = (-t).exp();
            Noise {
                alpha,
                sigma: (1.0 - alpha * alpha).max(0.0).sqrt(),
                t_internal: t,
            }
        }
    })
}

/// e^{λt}: the action of P_t on an eigenfunction with eigenvalue λ.
pub fn semigroup_eigen_factor(lambda: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(OismError::invalid(format!("semigroup time must be >= 0, got {t}")));
    }
    Ok((lambda * t).exp())
}

/// Process and dimension of the state space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProcessState {
    pub process: Process,
    pub dimension: usize,
}

/// Reduce one coordinate into [−π, π] by shifting with multiples of 2π.
pub fn wrap_angle(x: f64) -> f64 {
    if x.abs() <= PI {
        return x;
    }
    let y = x.rem_euclid(2.0 * PI);
    if y <= PI {
        y
    } else {
        y - 2.0 * PI
    }
}

pub fn wrap_point(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = wrap_angle(*v));
}

pub fn on_torus(x: &[f64]) -> bool {
    x.iter().all(|v| v.abs() <= PI)
}

/// Conditional mean scale and standard deviation of X_t given X_0 for the
/// process in its own clock.
pub fn transition_scales(process: Process, t: f64) -> (f64, f64) {
    match process {
        Process::Ou => {
            let a = (-t).exp();
            (a, (1.0 - a * a).max(0.0).sqrt())
        }
        Process::TruncatedBm => (1.0, (2.0 * t).sqrt()),
    }
}

/// Exact draw of X_t given X_0 = x0 at internal time t.
pub fn transition<R: Rng + ?Sized>(
    process: Process,
    x0: &[f64],
    t: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(OismError::invalid(format!("transition time must be >= 0, got {t}")));
    }
    if process == Process::TruncatedBm && !on_torus(x0) {
        return Err(OismError::Domain {
            row: 0,
            detail: format!("initial point {x0:?} outside [-pi, pi]^d"),
        });
    }
    let (a, s) = transition_scales(process, t);
    let mut out: Vec<f64> = x0
        .iter()
        .map(|&x| {
            let z: f64 = rng.sample(StandardNormal);
            a * x + s * z
        })
        .collect();
    if process == Process::TruncatedBm {
        wrap_point(&mut out);
    }
    Ok(out)
}

/// Exact draw from the forward process at normalised time τ.
pub fn sample_forward<R: Rng + ?Sized>(
    state: &ProcessState,
    schedule: &Schedule,
    x0: &[f64],
    tau: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_tau(tau)?;
    if x0.len() != state.dimension {
        return Err(OismError::invalid("initial point has the wrong dimension"));
    }
    if tau == 0.0 && state.process == Process::Ou {
        if let Schedule::Vp { .. } = schedule {
            return Ok(x0.to_vec());
        }
    }
    transition(state.process, x0, schedule.internal_time(tau), rng)
}

/// Draw from the invariant measure π.
pub fn sample_prior<R: Rng + ?Sized>(process: Process, dimension: usize, rng: &mut R) -> Vec<f64> {
    match process {
        Process::Ou => (0..dimension).map(|_| rng.sample(StandardNormal)).collect(),
        Process::TruncatedBm => (0..dimension).map(|_| rng.random_range(-PI..PI)).collect(),
    }
}

/// log π(x).
pub fn prior_log_density(process: Process, x: &[f64]) -> f64 {
    let d = x.len() as f64;
    match process {
        Process::Ou => -0.5 * d * (2.0 * PI).ln() - 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
        Process::TruncatedBm => -d * (2.0 * PI).ln(),
    }
}

/// ∇ log π(x).
pub fn prior_score(process: Process, x: &[f64], out: &mut [f64]) {
    match process {
        Process::Ou => out.iter_mut().zip(x).for_each(|(o, v)| *o = -v),
        Process::TruncatedBm => out.iter_mut().for_each(|o| *o = 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ve_start_noise() {
        let n = noise_at(&Schedule::ve(0.01, 50.0), 0.0).unwrap();
        assert!((n.sigma - 0.01).abs() < 1e-15);
        assert!((n.t_internal - 5e-5).abs() < 1e-18);
        assert_eq!(n.alpha, 1.0);
    }

    #[test]
    fn vp_end_time() {
        let n = noise_at(&Schedule::vp(0.1, 20.0), 1.0).unwrap();
        assert!((n.t_internal - 5.025).abs() < 1e-12);
        let n0 = noise_at(&Schedule::vp(0.1, 20.0), 0.0).unwrap();
        assert_eq!((n0.alpha, n0.sigma, n0.t_internal), (1.0, 0.0, 0.0));
    }

    #[test]
    fn tau_out_of_range() {
        assert!(noise_at(&Schedule::vp(0.1, 20.0), 1.5).is_err());
        assert!(noise_at(&Schedule::vp(0.1, 20.0), -0.1).is_err());
    }

    #[test]
    fn rate_matches_finite_difference() {
        for s in [Schedule::ve(0.01, 50.0), Schedule::vp(0.1, 20.0)] {
            for &tau in &[0.1, 0.5, 0.9] {
                let h = 1e-6;
                let fd = (s.internal_time(tau + h) - s.internal_time(tau - h)) / (2.0 * h);
                assert!((fd - s.internal_rate(tau)).abs() < 1e-6 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn inverse_time_map() {
        for s in [Schedule::ve(0.01, 50.0), Schedule::vp(0.1, 20.0)] {
            let tau = s.tau_for_internal_time(s.internal_time(0.37)).unwrap();
            assert!((tau - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_factor() {
        assert_eq!(semigroup_eigen_factor(0.0, 7.0).unwrap(), 1.0);
        assert_eq!(semigroup_eigen_factor(-1.0, 0.0).unwrap(), 1.0);
        assert!((semigroup_eigen_factor(-4.0, 0.5).unwrap() - (-2f64).exp()).abs() < 1e-16);
        assert!(semigroup_eigen_factor(-1.0, -0.1).is_err());
    }

    #[test]
    fn identity_at_tau_zero_vp() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let st = ProcessState {
            process: Process::Ou,
            dimension: 2,
        };
        let x = sample_forward(&st, &Schedule::vp(0.1, 20.0), &[0.3, -4.0], 0.0, &mut rng).unwrap();
        assert_eq!(x, vec![0.3, -4.0]);
    }

    #[test]
    fn wrapping_stays_on_torus() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = transition(Process::TruncatedBm, &[3.0, -3.1], 50.0, &mut rng).unwrap();
            assert!(on_torus(&x));
        }
        assert!(transition(Process::TruncatedBm, &[3.5], 1.0, &mut rng).is_err());
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn schedule_json_shape() {
        let s: Schedule = serde_json::from_str(r#"{"kind":"VE","sigma_min":0.01,"sigma_max":50.0}"#).unwrap();
        assert_eq!(s, Schedule::ve(0.01, 50.0));
        let v = serde_json::to_string(&Schedule::vp(0.1, 20.0)).unwrap();
        assert_eq!(v, r#"{"kind":"VP","beta0":0.1,"beta1":20.0}"#);
    }
}
