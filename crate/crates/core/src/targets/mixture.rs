use crate::error::{OismError, Result};
use crate::process::{noise_at, Schedule};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};

/// Gaussian mixture with diagonal covariances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, variances: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != variances.len() {
            return Err(OismError::invalid("mixture needs matching, nonempty component lists"));
        }
        let d = means[0].len();
        if d == 0 || means.iter().chain(&variances).any(|v| v.len() != d) {
            return Err(OismError::invalid("mixture components must share one positive dimension"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(OismError::invalid("mixture weights must be nonnegative and sum to 1"));
        }
        if variances.iter().flatten().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(OismError::invalid("mixture variances must be positive"));
        }
        if means.iter().flatten().any(|m| !m.is_finite()) {
            return Err(OismError::invalid("mixture means must be finite"));
        }
        Ok(GaussianMixture {
            weights,
            means,
            variances,
        })
    }

    /// Single Gaussian N(mean, diag(variance)).
    pub fn gaussian(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        GaussianMixture::new(vec![1.0], vec![mean], vec![variance])
    }

    pub fn standard_normal(dimension: usize) -> Self {
        GaussianMixture::gaussian(vec![0.0; dimension], vec![1.0; dimension])
            .expect("valid standard normal")
    }

    pub fn dimension(&self) -> usize {
        self.means[0].len()
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self, j: usize) -> &[f64] {
        &self.means[j]
    }

    pub fn variance(&self, j: usize) -> &[f64] {
        &self.variances[j]
    }

    fn component_log_pdfs(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for j in 0..self.n_components() {
            let mut lp = self.weights[j].ln();
            for ((xi, m), v) in x.iter().zip(&self.means[j]).zip(&self.variances[j]) {
                let z = xi - m;
                lp -= 0.5 * (z * z / v + (2.0 * PI * v).ln());
            }
            out.push(lp);
        }
    }
}

/// ½N(0, 1) + (1/10) Σ_{j=0}^{4} N(j/2 − 1, 1/100).
pub fn bart_simpson() -> GaussianMixture {
    let mut weights = vec![0.5];
    let mut means = vec![vec![0.0]];
    let mut variances = vec![vec![1.0]];
    for j in 0..5 {
        weights.push(0.1);
        means.push(vec![j as f64 / 2.0 - 1.0]);
        variances.push(vec![0.01]);
    }
    GaussianMixture::new(weights, means, variances).expect("valid mixture")
}

/// Law of α_τ X_0 + σ_τ Z: means scaled by α, variances α²s² + σ².
pub fn mixture_marginal(gm: &GaussianMixture, schedule: &Schedule, tau: f64) -> Result<GaussianMixture> {
    let noise = noise_at(schedule, tau)?;
    let (a, s2) = (noise.alpha, noise.sigma * noise.sigma);
    Ok(GaussianMixture {
        weights: gm.weights.clone(),
        means: gm
            .means
            .iter()
            .map(|m| m.iter().map(|v| a * v).collect())
            .collect(),
        variances: gm
            .variances
            .iter()
            .map(|v| v.iter().map(|v| a * a * v + s2).collect())
            .collect(),
    })
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn mixture_logpdf(gm: &GaussianMixture, x: &[f64]) -> f64 {
    let mut lp = Vec::with_capacity(gm.n_components());
    gm.component_log_pdfs(x, &mut lp);
    log_sum_exp(&lp)
}

/// ∇ log density: responsibility-weighted component scores.
pub fn mixture_score(gm: &GaussianMixture, x: &[f64]) -> Vec<f64> {
    let mut lp = Vec::with_capacity(gm.n_components());
    gm.component_log_pdfs(x, &mut lp);
    let total = log_sum_exp(&lp);
    let mut out = vec![0.0; x.len()];
    for j in 0..gm.n_components() {
        let r = (lp[j] - total).exp();
        for i in 0..x.len() {
            out[i] -= r * (x[i] - gm.means[j][i]) / gm.variances[j][i];
        }
    }
    out
}

/// Marginal CDF of coordinate `i`.
pub fn mixture_cdf(gm: &GaussianMixture, i: usize, x: f64) -> f64 {
    (0..gm.n_components())
        .map(|j| {
            let z = (x - gm.means[j][i]) / gm.variances[j][i].sqrt();
            gm.weights[j] * 0.5 * erfc(-z / SQRT_2)
        })
        .sum()
}

/// CDF on [−π, π] of coordinate `i` of the mixture wrapped onto the torus.
pub fn wrapped_mixture_cdf(gm: &GaussianMixture, i: usize, x: f64) -> f64 {
    let sd = gm
        .variances
        .iter()
        .map(|v| v[i].sqrt())
        .fold(0.0, f64::max);
    let reach = gm.means.iter().map(|m| m[i].abs()).fold(0.0, f64::max);
    let k = ((reach + 10.0 * sd) / (2.0 * PI)).ceil() as i64 + 1;
    (-k..=k)
        .map(|n| {
            let shift = 2.0 * PI * n as f64;
            mixture_cdf(gm, i, x + shift) - mixture_cdf(gm, i, -PI + shift)
        })
        .sum()
}

/// Wrapped-onto-the-torus density and score via image sums.
pub fn wrapped_logpdf_and_score(gm: &GaussianMixture, x: &[f64]) -> (f64, Vec<f64>) {
    let d = x.len();
    let sd = gm
        .variances
        .iter()
        .flatten()
        .map(|v| v.sqrt())
        .fold(0.0, f64::max);
    let reach = gm.means.iter().flatten().map(|m| m.abs()).fold(0.0, f64::max);
    let k = ((reach + 10.0 * sd) / (2.0 * PI)).ceil() as i64 + 1;
    let width = (2 * k + 1) as usize;
    let n_images = width.pow(d as u32);
    let mut logs = Vec::with_capacity(n_images * gm.n_components());
    let mut grads: Vec<Vec<f64>> = Vec::with_capacity(logs.capacity());
    let mut shifted = vec![0.0; d];
    let mut lp = Vec::new();
    for img in 0..n_images {
        let mut rem = img;
        for i in 0..d {
            let n = (rem % width) as i64 - k;
            rem /= width;
            shifted[i] = x[i] + 2.0 * PI * n as f64;
        }
        gm.component_log_pdfs(&shifted, &mut lp);
        for j in 0..gm.n_components() {
            logs.push(lp[j]);
            grads.push(
                (0..d)
                    .map(|i| -(shifted[i] - gm.means[j][i]) / gm.variances[j][i])
                    .collect(),
            );
        }
    }
    let total = log_sum_exp(&logs);
    let mut score = vec![0.0; d];
    for (l, g) in logs.iter().zip(&grads) {
        let r = (l - total).exp();
        for i in 0..d {
            score[i] += r * g[i];
        }
    }
    (total, score)
}

/// Independent draws from the mixture, one row per sample.
pub fn sample_mixture_points<R: Rng + ?Sized>(gm: &GaussianMixture, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut j = gm.n_components() - 1;
            for (c, w) in gm.weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    j = c;
                    break;
                }
            }
            gm.means[j]
                .iter()
                .zip(&gm.variances[j])
                .map(|(m, v)| {
                    let z: f64 = rng.sample(StandardNormal);
                    m + v.sqrt() * z
                })
                .collect()
        })
        .collect()
}
