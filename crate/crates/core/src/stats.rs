//! Goodness-of-fit and comparison statistics used to validate samplers.

use crate::par;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

/// Kolmogorov distribution tail Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_test<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> (f64, f64) {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    (d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d))
}

/// CDF of Uniform[−π, π].
pub fn uniform_torus_cdf(x: f64) -> f64 {
    ((x + std::f64::consts::PI) / (2.0 * std::f64::consts::PI)).clamp(0.0, 1.0)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Result of a two-sample energy-distance permutation test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyTest {
    pub statistic: f64,
    pub p_value: f64,
    /// Permutation quantile at 1 − level, i.e. the rejection threshold.
    pub threshold: f64,
}

fn energy_from_labels(d: &[f64], n: usize, first: &[bool], nx: usize) -> f64 {
    let ny = n - nx;
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let row = &d[i * n..(i + 1) * n];
        for j in (i + 1)..n {
            match (first[i], first[j]) {
                (true, true) => xx += row[j],
                (false, false) => yy += row[j],
                _ => xy += row[j],
            }
        }
    }
    let nx = nx as f64;
    let ny = ny as f64;
    2.0 * xy / (nx * ny) - 2.0 * xx / (nx * nx) - 2.0 * yy / (ny * ny)
}

/// Energy distance 2E|X−Y| − E|X−X′| − E|Y−Y′| between the rows of `x` and
/// `y`, with a label-permutation null distribution.
pub fn energy_test(x: &Array2<f64>, y: &Array2<f64>, permutations: usize, level: f64, seed: u64) -> EnergyTest {
    let nx = x.nrows();
    let n = nx + y.nrows();
    let pooled: Vec<Vec<f64>> = x.outer_iter().chain(y.outer_iter()).map(|r| r.to_vec()).collect();
    let rows = par::map_range(n, |i| (0..n).map(|j| dist(&pooled[i], &pooled[j])).collect::<Vec<f64>>());
    let d: Vec<f64> = rows.into_iter().flatten().collect();
    let labels: Vec<bool> = (0..n).map(|i| i < nx).collect();
    let statistic = energy_from_labels(&d, n, &labels, nx);
    let null = par::map_range(permutations, |p| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(p as u64);
        let mut l = labels.clone();
        l.shuffle(&mut rng);
        energy_from_labels(&d, n, &l, nx)
    });
    let exceed = null.iter().filter(|&&v| v >= statistic).count();
    let mut sorted = null.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let idx = (((1.0 - level) * permutations as f64).ceil() as usize).min(permutations.saturating_sub(1));
    EnergyTest {
        statistic,
        p_value: (1 + exceed) as f64 / (1 + permutations) as f64,
        threshold: sorted.get(idx).copied().unwrap_or(f64::INFINITY),
    }
}

/// One-sided sign test: P(at least `positive` successes out of the
/// non-tied pairs) under a fair coin.
pub fn sign_test_upper(differences: &[f64]) -> f64 {
    let positive = differences.iter().filter(|&&d| d > 0.0).count() as u64;
    let n = differences.iter().filter(|&&d| d != 0.0).count() as u64;
    if n == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    if positive == 0 {
        1.0
    } else {
        1.0 - b.cdf(positive - 1)
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

pub fn standard_error(v: &[f64]) -> f64 {
    (variance(v) / v.len() as f64).sqrt()
}
