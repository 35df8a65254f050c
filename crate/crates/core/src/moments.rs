//! Eigenfunction moments of the data distribution: sample means with their
//! sampling variances, modulation shrinkage, and closed-form moments for
//! Gaussian mixtures.

use crate::basis::{EigenBasis, FunctionKind, Process, Workspace};
use crate::error::{OismError, Result};
use crate::par;
use crate::quadrature::gauss_hermite;
use crate::targets::GaussianMixture;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

const CHUNK_ROWS: usize = 512;

/// Moment estimates over the extended basis (index 0 is the constant).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub theta_hat: Vec<f64>,
    pub var_hat: Vec<f64>,
    pub gamma: Vec<f64>,
    pub theta: Vec<f64>,
    pub n_samples: usize,
}

/// Moment estimator selected for a fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Shrinkage {
    None,
    #[default]
    Modulation,
}

impl MomentVector {
    /// Exact moments: zero variance, no shrinkage.
    pub fn exact(theta: Vec<f64>) -> Self {
        let n = theta.len();
        MomentVector {
            theta_hat: theta.clone(),
            var_hat: vec![0.0; n],
            gamma: vec![1.0; n],
            theta,
            n_samples: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Moments of the invariant measure: θ_k = δ_{k0}.
    pub fn invariant(len: usize) -> Self {
        let mut theta = vec![0.0; len];
        if len > 0 {
            theta[0] = 1.0;
        }
        MomentVector::exact(theta)
    }

    /// Check that every vector has the same length and the invariants hold.
    pub fn validate(&self) -> Result<()> {
        let n = self.theta.len();
        if self.theta_hat.len() != n || self.var_hat.len() != n || self.gamma.len() != n {
            return Err(OismError::invalid("moment vectors have inconsistent lengths"));
        }
        if self.var_hat.iter().any(|v| !(*v >= 0.0)) {
            return Err(OismError::invalid("moment variances must be nonnegative"));
        }
        if self.gamma.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return Err(OismError::invalid("shrinkage weights must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone)]
struct Partial {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Partial {
    fn merge(mut self, other: &Partial) -> Partial {
        if other.count == 0.0 {
            return self;
        }
        let n = self.count + other.count;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * other.count / n;
            self.m2[i] += other.m2[i] + delta * delta * self.count * other.count / n;
        }
        self.count = n;
        self
    }
}

/// Sample means θ̂_k of every extended-basis function over the rows of
/// `data`, with σ̂_k² = (1/N²) Σ_m (φ_k(x_m) − θ̂_k)². Shrinkage weights start
/// at 1.
///
/// Rows are reduced in fixed chunks merged in order, so the result does not
/// depend on the worker count.
pub fn sample_moments(basis: &EigenBasis, data: &Array2<f64>) -> Result<MomentVector> {
    let n = data.nrows();
    if n == 0 {
        return Err(OismError::invalid("moment estimation needs at least one data row"));
    }
    if data.ncols() != basis.dimension() {
        return Err(OismError::invalid(format!(
            "data has {} columns, basis dimension is {}",
            data.ncols(),
            basis.dimension()
        )));
    }
    for (row, x) in data.outer_iter().enumerate() {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(OismError::Domain {
                row,
                detail: "non-finite coordinate".into(),
            });
        }
        if basis.process() == Process::TruncatedBm && x.iter().any(|v| v.abs() > PI) {
            return Err(OismError::Domain {
                row,
                detail: format!("point {:?} lies outside [-pi, pi]^d", x.to_vec()),
            });
        }
    }
    let width = basis.extended().len();
    let partials = par::map_chunks(n, CHUNK_ROWS, |rows| {
        let mut ws = Workspace::new(basis);
        let mut vals = vec![0.0; width];
        let mut p = Partial {
            count: 0.0,
            mean: vec![0.0; width],
            m2: vec![0.0; width],
        };
        let mut x = vec![0.0; basis.dimension()];
        for r in rows {
            x.iter_mut().zip(data.row(r)).for_each(|(a, b)| *a = *b);
            basis.eval_extended_values(&x, &mut ws, &mut vals);
            p.count += 1.0;
            for i in 0..width {
                let delta = vals[i] - p.mean[i];
                p.mean[i] += delta / p.count;
                p.m2[i] += delta * (vals[i] - p.mean[i]);
            }
        }
        p
    });
    let total = partials
        .iter()
        .skip(1)
        .fold(partials[0].clone(), |acc, p| acc.merge(p));
    let nf = n as f64;
    let mut theta_hat = total.mean;
    let mut var_hat: Vec<f64> = total.m2.iter().map(|m| m.max(0.0) / (nf * nf)).collect();
    theta_hat[0] = 1.0;
    var_hat[0] = 0.0;
    Ok(MomentVector {
        theta: theta_hat.clone(),
        gamma: vec![1.0; width],
        theta_hat,
        var_hat,
        n_samples: n,
    })
}

/// Minimiser of γ²σ̂² + (1 − γ)² max(θ̂² − σ̂², 0) over γ ∈ [0, 1].
pub fn modulation_weight(theta_hat: f64, var_hat: f64) -> f64 {
    let c = (theta_hat * theta_hat - var_hat).max(0.0);
    if var_hat + c == 0.0 {
        0.0
    } else {
        c / (var_hat + c)
    }
}

/// Empirical modulation risk Σ_k γ_k²σ̂_k² + (1 − γ_k)² max(θ̂_k² − σ̂_k², 0).
pub fn modulation_risk(theta_hat: &[f64], var_hat: &[f64], gamma: &[f64]) -> f64 {
    theta_hat
        .iter()
        .zip(var_hat)
        .zip(gamma)
        .map(|((t, v), g)| g * g * v + (1.0 - g) * (1.0 - g) * (t * t - v).max(0.0))
        .sum()
}

/// Modulation shrinkage of every non-constant moment.
pub fn modulation_shrink(m: &MomentVector) -> MomentVector {
    modulation_shrink_prefix(m, m.len())
}

/// Modulation shrinkage of entries 1..len; entries beyond `len` keep γ = 1.
pub fn modulation_shrink_prefix(m: &MomentVector, len: usize) -> MomentVector {
    let mut out = m.clone();
    for k in 1..len.min(m.len()) {
        let g = modulation_weight(m.theta_hat[k], m.var_hat[k]);
        out.gamma[k] = g;
        out.theta[k] = g * m.theta_hat[k];
    }
    out.gamma[0] = 1.0;
    out.theta[0] = m.theta_hat[0];
    out
}

/// Apply the selected estimator. With `shrink_extended` false only the basis
/// functions themselves are shrunk.
pub fn apply_shrinkage(
    m: &MomentVector,
    mode: Shrinkage,
    basis: &EigenBasis,
    shrink_extended: bool,
) -> MomentVector {
    match mode {
        Shrinkage::None => m.clone(),
        Shrinkage::Modulation if shrink_extended => modulation_shrink(m),
        Shrinkage::Modulation => modulation_shrink_prefix(m, basis.len()),
    }
}

/// Closed-form moments of a Gaussian mixture over the extended basis.
///
/// Trig functions use the characteristic function (the functions are
/// 2π-periodic, so the moments of the wrapped mixture coincide). Hermite
/// functions use a 200-node Gauss–Hermite rule per component and coordinate.
pub fn analytic_moments(target: &GaussianMixture, basis: &EigenBasis) -> Result<MomentVector> {
    if target.dimension() != basis.dimension() {
        return Err(OismError::invalid(format!(
            "mixture dimension {} does not match basis dimension {}",
            target.dimension(),
            basis.dimension()
        )));
    }
    let gh = match basis.process() {
        Process::Ou => Some(gauss_hermite(200)),
        Process::TruncatedBm => None,
    };
    let theta = basis
        .extended()
        .iter()
        .map(|f| match f.kind {
            FunctionKind::Constant => Ok(1.0),
            FunctionKind::Cos | FunctionKind::Sin => Ok((0..target.n_components())
                .map(|j| {
                    let m = target.mean(j);
                    let v = target.variance(j);
                    let phase: f64 = f.index.iter().zip(m).map(|(&k, &mu)| k as f64 * mu).sum();
                    let quad: f64 = f
                        .index
                        .iter()
                        .zip(v)
                        .map(|(&k, &s2)| (k as f64) * (k as f64) * s2)
                        .sum();
                    let trig = if f.kind == FunctionKind::Cos {
                        phase.cos()
                    } else {
                        phase.sin()
                    };
                    target.weights()[j] * SQRT_2 * trig * (-0.5 * quad).exp()
                })
                .sum()),
            FunctionKind::Hermite => {
                let (nodes, weights) = gh.as_ref().expect("hermite basis implies OU");
                Ok((0..target.n_components())
                    .map(|j| {
                        let m = target.mean(j);
                        let v = target.variance(j);
                        let per_coord: f64 = f
                            .index
                            .iter()
                            .enumerate()
                            .filter(|(_, &n)| n != 0)
                            .map(|(i, &n)| {
                                let sd = v[i].sqrt();
                                let mut vals = vec![0.0; n as usize + 1];
                                nodes
                                    .iter()
                                    .zip(weights)
                                    .map(|(z, w)| {
                                        crate::basis::hermite_fill(m[i] + sd * z, &mut vals);
                                        w * vals[n as usize]
                                    })
                                    .sum::<f64>()
                            })
                            .product();
                        target.weights()[j] * per_coord
                    })
                    .sum())
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MomentVector::exact(theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{hermite_univariate_basis, trig_basis_1d};
    use crate::targets::bart_simpson;
    use ndarray::array;

    #[test]
    fn two_point_dataset() {
        let b = hermite_univariate_basis(1, 1).unwrap();
        let m = sample_moments(&b, &array![[-1.0], [1.0]]).unwrap();
        assert_eq!(m.theta_hat[0], 1.0);
        assert_eq!(m.var_hat[0], 0.0);
        assert!(m.theta_hat[1].abs() < 1e-15);
        assert!((m.var_hat[1] - 0.5).abs() < 1e-15);
        assert!(m.gamma.iter().all(|&g| g == 1.0));
    }

    #[test]
    fn empty_and_off_torus_data_rejected() {
        let b = trig_basis_1d(2).unwrap();
        assert!(sample_moments(&b, &Array2::zeros((0, 1))).is_err());
        match sample_moments(&b, &array![[0.0], [4.0]]) {
            Err(OismError::Domain { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn weight_cases() {
        assert_eq!(modulation_weight(0.1, 0.02), 0.0);
        assert_eq!(modulation_weight(0.5, 0.0), 1.0);
        assert_eq!(modulation_weight(0.0, 0.0), 0.0);
        assert!((modulation_weight(2f64.sqrt(), 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shrink_keeps_constant() {
        let mut m = MomentVector::exact(vec![1.0, 0.1, 0.5]);
        m.var_hat = vec![0.0, 0.05, 0.01];
        let s = modulation_shrink(&m);
        assert_eq!((s.theta[0], s.gamma[0], s.var_hat[0]), (1.0, 1.0, 0.0));
        assert_eq!(s.gamma[1], 0.0);
        for k in 0..3 {
            assert_eq!(s.theta[k], s.gamma[k] * s.theta_hat[k]);
        }
        let p = modulation_shrink_prefix(&m, 2);
        assert_eq!(p.gamma[2], 1.0);
    }

    #[test]
    fn bart_simpson_first_cosine() {
        let b = trig_basis_1d(3).unwrap();
        let m = analytic_moments(&bart_simpson(), &b).unwrap();
        let i = b.position(FunctionKind::Cos, &[1]).unwrap();
        let expected = SQRT_2
            * (0.5 * (-0.5f64).exp()
                + 0.1 * (-0.005f64).exp() * (2.0 * 1f64.cos() + 2.0 * 0.5f64.cos() + 1.0));
        assert!((m.theta[i] - expected).abs() < 1e-14);
        assert!((m.theta[i] - 0.9687).abs() < 1e-3);
        for (f, t) in b.extended().iter().zip(&m.theta) {
            if f.kind == FunctionKind::Sin {
                assert!(t.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn standard_normal_is_orthogonal_to_hermite() {
        let b = hermite_univariate_basis(2, 5).unwrap();
        let m = analytic_moments(&GaussianMixture::standard_normal(2), &b).unwrap();
        assert_eq!(m.theta[0], 1.0);
        assert!(m.theta[1..].iter().all(|t| t.abs() < 1e-12));
    }
}
