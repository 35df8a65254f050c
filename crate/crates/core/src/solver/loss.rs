use super::model::{alpha_at, ScoreModel};
use crate::basis::{EigenBasis, Process, Workspace};
use crate::error::{OismError, Result};
use crate::par;
use crate::process::{wrap_point, Schedule};
use crate::quadrature::{periodic_nodes, trapezoid};
use crate::targets::{
    mixture_logpdf, mixture_marginal, mixture_score, sample_mixture_points, wrapped_logpdf_and_score,
    GaussianMixture,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Ground truth at one noise level: the marginal density ρ_t and the relative
/// score ∇log(ρ_t/π).
pub trait ScoreReference: Sync {
    fn process(&self) -> Process;
    fn dimension(&self) -> usize;
    /// (log ρ_t(x), ∇log(ρ_t/π)(x)).
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>);
    /// Per-coordinate bounds holding essentially all mass (OU only).
    fn bounds(&self) -> Vec<(f64, f64)>;
    /// `n` independent draws from ρ_t.
    fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>>;
}

/// Gaussian-mixture ρ_0 pushed through the forward process to τ. On the
/// torus the marginal is the wrapped mixture.
#[derive(Clone, Debug)]
pub struct MixtureReference {
    marginal: GaussianMixture,
    process: Process,
}

impl MixtureReference {
    pub fn new(target: &GaussianMixture, process: Process, schedule: &Schedule, tau: f64) -> Result<Self> {
        Ok(MixtureReference {
            marginal: mixture_marginal(target, schedule, tau)?,
            process,
        })
    }

    pub fn marginal(&self) -> &GaussianMixture {
        &self.marginal
    }
}

impl ScoreReference for MixtureReference {
    fn process(&self) -> Process {
        self.process
    }

    fn dimension(&self) -> usize {
        self.marginal.dimension()
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self.process {
            Process::TruncatedBm => wrapped_logpdf_and_score(&self.marginal, x),
            Process::Ou => {
                let mut s = mixture_score(&self.marginal, x);
                s.iter_mut().zip(x).for_each(|(s, x)| *s += x);
                (mixture_logpdf(&self.marginal, x), s)
            }
        }
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let gm = &self.marginal;
        (0..gm.dimension())
            .map(|i| {
                (0..gm.n_components()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), j| {
                    let m = gm.mean(j)[i];
                    let s = gm.variance(j)[i].sqrt();
                    (lo.min(m - 12.0 * s), hi.max(m + 12.0 * s))
                })
            })
            .collect()
    }

    fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = sample_mixture_points(&self.marginal, n, &mut rng);
        if self.process == Process::TruncatedBm {
            pts.iter_mut().for_each(|p| wrap_point(p));
        }
        pts
    }
}

/// How the loss integral over ρ_t is discretised.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossQuadrature {
    /// Trapezoid nodes per coordinate in 1D and tensor grids in 2D
    /// (periodic on the torus); Monte Carlo beyond.
    Auto,
    Grid { nodes_per_dim: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

/// Quadrature nodes with ρ_t-weights and the reference relative score,
/// reusable across coefficient vectors.
#[derive(Clone, Debug)]
pub struct LossGrid {
    dimension: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    target: Vec<f64>,
}

const LOSS_CHUNK: usize = 256;

impl LossGrid {
    pub fn new(reference: &dyn ScoreReference, quadrature: LossQuadrature) -> Result<Self> {
        let d = reference.dimension();
        let quadrature = match quadrature {
            LossQuadrature::Auto if d == 1 => LossQuadrature::Grid { nodes_per_dim: 4096 },
            LossQuadrature::Auto if d == 2 => LossQuadrature::Grid { nodes_per_dim: 256 },
            LossQuadrature::Auto => LossQuadrature::MonteCarlo {
                samples: 100_000,
                seed: 0,
            },
            q => q,
        };
        let (points, base_weights, density_weighted): (Vec<Vec<f64>>, Vec<f64>, bool) = match quadrature {
            LossQuadrature::Grid { nodes_per_dim } => {
                if d > 3 {
                    return Err(OismError::Unsupported(format!(
                        "tensor quadrature in dimension {d}"
                    )));
                }
                if nodes_per_dim < 2 {
                    return Err(OismError::invalid("quadrature needs at least two nodes"));
                }
                let axes: Vec<(Vec<f64>, Vec<f64>)> = match reference.process() {
                    Process::TruncatedBm => (0..d)
                        .map(|_| {
                            let (x, h) = periodic_nodes(nodes_per_dim);
                            let w = vec![h; x.len()];
                            (x, w)
                        })
                        .collect(),
                    Process::Ou => reference
                        .bounds()
                        .into_iter()
                        .map(|(lo, hi)| trapezoid(lo, hi, nodes_per_dim))
                        .collect(),
                };
                let total = nodes_per_dim.pow(d as u32);
                let mut pts = Vec::with_capacity(total);
                let mut ws = Vec::with_capacity(total);
                for idx in 0..total {
                    let mut rem = idx;
                    let mut p = vec![0.0; d];
                    let mut w = 1.0;
                    for (i, axis) in axes.iter().enumerate() {
                        let k = rem % nodes_per_dim;
                        rem /= nodes_per_dim;
                        p[i] = axis.0[k];
                        w *= axis.1[k];
                    }
                    pts.push(p);
                    ws.push(w);
                }
                (pts, ws, false)
            }
            LossQuadrature::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(OismError::invalid("Monte Carlo loss needs samples"));
                }
                let pts = reference.sample(samples, seed);
                (pts, vec![1.0 / samples as f64; samples], true)
            }
            LossQuadrature::Auto => unreachable!(),
        };
        let evaluated = par::map_chunks(points.len(), LOSS_CHUNK, |r| {
            r.map(|i| reference.eval(&points[i])).collect::<Vec<_>>()
        });
        let mut weights = Vec::with_capacity(points.len());
        let mut target = Vec::with_capacity(points.len() * d);
        for ((lp, s), w) in evaluated.into_iter().flatten().zip(&base_weights) {
            weights.push(if density_weighted { *w } else { w * lp.exp() });
            target.extend(s);
        }
        Ok(LossGrid {
            dimension: d,
            points: points.into_iter().flatten().collect(),
            weights,
            target,
        })
    }

    /// ∫‖Σ_k α_k ∇φ_k − ∇log(ρ_t/π)‖² dρ_t for the given coefficients.
    pub fn loss(&self, basis: &EigenBasis, alpha: &[f64]) -> Result<f64> {
        if basis.dimension() != self.dimension {
            return Err(OismError::invalid("loss grid and basis dimensions differ"));
        }
        if alpha.len() != basis.n_coefficients() {
            return Err(OismError::invalid("coefficient vector does not match the basis"));
        }
        let d = self.dimension;
        let n = self.weights.len();
        let parts = par::map_chunks(n, LOSS_CHUNK, |r| {
            let mut ws = Workspace::new(basis);
            let mut g = vec![0.0; d];
            let mut acc = 0.0;
            for i in r {
                let x = &self.points[i * d..(i + 1) * d];
                basis.eval_weighted(x, alpha, &mut ws, &mut g);
                let err: f64 = g
                    .iter()
                    .zip(&self.target[i * d..(i + 1) * d])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                acc += self.weights[i] * err;
            }
            acc
        });
        Ok(parts.into_iter().sum())
    }
}

/// Score-matching loss of the model at τ against a reference marginal.
pub fn sm_loss(
    model: &ScoreModel,
    tau: f64,
    reference: &dyn ScoreReference,
    quadrature: LossQuadrature,
) -> Result<f64> {
    if reference.process() != model.process() {
        return Err(OismError::Unsupported(
            "reference target belongs to a different forward process".into(),
        ));
    }
    let alpha = alpha_at(model, tau)?;
    LossGrid::new(reference, quadrature)?.loss(model.basis(), &alpha)
}
