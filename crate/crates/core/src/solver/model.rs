use crate::basis::{EigenBasis, Process, Workspace};
use crate::error::{OismError, Result};
use crate::process::{on_torus, Schedule};
use crate::targets::DomainMap;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Per-node solve diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDiagnostic {
    pub tau: f64,
    pub t: f64,
    pub condition: f64,
    pub residual: f64,
    pub regularized: bool,
}

/// Basis, schedule and a τ-grid of solved coefficients. The score at (x, τ)
/// is Σ_k α̂_k(τ) ∇φ_k(x) with α̂ linearly interpolated between grid rows;
/// it approximates ∇log(ρ_t/π).
#[derive(Clone, Debug)]
pub struct ScoreModel {
    basis: EigenBasis,
    schedule: Schedule,
    grid: Vec<f64>,
    alphas: Array2<f64>,
    domain_map: DomainMap,
    diagnostics: Vec<GridDiagnostic>,
}

/// Score, energy and Laplacian of the model at one (x, τ).
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub score: Vec<f64>,
    pub energy: f64,
    pub laplacian: f64,
}

impl ScoreModel {
    pub fn new(
        basis: EigenBasis,
        schedule: Schedule,
        grid: Vec<f64>,
        alphas: Array2<f64>,
        domain_map: DomainMap,
        diagnostics: Vec<GridDiagnostic>,
    ) -> Result<Self> {
        schedule.validate()?;
        if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(OismError::invalid("grid must be strictly increasing with >= 2 nodes"));
        }
        if grid[0] < 0.0 || *grid.last().unwrap() != 1.0 {
            return Err(OismError::invalid("grid must lie in [0, 1] and end at 1"));
        }
        if alphas.dim() != (grid.len(), basis.n_coefficients()) {
            return Err(OismError::invalid(format!(
                "alphas have shape {:?}, expected ({}, {})",
                alphas.dim(),
                grid.len(),
                basis.n_coefficients()
            )));
        }
        if domain_map.dimension() != basis.dimension() {
            return Err(OismError::invalid("domain map dimension does not match the basis"));
        }
        if !diagnostics.is_empty() && diagnostics.len() != grid.len() {
            return Err(OismError::invalid("diagnostics must have one entry per grid node"));
        }
        Ok(ScoreModel {
            basis,
            schedule,
            grid,
            alphas,
            domain_map,
            diagnostics,
        })
    }

    /// Model whose coefficients vanish on the given grid: its flow is the
    /// identity and its density is the invariant measure.
    pub fn zero(basis: EigenBasis, schedule: Schedule, n_times: usize) -> Result<Self> {
        let grid = super::tau_grid(n_times.max(2));
        let alphas = Array2::zeros((grid.len(), basis.n_coefficients()));
        let d = basis.dimension();
        ScoreModel::new(basis, schedule, grid, alphas, DomainMap::identity(d), Vec::new())
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn process(&self) -> Process {
        self.basis.process()
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn alphas(&self) -> &Array2<f64> {
        &self.alphas
    }

    pub fn domain_map(&self) -> &DomainMap {
        &self.domain_map
    }

    pub fn set_domain_map(&mut self, map: DomainMap) -> Result<()> {
        if map.dimension() != self.dimension() {
            return Err(OismError::invalid("domain map dimension does not match the model"));
        }
        self.domain_map = map;
        Ok(())
    }

    pub fn diagnostics(&self) -> &[GridDiagnostic] {
        &self.diagnostics
    }

    pub fn tau_min(&self) -> f64 {
        self.grid[0]
    }

    /// Interpolated coefficients written into `out`.
    pub fn alpha_into(&self, tau: f64, out: &mut [f64]) -> Result<()> {
        let g = &self.grid;
        if !(tau >= g[0] && tau <= 1.0) {
            return Err(OismError::invalid(format!(
                "tau = {tau} outside the model grid [{}, 1]",
                g[0]
            )));
        }
        // index of the last node <= tau
        let j = g.partition_point(|&v| v <= tau).saturating_sub(1);
        if g[j] == tau || j + 1 == g.len() {
            out.iter_mut()
                .zip(self.alphas.row(j))
                .for_each(|(o, a)| *o = *a);
            return Ok(());
        }
        let w = (tau - g[j]) / (g[j + 1] - g[j]);
        let (r1, r2) = (self.alphas.row(j), self.alphas.row(j + 1));
        for ((o, a), b) in out.iter_mut().zip(r1).zip(r2) {
            *o = (1.0 - w) * a + w * b;
        }
        Ok(())
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        self.basis.check_point(x)?;
        if self.process() == Process::TruncatedBm && !on_torus(x) {
            return Err(OismError::Domain {
                row: 0,
                detail: format!("point {x:?} outside [-pi, pi]^d"),
            });
        }
        Ok(())
    }

    /// Score, energy and Laplacian at (x, τ) from a single basis evaluation.
    pub fn evaluate(&self, x: &[f64], tau: f64) -> Result<Evaluation> {
        self.check_domain(x)?;
        let alpha = alpha_at(self, tau)?;
        let mut ws = Workspace::new(&self.basis);
        let mut score = vec![0.0; self.dimension()];
        let (energy, laplacian) = self.basis.eval_weighted(x, &alpha, &mut ws, &mut score);
        Ok(Evaluation {
            score,
            energy,
            laplacian,
        })
    }

    pub fn score_eval(&self, x: &[f64], tau: f64) -> Result<Vec<f64>> {
        Ok(self.evaluate(x, tau)?.score)
    }

    pub fn energy_eval(&self, x: &[f64], tau: f64) -> Result<f64> {
        Ok(self.evaluate(x, tau)?.energy)
    }

    pub fn laplacian_eval(&self, x: &[f64], tau: f64) -> Result<f64> {
        Ok(self.evaluate(x, tau)?.laplacian)
    }
}

/// α̂(τ) by linear interpolation between bracketing grid rows.
pub fn alpha_at(model: &ScoreModel, tau: f64) -> Result<Vec<f64>> {
    let mut out = vec![0.0; model.basis.n_coefficients()];
    model.alpha_into(tau, &mut out)?;
    Ok(out)
}
