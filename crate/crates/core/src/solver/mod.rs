//! The time-indexed quadratic score-matching system, its preconditioned
//! solve, grid presolve and the resulting score model.
//!
//! At internal time t the loss of f = Σ_k α_k φ_k is αᵀA_tα + 2b_tᵀα + C_t
//! with
//!
//! A_t^{kℓ} = Σ_h ((λ_h − λ_k − λ_ℓ)/2) e^{λ_h t} β_h^{(k,ℓ)} θ_h,
//! b_t^k = λ_k e^{λ_k t} θ_k,
//!
//! so the minimiser is α̂ = −A_t⁻¹ b_t.

mod linalg;
mod loss;
mod model;

pub use loss::{sm_loss, LossGrid, LossQuadrature, MixtureReference, ScoreReference};
pub use model::{alpha_at, Evaluation, GridDiagnostic, ScoreModel};

use crate::basis::{EigenBasis, ProductTable};
use crate::error::{OismError, Result};
use crate::moments::MomentVector;
use crate::par;
use crate::process::Schedule;
use crate::targets::DomainMap;
use linalg::{condition_estimate, Factor};
use nalgebra::{DMatrix, DVector};

/// Condition estimates above this trigger regularisation, then failure.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Tikhonov weight of the εΛ fallback.
pub const TIKHONOV_EPS: f64 = 1e-8;
pub const DEFAULT_GRID: usize = 1000;

/// A_t, b_t and Λ = diag(−λ_k) over the non-constant basis functions.
#[derive(Clone, Debug)]
pub struct QuadraticSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub lambda: DVector<f64>,
    pub t: f64,
}

/// Result of one solve.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub alpha: Vec<f64>,
    /// Condition estimate of the preconditioned matrix Λ^{−½}AΛ^{−½}.
    pub condition: f64,
    /// ‖Λ⁻¹(Aα + b)‖_∞ against the unregularised system.
    pub residual: f64,
    pub regularized: bool,
}

fn check_moments(basis: &EigenBasis, moments: &MomentVector, needed: usize) -> Result<()> {
    if moments.len() < needed {
        return Err(OismError::Capacity {
            what: "moment vector shorter than the basis it must cover".into(),
            required: needed,
            available: moments.len(),
        });
    }
    if basis.n_coefficients() == 0 {
        return Err(OismError::invalid("basis has no non-constant functions"));
    }
    Ok(())
}

/// b_t^k = λ_k e^{λ_k t} θ_k for the non-constant basis functions.
pub fn assemble_b(basis: &EigenBasis, moments: &MomentVector, t: f64) -> Result<Vec<f64>> {
    check_moments(basis, moments, basis.len())?;
    Ok(basis.functions()[1..]
        .iter()
        .zip(&moments.theta[1..])
        .map(|(f, th)| f.eigenvalue * (f.eigenvalue * t).exp() * th)
        .collect())
}

/// A_t over the non-constant basis functions, symmetrised.
pub fn assemble_a(
    basis: &EigenBasis,
    table: &ProductTable,
    moments: &MomentVector,
    t: f64,
) -> Result<DMatrix<f64>> {
    check_moments(basis, moments, basis.extended().len())?;
    if table.size() != basis.len() {
        return Err(OismError::Capacity {
            what: "product table does not cover the basis".into(),
            required: basis.len(),
            available: table.size(),
        });
    }
    let ext = basis.extended();
    // e^{λ_h t} θ_h
    let decayed: Vec<f64> = ext
        .iter()
        .zip(&moments.theta)
        .map(|(f, th)| (f.eigenvalue * t).exp() * th)
        .collect();
    let n = basis.n_coefficients();
    let mut a = DMatrix::zeros(n, n);
    for k in 1..=n {
        let lk = ext[k].eigenvalue;
        for l in k..=n {
            let Some(terms) = table.get(k, l) else {
                continue;
            };
            let ll = ext[l].eigenvalue;
            let v: f64 = terms
                .iter()
                .map(|&(h, beta)| 0.5 * (ext[h].eigenvalue - lk - ll) * beta * decayed[h])
                .sum();
            a[(k - 1, l - 1)] = v;
            a[(l - 1, k - 1)] = v;
        }
    }
    Ok(a)
}

pub fn assemble(
    basis: &EigenBasis,
    table: &ProductTable,
    moments: &MomentVector,
    t: f64,
) -> Result<QuadraticSystem> {
    let a = assemble_a(basis, table, moments, t)?;
    let b = DVector::from_vec(assemble_b(basis, moments, t)?);
    let lambda = DVector::from_iterator(
        basis.n_coefficients(),
        basis.eigenvalues().into_iter().map(|l| -l),
    );
    Ok(QuadraticSystem { a, b, lambda, t })
}

impl QuadraticSystem {
    /// αᵀAα + 2bᵀα.
    pub fn objective(&self, alpha: &[f64]) -> f64 {
        let x = DVector::from_column_slice(alpha);
        (x.transpose() * &self.a * &x)[(0, 0)] + 2.0 * self.b.dot(&x)
    }

    /// ‖Λ⁻¹(Aα + b)‖_∞.
    pub fn residual(&self, alpha: &[f64]) -> f64 {
        let x = DVector::from_column_slice(alpha);
        let r = &self.a * x + &self.b;
        r.iter()
            .zip(self.lambda.iter())
            .map(|(r, l)| (r / l).abs())
            .fold(0.0, f64::max)
    }
}

/// Minimiser α̂ = −A⁻¹b of αᵀAα + 2bᵀα via the symmetric preconditioning
/// Λ^{−½}AΛ^{−½}.
pub fn solve_coefficients(system: &QuadraticSystem) -> Result<Solution> {
    let n = system.b.len();
    if system.a.nrows() != n || system.a.ncols() != n || system.lambda.len() != n {
        return Err(OismError::invalid("quadratic system has inconsistent shapes"));
    }
    if system.lambda.iter().any(|l| !(*l > 0.0)) {
        return Err(OismError::invalid("preconditioner needs strictly negative eigenvalues"));
    }
    let d_inv: DVector<f64> = system.lambda.map(|l| 1.0 / l.sqrt());
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = 0.5 * (system.a[(i, j)] + system.a[(j, i)]) * d_inv[i] * d_inv[j];
        }
    }
    let rhs = -system.b.component_mul(&d_inv);
    let attempt = |m: &DMatrix<f64>| -> Option<(DVector<f64>, f64)> {
        let f = Factor::new(m)?;
        let cond = condition_estimate(m, &f);
        let y = f.solve(&rhs)?;
        Some((y, cond))
    };
    let mut regularized = false;
    let mut result = attempt(&m).filter(|(_, c)| c.is_finite() && *c <= CONDITION_LIMIT);
    let mut worst = f64::INFINITY;
    if result.is_none() {
        regularized = true;
        let mut reg = m.clone();
        for i in 0..n {
            reg[(i, i)] += TIKHONOV_EPS;
        }
        match attempt(&reg) {
            Some((y, c)) if c.is_finite() && c <= CONDITION_LIMIT => result = Some((y, c)),
            Some((_, c)) => worst = c,
            None => {}
        }
    }
    let Some((y, condition)) = result else {
        return Err(OismError::IllConditioned {
            t: system.t,
            estimate: worst,
        });
    };
    let alpha: Vec<f64> = y.component_mul(&d_inv).iter().copied().collect();
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(OismError::IllConditioned {
            t: system.t,
            estimate: f64::INFINITY,
        });
    }
    let residual = system.residual(&alpha);
    Ok(Solution {
        alpha,
        condition,
        residual,
        regularized,
    })
}

/// Evenly spaced τ_i = i/(n − 1).
pub fn tau_grid(n_times: usize) -> Vec<f64> {
    let denom = (n_times - 1) as f64;
    (0..n_times).map(|i| i as f64 / denom).collect()
}

/// Assemble and solve at one τ.
pub fn presolve_at(
    basis: &EigenBasis,
    table: &ProductTable,
    moments: &MomentVector,
    schedule: &Schedule,
    tau: f64,
) -> Result<Solution> {
    let t = schedule.internal_time(tau);
    assemble(basis, table, moments, t)
        .and_then(|s| solve_coefficients(&s))
        .map_err(|e| OismError::AtTau {
            tau,
            source: Box::new(e),
        })
}

/// Solve on `n_times` evenly spaced τ ∈ [0, 1] and package the score model.
pub fn presolve_grid(
    basis: &EigenBasis,
    table: &ProductTable,
    moments: &MomentVector,
    schedule: &Schedule,
    n_times: usize,
) -> Result<ScoreModel> {
    if n_times < 2 {
        return Err(OismError::invalid("presolve grid needs at least two nodes"));
    }
    schedule.validate()?;
    let grid = tau_grid(n_times);
    let solutions = par::try_map_range(n_times, |i| {
        presolve_at(basis, table, moments, schedule, grid[i])
    })?;
    let n = basis.n_coefficients();
    let mut alphas = ndarray::Array2::zeros((n_times, n));
    let mut diagnostics = Vec::with_capacity(n_times);
    for (i, s) in solutions.into_iter().enumerate() {
        alphas.row_mut(i).assign(&ndarray::ArrayView1::from(&s.alpha));
        diagnostics.push(GridDiagnostic {
            tau: grid[i],
            t: schedule.internal_time(grid[i]),
            condition: s.condition,
            residual: s.residual,
            regularized: s.regularized,
        });
    }
    ScoreModel::new(
        basis.clone(),
        *schedule,
        grid,
        alphas,
        DomainMap::identity(basis.dimension()),
        diagnostics,
    )
}
