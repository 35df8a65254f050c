//! End-to-end fitting and the shrinkage loss study.

use crate::basis::{trig_basis_1d, BasisSpec, EigenBasis, Process, ProductTable};
use crate::error::{OismError, Result};
use crate::moments::{apply_shrinkage, sample_moments, MomentVector, Shrinkage};
use crate::par;
use crate::process::Schedule;
use crate::solver::{presolve_at, presolve_grid, LossGrid, LossQuadrature, MixtureReference, ScoreModel};
use crate::targets::{sample_mixture_points, DomainMap, GaussianMixture};
use crate::generative::trajectory_rng;
use crate::process::wrap_point;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Everything needed to turn a point set into a score model.
#[derive(Clone, Debug, PartialEq)]
pub struct FitSettings {
    pub basis: BasisSpec,
    pub schedule: Schedule,
    pub shrinkage: Shrinkage,
    pub shrink_extended: bool,
    pub grid_size: usize,
}

/// Fitted model together with the moments it was solved from.
#[derive(Clone, Debug)]
pub struct Fit {
    pub model: ScoreModel,
    pub moments: MomentVector,
}

/// Estimate moments of `data` (already in model coordinates), shrink them
/// and presolve the score model over the τ-grid.
pub fn fit_model(data: &Array2<f64>, settings: &FitSettings, domain_map: DomainMap) -> Result<Fit> {
    if data.nrows() < 2 {
        return Err(OismError::invalid("fitting needs at least two data points"));
    }
    let basis = EigenBasis::from_spec(&settings.basis)?;
    let table = ProductTable::build(&basis)?;
    let raw = sample_moments(&basis, data)?;
    let moments = apply_shrinkage(&raw, settings.shrinkage, &basis, settings.shrink_extended);
    let mut model = presolve_grid(&basis, &table, &moments, &settings.schedule, settings.grid_size)?;
    model.set_domain_map(domain_map)?;
    Ok(Fit { model, moments })
}

/// Settings of the loss-versus-basis-size study on a 1D mixture target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossStudyConfig {
    pub sizes: Vec<u32>,
    pub replications: usize,
    pub n_data: usize,
    pub taus: Vec<f64>,
    pub schedule: Schedule,
    pub shrink_extended: bool,
    pub seed: u64,
}

/// Loss of one fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub size: u32,
    pub tau: f64,
    pub replication: usize,
    pub sample_mean: f64,
    pub shrinkage: f64,
}

/// Default τ values: the grid start and the τ whose internal time is 0.02.
pub fn default_study_taus(schedule: &Schedule) -> Vec<f64> {
    let mut taus = vec![0.0];
    if let Some(t) = schedule.tau_for_internal_time(0.02) {
        taus.push(t);
    }
    taus
}

/// For every replication, draw a fresh data set from `target`, fit each basis
/// size with both estimators, and score both against the exact marginal.
/// Records are ordered by (replication, size, τ).
pub fn loss_study(target: &GaussianMixture, cfg: &LossStudyConfig) -> Result<Vec<LossRecord>> {
    if target.dimension() != 1 {
        return Err(OismError::Unsupported("loss study needs a one-dimensional target".into()));
    }
    if cfg.sizes.is_empty() || cfg.replications == 0 || cfg.taus.is_empty() || cfg.n_data < 2 {
        return Err(OismError::invalid(
            "loss study needs sizes, taus, replications >= 1 and n_data >= 2",
        ));
    }
    cfg.schedule.validate()?;
    let bases: Vec<(EigenBasis, ProductTable)> = cfg
        .sizes
        .iter()
        .map(|&k| {
            let b = trig_basis_1d(k)?;
            let t = ProductTable::build(&b)?;
            Ok((b, t))
        })
        .collect::<Result<_>>()?;
    let grids: Vec<LossGrid> = cfg
        .taus
        .iter()
        .map(|&tau| {
            let r = MixtureReference::new(target, Process::TruncatedBm, &cfg.schedule, tau)?;
            LossGrid::new(&r, LossQuadrature::Auto)
        })
        .collect::<Result<_>>()?;
    let per_rep = par::try_map_range(cfg.replications, |rep| -> Result<Vec<LossRecord>> {
        let mut rng = trajectory_rng(cfg.seed, rep);
        let mut pts = sample_mixture_points(target, cfg.n_data, &mut rng);
        pts.iter_mut().for_each(|p| wrap_point(p));
        let data = Array2::from_shape_vec((cfg.n_data, 1), pts.into_iter().flatten().collect())
            .expect("one column");
        let mut out = Vec::new();
        for (&size, (basis, table)) in cfg.sizes.iter().zip(&bases) {
            let raw = sample_moments(basis, &data)?;
            let shrunk = apply_shrinkage(&raw, Shrinkage::Modulation, basis, cfg.shrink_extended);
            for (&tau, grid) in cfg.taus.iter().zip(&grids) {
                let a = presolve_at(basis, table, &raw, &cfg.schedule, tau)?;
                let b = presolve_at(basis, table, &shrunk, &cfg.schedule, tau)?;
                out.push(LossRecord {
                    size,
                    tau,
                    replication: rep,
                    sample_mean: grid.loss(basis, &a.alpha)?,
                    shrinkage: grid.loss(basis, &b.alpha)?,
                });
            }
        }
        Ok(out)
    })?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// Mean and standard error per (size, τ) cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossSummary {
    pub size: u32,
    pub tau: f64,
    pub sample_mean_mean: f64,
    pub sample_mean_se: f64,
    pub shrinkage_mean: f64,
    pub shrinkage_se: f64,
}

pub fn summarize(records: &[LossRecord], cfg: &LossStudyConfig) -> Vec<LossSummary> {
    let mut out = Vec::new();
    for &size in &cfg.sizes {
        for &tau in &cfg.taus {
            let cell: Vec<&LossRecord> = records
                .iter()
                .filter(|r| r.size == size && r.tau == tau)
                .collect();
            let a: Vec<f64> = cell.iter().map(|r| r.sample_mean).collect();
            let b: Vec<f64> = cell.iter().map(|r| r.shrinkage).collect();
            let se = |v: &[f64]| if v.len() > 1 { crate::stats::standard_error(v) } else { 0.0 };
            out.push(LossSummary {
                size,
                tau,
                sample_mean_mean: crate::stats::mean(&a),
                sample_mean_se: se(&a),
                shrinkage_mean: crate::stats::mean(&b),
                shrinkage_se: se(&b),
            });
        }
    }
    out
}
