use crate::basis::{BasisSpec, Process};
use crate::error::{OismError, Result};
use crate::generative::TorusPrior;
use crate::integrator::IntegratorConfig;
use crate::moments::Shrinkage;
use crate::process::Schedule;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    #[default]
    Trig,
    Hermite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMethod {
    #[default]
    PfOde,
    ReverseSde,
}

/// Every setting a command can use. Unset values fall back to the defaults
/// below; the resolved config is written to each run's provenance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,

    pub target: Option<String>,
    pub n: Option<usize>,
    pub dimension: usize,

    pub data: Option<PathBuf>,
    pub process: Option<Process>,
    pub basis: BasisFamily,
    pub max_freq: Option<u32>,
    pub eigenvalue_floor: Option<f64>,
    pub extended_floor: Option<f64>,
    pub order: Option<u32>,
    pub extended_order: Option<u32>,
    pub schedule: Option<Schedule>,
    pub shrinkage: Shrinkage,
    pub shrink_extended: bool,
    pub grid_size: usize,
    pub map_to_torus: bool,
    pub margin: f64,

    pub model: Option<PathBuf>,
    pub method: SampleMethod,
    pub sde_steps: usize,
    pub torus_prior: TorusPrior,
    pub integrator: IntegratorConfig,

    pub nodes: Option<usize>,
    pub lo: f64,
    pub hi: f64,

    pub sizes: Vec<u32>,
    pub replications: usize,
    pub n_data: usize,
    pub taus: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            workers: None,
            out: None,
            target: None,
            n: None,
            dimension: 1,
            data: None,
            process: None,
            basis: BasisFamily::Trig,
            max_freq: None,
            eigenvalue_floor: None,
            extended_floor: None,
            order: None,
            extended_order: None,
            schedule: None,
            shrinkage: Shrinkage::Modulation,
            shrink_extended: true,
            grid_size: crate::solver::DEFAULT_GRID,
            map_to_torus: false,
            margin: 0.05,
            model: None,
            method: SampleMethod::PfOde,
            sde_steps: 1000,
            torus_prior: TorusPrior::Uniform,
            integrator: IntegratorConfig::default(),
            nodes: None,
            lo: -5.0,
            hi: 5.0,
            sizes: vec![5, 10, 15, 20, 25],
            replications: 50,
            n_data: 2000,
            taus: None,
        }
    }
}

#[derive(Deserialize)]
struct ProvenanceShape {
    run: RunConfig,
}

impl RunConfig {
    /// Load a config file; a provenance file (with a top-level `run` object)
    /// is accepted too, so any run can be replayed.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OismError::Config(format!("cannot read {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| OismError::Config(format!("{}: {e}", path.display())))?;
        let parsed = if value.get("run").is_some() {
            serde_json::from_value::<ProvenanceShape>(value).map(|p| p.run)
        } else {
            serde_json::from_value::<RunConfig>(value)
        };
        parsed.map_err(|e| OismError::Config(format!("{}: {e}", path.display())))
    }

    pub fn process(&self) -> Process {
        match self.basis {
            BasisFamily::Trig => Process::TruncatedBm,
            BasisFamily::Hermite => Process::Ou,
        }
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule.unwrap_or(match self.process() {
            Process::TruncatedBm => Schedule::ve(0.01, 50.0),
            Process::Ou => Schedule::vp(0.1, 20.0),
        })
    }

    /// Basis specification for data of dimension `d`.
    pub fn basis_spec(&self, d: usize) -> Result<BasisSpec> {
        match self.basis {
            BasisFamily::Trig => {
                let floor = match (self.max_freq, self.eigenvalue_floor) {
                    (Some(_), Some(_)) => {
                        return Err(OismError::Config(
                            "set either max_freq or eigenvalue_floor, not both".into(),
                        ))
                    }
                    (Some(k), None) if d == 1 => -((k as f64) * (k as f64)),
                    (Some(_), None) => {
                        return Err(OismError::Config(
                            "max_freq applies to 1D data; use eigenvalue_floor".into(),
                        ))
                    }
                    (None, Some(f)) => f,
                    (None, None) if d == 1 => -625.0,
                    (None, None) => -125.0,
                };
                Ok(BasisSpec::Trig {
                    dimension: d,
                    eigenvalue_floor: floor,
                    extended_floor: self.extended_floor,
                })
            }
            BasisFamily::Hermite => Ok(BasisSpec::HermiteUnivariate {
                dimension: d,
                max_order: self.order.unwrap_or(2),
                extended_order: self.extended_order,
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(OismError::Config(m.into()));
        if let Some(p) = self.process {
            if p != self.process() {
                return bad("process does not match the basis family (trig: truncated_bm, hermite: ou)");
            }
        }
        if let Some(s) = self.schedule {
            s.validate().map_err(|e| OismError::Config(e.to_string()))?;
        }
        if self.grid_size < 2 {
            return bad("grid_size must be at least 2");
        }
        if !(0.0..1.0).contains(&self.margin) {
            return bad("margin must lie in [0, 1)");
        }
        if self.sde_steps < 10 {
            return bad("sde_steps must be at least 10");
        }
        self.integrator
            .validate()
            .map_err(|e| OismError::Config(e.to_string()))?;
        if self.workers == Some(0) {
            return bad("workers must be positive");
        }
        if self.dimension == 0 {
            return bad("dimension must be positive");
        }
        if !(self.lo < self.hi) {
            return bad("lo must be below hi");
        }
        if self.max_freq == Some(0) {
            return bad("max_freq must be at least 1");
        }
        if self.order == Some(0) {
            return bad("order must be at least 1");
        }
        if let Some(f) = self.eigenvalue_floor {
            if !(f < 0.0) {
                return bad("eigenvalue_floor must be negative");
            }
        }
        if self.replications == 0 || self.n_data < 2 || self.sizes.is_empty() {
            return bad("loss study needs replications >= 1, n_data >= 2 and at least one size");
        }
        if let Some(t) = &self.taus {
            if t.is_empty() || t.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return bad("taus must be a nonempty list inside [0, 1]");
            }
        }
        Ok(())
    }
}
