//! CSV point files, model JSON and run provenance.

use crate::basis::{BasisDescriptor, EigenBasis};
use crate::error::{OismError, Result};
use crate::moments::{MomentVector, Shrinkage};
use crate::process::Schedule;
use crate::solver::{GridDiagnostic, ScoreModel};
use crate::targets::DomainMap;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const MODEL_VERSION: u32 = 1;

/// Where a model came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelProvenance {
    pub seed: u64,
    pub dataset_hash: Option<String>,
    pub shrinkage: Shrinkage,
    pub shrink_extended: bool,
    pub n_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentRecord {
    pub theta_hat: Vec<f64>,
    pub var_hat: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl From<&MomentVector> for MomentRecord {
    fn from(m: &MomentVector) -> Self {
        MomentRecord {
            theta_hat: m.theta_hat.clone(),
            var_hat: m.var_hat.clone(),
            gamma: m.gamma.clone(),
        }
    }
}

/// Serialized score model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub basis: BasisDescriptor,
    pub schedule: Schedule,
    pub domain_map: DomainMap,
    pub grid: Vec<f64>,
    /// Row-major, one row of non-constant coefficients per grid node.
    pub alphas: Vec<f64>,
    pub diagnostics: Vec<GridDiagnostic>,
    pub moments: Option<MomentRecord>,
    pub provenance: Option<ModelProvenance>,
}

impl ModelFile {
    pub fn from_model(
        model: &ScoreModel,
        moments: Option<&MomentVector>,
        provenance: Option<ModelProvenance>,
    ) -> Self {
        ModelFile {
            version: MODEL_VERSION,
            basis: model.basis().descriptor(),
            schedule: *model.schedule(),
            domain_map: model.domain_map().clone(),
            grid: model.grid().to_vec(),
            alphas: model.alphas().iter().copied().collect(),
            diagnostics: model.diagnostics().to_vec(),
            moments: moments.map(MomentRecord::from),
            provenance,
        }
    }

    pub fn to_model(&self) -> Result<ScoreModel> {
        if self.version != MODEL_VERSION {
            return Err(OismError::Config(format!(
                "model version {} is not supported (expected {MODEL_VERSION})",
                self.version
            )));
        }
        let basis = EigenBasis::from_descriptor(&self.basis)?;
        let n = basis.n_coefficients();
        if self.alphas.len() != n * self.grid.len() {
            return Err(OismError::invalid("model alphas do not match grid x basis size"));
        }
        let alphas = Array2::from_shape_vec((self.grid.len(), n), self.alphas.clone())
            .map_err(|e| OismError::invalid(e.to_string()))?;
        ScoreModel::new(
            basis,
            self.schedule,
            self.grid.clone(),
            alphas,
            self.domain_map.clone(),
            self.diagnostics.clone(),
        )
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_model(path: &Path, file: &ModelFile) -> Result<()> {
    write_json(path, file)
}

pub fn load_model(path: &Path) -> Result<(ScoreModel, ModelFile)> {
    let file: ModelFile = read_json(path)?;
    Ok((file.to_model()?, file))
}

fn header(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("x{i}")).collect()
}

/// Rows of `points` under a `x1..xd` header.
pub fn write_points_csv(path: &Path, points: &Array2<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(points.ncols()))?;
    for row in points.outer_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Points with an extra `log_density` column.
pub fn write_density_csv(path: &Path, points: &Array2<f64>, log_density: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut h = header(points.ncols());
    h.push("log_density".into());
    w.write_record(h)?;
    for (row, ld) in points.outer_iter().zip(log_density) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(ld.to_string());
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Numeric CSV with a one-line header.
pub fn read_points_csv(path: &Path) -> Result<Array2<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let d = r.headers()?.len();
    if d == 0 {
        return Err(OismError::invalid(format!("{} has an empty header", path.display())));
    }
    let mut flat = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != d {
            return Err(OismError::invalid(format!("row {row} has {} fields, expected {d}", rec.len())));
        }
        for field in rec.iter() {
            let v: f64 = field.trim().parse().map_err(|_| OismError::Domain {
                row,
                detail: format!("unparseable value {field:?}"),
            })?;
            flat.push(v);
        }
    }
    let n = flat.len() / d;
    Ok(Array2::from_shape_vec((n, d), flat).expect("rectangular"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}
