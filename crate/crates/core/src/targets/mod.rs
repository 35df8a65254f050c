//! Reference distributions: Gaussian mixtures with closed-form marginals and
//! scores, and synthetic 2D point clouds placed on the torus.

mod mixture;
mod toy;

pub use mixture::{
    bart_simpson, mixture_cdf, mixture_logpdf, mixture_marginal, mixture_score,
    sample_mixture_points, wrapped_logpdf_and_score, wrapped_mixture_cdf, GaussianMixture,
};
pub use toy::{toy2d, Toy2d};

use crate::error::{OismError, Result};
use crate::process::wrap_angle;
use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Per-coordinate affine map y = scale ⊙ x + shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainMap {
    pub scale: Vec<f64>,
    pub shift: Vec<f64>,
}

impl DomainMap {
    pub fn identity(dimension: usize) -> Self {
        DomainMap {
            scale: vec![1.0; dimension],
            shift: vec![0.0; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.scale.len()
    }

    pub fn is_identity(&self) -> bool {
        self.scale.iter().all(|&s| s == 1.0) && self.shift.iter().all(|&s| s == 0.0)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.scale.iter().zip(&self.shift))
            .map(|(v, (a, b))| a * v + b)
            .collect()
    }

    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.scale.iter().zip(&self.shift))
            .map(|(v, (a, b))| (v - b) / a)
            .collect()
    }

    /// log |det| of the map, i.e. the density correction from raw to mapped
    /// coordinates.
    pub fn log_abs_det(&self) -> f64 {
        self.scale.iter().map(|s| s.abs().ln()).sum()
    }

    pub fn apply_rows(&self, points: &Array2<f64>) -> Array2<f64> {
        let mut out = points.clone();
        for mut row in out.outer_iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.scale[j] * *v + self.shift[j];
            }
        }
        out
    }

    pub fn invert_rows(&self, points: &Array2<f64>) -> Array2<f64> {
        let mut out = points.clone();
        for mut row in out.outer_iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.shift[j]) / self.scale[j];
            }
        }
        out
    }
}

/// Points (N × d), the map that placed them, and where they came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub points: Array2<f64>,
    pub domain_map: DomainMap,
    pub source: String,
}

impl Dataset {
    pub fn new(points: Array2<f64>, source: impl Into<String>) -> Self {
        let d = points.ncols();
        Dataset {
            points,
            domain_map: DomainMap::identity(d),
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dimension(&self) -> usize {
        self.points.ncols()
    }

    /// Wrap every coordinate into [−π, π]; returns how many rows moved.
    pub fn wrap_into_torus(&mut self) -> usize {
        let mut moved = 0;
        for mut row in self.points.outer_iter_mut() {
            if row.iter().any(|v| v.abs() > PI) {
                moved += 1;
                row.iter_mut().for_each(|v| *v = wrap_angle(*v));
            }
        }
        moved
    }
}

pub(crate) fn rows_to_array(rows: Vec<Vec<f64>>, dimension: usize) -> Array2<f64> {
    let n = rows.len();
    Array2::from_shape_vec((n, dimension), rows.into_iter().flatten().collect())
        .expect("rows share the dimension")
}

/// `n` draws from a mixture, unmapped.
pub fn sample_mixture<R: Rng + ?Sized>(gm: &GaussianMixture, n: usize, rng: &mut R) -> Result<Dataset> {
    if n == 0 {
        return Err(OismError::invalid("sample size must be at least 1"));
    }
    let rows = sample_mixture_points(gm, n, rng);
    Ok(Dataset::new(rows_to_array(rows, gm.dimension()), "gaussian_mixture"))
}

/// Affine per-coordinate map sending [min, max] onto [−π(1 − margin), π(1 − margin)].
pub fn rescale_to_torus(points: &Array2<f64>, margin: f64) -> Result<(Dataset, DomainMap)> {
    if !(0.0..1.0).contains(&margin) {
        return Err(OismError::invalid(format!("margin must lie in [0, 1), got {margin}")));
    }
    if points.nrows() == 0 {
        return Err(OismError::invalid("cannot rescale an empty point set"));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(OismError::invalid("points must be finite"));
    }
    let half = PI * (1.0 - margin);
    let d = points.ncols();
    let mut map = DomainMap::identity(d);
    for j in 0..d {
        let col = points.column(j);
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return Err(OismError::Degenerate(format!("coordinate {j} is constant")));
        }
        map.scale[j] = 2.0 * half / (hi - lo);
        map.shift[j] = -half - map.scale[j] * lo;
    }
    let mapped = map.apply_rows(points);
    let mut data = Dataset::new(mapped, "rescaled");
    data.domain_map = map.clone();
    Ok((data, map))
}
