use super::{rescale_to_torus, rows_to_array, Dataset};
use crate::error::{OismError, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;

/// Synthetic 2D point-cloud families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Toy2d {
    Pinwheel,
    Checkerboard,
    TwoMoons,
    Rings,
    SwissRoll,
}

impl FromStr for Toy2d {
    type Err = OismError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "pinwheel" => Ok(Toy2d::Pinwheel),
            "checkerboard" => Ok(Toy2d::Checkerboard),
            "two_moons" => Ok(Toy2d::TwoMoons),
            "rings" => Ok(Toy2d::Rings),
            "swiss_roll" => Ok(Toy2d::SwissRoll),
            other => Err(OismError::invalid(format!("unknown toy dataset {other:?}"))),
        }
    }
}

impl Toy2d {
    pub fn name(&self) -> &'static str {
        match self {
            Toy2d::Pinwheel => "pinwheel",
            Toy2d::Checkerboard => "checkerboard",
            Toy2d::TwoMoons => "two_moons",
            Toy2d::Rings => "rings",
            Toy2d::SwissRoll => "swiss_roll",
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn raw_point<R: Rng + ?Sized>(kind: Toy2d, i: usize, rng: &mut R) -> [f64; 2] {
    match kind {
        Toy2d::Pinwheel => {
            let classes = 5;
            let label = i % classes;
            let r = normal(rng) * 0.3 + 1.0;
            let tng = normal(rng) * 0.1;
            let angle = 2.0 * PI * label as f64 / classes as f64 + 0.25 * r.exp();
            let (s, c) = angle.sin_cos();
            [2.0 * (r * c - tng * s), 2.0 * (r * s + tng * c)]
        }
        Toy2d::Checkerboard => {
            let x1: f64 = rng.random::<f64>() * 4.0 - 2.0;
            let offset = if rng.random::<bool>() { 2.0 } else { 0.0 };
            let x2 = rng.random::<f64>() - offset + (x1.floor().rem_euclid(2.0));
            [2.0 * x1, 2.0 * x2]
        }
        Toy2d::TwoMoons => {
            let theta = rng.random::<f64>() * PI;
            let (s, c) = theta.sin_cos();
            let (x, y) = if i % 2 == 0 { (c, s) } else { (1.0 - c, 0.5 - s) };
            [x + 0.1 * normal(rng), y + 0.1 * normal(rng)]
        }
        Toy2d::Rings => {
            let radius = [1.0, 2.0, 3.0, 4.0][i % 4];
            let theta = rng.random::<f64>() * 2.0 * PI;
            let (s, c) = theta.sin_cos();
            [radius * c + 0.08 * normal(rng), radius * s + 0.08 * normal(rng)]
        }
        Toy2d::SwissRoll => {
            let t = 1.5 * PI * (1.0 + 2.0 * rng.random::<f64>());
            [
                (t * t.cos() + normal(rng)) / 5.0,
                (t * t.sin() + normal(rng)) / 5.0,
            ]
        }
    }
}

/// `n` points of the named family, affinely mapped into [−0.95π, 0.95π]².
pub fn toy2d<R: Rng + ?Sized>(kind: Toy2d, n: usize, rng: &mut R) -> Result<Dataset> {
    if n < 2 {
        return Err(OismError::invalid("toy datasets need at least two points"));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| raw_point(kind, i, rng).to_vec()).collect();
    let (mut data, _) = rescale_to_torus(&rows_to_array(rows, 2), 0.05)?;
    data.source = kind.name().to_string();
    Ok(data)
}
