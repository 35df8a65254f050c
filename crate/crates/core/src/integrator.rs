//! Adaptive explicit Runge–Kutta 5(4) integration with the Tsitouras
//! coefficient set (first-same-as-last, embedded 4th-order error estimate).

use crate::error::{OismError, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rtol: 1e-5,
            atol: 1e-6,
            max_steps: 100_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(OismError::invalid("integrator tolerances must be positive"));
        }
        if self.max_steps == 0 {
            return Err(OismError::invalid("max_steps must be positive"));
        }
        Ok(())
    }
}

/// Final state with step statistics and the accumulated magnitude of the
/// local error estimates per component.
#[derive(Clone, Debug, PartialEq)]
pub struct Integration {
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub error_estimate: Vec<f64>,
}

const C: [f64; 6] = [0.161, 0.327, 0.9, 0.980_025_540_904_509_7, 1.0, 1.0];
const A21: f64 = 0.161;
const A31: f64 = -0.008_480_655_492_356_989;
const A32: f64 = 0.335_480_655_492_357;
const A41: f64 = 2.897_153_057_105_493;
const A42: f64 = -6.359_448_489_975_075;
const A43: f64 = 4.362_295_432_869_581_5;
const A51: f64 = 5.325_864_828_439_257;
const A52: f64 = -11.748_883_564_062_828;
const A53: f64 = 7.495_539_342_889_836_5;
const A54: f64 = -0.092_495_066_361_755_25;
const A61: f64 = 5.861_455_442_946_42;
const A62: f64 = -12.920_969_317_847_11;
const A63: f64 = 8.159_367_898_576_159;
const A64: f64 = -0.071_584_973_281_401;
const A65: f64 = -0.028_269_050_394_068_383;
const B: [f64; 6] = [
    0.096_460_766_818_065_23,
    0.01,
    0.479_889_650_414_499_6,
    1.379_008_574_103_742,
    -3.290_069_515_436_081,
    2.324_710_524_099_774,
];
// b − b̂ for stages 1..7
const E: [f64; 7] = [
    -0.001_780_011_052_225_777_14,
    -0.000_816_434_459_656_746_9,
    0.007_880_878_010_261_995,
    -0.144_711_007_173_262_9,
    0.582_357_165_452_555_2,
    -0.458_082_105_929_186_97,
    1.0 / 66.0,
];

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], cfg: &IntegratorConfig) -> f64 {
    let n = err.len() as f64;
    (err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = cfg.atol + cfg.rtol * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Integrate dy/dτ = f(τ, y) from `t0` to `t1` (either direction).
pub fn integrate<F>(mut f: F, y0: &[f64], t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Integration>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    cfg.validate()?;
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut error_estimate = vec![0.0; n];
    if t0 == t1 {
        return Ok(Integration {
            y,
            accepted: 0,
            rejected: 0,
            error_estimate,
        });
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    f(t0, &y, &mut k[0])?;

    // initial step from the derivative scale
    let scale: Vec<f64> = y.iter().map(|v| cfg.atol + cfg.rtol * v.abs()).collect();
    let d0 = (y.iter().zip(&scale).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt();
    let d1 = (k[0].iter().zip(&scale).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span).max(1e-12 * span.max(1.0));

    let mut t = t0;
    let mut accepted = 0;
    let mut rejected = 0;
    while dir * (t1 - t) > 0.0 {
        if accepted + rejected >= cfg.max_steps {
            return Err(OismError::NonConvergence {
                steps: accepted + rejected,
                reached: t,
                state: y,
            });
        }
        let mut last = false;
        if h >= (t1 - t).abs() {
            h = (t1 - t).abs();
            last = true;
        }
        let hs = dir * h;
        let stage = |coeffs: &[f64], k: &[Vec<f64>], out: &mut [f64], y: &[f64]| {
            for i in 0..y.len() {
                let mut acc = 0.0;
                for (c, kk) in coeffs.iter().zip(k) {
                    acc += c * kk[i];
                }
                out[i] = y[i] + hs * acc;
            }
        };
        stage(&[A21], &k, &mut tmp, &y);
        f(t + C[0] * hs, &tmp, &mut k[1])?;
        stage(&[A31, A32], &k, &mut tmp, &y);
        f(t + C[1] * hs, &tmp, &mut k[2])?;
        stage(&[A41, A42, A43], &k, &mut tmp, &y);
        f(t + C[2] * hs, &tmp, &mut k[3])?;
        stage(&[A51, A52, A53, A54], &k, &mut tmp, &y);
        f(t + C[3] * hs, &tmp, &mut k[4])?;
        stage(&[A61, A62, A63, A64, A65], &k, &mut tmp, &y);
        f(t + C[4] * hs, &tmp, &mut k[5])?;
        stage(&B, &k, &mut y_new, &y);
        let t_new = if last { t1 } else { t + hs };
        f(t_new, &y_new, &mut k[6])?;
        for i in 0..n {
            let mut acc = 0.0;
            for (e, kk) in E.iter().zip(&k) {
                acc += e * kk[i];
            }
            err[i] = hs * acc;
        }
        let en = error_norm(&err, &y, &y_new, cfg);
        if !en.is_finite() {
            h *= 0.2;
            rejected += 1;
            if h < 1e-14 * span {
                return Err(OismError::NonConvergence {
                    steps: accepted + rejected,
                    reached: t,
                    state: y,
                });
            }
            continue;
        }
        let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        if en <= 1.0 {
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            for (acc, e) in error_estimate.iter_mut().zip(&err) {
                *acc += e.abs();
            }
            accepted += 1;
            h *= factor;
        } else {
            rejected += 1;
            h *= factor.min(1.0);
        }
    }
    Ok(Integration {
        y,
        accepted,
        rejected,
        error_estimate,
    })
}
