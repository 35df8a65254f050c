//! Trigonometric eigenfunctions √2 cos(ξ·x), √2 sin(ξ·x) of the Laplacian on
//! the torus [−π, π]^d.
//!
//! Frequencies are kept in canonical half-lattice form (first nonzero
//! coordinate positive) so that cos(ξ·x) and cos(−ξ·x) are never both present.

use super::{EigenFunction, FunctionKind};
use crate::error::{OismError, Result};
use std::f64::consts::FRAC_1_SQRT_2;

pub(crate) fn norm_sq(freq: &[i32]) -> i64 {
    freq.iter().map(|&k| (k as i64) * (k as i64)).sum()
}

/// True when the first nonzero coordinate is positive.
pub(crate) fn is_canonical(freq: &[i32]) -> bool {
    match freq.iter().find(|&&k| k != 0) {
        Some(&k) => k > 0,
        None => false,
    }
}

/// Returns the canonical representative and whether the sign was flipped.
pub(crate) fn canonicalize(freq: &[i32]) -> (Vec<i32>, bool) {
    if is_canonical(freq) || freq.iter().all(|&k| k == 0) {
        (freq.to_vec(), false)
    } else {
        (freq.iter().map(|&k| -k).collect(), true)
    }
}

/// Canonical nonzero frequencies with ‖ξ‖² ≤ `max_norm_sq`, ordered by
/// (‖ξ‖², ξ).
pub(crate) fn enumerate_frequencies(dimension: usize, max_norm_sq: i64) -> Vec<Vec<i32>> {
    let radius = (max_norm_sq as f64).sqrt().floor() as i32;
    let mut out = Vec::new();
    let mut current = vec![0i32; dimension];
    fn recurse(
        dim: usize,
        pos: usize,
        remaining: i64,
        radius: i32,
        current: &mut Vec<i32>,
        out: &mut Vec<Vec<i32>>,
    ) {
        if pos == dim {
            if is_canonical(current) {
                out.push(current.clone());
            }
            return;
        }
        for k in -radius..=radius {
            let sq = (k as i64) * (k as i64);
            if sq > remaining {
                continue;
            }
            current[pos] = k;
            recurse(dim, pos + 1, remaining - sq, radius, current, out);
        }
        current[pos] = 0;
    }
    recurse(dimension, 0, max_norm_sq, radius, &mut current, &mut out);
    out.sort_by(|a, b| norm_sq(a).cmp(&norm_sq(b)).then_with(|| a.cmp(b)));
    out
}

fn cos_term(freq: Vec<i32>, coeff: f64, out: &mut Vec<(EigenFunction, f64)>) {
    let dim = freq.len();
    if freq.iter().all(|&k| k == 0) {
        // cos(0) = 1 = φ_0
        out.push((EigenFunction::constant(dim), coeff));
        return;
    }
    let (canon, _) = canonicalize(&freq);
    out.push((EigenFunction::trig(FunctionKind::Cos, canon), coeff * FRAC_1_SQRT_2));
}

fn sin_term(freq: Vec<i32>, coeff: f64, out: &mut Vec<(EigenFunction, f64)>) {
    if freq.iter().all(|&k| k == 0) {
        return;
    }
    let (canon, flipped) = canonicalize(&freq);
    let sign = if flipped { -1.0 } else { 1.0 };
    out.push((EigenFunction::trig(FunctionKind::Sin, canon), sign * coeff * FRAC_1_SQRT_2));
}

/// Expand the product of two trig (or constant) eigenfunctions with the
/// product-to-sum identities on the √2-normalised functions.
pub fn trig_product(a: &EigenFunction, b: &EigenFunction) -> Result<Vec<(EigenFunction, f64)>> {
    let trig_like = |f: &EigenFunction| {
        matches!(f.kind, FunctionKind::Constant | FunctionKind::Cos | FunctionKind::Sin)
    };
    if !trig_like(a) || !trig_like(b) {
        return Err(OismError::invalid("trig_product needs trigonometric or constant factors"));
    }
    if a.index.len() != b.index.len() {
        return Err(OismError::invalid(format!(
            "trig_product dimension mismatch: {} vs {}",
            a.index.len(),
            b.index.len()
        )));
    }
    if a.kind == FunctionKind::Constant {
        return Ok(vec![(b.clone(), 1.0)]);
    }
    if b.kind == FunctionKind::Constant {
        return Ok(vec![(a.clone(), 1.0)]);
    }
    let sum: Vec<i32> = a.index.iter().zip(&b.index).map(|(x, y)| x + y).collect();
    let diff: Vec<i32> = a.index.iter().zip(&b.index).map(|(x, y)| x - y).collect();
    let mut terms = Vec::with_capacity(2);
    match (a.kind, b.kind) {
        // 2 cos A cos B = cos(A−B) + cos(A+B)
        (FunctionKind::Cos, FunctionKind::Cos) => {
            cos_term(diff, 1.0, &mut terms);
            cos_term(sum, 1.0, &mut terms);
        }
        // 2 sin A sin B = cos(A−B) − cos(A+B)
        (FunctionKind::Sin, FunctionKind::Sin) => {
            cos_term(diff, 1.0, &mut terms);
            cos_term(sum, -1.0, &mut terms);
        }
        // 2 sin A cos B = sin(A+B) + sin(A−B)
        (FunctionKind::Sin, FunctionKind::Cos) => {
            sin_term(sum, 1.0, &mut terms);
            sin_term(diff, 1.0, &mut terms);
        }
        // 2 cos A sin B = sin(A+B) − sin(A−B)
        (FunctionKind::Cos, FunctionKind::Sin) => {
            sin_term(sum, 1.0, &mut terms);
            sin_term(diff, -1.0, &mut terms);
        }
        _ => unreachable!(),
    }
    Ok(merge_terms(terms))
}

fn merge_terms(terms: Vec<(EigenFunction, f64)>) -> Vec<(EigenFunction, f64)> {
    let mut merged: Vec<(EigenFunction, f64)> = Vec::with_capacity(terms.len());
    for (f, c) in terms {
        if let Some(slot) = merged
            .iter_mut()
            .find(|(g, _)| g.kind == f.kind && g.index == f.index)
        {
            slot.1 += c;
        } else {
            merged.push((f, c));
        }
    }
    merged.retain(|(_, c)| *c != 0.0);
    merged
}
