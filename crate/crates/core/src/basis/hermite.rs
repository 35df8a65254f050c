//! Normalized probabilists' Hermite polynomials, φ_n = He_n / √(n!).
//!
//! Values come from the three-term recurrence; the explicit monomial form is
//! never built. Products φ_k φ_l are expanded back into the basis with the
//! order-raising dynamic programme over l.

use crate::error::{OismError, Result};

/// φ_0(x), …, φ_max_order(x).
pub fn hermite_eval(max_order: usize, x: f64) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(OismError::invalid(format!("hermite_eval at non-finite x = {x}")));
    }
    let mut out = vec![0.0; max_order + 1];
    fill_values(x, &mut out);
    Ok(out)
}

/// φ_0′(x), …, φ_max_order′(x) via φ_n′ = √n · φ_{n−1}.
pub fn hermite_grad(max_order: usize, x: f64) -> Result<Vec<f64>> {
    let values = hermite_eval(max_order, x)?;
    let mut out = vec![0.0; max_order + 1];
    for n in 1..=max_order {
        out[n] = (n as f64).sqrt() * values[n - 1];
    }
    Ok(out)
}

/// Recurrence fill of `out[n] = φ_n(x)` for every slot of `out`.
pub(crate) fn fill_values(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for l in 1..out.len().saturating_sub(1) {
        let lf = l as f64;
        out[l + 1] = (x * out[l] - lf.sqrt() * out[l - 1]) / (lf + 1.0).sqrt();
    }
}

/// Sparse expansion coefficients of φ_k φ_l for 0 ≤ k, l ≤ `basis_max`.
#[derive(Clone, Debug)]
pub struct HermiteProductTable {
    basis_max: usize,
    extended_max: usize,
    // entries[k][l] for k <= l, list of (h, beta_h)
    entries: Vec<Vec<Vec<(usize, f64)>>>,
}

impl HermiteProductTable {
    pub fn basis_max(&self) -> usize {
        self.basis_max
    }

    pub fn extended_max(&self) -> usize {
        self.extended_max
    }

    /// Expansion of φ_k φ_l as `(h, β_h)` pairs with nonzero β.
    pub fn get(&self, k: usize, l: usize) -> &[(usize, f64)] {
        let (a, b) = if k <= l { (k, l) } else { (l, k) };
        &self.entries[a][b - a]
    }
}

/// Build the product table with the recurrence
/// β^{(k,0)} = e_k,
/// β^{(k,l+1)} = √((k+1)/(l+1)) β^{(k+1,l)} + √(k/(l+1)) β^{(k−1,l)} − √(l/(l+1)) β^{(k,l−1)}.
pub fn hermite_product_table(basis_max: usize, extended_max: usize) -> Result<HermiteProductTable> {
    let required = 2 * basis_max;
    if extended_max < required {
        return Err(OismError::Capacity {
            what: "hermite extended order for products of the basis".into(),
            required,
            available: extended_max,
        });
    }
    let width = required + 1;
    // level[k] holds β^{(k, l)} for the current l; only k + l <= 2·basis_max is ever needed.
    let mut prev: Vec<Vec<f64>> = Vec::new();
    let mut level: Vec<Vec<f64>> = (0..=required)
        .map(|k| {
            let mut v = vec![0.0; width];
            v[k] = 1.0;
            v
        })
        .collect();
    let mut dense: Vec<Vec<Vec<f64>>> = vec![Vec::new(); basis_max + 1];
    for l in 0..=basis_max {
        // β^{(l,k)} = β^{(k,l)} for k ≥ l, raised from the exact one-hot start
        for k in l..=basis_max {
            dense[l].push(level[k].clone());
        }
        if l == basis_max {
            break;
        }
        let lf = l as f64;
        let kmax_next = required - (l + 1);
        let mut next = vec![vec![0.0; width]; kmax_next + 1];
        for (k, out) in next.iter_mut().enumerate() {
            let kf = k as f64;
            let up = ((kf + 1.0) / (lf + 1.0)).sqrt();
            let down = (kf / (lf + 1.0)).sqrt();
            let back = (lf / (lf + 1.0)).sqrt();
            for h in 0..width {
                let mut v = up * level[k + 1][h];
                if k > 0 {
                    v += down * level[k - 1][h];
                }
                if l > 0 {
                    v -= back * prev[k][h];
                }
                out[h] = v;
            }
        }
        prev = level;
        level = next;
    }
    // dense[k][l - k] = β^{(k,l)} for k ≤ l; support is h ∈ {l−k, l−k+2, …, k+l}, anything
    // else is cancellation residue.
    let entries = dense
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            row.into_iter()
                .enumerate()
                .map(|(offset, beta)| {
                    let l = k + offset;
                    (l - k..=k + l)
                        .step_by(2)
                        .map(|h| (h, beta[h]))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(HermiteProductTable {
        basis_max,
        extended_max,
        entries,
    })
}
