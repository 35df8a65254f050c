//! Quadrature rules used for analytic moments and loss evaluation.

use crate::basis::hermite_eval;
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Gauss–Hermite rule for the standard normal: Σ_i w_i f(x_i) ≈ E[f(Z)],
/// exact for polynomials of degree < 2n. Weights sum to 1.
///
/// Nodes start from the Jacobi-matrix eigenvalues and are polished by Newton
/// steps on φ_n; weights are the Christoffel numbers 1 / Σ_{k<n} φ_k(x_i)².
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_hermite needs at least one node");
    if n == 1 {
        return (vec![0.0], vec![1.0]);
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for x in nodes.iter_mut() {
        for _ in 0..4 {
            let phi = hermite_eval(n, *x).expect("finite node");
            // φ_n′ = √n φ_{n−1}
            let deriv = (n as f64).sqrt() * phi[n - 1];
            if deriv == 0.0 {
                break;
            }
            let step = phi[n] / deriv;
            *x -= step;
            if step.abs() < 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
    }
    // enforce exact symmetry
    for i in 0..n / 2 {
        let m = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let phi = hermite_eval(n - 1, x).expect("finite node");
            1.0 / phi.iter().map(|p| p * p).sum::<f64>()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    (nodes, weights)
}

/// Equally spaced nodes x_i = −π + 2πi/n on the torus with weight 2π/n
/// (trapezoid rule for periodic integrands).
pub fn periodic_nodes(n: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * PI / n as f64;
    ((0..n).map(|i| -PI + h * i as f64).collect(), h)
}

/// Trapezoid nodes and weights on [lo, hi].
pub fn trapezoid(lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let h = (hi - lo) / (n - 1) as f64;
    let nodes = (0..n).map(|i| lo + h * i as f64).collect();
    let weights = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_hermite_moments() {
        let (x, w) = gauss_hermite(20);
        let m = |p: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum::<f64>();
        assert!((m(0) - 1.0).abs() < 1e-14);
        assert!(m(1).abs() < 1e-14);
        assert!((m(2) - 1.0).abs() < 1e-13);
        assert!((m(4) - 3.0).abs() < 1e-12);
        assert!((m(6) - 15.0).abs() < 1e-11);
    }

    #[test]
    fn large_rule_is_finite_and_symmetric() {
        let (x, w) = gauss_hermite(200);
        assert!(x.iter().chain(&w).all(|v| v.is_finite()));
        assert!(w.iter().all(|&v| v > 0.0));
        assert!((x[0] + x[199]).abs() < 1e-12);
    }

    #[test]
    fn periodic_nodes_integrate_trig_exactly() {
        let (x, h) = periodic_nodes(64);
        let s: f64 = x.iter().map(|x| (3.0 * x).cos().powi(2) * h).sum();
        assert!((s - PI).abs() < 1e-12);
    }
}
