//! Eigenbases of the forward-process generator.
//!
//! Two families are supported: univariate normalized Hermite polynomials for
//! the Ornstein–Uhlenbeck process and √2-normalised trigonometric functions
//! for Brownian motion truncated to the torus [−π, π]^d. Every basis keeps the
//! constant function at index 0 and carries an extended set that is closed
//! under pairwise products of its members.

mod hermite;
mod product;
mod trig;

pub use hermite::{hermite_eval, hermite_grad, hermite_product_table, HermiteProductTable};
pub(crate) use hermite::fill_values as hermite_fill;
pub use product::ProductTable;
pub use trig::trig_product;

use crate::error::{OismError, Result};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::SQRT_2;

/// Forward noising process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    /// dX = −X dt + √2 dW on ℝ^d, invariant measure N(0, I).
    Ou,
    /// dX = √2 dW wrapped onto [−π, π]^d, invariant measure uniform.
    TruncatedBm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    Constant,
    Hermite,
    Cos,
    Sin,
}

/// One eigenfunction: per-dimension polynomial orders (Hermite) or a
/// frequency vector (trig), together with its eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenFunction {
    pub kind: FunctionKind,
    pub index: Vec<i32>,
    pub eigenvalue: f64,
}

impl EigenFunction {
    pub fn constant(dimension: usize) -> Self {
        EigenFunction {
            kind: FunctionKind::Constant,
            index: vec![0; dimension],
            eigenvalue: 0.0,
        }
    }

    /// Tensor Hermite function Π_j φ_{n_j}(x_j), eigenvalue −Σ n_j.
    pub fn hermite(orders: Vec<i32>) -> Self {
        let eigenvalue = -(orders.iter().map(|&n| n as i64).sum::<i64>() as f64);
        EigenFunction {
            kind: FunctionKind::Hermite,
            index: orders,
            eigenvalue,
        }
    }

    /// √2 cos(ξ·x) or √2 sin(ξ·x), eigenvalue −‖ξ‖².
    pub fn trig(kind: FunctionKind, freq: Vec<i32>) -> Self {
        let eigenvalue = -(trig::norm_sq(&freq) as f64);
        EigenFunction {
            kind,
            index: freq,
            eigenvalue,
        }
    }

    fn key(&self) -> (FunctionKind, Vec<i32>) {
        (self.kind, self.index.clone())
    }

    /// Coordinates with a nonzero order or frequency, with that entry.
    fn support(&self) -> Vec<(usize, i32)> {
        self.index
            .iter()
            .enumerate()
            .filter(|(_, &k)| k != 0)
            .map(|(j, &k)| (j, k))
            .collect()
    }
}

/// Basis family and size; this is what gets persisted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisSpec {
    /// All canonical frequencies with −‖ξ‖² ≥ `eigenvalue_floor`.
    Trig {
        dimension: usize,
        eigenvalue_floor: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        extended_floor: Option<f64>,
    },
    /// φ_k(x_i) for k ∈ 1..=max_order and every coordinate i.
    HermiteUnivariate {
        dimension: usize,
        max_order: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        extended_order: Option<u32>,
    },
}

impl BasisSpec {
    pub fn trig_1d(max_frequency: u32) -> Self {
        BasisSpec::Trig {
            dimension: 1,
            eigenvalue_floor: -((max_frequency as f64) * (max_frequency as f64)),
            extended_floor: None,
        }
    }

    pub fn process(&self) -> Process {
        match self {
            BasisSpec::Trig { .. } => Process::TruncatedBm,
            BasisSpec::HermiteUnivariate { .. } => Process::Ou,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            BasisSpec::Trig { dimension, .. } | BasisSpec::HermiteUnivariate { dimension, .. } => {
                *dimension
            }
        }
    }
}

/// Lossless JSON form of a basis: the spec it was built from plus the
/// enumerated function indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDescriptor {
    pub process: Process,
    pub dimension: usize,
    pub spec: BasisSpec,
    pub functions: Vec<(FunctionKind, Vec<i32>)>,
}

/// Ordered eigenfunctions, index 0 being the constant. `extended` starts with
/// `functions` in the same order.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    spec: BasisSpec,
    process: Process,
    dimension: usize,
    n_functions: usize,
    extended: Vec<EigenFunction>,
    supports: Vec<Vec<(usize, i32)>>,
    lookup: HashMap<(FunctionKind, Vec<i32>), usize>,
    // largest |order| / |frequency| used per coordinate, over the extended set
    max_index: usize,
}

/// Values, gradients (d × m) and Laplacians of the basis functions at a point.
#[derive(Clone, Debug)]
pub struct BasisValues {
    pub values: Vec<f64>,
    pub gradients: Array2<f64>,
    pub laplacians: Vec<f64>,
}

/// `{constant} ∪ {√2 cos kx, √2 sin kx : k = 1..=max_frequency}` on [−π, π].
pub fn trig_basis_1d(max_frequency: u32) -> Result<EigenBasis> {
    if max_frequency < 1 {
        return Err(OismError::invalid("max_frequency must be at least 1"));
    }
    EigenBasis::from_spec(&BasisSpec::trig_1d(max_frequency))
}

/// Canonical half-lattice trig basis with every eigenvalue ≥ `eigenvalue_floor`.
pub fn trig_basis_nd(dimension: usize, eigenvalue_floor: f64) -> Result<EigenBasis> {
    EigenBasis::from_spec(&BasisSpec::Trig {
        dimension,
        eigenvalue_floor,
        extended_floor: None,
    })
}

/// Constant plus φ_k(x_i) for k ∈ 1..=n and every coordinate i.
pub fn hermite_univariate_basis(dimension: usize, n: u32) -> Result<EigenBasis> {
    EigenBasis::from_spec(&BasisSpec::HermiteUnivariate {
        dimension,
        max_order: n,
        extended_order: None,
    })
}

impl EigenBasis {
    pub fn from_spec(spec: &BasisSpec) -> Result<Self> {
        let dimension = spec.dimension();
        if dimension == 0 {
            return Err(OismError::invalid("basis dimension must be positive"));
        }
        let (functions, extra) = match *spec {
            BasisSpec::Trig {
                eigenvalue_floor,
                extended_floor,
                ..
            } => {
                if !(eigenvalue_floor < 0.0) || !eigenvalue_floor.is_finite() {
                    return Err(OismError::invalid(format!(
                        "eigenvalue floor must be finite and negative, got {eigenvalue_floor}"
                    )));
                }
                let floor = (-eigenvalue_floor).floor() as i64;
                let ext_floor = match extended_floor {
                    Some(f) if f.is_finite() && f < 0.0 => (-f).floor() as i64,
                    Some(f) => {
                        return Err(OismError::invalid(format!(
                            "extended eigenvalue floor must be finite and negative, got {f}"
                        )))
                    }
                    None => 4 * floor,
                };
                let mut functions = vec![EigenFunction::constant(dimension)];
                for freq in trig::enumerate_frequencies(dimension, floor) {
                    functions.push(EigenFunction::trig(FunctionKind::Cos, freq.clone()));
                    functions.push(EigenFunction::trig(FunctionKind::Sin, freq));
                }
                let mut extra = Vec::new();
                for freq in trig::enumerate_frequencies(dimension, ext_floor.max(floor)) {
                    if trig::norm_sq(&freq) > floor {
                        extra.push(EigenFunction::trig(FunctionKind::Cos, freq.clone()));
                        extra.push(EigenFunction::trig(FunctionKind::Sin, freq));
                    }
                }
                (functions, extra)
            }
            BasisSpec::HermiteUnivariate {
                max_order,
                extended_order,
                ..
            } => {
                if max_order < 1 {
                    return Err(OismError::invalid("hermite basis needs max_order >= 1"));
                }
                let ext = extended_order.unwrap_or(2 * max_order).max(max_order);
                let univariate = |k: u32, i: usize| {
                    let mut orders = vec![0; dimension];
                    orders[i] = k as i32;
                    EigenFunction::hermite(orders)
                };
                let mut functions = vec![EigenFunction::constant(dimension)];
                for k in 1..=max_order {
                    for i in 0..dimension {
                        functions.push(univariate(k, i));
                    }
                }
                let mut extra = Vec::new();
                for k in max_order + 1..=ext {
                    for i in 0..dimension {
                        extra.push(univariate(k, i));
                    }
                }
                (functions, extra)
            }
        };
        let n_functions = functions.len();
        let mut extended = functions;
        extended.extend(extra);
        let mut lookup = HashMap::with_capacity(extended.len());
        for (i, f) in extended.iter().enumerate() {
            if lookup.insert(f.key(), i).is_some() {
                return Err(OismError::invalid(format!("duplicate eigenfunction {:?}", f.key())));
            }
        }
        let supports: Vec<_> = extended.iter().map(EigenFunction::support).collect();
        let max_index = extended
            .iter()
            .flat_map(|f| f.index.iter().map(|k| k.unsigned_abs() as usize))
            .max()
            .unwrap_or(0);
        Ok(EigenBasis {
            spec: spec.clone(),
            process: spec.process(),
            dimension,
            n_functions,
            extended,
            supports,
            lookup,
            max_index,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn process(&self) -> Process {
        self.process
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Basis functions, constant first.
    pub fn functions(&self) -> &[EigenFunction] {
        &self.extended[..self.n_functions]
    }

    /// Superset holding every product-expansion target.
    pub fn extended(&self) -> &[EigenFunction] {
        &self.extended
    }

    pub fn len(&self) -> usize {
        self.n_functions
    }

    pub fn is_empty(&self) -> bool {
        self.n_functions == 0
    }

    /// Number of non-constant basis functions, i.e. the size of the solve.
    pub fn n_coefficients(&self) -> usize {
        self.n_functions - 1
    }

    /// Position of a function in the extended list.
    pub fn position(&self, kind: FunctionKind, index: &[i32]) -> Option<usize> {
        self.lookup.get(&(kind, index.to_vec())).copied()
    }

    /// Non-constant eigenvalues λ_1, …, λ_n of the basis.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.functions()[1..].iter().map(|f| f.eigenvalue).collect()
    }

    pub(crate) fn support(&self, i: usize) -> &[(usize, i32)] {
        &self.supports[i]
    }

    pub fn descriptor(&self) -> BasisDescriptor {
        BasisDescriptor {
            process: self.process,
            dimension: self.dimension,
            spec: self.spec.clone(),
            functions: self.functions().iter().map(|f| f.key()).collect(),
        }
    }

    /// Rebuild from a descriptor, checking that the enumeration matches.
    pub fn from_descriptor(desc: &BasisDescriptor) -> Result<Self> {
        let basis = EigenBasis::from_spec(&desc.spec)?;
        if basis.process != desc.process || basis.dimension != desc.dimension {
            return Err(OismError::invalid("basis descriptor process/dimension mismatch"));
        }
        let ours: Vec<_> = basis.functions().iter().map(|f| f.key()).collect();
        if ours != desc.functions {
            return Err(OismError::invalid(
                "basis descriptor function list does not match its spec",
            ));
        }
        Ok(basis)
    }

    /// Check that `x` is finite and has the basis dimension.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(OismError::invalid(format!(
                "point has dimension {}, basis expects {}",
                x.len(),
                self.dimension
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(OismError::invalid("point has non-finite coordinates"));
        }
        Ok(())
    }

    /// Values, gradients and Laplacians of every basis function at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<BasisValues> {
        self.check_point(x)?;
        let m = self.n_functions;
        let mut ws = Workspace::new(self);
        ws.prepare(self, x);
        let mut values = vec![0.0; m];
        let mut laplacians = vec![0.0; m];
        let mut gradients = Array2::zeros((self.dimension, m));
        let mut grad = vec![0.0; self.dimension];
        for i in 0..m {
            let (v, lap) = ws.eval_function(self, i, Some(&mut grad));
            values[i] = v;
            laplacians[i] = lap;
            for j in 0..self.dimension {
                gradients[[j, i]] = grad[j];
            }
        }
        Ok(BasisValues {
            values,
            gradients,
            laplacians,
        })
    }

    /// Values of every extended function at `x`, written into `out`.
    pub fn eval_extended_values(&self, x: &[f64], ws: &mut Workspace, out: &mut [f64]) {
        ws.prepare(self, x);
        for (i, slot) in out.iter_mut().enumerate().take(self.extended.len()) {
            *slot = ws.eval_value(self, i);
        }
    }

    /// Σ_k c_k ∇φ_k into `grad`, returning (Σ c_k φ_k, Σ c_k Δφ_k), over the
    /// non-constant basis functions (`coeffs.len() == n_coefficients()`).
    pub fn eval_weighted(
        &self,
        x: &[f64],
        coeffs: &[f64],
        ws: &mut Workspace,
        grad: &mut [f64],
    ) -> (f64, f64) {
        debug_assert_eq!(coeffs.len(), self.n_coefficients());
        ws.prepare(self, x);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut energy = 0.0;
        let mut laplacian = 0.0;
        if self.process == Process::TruncatedBm {
            let mut phase = (1.0, 0.0);
            for (k, &c) in coeffs.iter().enumerate() {
                let i = k + 1;
                let f = &self.extended[i];
                if k == 0 || self.extended[i - 1].index != f.index {
                    phase = ws.phase(&self.supports[i]);
                }
                if c == 0.0 {
                    continue;
                }
                let (re, im) = phase;
                let (value, dir) = match f.kind {
                    FunctionKind::Cos => (SQRT_2 * re, -SQRT_2 * im),
                    _ => (SQRT_2 * im, SQRT_2 * re),
                };
                energy += c * value;
                laplacian += c * f.eigenvalue * value;
                for &(j, kj) in &self.supports[i] {
                    grad[j] += c * dir * kj as f64;
                }
            }
            return (energy, laplacian);
        }
        let mut scratch = std::mem::take(&mut ws.grad);
        scratch.resize(self.dimension, 0.0);
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let (v, lap) = ws.eval_function(self, k + 1, Some(&mut scratch));
            energy += c * v;
            laplacian += c * lap;
            for (g, s) in grad.iter_mut().zip(&scratch) {
                *g += c * s;
            }
        }
        ws.grad = scratch;
        (energy, laplacian)
    }
}

/// Reusable per-point tables. One per worker.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    // hermite: φ_0..φ_K(x_j); trig: cos(k x_j) for k = 0..K
    first: Vec<Vec<f64>>,
    // trig: sin(k x_j)
    second: Vec<Vec<f64>>,
    grad: Vec<f64>,
}

impl Workspace {
    pub fn new(basis: &EigenBasis) -> Self {
        let width = basis.max_index + 1;
        Workspace {
            first: vec![vec![0.0; width]; basis.dimension],
            second: vec![vec![0.0; width]; basis.dimension],
            grad: vec![0.0; basis.dimension],
        }
    }

    fn prepare(&mut self, basis: &EigenBasis, x: &[f64]) {
        let width = basis.max_index + 1;
        if self.first.len() != basis.dimension || self.first[0].len() != width {
            *self = Workspace::new(basis);
        }
        match basis.process {
            Process::Ou => {
                for (j, &xj) in x.iter().enumerate() {
                    hermite::fill_values(xj, &mut self.first[j]);
                }
            }
            Process::TruncatedBm => {
                for (j, &xj) in x.iter().enumerate() {
                    for k in 0..width {
                        let (s, c) = (k as f64 * xj).sin_cos();
                        self.first[j][k] = c;
                        self.second[j][k] = s;
                    }
                }
            }
        }
    }

    fn hermite_parts(&self, j: usize, n: usize) -> (f64, f64, f64) {
        let h = &self.first[j];
        let nf = n as f64;
        let d1 = if n >= 1 { nf.sqrt() * h[n - 1] } else { 0.0 };
        let d2 = if n >= 2 { (nf * (nf - 1.0)).sqrt() * h[n - 2] } else { 0.0 };
        (h[n], d1, d2)
    }

    /// e^{iξ·x} as (cos, sin).
    fn phase(&self, support: &[(usize, i32)]) -> (f64, f64) {
        let mut re = 1.0;
        let mut im = 0.0;
        for &(j, k) in support {
            let a = k.unsigned_abs() as usize;
            let c = self.first[j][a];
            let s = if k < 0 { -self.second[j][a] } else { self.second[j][a] };
            let nre = re * c - im * s;
            im = re * s + im * c;
            re = nre;
        }
        (re, im)
    }

    fn eval_value(&self, basis: &EigenBasis, i: usize) -> f64 {
        let f = &basis.extended[i];
        let support = &basis.supports[i];
        match f.kind {
            FunctionKind::Constant => 1.0,
            FunctionKind::Hermite => support
                .iter()
                .map(|&(j, n)| self.first[j][n as usize])
                .product(),
            FunctionKind::Cos => SQRT_2 * self.phase(support).0,
            FunctionKind::Sin => SQRT_2 * self.phase(support).1,
        }
    }

    /// Value and Laplacian of function `i`; gradient written into `grad`.
    fn eval_function(&self, basis: &EigenBasis, i: usize, grad: Option<&mut [f64]>) -> (f64, f64) {
        let f = &basis.extended[i];
        let support = &basis.supports[i];
        let mut grad = grad;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        match f.kind {
            FunctionKind::Constant => (1.0, 0.0),
            FunctionKind::Hermite => {
                if support.len() == 1 {
                    let (j, n) = support[0];
                    let (v, d1, d2) = self.hermite_parts(j, n as usize);
                    if let Some(g) = grad {
                        g[j] = d1;
                    }
                    return (v, d2);
                }
                let parts: Vec<(usize, f64, f64, f64)> = support
                    .iter()
                    .map(|&(j, n)| {
                        let (v, d1, d2) = self.hermite_parts(j, n as usize);
                        (j, v, d1, d2)
                    })
                    .collect();
                let value: f64 = parts.iter().map(|p| p.1).product();
                let mut lap = 0.0;
                for (a, &(j, _, d1, d2)) in parts.iter().enumerate() {
                    let others: f64 = parts
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| *b != a)
                        .map(|(_, p)| p.1)
                        .product();
                    lap += d2 * others;
                    if let Some(g) = grad.as_deref_mut() {
                        g[j] = d1 * others;
                    }
                }
                (value, lap)
            }
            FunctionKind::Cos | FunctionKind::Sin => {
                let (re, im) = self.phase(support);
                let (value, dir) = if f.kind == FunctionKind::Cos {
                    // ∂_j √2 cos(ξ·x) = −√2 ξ_j sin(ξ·x)
                    (SQRT_2 * re, -SQRT_2 * im)
                } else {
                    (SQRT_2 * im, SQRT_2 * re)
                };
                if let Some(g) = grad {
                    for &(j, k) in support {
                        g[j] = dir * k as f64;
                    }
                }
                (value, f.eigenvalue * value)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trig_1d_sizes_and_eigenvalues() {
        let b = trig_basis_1d(25).unwrap();
        assert_eq!(b.n_coefficients(), 50);
        let max_ext = b.extended().iter().map(|f| f.index[0]).max().unwrap();
        assert_eq!(max_ext, 50);
        let b1 = trig_basis_1d(1).unwrap();
        let ev: Vec<f64> = b1.functions().iter().map(|f| f.eigenvalue).collect();
        assert_eq!(ev, vec![0.0, -1.0, -1.0]);
        assert!(trig_basis_1d(0).is_err());
    }

    #[test]
    fn cosine_zero() {
        let b = trig_basis_1d(2).unwrap();
        let i = b.position(FunctionKind::Cos, &[2]).unwrap();
        let v = b.eval(&[PI / 4.0]).unwrap();
        assert!(v.values[i].abs() < 1e-15);
    }

    #[test]
    fn trig_nd_counts() {
        let b = trig_basis_nd(1, -1.0).unwrap();
        assert_eq!(b.len(), 3);
        let b = trig_basis_nd(2, -2.0).unwrap();
        assert_eq!(b.len(), 9);
        let b = trig_basis_nd(2, -125.0).unwrap();
        // 200 canonical frequencies, cos and sin each, plus the constant
        assert_eq!(b.len(), 401);
        assert_eq!(b.extended().len(), 1581);
        assert!(trig_basis_nd(2, 0.0).is_err());
        assert!(trig_basis_nd(2, 3.0).is_err());
    }

    #[test]
    fn trig_pairs_present() {
        let b = trig_basis_nd(3, -6.0).unwrap();
        for f in b.extended() {
            if f.kind == FunctionKind::Cos {
                assert!(b.position(FunctionKind::Sin, &f.index).is_some());
            }
        }
    }

    #[test]
    fn hermite_sizes() {
        let b = hermite_univariate_basis(1, 2).unwrap();
        assert_eq!((b.len(), b.extended().len()), (3, 5));
        let b = hermite_univariate_basis(3, 3).unwrap();
        assert_eq!(b.len(), 10);
        for f in &b.functions()[1..] {
            let k: i32 = f.index.iter().sum();
            assert_eq!(f.eigenvalue, -(k as f64));
        }
        let b = hermite_univariate_basis(2, 6).unwrap();
        let max = b.extended().iter().flat_map(|f| f.index.clone()).max().unwrap();
        assert_eq!(max, 12);
    }

    #[test]
    fn eigenvalues_non_increasing_per_kind() {
        for b in [trig_basis_nd(2, -30.0).unwrap(), hermite_univariate_basis(3, 4).unwrap()] {
            for kind in [FunctionKind::Cos, FunctionKind::Sin, FunctionKind::Hermite] {
                let ev: Vec<f64> = b
                    .extended()
                    .iter()
                    .filter(|f| f.kind == kind)
                    .map(|f| f.eigenvalue)
                    .collect();
                assert!(ev.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn constant_and_laplacians() {
        let b = trig_basis_nd(2, -5.0).unwrap();
        let v = b.eval(&[0.3, -1.1]).unwrap();
        assert_eq!(v.values[0], 1.0);
        assert_eq!(v.laplacians[0], 0.0);
        assert_eq!(v.gradients[[0, 0]], 0.0);
        for (i, f) in b.functions().iter().enumerate() {
            assert!((v.laplacians[i] - f.eigenvalue * v.values[i]).abs() < 1e-14);
        }
        let h = hermite_univariate_basis(1, 2).unwrap();
        let v = h.eval(&[0.7]).unwrap();
        assert!((v.laplacians[2] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let b = trig_basis_nd(2, -2.0).unwrap();
        assert!(b.eval(&[0.1]).is_err());
        assert!(b.eval(&[0.1, f64::NAN]).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        for b in [trig_basis_nd(2, -10.0).unwrap(), hermite_univariate_basis(2, 3).unwrap()] {
            let json = serde_json::to_string(&b.descriptor()).unwrap();
            let desc: BasisDescriptor = serde_json::from_str(&json).unwrap();
            assert_eq!(desc, b.descriptor());
            let back = EigenBasis::from_descriptor(&desc).unwrap();
            assert_eq!(back.extended(), b.extended());
        }
    }

    #[test]
    fn weighted_matches_pointwise_sum() {
        let b = trig_basis_nd(2, -8.0).unwrap();
        let coeffs: Vec<f64> = (0..b.n_coefficients())
            .map(|i| if i % 3 == 0 { 0.0 } else { (i as f64 * 0.37).sin() })
            .collect();
        let x = [0.4, -2.0];
        let v = b.eval(&x).unwrap();
        let mut ws = Workspace::new(&b);
        let mut g = vec![0.0; 2];
        let (e, lap) = b.eval_weighted(&x, &coeffs, &mut ws, &mut g);
        let e_ref: f64 = coeffs.iter().enumerate().map(|(k, c)| c * v.values[k + 1]).sum();
        let l_ref: f64 = coeffs.iter().enumerate().map(|(k, c)| c * v.laplacians[k + 1]).sum();
        assert!((e - e_ref).abs() < 1e-12 && (lap - l_ref).abs() < 1e-12);
        for j in 0..2 {
            let g_ref: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * v.gradients[[j, k + 1]])
                .sum();
            assert!((g[j] - g_ref).abs() < 1e-12);
        }
    }
}
