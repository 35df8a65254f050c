use nalgebra::{DMatrix, DVector};

/// Factorisation of a square matrix: Cholesky when positive definite,
/// otherwise partial-pivot LU.
pub(crate) enum Factor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    pub(crate) fn new(m: &DMatrix<f64>) -> Option<Factor> {
        if let Some(c) = m.clone().cholesky() {
            return Some(Factor::Cholesky(c));
        }
        let lu = m.clone().lu();
        if lu.is_invertible() {
            Some(Factor::Lu(lu))
        } else {
            None
        }
    }

    pub(crate) fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Cholesky(c) => Some(c.solve(rhs)),
            Factor::Lu(lu) => lu.solve(rhs),
        }
    }
}

pub(crate) fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager's estimate of ‖M⁻¹‖₁ for symmetric M, times ‖M‖₁.
pub(crate) fn condition_estimate(m: &DMatrix<f64>, factor: &Factor) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 1.0;
    }
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let Some(y) = factor.solve(&x) else {
            return f64::INFINITY;
        };
        if y.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        estimate = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let Some(z) = factor.solve(&xi) else {
            return f64::INFINITY;
        };
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.abs()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if zmax <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[j] = 1.0;
    }
    norm1(m) * estimate
}
