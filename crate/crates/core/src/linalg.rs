//! Least squares through a Householder QR factorisation.

use nalgebra::{DMatrix, DVector};

pub(crate) struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sse: f64,
    /// `(XᵀX)⁻¹`, the unscaled coefficient covariance.
    pub unscaled_cov: DMatrix<f64>,
}

/// Solves `min ‖y − Xb‖²`. On rank deficiency returns the indices of the
/// columns that are linear combinations of the preceding ones.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &[f64]) -> Result<LeastSquares, Vec<usize>> {
    let (n, k) = x.shape();
    debug_assert_eq!(n, y.len());
    let qr = x.clone().qr();
    let r = qr.r();
    let dependent: Vec<usize> = (0..k)
        .filter(|&j| {
            let norm = x.column(j).norm();
            norm == 0.0 || r[(j, j)].abs() <= 1e-10 * norm
        })
        .collect();
    if !dependent.is_empty() {
        return Err(dependent);
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let coef = r
        .solve_upper_triangular(&qty)
        .expect("non-singular after rank check");
    let fitted = x * &coef;
    let residuals: Vec<f64> = yv.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let sse = residuals.iter().map(|e| e * e).sum();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .expect("non-singular after rank check");
    let unscaled_cov = &r_inv * r_inv.transpose();
    Ok(LeastSquares {
        coefficients: coef.iter().copied().collect(),
        residuals,
        sse,
        unscaled_cov,
    })
}
