use num_complex::Complex64;

use super::matrix::{inner, vec_norm_sqr, ComplexMatrix};
use crate::error::{Error, Result};

/// Columns whose residual norm falls below this fraction of the largest column
/// norm are reported as rank deficient.
const RANK_TOL: f64 = 1e-12;

/// `A = Q R`, `Q` unitary, `R` upper triangular with a real non-negative diagonal.
#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
}

/// Gram–Schmidt QR with one re-orthogonalisation pass per column.
pub fn qr(a: &ComplexMatrix) -> Result<QrFactors> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("qr expects a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("qr input"));
    }
    let n = a.cols();
    let scale = (0..n).map(|c| vec_norm_sqr(&a.column(c)).sqrt()).fold(0.0, f64::max);
    let mut q = ComplexMatrix::zeros(n, n);
    let mut r = ComplexMatrix::zeros(n, n);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);

    for k in 0..n {
        let mut d = a.column(k);
        for _ in 0..2 {
            for (j, qj) in basis.iter().enumerate() {
                let proj = inner(qj, &d);
                r[(j, k)] += proj;
                for (x, y) in d.iter_mut().zip(qj) {
                    *x -= proj * y;
                }
            }
        }
        let nrm = vec_norm_sqr(&d).sqrt();
        if scale == 0.0 || nrm <= RANK_TOL * scale {
            return Err(Error::Singular { column: k });
        }
        r[(k, k)] = Complex64::new(nrm, 0.0);
        let unit: Vec<Complex64> = d.iter().map(|z| z / nrm).collect();
        q.set_column(k, &unit);
        basis.push(unit);
    }
    Ok(QrFactors { q, r })
}
