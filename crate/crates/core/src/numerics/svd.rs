//! Singular value decomposition of small square complex matrices by one-sided
//! (Hestenes) Jacobi rotations.

use num_complex::Complex64;

use super::matrix::{inner, vec_norm_sqr, ComplexMatrix};
use crate::error::{Error, Result};

/// Off-diagonal Gram entries below this fraction of `sqrt(‖a_p‖²‖a_q‖²)` are treated as zero.
const JACOBI_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 64;

/// `H = U · diag(singular_values) · V^H` with singular values in decreasing order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl SvdFactors {
    /// `Λ` as a real diagonal matrix.
    pub fn lambda(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.singular_values)
    }

    /// `U Λ V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.u.scale_rows_right(&self.singular_values) * &self.v.adjoint()
    }
}

impl ComplexMatrix {
    /// `self · diag(w)`.
    fn scale_rows_right(&self, w: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows(), self.cols(), |r, c| self[(r, c)] * w[c])
    }
}

/// SVD of a square complex matrix.
///
/// Singular values come back strictly ordered largest first; equal values
/// keep the column order in which the rotations left them.
pub fn svd(h: &ComplexMatrix) -> Result<SvdFactors> {
    if !h.is_square() {
        return Err(Error::Dimension(format!("svd expects a square matrix, got {}x{}", h.rows(), h.cols())));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    let n = h.cols();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|c| h.column(c)).collect();
    let mut vcols: Vec<Vec<Complex64>> = (0..n)
        .map(|c| (0..n).map(|r| Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let a = vec_norm_sqr(&cols[p]);
                let b = vec_norm_sqr(&cols[q]);
                let g = inner(&cols[p], &cols[q]);
                let gabs = g.norm();
                if gabs <= JACOBI_TOL * (a * b).sqrt() || gabs == 0.0 {
                    continue;
                }
                rotated = true;
                // Remove the phase of the Gram entry, then apply a real rotation.
                let phase = g / gabs;
                let zeta = (b - a) / (2.0 * gabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut cols, p, q, phase, cs, sn);
                rotate(&mut vcols, p, q, phase, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| vec_norm_sqr(c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the original column order on ties.
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let scale = norms.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut u = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    let mut singular_values = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        singular_values.push(sigma);
        v.set_column(k, &vcols[src]);
        if sigma > 1e-14 * scale {
            let uc: Vec<Complex64> = cols[src].iter().map(|z| z / sigma).collect();
            u.set_column(k, &uc);
        } else {
            missing.push(k);
        }
    }
    complete_unitary(&mut u, &missing);
    Ok(SvdFactors { u, singular_values, v })
}

/// `[x_p, x_q] ← [x_p, x_q · conj(phase)] · [[c, s], [−s, c]]`.
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, phase: Complex64, cs: f64, sn: f64) {
    let pc = phase.conj();
    for r in 0..cols[p].len() {
        let xp = cols[p][r];
        let xq = cols[q][r] * pc;
        cols[p][r] = xp * cs - xq * sn;
        cols[q][r] = xp * sn + xq * cs;
    }
}

/// Fills the listed columns of `u` with unit vectors orthogonal to the others.
fn complete_unitary(u: &mut ComplexMatrix, missing: &[usize]) {
    let n = u.rows();
    let mut filled: Vec<usize> = (0..n).filter(|c| !missing.contains(c)).collect();
    for &k in missing {
        for e in 0..n {
            let mut cand: Vec<Complex64> = (0..n)
                .map(|r| Complex64::new(if r == e { 1.0 } else { 0.0 }, 0.0))
                .collect();
            for _ in 0..2 {
                for &f in &filled {
                    let uf = u.column(f);
                    let proj = inner(&uf, &cand);
                    for (c, x) in cand.iter_mut().zip(&uf) {
                        *c -= proj * x;
                    }
                }
            }
            let nrm = vec_norm_sqr(&cand).sqrt();
            if nrm > 0.5 {
                let unit: Vec<Complex64> = cand.iter().map(|z| z / nrm).collect();
                u.set_column(k, &unit);
                filled.push(k);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::I;
    use crate::numerics::rng::SeededRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut SeededRng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| rng.complex_gaussian(1.0).unwrap())
    }

    /// Singular values of a 2×2 matrix from the characteristic polynomial of H^H H.
    fn singular_values_2x2(h: &ComplexMatrix) -> (f64, f64) {
        let g = &h.adjoint() * h;
        let tr = g[(0, 0)].re + g[(1, 1)].re;
        let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        ((tr / 2.0 + disc).sqrt(), (tr / 2.0 - disc).max(0.0).sqrt())
    }

    #[test]
    fn identity_input() {
        let f = svd(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(f.singular_values, vec![1.0, 1.0]);
        let uvh = &f.u * &f.v.adjoint();
        assert!(uvh.sub(&ComplexMatrix::identity(2)).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn diagonal_with_phase() {
        let h = ComplexMatrix::from_diag(&[c(3.0, 0.0), c(0.0, 2.0)]);
        let f = svd(&h).unwrap();
        assert!((f.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((f.singular_values[1] - 2.0).abs() < 1e-14);
        assert!(f.reconstruct().sub(&h).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn ascending_diagonal_is_reordered() {
        let h = ComplexMatrix::from_real_diag(&[0.5, 4.0, 2.0]);
        let f = svd(&h).unwrap();
        assert_eq!(f.singular_values, vec![4.0, 2.0, 0.5]);
    }

    #[test]
    fn rank_deficient_input_still_gives_unitary_u() {
        let h = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]).unwrap();
        let f = svd(&h).unwrap();
        assert!(f.singular_values[1] < 1e-12);
        assert!(f.u.unitarity_error() < 1e-12);
        assert!(f.reconstruct().sub(&h).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(svd(&ComplexMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
        let mut h = ComplexMatrix::identity(2);
        h[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(svd(&h), Err(Error::NonFinite(_))));
    }

    #[test]
    fn random_factors_reconstruct_and_are_unitary() {
        let mut rng = SeededRng::new(7);
        for n in [2, 3, 4, 6] {
            for _ in 0..200 {
                let h = random_matrix(n, &mut rng);
                let f = svd(&h).unwrap();
                let err = f.reconstruct().sub(&h).unwrap().frobenius_norm();
                assert!(err <= 1e-10 * h.frobenius_norm(), "n={n} err={err}");
                assert!(f.u.unitarity_error() <= 1e-10);
                assert!(f.v.unitarity_error() <= 1e-10);
                assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn matches_characteristic_polynomial_2x2() {
        let mut rng = SeededRng::new(99);
        for _ in 0..2000 {
            let h = random_matrix(2, &mut rng);
            let f = svd(&h).unwrap();
            let (s1, s2) = singular_values_2x2(&h);
            assert!((f.singular_values[0] - s1).abs() < 1e-9);
            assert!((f.singular_values[1] - s2).abs() < 1e-9);
        }
    }

    #[test]
    fn u_columns_carry_phases() {
        let h = ComplexMatrix::from_diag(&[I * 2.0, c(-1.0, 0.0)]);
        let f = svd(&h).unwrap();
        let lhs = &f.u.adjoint() * &(&h * &f.v);
        assert!(lhs.sub(&f.lambda()).unwrap().frobenius_norm() < 1e-12);
    }
}
