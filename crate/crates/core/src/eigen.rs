//! Dominant eigenpairs of collocation matrices.
//!
//! Power iteration from the all-ones vector isolates the dominant eigenvalue; a few
//! steps of shifted inverse iteration then polish the right and left vectors to
//! working precision, and the eigenvalue is taken as the two-sided Rayleigh quotient.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const POWER_STEPS: usize = 2000;
const POWER_TOL: f64 = 1e-7;
const INVERSE_STEPS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub lambda: Complex64,
    /// Eigenfunction at the nodes, normalized by `μ[f] = 1`.
    pub right_values: Vec<Complex64>,
    /// Nodal weights of the eigenmeasure, normalized by `μ[1] = 1`.
    pub left_values: Vec<Complex64>,
    /// `‖A f − λ f‖∞ / ‖f‖∞`.
    pub residual: f64,
}

fn sup_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn normalized(v: DVector<Complex64>) -> DVector<Complex64> {
    // scale by the largest entry so that signs and phases stay comparable
    let k = v.icamax();
    let pivot = v[k];
    v / pivot
}

/// Power iteration; returns the eigenvalue estimate and the iterate.
fn power_iteration(a: &DMatrix<Complex64>) -> Result<(Complex64, DVector<Complex64>)> {
    let n = a.nrows();
    let mut v = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let mut lambda = Complex64::new(0.0, 0.0);
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_STEPS {
        let av = a * &v;
        let k = av.icamax();
        let next_lambda = av[k] / v[k];
        let next = normalized(av);
        residual = sup_norm(&(&next - &v));
        v = next;
        let settled = (next_lambda - lambda).norm() <= POWER_TOL * next_lambda.norm();
        lambda = next_lambda;
        if settled && residual <= POWER_TOL {
            return Ok((lambda, v));
        }
    }
    Err(Error::NonConvergence {
        iterations: POWER_STEPS,
        residual,
    })
}

fn inverse_iteration(
    shifted: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    mut v: DVector<Complex64>,
) -> DVector<Complex64> {
    for _ in 0..INVERSE_STEPS {
        match shifted.solve(&v) {
            Some(x) if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                v = normalized(x);
            }
            // exact shift: the current vector is already an eigenvector
            _ => break,
        }
    }
    v
}

pub fn dominant_eigen(a: &DMatrix<Complex64>) -> Result<EigenSolution> {
    let n = a.nrows();
    let (guess, v0) = power_iteration(a)?;
    // nudge the shift off the eigenvalue so the factorization stays regular
    let shift = guess * (1.0 + 1e-10) + Complex64::new(1e-14, 0.0);
    let shifted = (a - DMatrix::identity(n, n) * shift).lu();
    let right = inverse_iteration(&shifted, v0);

    let at = a.transpose();
    let shifted_t = (&at - DMatrix::identity(n, n) * shift).lu();
    let left0 = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let left = inverse_iteration(&shifted_t, left0);

    let lambda = (left.transpose() * (a * &right))[0] / (left.transpose() * &right)[0];

    let mass: Complex64 = left.iter().sum();
    let left = left / mass;
    let pairing = (left.transpose() * &right)[0];
    let right = right / pairing;

    let residual = sup_norm(&(a * &right - &right * lambda)) / sup_norm(&right);
    Ok(EigenSolution {
        lambda,
        right_values: right.iter().copied().collect(),
        left_values: left.iter().copied().collect(),
        residual,
    })
}

/// Largest eigenvalue magnitude after removing the dominant rank-one part.
pub fn subdominant_eigenvalue(a: &DMatrix<Complex64>, dominant: &EigenSolution) -> Result<Complex64> {
    let n = a.nrows();
    let f = DVector::from_column_slice(&dominant.right_values);
    let u = DVector::from_column_slice(&dominant.left_values);
    // μ[f] = 1, so the projector is f μᵀ
    let deflated = a - (&f * u.transpose()) * dominant.lambda;
    let (lambda, _) = power_iteration(&deflated)?;
    let shift = lambda * (1.0 + 1e-10) + Complex64::new(1e-14, 0.0);
    let lu = (&deflated - DMatrix::identity(n, n) * shift).lu();
    let v = inverse_iteration(&lu, DVector::from_element(n, Complex64::new(1.0, 0.0)));
    let av = &deflated * &v;
    let k = v.icamax();
    Ok(av[k] / v[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_matrix(rows: &[&[f64]]) -> DMatrix<Complex64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    #[test]
    fn small_positive_matrix() {
        let a = real_matrix(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let e = dominant_eigen(&a).unwrap();
        let exact = (5.0 + 5f64.sqrt()) / 2.0;
        assert!((e.lambda.re - exact).abs() < 1e-14);
        assert!(e.lambda.im.abs() < 1e-14);
        assert!(e.residual < 1e-14);
        let mass: Complex64 = e.left_values.iter().sum();
        assert!((mass - 1.0).norm() < 1e-14);
        let pairing: Complex64 = e.left_values.iter().zip(&e.right_values).map(|(u, f)| u * f).sum();
        assert!((pairing - 1.0).norm() < 1e-14);
    }

    #[test]
    fn deflation_finds_second_eigenvalue() {
        let a = real_matrix(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, -2.0]]);
        let e = dominant_eigen(&a).unwrap();
        let second = subdominant_eigenvalue(&a, &e).unwrap();
        // both must be roots of the characteristic polynomial
        let det = |x: Complex64| {
            let m = &a - DMatrix::identity(3, 3) * x;
            m.determinant().norm()
        };
        assert!(det(e.lambda) < 1e-10);
        assert!(det(second) < 1e-10);
        assert!(second.norm() < e.lambda.norm());
    }

    #[test]
    fn no_dominant_eigenvalue_fails_loudly() {
        // rotation by 90 degrees: eigenvalues ±i of equal modulus
        let a = real_matrix(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(matches!(dominant_eigen(&a), Err(Error::NonConvergence { .. })));
    }
}
