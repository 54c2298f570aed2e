//! Small dense linear algebra for the ridge-stabilised least squares fit.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Solve `A x = b` for symmetric positive definite `A` (row-major, `n x n`)
/// by Cholesky factorisation. A pivot at or below `rel_tol` times its
/// diagonal entry counts as singular.
pub fn cholesky_solve(a: &[f64], b: &[f64], n: usize, rel_tol: f64) -> Result<Vec<f64>> {
    if a.len() != n * n || b.len() != n {
        return Err(Error::LengthMismatch {
            left: n * n,
            right: a.len(),
        });
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= rel_tol * a[i * n + i] || s <= 0.0 || !s.is_finite() {
                    return Err(Error::InvalidInput(
                        "matrix is not positive definite".into(),
                    ));
                }
                l[i * n + i] = libm::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, &[2.0, 1.0], 2, 0.0).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12 && x[1].abs() < 1e-12);
        assert!(cholesky_solve(&[1.0, 2.0, 2.0, 1.0], &[1.0, 1.0], 2, 0.0).is_err());
    }
}
