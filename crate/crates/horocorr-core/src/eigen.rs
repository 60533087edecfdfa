//! Deterministic eigenvalue solvers for the tiny symmetric matrices this
//! crate produces (n×n with n ∈ {2, 3} in practice).
//!
//! The 2×2 case uses the closed form; larger matrices use cyclic Jacobi
//! sweeps. The generalized symmetric-definite problem `A v = λ B v` is
//! reduced with a Cholesky factor of `B`. Determinism matters here: verdicts
//! and reports must be byte-identical across runs and thread counts.

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    if n == 2 {
        let (a, b, c) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
        let mean = 0.5 * (a + c);
        let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        return vec![mean - r, mean + r];
    }
    jacobi_eigenvalues(m)
}

/// Cyclic Jacobi iteration; adequate and fully deterministic for tiny
/// matrices.
fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    // Symmetrize defensively; inputs are symmetric up to roundoff.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    let scale = a.amax().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() < 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A ← Jᵀ A J with the (p,q) rotation.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Eigenvalues (ascending) of the generalized problem `A v = λ B v` with
/// symmetric `A` and symmetric positive-definite `B`, via `B = L Lᵀ` and the
/// ordinary problem for `L⁻¹ A L⁻ᵀ`.
pub fn generalized_symmetric_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if b.nrows() != n || a.ncols() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch(a.nrows(), b.nrows()));
    }
    let chol = nalgebra::Cholesky::new(b.clone()).ok_or_else(|| {
        Error::MathDomain("generalized eigenproblem: B is not positive definite".into())
    })?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ by two triangular solves.
    let mut c = a.clone();
    // Solve L X = A (forward), then L Y = Xᵀ, C = Yᵀ ... done via nalgebra.
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::MathDomain("Cholesky factor not invertible".into()))?;
    c = &linv * c * linv.transpose();
    Ok(symmetric_eigenvalues(&c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
        // Gram–Schmidt of a random matrix.
        loop {
            let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let qr = m.qr();
            let q = qr.q();
            if f64::abs(q.determinant()) > 0.1 {
                return q;
            }
        }
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = symmetric_eigenvalues(&m);
        assert!((e[0] - 1.0).abs() < 1e-14);
        assert!((e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_recovers_known_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for n in [3usize, 4] {
            for _ in 0..50 {
                let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let q = random_orthogonal(&mut rng, n);
                let a = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.clone())) * q.transpose();
                let e = symmetric_eigenvalues(&a);
                d.sort_by(|x, y| x.partial_cmp(y).unwrap());
                for (ei, di) in e.iter().zip(&d) {
                    assert!((ei - di).abs() < 1e-10, "eig {ei} vs {di}");
                }
            }
        }
    }

    #[test]
    fn generalized_problem_scales_correctly() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..50 {
            // B SPD, A = B scaled: spectrum must collapse to the scale.
            let m = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let b = &m * m.transpose() + DMatrix::identity(3, 3);
            let s = rng.gen_range(0.5..2.0);
            let a = &b * s;
            let e = generalized_symmetric_eigenvalues(&a, &b).unwrap();
            for ei in e {
                assert!((ei - s).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn generalized_problem_rejects_indefinite_b() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(generalized_symmetric_eigenvalues(&a, &b).is_err());
    }
}
