//! Small dense helpers built on the eigensolver: orthonormalisation, least
//! squares through the pseudo-inverse, and numerical rank of vector families.

use num_complex::Complex;

use super::{herm_eig, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Modified Gram–Schmidt (two passes) on the columns of `m`.
///
/// Returns the matrix of orthonormal columns, or an error when a column falls
/// below `drop_tol` after orthogonalisation, i.e. the input is rank deficient.
pub fn orthonormalize_columns<T: Real>(m: &Matrix<T>, drop_tol: T) -> Result<Matrix<T>> {
    let (rows, cols) = m.shape();
    let mut q: Vec<Vec<Complex<T>>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v: Vec<Complex<T>> = (0..rows).map(|i| m[(i, j)]).collect();
        let original = norm(&v);
        for _ in 0..2 {
            for u in &q {
                let proj: Complex<T> = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let n = norm(&v);
        if n <= drop_tol * T::one().max(original) {
            return Err(Error::InvalidData(format!("column {j} is linearly dependent on earlier columns")));
        }
        v.iter_mut().for_each(|x| *x /= n);
        q.push(v);
    }
    Ok(Matrix::from_fn(rows, cols, |i, j| q[j][i]))
}

fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Result of [`lstsq`].
#[derive(Clone, Debug)]
pub struct LeastSquares<T: Real> {
    pub solution: Matrix<T>,
    /// `‖K X − B‖_F / max(1, ‖B‖_F)`.
    pub relative_residual: T,
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `K X = B` via the pseudo-inverse of `K* K`.
///
/// Singular values below `rcond · σ_max` are discarded. One step of iterative
/// refinement is applied.
pub fn lstsq<T: Real>(k: &Matrix<T>, b: &Matrix<T>, rcond: T) -> Result<LeastSquares<T>> {
    if k.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "system matrix has {} rows but right-hand side has {}",
            k.rows(),
            b.rows()
        )));
    }
    let kh = k.adjoint();
    let gram = &kh * k;
    let eig = herm_eig(&gram)?;
    let top = eig.values.first().copied().unwrap_or_else(T::zero);
    let thresh = rcond * rcond * top;
    let rank = eig.values.iter().filter(|&&l| l > thresh && l > T::zero()).count();
    let pinv_gram = eig.reconstruct_with(|l| if l > thresh && l > T::zero() { T::one() / l } else { T::zero() });
    let solve = |rhs: &Matrix<T>| &pinv_gram * &(&kh * rhs);
    let mut x = solve(b);
    let r = b - &(k * &x);
    x += &solve(&r);
    let resid = (b - &(k * &x)).frobenius_norm();
    Ok(LeastSquares { solution: x, relative_residual: resid / T::one().max(b.frobenius_norm()), rank })
}

/// Numerical rank of a family of equal-length vectors: eigenvalues of the Gram
/// matrix above `eps · λ_max`.
pub fn vector_rank<T: Real>(vectors: &[Vec<Complex<T>>], eps: T) -> Result<usize> {
    if vectors.is_empty() {
        return Ok(0);
    }
    let len = vectors[0].len();
    if vectors.iter().any(|v| v.len() != len) {
        return Err(Error::DimensionMismatch("vectors of unequal length".into()));
    }
    let n = vectors.len();
    let gram = Matrix::from_fn(n, n, |i, j| vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a.conj() * b).sum());
    let eig = herm_eig(&gram)?;
    let top = eig.values.first().copied().unwrap_or_else(T::zero);
    if top <= T::zero() || top.is_zero() {
        return Ok(0);
    }
    Ok(eig.values.iter().filter(|&&l| l > eps * top).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = Matrix<f64>;

    fn random(rows: usize, cols: usize, seed: u64) -> M {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        M::from_fn(rows, cols, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn gram_schmidt_gives_isometry() {
        let q = orthonormalize_columns(&random(6, 3, 1), 1e-10).unwrap();
        assert!((q.adjoint() * q.clone()).approx_eq(&M::identity(3), 1e-13));
    }

    #[test]
    fn gram_schmidt_detects_dependence() {
        let a = random(4, 1, 2);
        let dup = M::from_fn(4, 2, |i, _| a[(i, 0)]);
        assert!(orthonormalize_columns(&dup, 1e-10).is_err());
    }

    #[test]
    fn least_squares_recovers_consistent_solution() {
        let k = random(8, 4, 3);
        let x = random(4, 2, 4);
        let b = &k * &x;
        let ls = lstsq(&k, &b, 1e-12).unwrap();
        assert_eq!(ls.rank, 4);
        assert!(ls.solution.approx_eq(&x, 1e-10));
        assert!(ls.relative_residual < 1e-12);
    }

    #[test]
    fn rank_of_vectors() {
        let a = random(5, 1, 5).into_data();
        let b = random(5, 1, 6).into_data();
        let sum: Vec<_> = a.iter().zip(&b).map(|(x, y)| x + y * 2.0).collect();
        assert_eq!(vector_rank(&[a.clone(), b.clone()], 1e-9).unwrap(), 2);
        assert_eq!(vector_rank(&[a, b, sum], 1e-9).unwrap(), 2);
    }
}
