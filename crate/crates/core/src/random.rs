//! Seeded random instances (Gaussian matrices, unitaries, isometries).

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::matcore::{orthonormalize_columns, Matrix};
use crate::scalar::Real;

pub use rand_chacha::ChaCha8Rng as SeededRng;

pub fn rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}

/// Entries i.i.d. complex standard Gaussian, `(x + iy)/√2`.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re * s), T::lit(im * s))
    })
}

/// Isometry `ℂ^cols → ℂ^rows` from the orthonormalised columns of a Gaussian matrix.
pub fn random_isometry<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Matrix<T>> {
    // A Gaussian draw is full rank almost surely; retry on the measure-zero failure.
    loop {
        match orthonormalize_columns(&gaussian_matrix::<T, R>(rows, cols, rng), T::lit(1e-8)) {
            Ok(q) => return Ok(q),
            Err(e) if rows < cols => return Err(e),
            Err(_) => continue,
        }
    }
}

pub fn random_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix<T> {
    random_isometry(n, n, rng).expect("square isometry always exists")
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix<T> {
    gaussian_matrix::<T, R>(n, n, rng).hermitian_part()
}

/// Random PSD matrix `G G*` with `G` of size `n × rank`.
pub fn random_psd<T: Real, R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Matrix<T> {
    let g = gaussian_matrix::<T, R>(n, rank, rng);
    &g * &g.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut r = rng(9);
        let u: Matrix<f64> = random_unitary(5, &mut r);
        assert!((u.adjoint() * u.clone()).approx_eq(&Matrix::identity(5), 1e-12));
    }

    #[test]
    fn isometry_too_wide_fails() {
        let mut r = rng(1);
        assert!(random_isometry::<f64, _>(2, 3, &mut r).is_err());
    }
}
