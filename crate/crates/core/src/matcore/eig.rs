//! Cyclic Jacobi eigensolvers (complex Hermitian and real symmetric).

use num_complex::Complex;
use num_traits::Zero;

use super::Matrix;
use crate::config::DEFAULT;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `V · diag(f(λ)) · V*`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.vectors.rows();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * w;
                if vi.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is checked with the crate's Hermitian tolerance and then
/// symmetrised. Householder reduction to a real tridiagonal matrix followed
/// by implicit QL iterations.
pub fn herm_eig<T: Real>(m: &Matrix<T>) -> Result<HermitianEigen<T>> {
    m.require_hermitian(T::lit(DEFAULT.hermitian))?;
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut q = Matrix::<T>::identity(n);
    householder_tridiagonal(&mut a, &mut q);
    let mut d: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![T::zero(); n];
    // Diagonal phases making the subdiagonal real and non-negative.
    let mut phase = Complex::new(T::one(), T::zero());
    for k in 0..n.saturating_sub(1) {
        let b = a[(k + 1, k)];
        let mag = b.norm();
        e[k] = mag;
        if mag > T::zero() {
            phase *= b / mag;
        }
        for i in 0..n {
            q[(i, k + 1)] *= phase;
        }
    }
    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    tridiagonal_ql(&mut d, &mut e, &mut z, n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, k| {
        let col = order[k];
        (0..n).map(|j| q[(i, j)] * z[j * n + col]).sum()
    });
    Ok(HermitianEigen { values, vectors })
}

/// `A ← Q* A Q` tridiagonal, accumulating the Householder reflections in `q`.
fn householder_tridiagonal<T: Real>(a: &mut Matrix<T>, q: &mut Matrix<T>) {
    let n = a.rows();
    let two = T::lit(2.0);
    for k in 0..n.saturating_sub(2) {
        let sigma = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<T>().sqrt();
        let x0 = a[(k + 1, k)];
        let tail = sigma * sigma - x0.norm_sqr();
        if sigma == T::zero() || tail <= T::epsilon() * T::epsilon() * sigma * sigma {
            continue;
        }
        let x0_abs = x0.norm();
        let ph = if x0_abs > T::zero() { x0 / x0_abs } else { Complex::new(T::one(), T::zero()) };
        let mut v = vec![Complex::zero(); n];
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] = x0 + ph * sigma;
        let tau = two / (two * sigma * (sigma + x0_abs));
        // p = τ A v
        let p: Vec<Complex<T>> =
            (0..n).map(|i| (k + 1..n).map(|j| a[(i, j)] * v[j]).sum::<Complex<T>>() * tau).collect();
        let vp: Complex<T> = (k + 1..n).map(|i| v[i].conj() * p[i]).sum();
        let kk = vp.re * tau / two;
        let w: Vec<Complex<T>> = (0..n).map(|i| p[i] - v[i] * kk).collect();
        for i in 0..n {
            for j in 0..n {
                let upd = v[i] * w[j].conj() + w[i] * v[j].conj();
                if !upd.is_zero() {
                    a[(i, j)] -= upd;
                }
            }
        }
        // Q ← Q H
        for i in 0..n {
            let qv: Complex<T> = (k + 1..n).map(|j| q[(i, j)] * v[j]).sum::<Complex<T>>() * tau;
            for j in k + 1..n {
                q[(i, j)] -= qv * v[j].conj();
            }
        }
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix (diagonal `d`,
/// subdiagonal `e[i]` coupling `i` and `i + 1`), rotating the columns of the
/// row-major `z`.
fn tridiagonal_ql<T: Real>(d: &mut [T], e: &mut [T], z: &mut [T], n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence { sweeps: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut i = m as isize - 1;
            let mut early = false;
            while i >= l as isize {
                let iu = i as usize;
                let f = s * e[iu];
                let b = c * e[iu];
                r = f.hypot(g);
                e[iu + 1] = r;
                if r == T::zero() {
                    d[iu + 1] -= p;
                    e[m] = T::zero();
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[iu + 1] - p;
                r = (d[iu] - g) * s + two * c * b;
                p = s * r;
                d[iu + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let f = z[k * n + iu + 1];
                    z[k * n + iu + 1] = s * z[k * n + iu] + c * f;
                    z[k * n + iu] = c * z[k * n + iu] - s * f;
                }
                i -= 1;
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Cyclic Jacobi eigensolver; slower than [`herm_eig`] but independent of it.
pub fn herm_eig_jacobi<T: Real>(m: &Matrix<T>) -> Result<HermitianEigen<T>> {
    m.require_hermitian(T::lit(DEFAULT.hermitian))?;
    jacobi(m.hermitian_part(), Matrix::identity(m.rows()))
}

fn jacobi<T: Real>(mut a: Matrix<T>, mut v: Matrix<T>) -> Result<HermitianEigen<T>> {
    let n = a.rows();
    let scale = a.frobenius_norm();
    let eps = T::epsilon();
    let mut converged = n <= 1 || scale == T::zero();
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
        sweep += 1;
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * scale {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= eps * scale / T::from_usize(n).expect("size") {
                    continue;
                }
                rotate(&mut a, &mut v, p, q, apq, mag);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        converged = off.sqrt() <= eps * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = Matrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate<T: Real>(a: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize, apq: Complex<T>, mag: T) {
    let n = a.rows();
    // Phase that makes the pivot real, then a real symmetric rotation.
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let t =
        if theta == T::zero() { T::one() } else { theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt()) };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    // G = [[c, s], [-s·conj(phase), c·conj(phase)]] on columns (p, q).
    let g_pp = Complex::new(c, T::zero());
    let g_pq = Complex::new(s, T::zero());
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Eigendecomposition of a real symmetric `n × n` matrix stored row-major.
///
/// Returns `(values, vectors)` with values descending and eigenvectors stored
/// as columns of the row-major `vectors`.
pub fn sym_eig<T: Real>(a: &[T], n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch(format!("{} entries for a {n}x{n} matrix", a.len())));
    }
    let mut a: Vec<T> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            (a[i * n + j] + a[j * n + i]) * T::lit(0.5)
        })
        .collect();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let scale = a.iter().map(|x| *x * *x).sum::<T>().sqrt();
    let eps = T::epsilon();
    let off_norm = |a: &[T]| {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        off.sqrt()
    };
    let mut sweep = 0;
    while n > 1 && scale > T::zero() && off_norm(&a) > eps * scale {
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
        sweep += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= eps * scale / T::from_usize(n).expect("size") {
                    continue;
                }
                rotated = true;
                let theta = (a[q * n + q] - a[p * n + p]) / (T::lit(2.0) * apq);
                let t = if theta == T::zero() {
                    T::one()
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].partial_cmp(&a[i * n + i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for i in 0..n {
        for (k, &src) in order.iter().enumerate() {
            vectors[i * n + k] = v[i * n + src];
        }
    }
    Ok((values, vectors))
}

/// Frobenius-nearest positive semidefinite matrix (negative eigenvalues clamped to zero).
pub fn psd_project<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = herm_eig(m)?;
    Ok(eig.reconstruct_with(|l| l.max(T::zero())))
}

/// Number of eigenvalues with `|λ| > eps · max(1, ‖M‖_F)`.
pub fn rank_eps<T: Real>(m: &Matrix<T>, eps: T) -> Result<usize> {
    let eig = herm_eig(m)?;
    let thresh = eps * T::one().max(m.frobenius_norm());
    Ok(eig.values.iter().filter(|l| l.abs() > thresh).count())
}

pub fn min_eigenvalue<T: Real>(m: &Matrix<T>) -> Result<T> {
    Ok(herm_eig(m)?.values.last().copied().unwrap_or_else(T::zero))
}

/// Largest eigenvalue modulus of a Hermitian matrix.
pub fn operator_norm<T: Real>(m: &Matrix<T>) -> Result<T> {
    Ok(herm_eig(m)?.values.iter().fold(T::zero(), |acc, l| acc.max(l.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = Matrix<f64>;

    fn random_hermitian(n: usize, seed: u64) -> M {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = M::from_fn(n, n, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        g.hermitian_part()
    }

    #[test]
    fn diagonal_input() {
        let e = herm_eig(&M::diag_real(&[1.0, 3.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        let v = &e.vectors;
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-15 && (v[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = M::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = herm_eig(&x).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        for seed in 0..5 {
            let m = random_hermitian(6, seed);
            let e = herm_eig(&m).unwrap();
            assert!(e.reconstruct_with(|l| l).approx_eq(&m, 1e-9));
            let vv = e.vectors.adjoint() * e.vectors.clone();
            assert!(vv.approx_eq(&M::identity(6), 1e-10));
            let mv = &m * &e.vectors;
            let vl = &e.vectors * &M::diag(&e.values);
            assert!((&mv - &vl).frobenius_norm() <= 1e-10 * m.frobenius_norm().max(1.0));
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = M::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn psd_projection_examples() {
        let p = psd_project(&M::diag_real(&[2.0, -1.0])).unwrap();
        assert!(p.approx_eq(&M::diag_real(&[2.0, 0.0]), 1e-14));
        let x = M::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let half = M::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(psd_project(&x).unwrap().approx_eq(&half, 1e-14));
        let psd = M::diag_real(&[1.0, 0.5, 0.0]);
        assert!(psd_project(&psd).unwrap().approx_eq(&psd, 1e-10));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_eps(&M::diag_real(&[2.0, 0.0]), 1e-9).unwrap(), 1);
        assert_eq!(rank_eps(&M::diag_real(&[1.0, 1.0]), 1e-9).unwrap(), 2);
        assert_eq!(rank_eps(&M::zeros(3, 3), 1e-9).unwrap(), 0);
    }

    #[test]
    fn real_symmetric_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 7;
        let g: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (vals, vecs) = sym_eig(&g, n).unwrap();
        let sym = |i: usize, j: usize| 0.5 * (g[i * n + j] + g[j * n + i]);
        for k in 0..n {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| sym(i, j) * vecs[j * n + k]).sum();
                assert!((av - vals[k] * vecs[i * n + k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let m = random_hermitian(4, 11).cast::<f32>();
        let e = herm_eig(&m).unwrap();
        assert!(e.reconstruct_with(|l| l).approx_eq(&m, 1e-4));
    }
}
