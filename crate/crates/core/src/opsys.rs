//! The operator system `S(d, r) ⊂ M_d(M_r)`: block matrices whose diagonal
//! blocks share a common trace and whose off-diagonal blocks are traceless.
//! Equivalently `Tr_r X ∈ ℂ·I_d`. It is exactly the span of Choi matrices of
//! quantum channels `M_d → M_r`.

use num_complex::Complex;
use num_traits::Zero;

use crate::choi::ChannelChoi;
use crate::error::{Error, Result};
use crate::matcore::{min_eigenvalue, operator_norm, Matrix};
use crate::scalar::Real;

/// Outcome of [`in_s`]. `lambda` is the common diagonal-block trace, i.e. the
/// trace-scaling factor of the corresponding linear map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SMembership<T: Real = f64> {
    pub member: bool,
    pub lambda: Complex<T>,
}

fn check_shape<T: Real>(c: &Matrix<T>, d: usize, r: usize) -> Result<()> {
    if c.shape() != (d * r, d * r) {
        return Err(Error::DimensionMismatch(format!(
            "expected a {0}x{0} element of M_{d}(M_{r}), found {1}x{2}",
            d * r,
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

/// `Tr` of every `r × r` block, as a `d × d` matrix (this is `Tr_r C`).
fn block_traces<T: Real>(c: &Matrix<T>, d: usize, r: usize) -> Matrix<T> {
    Matrix::from_fn(d, d, |i, j| (0..r).map(|s| c[(i * r + s, j * r + s)]).sum())
}

pub fn in_s<T: Real>(c: &Matrix<T>, d: usize, r: usize, tol: T) -> Result<SMembership<T>> {
    check_shape(c, d, r)?;
    let traces = block_traces(c, d, r);
    let n = T::from_usize(d).expect("small dimension");
    let lambda = traces.trace() / n;
    let bound = tol * T::one().max(c.frobenius_norm());
    let mut member = true;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { lambda } else { Complex::zero() };
            if (traces[(i, j)] - target).norm() > bound {
                member = false;
            }
        }
    }
    Ok(SMembership { member, lambda })
}

/// Hilbert–Schmidt orthogonal projection of `c` onto `S(d, r)`.
pub fn project_s<T: Real>(c: &Matrix<T>, d: usize, r: usize) -> Result<Matrix<T>> {
    check_shape(c, d, r)?;
    let traces = block_traces(c, d, r);
    let rr = T::from_usize(r).expect("small dimension");
    let mean = traces.trace() / T::from_usize(d).expect("small dimension");
    let mut out = c.clone();
    for i in 0..d {
        for j in 0..d {
            let excess = if i == j { traces[(i, j)] - mean } else { traces[(i, j)] };
            if excess.is_zero() {
                continue;
            }
            let shift = excess / rr;
            for s in 0..r {
                out[(i * r + s, j * r + s)] -= shift;
            }
        }
    }
    Ok(out)
}

/// `dim S(d, r) = d²r² − d² + 1`.
pub fn dimension(d: usize, r: usize) -> usize {
    d * d * r * r - d * d + 1
}

/// Canonical orthonormal basis of `S(d, r)`: matrix units of `M_{dr}` in
/// row-major order, projected onto `S(d, r)`, then modified Gram–Schmidt
/// under the Hilbert–Schmidt inner product (drop tolerance `1e-10`).
pub fn basis_s<T: Real>(d: usize, r: usize) -> Vec<Matrix<T>> {
    let n = d * r;
    let drop = T::lit(crate::config::DEFAULT.gram_schmidt);
    let mut basis: Vec<Matrix<T>> = Vec::with_capacity(dimension(d, r));
    for a in 0..n {
        for b in 0..n {
            let mut v = project_s(&Matrix::unit(n, a, b), d, r).expect("square unit");
            for _ in 0..2 {
                for u in &basis {
                    let proj = u.hs_inner(&v);
                    if !proj.is_zero() {
                        v -= &u.scale_c(proj);
                    }
                }
            }
            let norm = v.frobenius_norm();
            if norm > drop {
                basis.push(v.scale(T::one() / norm));
            }
        }
    }
    basis
}

/// Write an element of `S(d, r)` as `Σ_k c_k C_{φ_k}` with every `φ_k` CPTP.
///
/// Uses `X = (P_1 − P_2) + i(P_3 − P_4)` with `P_± = (‖H‖ I ± H)/2` for the
/// Hermitian and anti-Hermitian parts `H`, each `P` rescaled to unit block
/// trace. Returns at most four terms; the zero matrix gives none, and a PSD
/// input with positive trace scaling short-circuits to a single term.
pub fn decompose_cptp<T: Real>(c: &Matrix<T>, d: usize, r: usize, tol: T) -> Result<Vec<(Complex<T>, ChannelChoi<T>)>> {
    let membership = in_s(c, d, r, tol)?;
    if !membership.member {
        return Err(Error::NotInOperatorSystem { d, r });
    }
    let scale = T::one().max(c.frobenius_norm());
    if c.is_hermitian(tol) {
        let lam = membership.lambda.re;
        if lam > tol * scale && min_eigenvalue(c)? >= -tol * scale {
            let channel = ChannelChoi::new(d, r, c.hermitian_part().scale(T::one() / lam))?;
            return Ok(vec![(Complex::new(lam, T::zero()), channel)]);
        }
    }
    let identity = Matrix::identity(d * r);
    let half = T::lit(0.5);
    let parts = [(c.hermitian_part(), Complex::new(T::one(), T::zero())), (c.antihermitian_part(), Complex::i())];
    let mut terms = Vec::new();
    for (h, unit) in parts {
        if h.frobenius_norm() <= T::epsilon() * scale {
            continue;
        }
        let norm = operator_norm(&h)?;
        for sign in [T::one(), -T::one()] {
            let p = (&identity.scale(norm) + &h.scale(sign)).scale(half);
            // Hermitian and positive, so its block traces are real and ≥ 0.
            let lam = in_s(&p, d, r, tol)?.lambda.re;
            if lam <= T::epsilon() * scale {
                continue;
            }
            let channel = ChannelChoi::new(d, r, p.scale(T::one() / lam))?;
            terms.push((unit * (sign * lam), channel));
        }
    }
    Ok(terms)
}

/// `dim S(d1d2, r1r2) − dim S(d1, r1) · dim S(d2, r2)`.
pub fn tensor_dimension_gap(d1: usize, r1: usize, d2: usize, r2: usize) -> i64 {
    dimension(d1 * d2, r1 * r2) as i64 - (dimension(d1, r1) * dimension(d2, r2)) as i64
}

/// Tensor of `x ∈ M_{d1}(M_{r1})` and `y ∈ M_{d2}(M_{r2})` regrouped as an
/// element of `M_{d1 d2}(M_{r1 r2})` (factor order `(d1, d2, r1, r2)`).
pub fn tensor_elements<T: Real>(
    x: &Matrix<T>,
    (d1, r1): (usize, usize),
    y: &Matrix<T>,
    (d2, r2): (usize, usize),
) -> Result<Matrix<T>> {
    check_shape(x, d1, r1)?;
    check_shape(y, d2, r2)?;
    x.kron(y).permute_factors(&[d1, r1, d2, r2], &[0, 2, 1, 3])
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    #[test]
    fn cptp_choi_is_member_with_unit_lambda() {
        let c = ChannelChoi::<f64>::random(2, 3, 2, 1).unwrap();
        let m = in_s(c.choi(), 2, 3, 1e-9).unwrap();
        assert!(m.member);
        assert!((m.lambda - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_has_lambda_r() {
        let m = in_s(&M::identity(6), 2, 3, 1e-9).unwrap();
        assert!(m.member && (m.lambda.re - 3.0).abs() < 1e-15);
    }

    #[test]
    fn unequal_diagonal_is_not_member() {
        let m = in_s(&M::diag_real(&[1.0, 2.0]), 2, 1, 1e-9).unwrap();
        assert!(!m.member);
        assert!(in_s(&M::identity(3), 2, 2, 1e-9).is_err());
    }

    #[test]
    fn projection_examples() {
        let c = ChannelChoi::<f64>::random(2, 2, 3, 4).unwrap();
        assert!(project_s(c.choi(), 2, 2).unwrap().approx_eq(c.choi(), 1e-14));
        let p = project_s(&M::diag_real(&[1.0, 5.0]), 2, 1).unwrap();
        assert!(p.approx_eq(&M::diag_real(&[3.0, 3.0]), 1e-14));
        for r in [1, 2] {
            let x = M::unit(2, 0, 1).kron(&M::identity(r));
            assert!(project_s(&x, 2, r).unwrap().frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(basis_s::<f64>(1, 3).len(), 9);
        assert_eq!(basis_s::<f64>(2, 2).len(), 13);
        for d in 1..=3 {
            for r in 1..=3 {
                let basis = basis_s::<f64>(d, r);
                assert_eq!(basis.len(), dimension(d, r), "d={d} r={r}");
                for b in &basis {
                    let m = in_s(b, d, r, 1e-9).unwrap();
                    assert!(m.member && m.lambda.norm().is_finite());
                }
            }
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        let basis = basis_s::<f64>(2, 3);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.hs_inner(b) - Complex::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn decompose_short_circuits_on_channels() {
        let c = ChannelChoi::<f64>::random(2, 2, 2, 3).unwrap();
        let terms = decompose_cptp(c.choi(), 2, 2, 1e-9).unwrap();
        assert_eq!(terms.len(), 1);
        assert!((terms[0].0 - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!(terms[0].1.choi().approx_eq(c.choi(), 1e-12));
    }

    #[test]
    fn decompose_differences() {
        let a = ChannelChoi::<f64>::random(2, 2, 2, 10).unwrap();
        let b = ChannelChoi::<f64>::random(2, 2, 3, 11).unwrap();
        let diff = a.choi() - b.choi();
        for target in [diff.clone(), diff.scale_c(Complex::i())] {
            let terms = decompose_cptp(&target, 2, 2, 1e-9).unwrap();
            assert!(!terms.is_empty() && terms.len() <= 4);
            let mut sum = M::zeros(4, 4);
            for (coef, ch) in &terms {
                assert!(ch.is_cp(1e-9) && ch.is_tp(1e-9));
                sum += &ch.choi().scale_c(*coef);
            }
            assert!(sum.approx_eq(&target, 1e-9));
        }
    }

    #[test]
    fn decompose_zero_and_non_members() {
        assert!(decompose_cptp(&M::zeros(4, 4), 2, 2, 1e-9).unwrap().is_empty());
        assert!(matches!(
            decompose_cptp(&M::diag_real(&[1.0, 2.0]), 2, 1, 1e-9),
            Err(Error::NotInOperatorSystem { .. })
        ));
    }

    #[test]
    fn dimension_gaps() {
        assert_eq!(tensor_dimension_gap(1, 2, 1, 3), 0);
        assert_eq!(tensor_dimension_gap(2, 2, 2, 2), 72);
        assert_eq!(tensor_dimension_gap(2, 1, 2, 1), 0);
    }
}
