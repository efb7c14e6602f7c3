//! Extreme points of classes of completely positive maps `M_n → M_m`.
//!
//! Maps are given by Choi matrices; internally the Kraus operators are taken
//! in the adjoint convention `V_i = A_i*` (`n × m`), so that
//! `φ(X) = Σ_i V_i* X V_i`. A class `CP[M_n, M_m; 𝒮, 𝒯, Φ]` consists of the CP
//! maps agreeing with `Φ` on the operator space `𝒮 ⊂ M_n` and whose duals
//! agree with `Φ*` on `𝒯 ⊂ M_m`.

use num_complex::Complex;
use rand::Rng;

use crate::choi::{ChannelChoi, KrausSet};
use crate::config::DEFAULT;
use crate::error::{Error, Result};
use crate::matcore::{herm_eig, min_eigenvalue, operator_norm, sym_eig, vector_rank, Matrix};
use crate::opsys::basis_s;
use crate::random;
use crate::scalar::Real;
use crate::supermap::Superchannel;

/// Hermitian spanning sets of `𝒮 ⊂ M_n` and `𝒯 ⊂ M_m` (either may be empty).
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSpaces<T: Real = f64> {
    s_basis: Vec<Matrix<T>>,
    t_basis: Vec<Matrix<T>>,
}

impl<T: Real> ConstraintSpaces<T> {
    pub fn new(s_basis: Vec<Matrix<T>>, t_basis: Vec<Matrix<T>>) -> Result<Self> {
        let tol = T::lit(DEFAULT.hermitian);
        for (index, m) in s_basis.iter().chain(&t_basis).enumerate() {
            if !m.is_square() || !m.is_hermitian(tol) {
                return Err(Error::NonHermitianSpan { index });
            }
        }
        for set in [&s_basis, &t_basis] {
            if let Some(first) = set.first() {
                if set.iter().any(|m| m.shape() != first.shape()) {
                    return Err(Error::DimensionMismatch("spanning set with mixed sizes".into()));
                }
            }
        }
        Ok(Self { s_basis, t_basis })
    }

    /// `𝒮 = M_n` (all maps are pinned), `𝒯 = ∅`.
    pub fn full(n: usize) -> Self {
        Self::new(hermitian_units(n), Vec::new()).expect("Hermitian by construction")
    }

    /// `𝒮 = ℂ I_n`, `𝒯 = ∅`: maps with a fixed `φ(I)`.
    pub fn identity_only(n: usize) -> Self {
        Self::new(vec![Matrix::identity(n)], Vec::new()).expect("Hermitian by construction")
    }

    /// `𝒮 = ℂ I_n`, `𝒯 = ℂ I_m`: unital trace-preserving maps.
    pub fn unital_tp(n: usize, m: usize) -> Self {
        Self::new(vec![Matrix::identity(n)], vec![Matrix::identity(m)]).expect("Hermitian by construction")
    }

    /// `𝒮 = S(d, r) ⊂ M_{dr}`, `𝒯 = ∅`: extensions of a QSC.
    pub fn operator_system(d: usize, r: usize) -> Self {
        Self::new(hermitian_span(&basis_s::<T>(d, r)), Vec::new()).expect("Hermitian by construction")
    }

    pub fn s_basis(&self) -> &[Matrix<T>] {
        &self.s_basis
    }

    pub fn t_basis(&self) -> &[Matrix<T>] {
        &self.t_basis
    }
}

/// Hermitian matrices spanning the same space as a self-adjoint family:
/// the parts `(B + B*)/2` and `(B − B*)/(2i)`, dropping zeros.
pub fn hermitian_span<T: Real>(elements: &[Matrix<T>]) -> Vec<Matrix<T>> {
    let mut out = Vec::new();
    for b in elements {
        let scale = T::one().max(b.frobenius_norm());
        for h in [b.hermitian_part(), b.antihermitian_part()] {
            if h.frobenius_norm() > T::lit(1e-12) * scale {
                out.push(h);
            }
        }
    }
    out
}

/// `E_kk`, `E_kl + E_lk`, `i(E_kl − E_lk)`: a Hermitian basis of `M_n`.
pub fn hermitian_units<T: Real>(n: usize) -> Vec<Matrix<T>> {
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push(Matrix::unit(n, k, k));
    }
    for k in 0..n {
        for l in k + 1..n {
            out.push(&Matrix::unit(n, k, l) + &Matrix::unit(n, l, k));
            let mut m = Matrix::zeros(n, n);
            m[(k, l)] = Complex::i();
            m[(l, k)] = -Complex::i();
            out.push(m);
        }
    }
    out
}

/// Minimal (linearly independent) Kraus operators from the Choi eigenvectors.
pub fn minimal_kraus<T: Real>(phi: &ChannelChoi<T>, tol: T) -> Result<KrausSet<T>> {
    if !phi.is_cp(tol) {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: phi.min_eigenvalue()?.as_f64() });
    }
    let k = phi.kraus(tol)?;
    let independent = k.independent_count(T::lit(DEFAULT.independence))?;
    if independent != k.len() {
        return Err(Error::InvalidData(format!(
            "Kraus operators from the Choi eigenvectors are dependent ({independent} of {})",
            k.len()
        )));
    }
    Ok(k)
}

/// `V_i = A_i* / ‖A_i‖`; rescaling does not change linear independence of
/// the product families below but keeps them well conditioned.
fn v_ops<T: Real>(phi: &ChannelChoi<T>, tol: T) -> Result<Vec<Matrix<T>>> {
    Ok(minimal_kraus(phi, tol)?
        .adjoint_ops()
        .into_iter()
        .map(|v| {
            let n = v.frobenius_norm();
            v.scale(T::one() / n)
        })
        .collect())
}

fn full_rank<T: Real>(vectors: &[Vec<Complex<T>>], k: usize) -> Result<bool> {
    Ok(vector_rank(vectors, T::lit(DEFAULT.independence))? == k * k)
}

fn pair_vectors<T: Real>(
    v: &[Matrix<T>],
    mut f: impl FnMut(&Matrix<T>, &Matrix<T>) -> Result<Vec<Complex<T>>>,
) -> Result<Vec<Vec<Complex<T>>>> {
    let mut out = Vec::with_capacity(v.len() * v.len());
    for vi in v {
        for vj in v {
            out.push(f(vi, vj)?);
        }
    }
    Ok(out)
}

/// Choi's criterion: `φ` is extreme among CP maps with the same `φ(I)` iff
/// `{V_i* V_j}` is linearly independent.
pub fn is_extreme_choi<T: Real>(phi: &ChannelChoi<T>, tol: T) -> Result<bool> {
    let v = v_ops(phi, tol)?;
    let vecs = pair_vectors(&v, |vi, vj| Ok(vi.adjoint().matmul(vj)?.vectorize()))?;
    full_rank(&vecs, v.len())
}

/// Extremality among unital trace-preserving CP maps: `{V_i* V_j ⊕ V_j V_i*}`
/// linearly independent.
pub fn is_extreme_unital_tp<T: Real>(phi: &ChannelChoi<T>, tol: T) -> Result<bool> {
    if !phi.is_cp(tol) || !phi.is_tp(tol) || !phi.is_unital(tol) {
        return Err(Error::Precondition("map must be CP, trace preserving and unital".into()));
    }
    let v = v_ops(phi, tol)?;
    let vecs = pair_vectors(&v, |vi, vj| {
        let mut x = vi.adjoint().matmul(vj)?.vectorize();
        x.extend(vj.matmul(&vi.adjoint())?.vectorize());
        Ok(x)
    })?;
    full_rank(&vecs, v.len())
}

fn check_spaces<T: Real>(phi: &ChannelChoi<T>, spaces: &ConstraintSpaces<T>) -> Result<()> {
    let (n, m) = (phi.d(), phi.r());
    if spaces.s_basis.iter().any(|a| a.shape() != (n, n)) || spaces.t_basis.iter().any(|b| b.shape() != (m, m)) {
        return Err(Error::DimensionMismatch(format!("constraint spaces must live in M_{n} and M_{m}")));
    }
    Ok(())
}

/// `φ` is extreme in `CP[M_n, M_m; 𝒮, 𝒯, φ]` iff the `k²` vectors
/// `⊕_k V_i* A_k V_j ⊕_l V_j B_l V_i*` are linearly independent.
pub fn is_extreme_constrained<T: Real>(phi: &ChannelChoi<T>, spaces: &ConstraintSpaces<T>, tol: T) -> Result<bool> {
    check_spaces(phi, spaces)?;
    let v = v_ops(phi, tol)?;
    if v.is_empty() {
        return Ok(true);
    }
    let vecs = pair_vectors(&v, |vi, vj| {
        let vi_adj = vi.adjoint();
        let mut x = Vec::new();
        for a in &spaces.s_basis {
            x.extend(vi_adj.matmul(a)?.matmul(vj)?.vectorize());
        }
        for b in &spaces.t_basis {
            x.extend(vj.matmul(b)?.matmul(&vi_adj)?.vectorize());
        }
        Ok(x)
    })?;
    if vecs[0].is_empty() {
        // no constraints at all: only the zero map is extreme
        return Ok(false);
    }
    full_rank(&vecs, v.len())
}

/// Extremality of a superchannel among the CP extensions of its QSC.
pub fn is_extreme_extension<T: Real>(s: &Superchannel<T>, tol: T) -> Result<bool> {
    let (d1, r1, _, _) = s.dims();
    is_extreme_constrained(&s.as_channel(), &ConstraintSpaces::operator_system(d1, r1), tol)
}

/// Outcome of [`perturbation_search_oracle`].
#[derive(Clone, Debug)]
pub struct OracleVerdict<T: Real = f64> {
    pub extreme_likely: bool,
    /// Real dimension of the space of admissible Hermitian perturbations.
    pub null_dimension: usize,
    /// Choi matrices `D` of admissible perturbations (unit Frobenius norm).
    pub directions: Vec<Matrix<T>>,
    /// A step `s` with `C ± s·D` verified PSD for the first verified direction.
    pub step: Option<T>,
}

/// Largest number of real unknowns the oracle accepts.
pub const ORACLE_CAP: usize = 1000;

/// Brute-force check in the Choi picture. With `W` spanning the range of
/// `C_φ`, perturbations are `D = W Λ W*` for Hermitian `Λ`. The admissible
/// ones satisfy `D(A) = 0` on `𝒮` and `D*(B) = 0` on `𝒯`; if one exists,
/// `C ± s D` stays PSD for small `s` and `φ` is the midpoint of two distinct
/// members of its class. `trials` random admissible directions are tried in
/// addition to the null-space basis.
pub fn perturbation_search_oracle<T: Real>(
    phi: &ChannelChoi<T>,
    spaces: &ConstraintSpaces<T>,
    trials: usize,
    eps: T,
) -> Result<OracleVerdict<T>> {
    check_spaces(phi, spaces)?;
    let tol = T::lit(DEFAULT.default);
    let c = phi.choi();
    let scale = T::one().max(c.frobenius_norm());
    let eig = herm_eig(c)?;
    if eig.values.last().copied().unwrap_or_else(T::zero) < -tol * scale {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: eig.values.last().copied().unwrap_or_else(T::zero).as_f64(),
        });
    }
    let kept: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] > tol * scale).collect();
    let k = kept.len();
    let unknowns = k * k;
    if unknowns > ORACLE_CAP {
        return Err(Error::SizeCap { unknowns, cap: ORACLE_CAP });
    }
    if k == 0 {
        return Ok(OracleVerdict { extreme_likely: true, null_dimension: 0, directions: Vec::new(), step: None });
    }
    let nm = c.rows();
    let w = Matrix::from_fn(nm, k, |i, j| eig.vectors[(i, kept[j])]);
    let smallest = eig.values[kept[k - 1]];

    let lambdas = hermitian_units::<T>(k);
    let norms: Vec<T> = lambdas.iter().map(|l| l.frobenius_norm()).collect();
    let mut columns: Vec<Vec<T>> = Vec::with_capacity(unknowns);
    let mut perturbations = Vec::with_capacity(unknowns);
    for (lam, nrm) in lambdas.iter().zip(&norms) {
        let lam = lam.scale(T::one() / *nrm);
        let d = w.matmul(&lam)?.matmul(&w.adjoint())?.hermitian_part();
        let dmap = ChannelChoi::new(phi.d(), phi.r(), d.clone())?;
        let dual = dmap.dual();
        let mut col = Vec::new();
        for a in &spaces.s_basis {
            for z in dmap.apply(a)?.data() {
                col.push(z.re);
                col.push(z.im);
            }
        }
        for b in &spaces.t_basis {
            for z in dual.apply(b)?.data() {
                col.push(z.re);
                col.push(z.im);
            }
        }
        columns.push(col);
        perturbations.push(d);
    }
    // Null space of the constraint operator through its real Gram matrix.
    let p = unknowns;
    let mut gram = vec![T::zero(); p * p];
    for i in 0..p {
        for j in i..p {
            let g: T = columns[i].iter().zip(&columns[j]).map(|(a, b)| *a * *b).sum();
            gram[i * p + j] = g;
            gram[j * p + i] = g;
        }
    }
    let (values, vectors) = sym_eig(&gram, p)?;
    let top = values.first().copied().unwrap_or_else(T::zero).max(T::zero());
    let cut = T::lit(DEFAULT.independence) * top;
    let null: Vec<usize> = (0..p).filter(|&i| top == T::zero() || values[i] <= cut).collect();
    let directions: Vec<Matrix<T>> = null
        .iter()
        .map(|&col| {
            let mut d = Matrix::zeros(nm, nm);
            for (idx, pert) in perturbations.iter().enumerate() {
                d += &pert.scale(vectors[idx * p + col]);
            }
            let n = d.frobenius_norm();
            d.scale(T::one() / n)
        })
        .collect();
    if directions.is_empty() {
        return Ok(OracleVerdict { extreme_likely: true, null_dimension: 0, directions, step: None });
    }
    let mut candidates = directions.clone();
    let mut g = random::rng(0x5eed);
    for _ in 0..trials {
        let mut d = Matrix::zeros(nm, nm);
        for dir in &directions {
            let coef: f64 = g.random_range(-1.0..1.0);
            d += &dir.scale(T::lit(coef));
        }
        let n = d.frobenius_norm();
        if n > T::zero() {
            candidates.push(d.scale(T::one() / n));
        }
    }
    for d in &candidates {
        let s = eps * smallest / operator_norm(d)?.max(T::epsilon());
        let plus = c + &d.scale(s);
        let minus = c - &d.scale(s);
        if min_eigenvalue(&plus)? >= -tol * scale && min_eigenvalue(&minus)? >= -tol * scale {
            return Ok(OracleVerdict {
                extreme_likely: false,
                null_dimension: directions.len(),
                directions,
                step: Some(s),
            });
        }
    }
    Ok(OracleVerdict { extreme_likely: true, null_dimension: directions.len(), directions, step: None })
}

/// Summary used by the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ExtremeReport {
    pub extreme_choi: bool,
    /// `None` when the map is not unital and trace preserving.
    pub extreme_unital_tp: Option<bool>,
    pub extreme_constrained: bool,
    pub kraus_count: usize,
}

/// `extreme_constrained` uses `spaces`.
pub fn extreme_report<T: Real>(phi: &ChannelChoi<T>, spaces: &ConstraintSpaces<T>, tol: T) -> Result<ExtremeReport> {
    let kraus_count = minimal_kraus(phi, tol)?.len();
    let extreme_unital_tp = match is_extreme_unital_tp(phi, tol) {
        Ok(b) => Some(b),
        Err(Error::Precondition(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ExtremeReport {
        extreme_choi: is_extreme_choi(phi, tol)?,
        extreme_unital_tp,
        extreme_constrained: is_extreme_constrained(phi, spaces, tol)?,
        kraus_count,
    })
}

/// Direction-free convenience: `trials = 8`, `eps = 1e-3`.
pub fn oracle_says_extreme<T: Real>(phi: &ChannelChoi<T>, spaces: &ConstraintSpaces<T>) -> Result<bool> {
    Ok(perturbation_search_oracle(phi, spaces, 8, T::lit(1e-3))?.extreme_likely)
}
