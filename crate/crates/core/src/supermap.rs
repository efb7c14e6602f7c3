//! Supermaps `M_{d1}(M_{r1}) → M_{d2}(M_{r2})` acting on Choi matrices of
//! linear maps, stored through their own Choi matrix on the factor order
//! `(d1, r1, d2, r2)`:
//!
//! `C_Σ = Σ_{G} G ⊗ Σ̃(G)` over the matrix units `G` of `M_{d1 r1}`.
//!
//! A superchannel is a supermap with PSD Choi matrix that maps `S(d1, r1)`
//! into `S(d2, r2)` preserving the trace-scaling factor.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::choi::ChannelChoi;
use crate::error::{Error, Result};
use crate::matcore::{herm_eig, lstsq, min_eigenvalue, rank_eps, Matrix};
use crate::opsys::{basis_s, in_s, project_s};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSuper<T>", bound = "")]
pub struct Superchannel<T: Real = f64> {
    d1: usize,
    r1: usize,
    d2: usize,
    r2: usize,
    choi: Matrix<T>,
}

#[derive(Deserialize)]
#[serde(bound = "")]
struct RawSuper<T: Real> {
    d1: usize,
    r1: usize,
    d2: usize,
    r2: usize,
    choi: Matrix<T>,
}

impl<T: Real> TryFrom<RawSuper<T>> for Superchannel<T> {
    type Error = Error;

    fn try_from(raw: RawSuper<T>) -> Result<Self> {
        Superchannel::new(raw.d1, raw.r1, raw.d2, raw.r2, raw.choi)
    }
}

/// Detailed outcome of [`Superchannel::check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuperchannelCheck<T: Real = f64> {
    pub hermitian_defect: T,
    pub min_eigenvalue: T,
    pub completely_positive: bool,
    /// Worst distance of an image of `basis_S(d1, r1)` from `S(d2, r2)` plus
    /// its trace-scaling mismatch.
    pub tp_defect: T,
    pub tp_preserving: bool,
}

impl<T: Real> SuperchannelCheck<T> {
    pub fn is_superchannel(&self) -> bool {
        self.completely_positive && self.tp_preserving
    }
}

fn scale_of<T: Real>(m: &Matrix<T>) -> T {
    T::one().max(m.frobenius_norm())
}

fn usize_to<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("small dimension")
}

/// Largest entry of `U*U − I` in absolute value.
pub fn unitary_defect<T: Real>(u: &Matrix<T>) -> Result<T> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix cannot be unitary", u.rows(), u.cols())));
    }
    let g = u.adjoint().matmul(u)?;
    Ok((&g - &Matrix::identity(u.rows())).max_abs())
}

fn require_unitary<T: Real>(u: &Matrix<T>, tol: T) -> Result<()> {
    let defect = unitary_defect(u)?;
    if defect > tol {
        return Err(Error::NotUnitary { kind: "unitary", defect: defect.as_f64() });
    }
    Ok(())
}

impl<T: Real> Superchannel<T> {
    pub fn new(d1: usize, r1: usize, d2: usize, r2: usize, choi: Matrix<T>) -> Result<Self> {
        let n = d1 * r1 * d2 * r2;
        if d1 * r1 * d2 * r2 == 0 || choi.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "supermap Choi matrix for dims ({d1},{r1})->({d2},{r2}) must be {n}x{n}, found {}x{}",
                choi.rows(),
                choi.cols()
            )));
        }
        Ok(Self { d1, r1, d2, r2, choi })
    }

    /// Supermap given on the matrix units of `M_{d1 r1}`.
    pub fn from_map(
        d1: usize,
        r1: usize,
        d2: usize,
        r2: usize,
        f: impl Fn(&Matrix<T>) -> Result<Matrix<T>>,
    ) -> Result<Self> {
        let n_in = d1 * r1;
        let n_out = d2 * r2;
        let mut choi = Matrix::zeros(n_in * n_out, n_in * n_out);
        for a in 0..n_in {
            for b in 0..n_in {
                let img = f(&Matrix::unit(n_in, a, b))?;
                if img.shape() != (n_out, n_out) {
                    return Err(Error::DimensionMismatch(format!(
                        "image of a matrix unit is {}x{}, expected {n_out}x{n_out}",
                        img.rows(),
                        img.cols()
                    )));
                }
                choi.set_block(a, b, &img);
            }
        }
        Self::new(d1, r1, d2, r2, choi)
    }

    /// `C ↦ C` on `M_d(M_r)`.
    pub fn identity(d: usize, r: usize) -> Self {
        Self::from_map(d, r, d, r, |g| Ok(g.clone())).expect("consistent dimensions")
    }

    /// `C ↦ U C U*` for a unitary `U` on `ℂ^d ⊗ ℂ^r`. This is a superchannel
    /// exactly when `U` factors as `U1 ⊗ U2`.
    pub fn conjugation(u: &Matrix<T>, d: usize, r: usize) -> Result<Self> {
        if u.shape() != (d * r, d * r) {
            return Err(Error::DimensionMismatch(format!("unitary must be {0}x{0}", d * r)));
        }
        require_unitary(u, T::lit(1e-9))?;
        Self::from_map(d, r, d, r, |g| u.conjugate_by(g))
    }

    /// Unitary superchannel `C ↦ (U1 ⊗ U2) C (U1 ⊗ U2)*`, i.e.
    /// `φ ↦ Ad(U2) ∘ φ ∘ Ad(U1ᵀ)` on the level of maps.
    pub fn unitary(u1: &Matrix<T>, u2: &Matrix<T>) -> Result<Self> {
        require_unitary(u1, T::lit(1e-9))?;
        require_unitary(u2, T::lit(1e-9))?;
        Self::conjugation(&u1.kron(u2), u1.rows(), u2.rows())
    }

    /// `Σ_k w_k Σ_k`; all terms must share dimensions.
    pub fn combine(terms: &[(T, &Self)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or_else(|| Error::InvalidData("empty combination".into()))?;
        let mut choi = Matrix::zeros(first.choi.rows(), first.choi.cols());
        for (w, s) in terms {
            if s.dims() != first.dims() {
                return Err(Error::DimensionMismatch("supermaps with different dimensions".into()));
            }
            choi += &s.choi.scale(*w);
        }
        Self::new(first.d1, first.r1, first.d2, first.r2, choi)
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.d1, self.r1, self.d2, self.r2)
    }

    pub fn choi(&self) -> &Matrix<T> {
        &self.choi
    }

    pub fn into_choi(self) -> Matrix<T> {
        self.choi
    }

    /// The supermap viewed as a linear map `M_{d1 r1} → M_{d2 r2}`.
    pub fn as_channel(&self) -> ChannelChoi<T> {
        ChannelChoi::new(self.d1 * self.r1, self.d2 * self.r2, self.choi.clone()).expect("consistent dimensions")
    }

    pub fn cast<U: Real>(&self) -> Superchannel<U> {
        Superchannel { d1: self.d1, r1: self.r1, d2: self.d2, r2: self.r2, choi: self.choi.cast() }
    }

    /// `Σ̃(X) = Σ_{ab} X_{ab} Σ̃(G_{ab})` for `X ∈ M_{d1}(M_{r1})`.
    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let n_in = self.d1 * self.r1;
        let n_out = self.d2 * self.r2;
        if x.shape() != (n_in, n_in) {
            return Err(Error::DimensionMismatch(format!(
                "input is {}x{}, supermap acts on M_{}(M_{})",
                x.rows(),
                x.cols(),
                self.d1,
                self.r1
            )));
        }
        let mut out = Matrix::zeros(n_out, n_out);
        for a in 0..n_in {
            for b in 0..n_in {
                let w = x[(a, b)];
                if w.is_zero() {
                    continue;
                }
                for s in 0..n_out {
                    for t in 0..n_out {
                        out[(s, t)] += w * self.choi[(a * n_out + s, b * n_out + t)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// `Γ(φ)` on Choi matrices: `C_{Γ(φ)} = Σ̃(C_φ)`.
    pub fn apply_super(&self, phi: &ChannelChoi<T>) -> Result<ChannelChoi<T>> {
        if (phi.d(), phi.r()) != (self.d1, self.r1) {
            return Err(Error::DimensionMismatch(format!(
                "channel M_{} -> M_{} does not match supermap input ({}, {})",
                phi.d(),
                phi.r(),
                self.d1,
                self.r1
            )));
        }
        ChannelChoi::new(self.d2, self.r2, self.apply(phi.choi())?)
    }

    pub fn check(&self, tol: T) -> Result<SuperchannelCheck<T>> {
        let scale = scale_of(&self.choi);
        let hermitian_defect = self.choi.hermitian_defect();
        let min_eig = min_eigenvalue(&self.choi.hermitian_part())?;
        let completely_positive = hermitian_defect <= tol * scale && min_eig >= -tol * scale;
        let tp_defect = self.tp_defect()?;
        Ok(SuperchannelCheck {
            hermitian_defect,
            min_eigenvalue: min_eig,
            completely_positive,
            tp_defect,
            tp_preserving: tp_defect <= tol * scale,
        })
    }

    /// Worst violation of trace-scaling preservation over `basis_S(d1, r1)`.
    pub fn tp_defect(&self) -> Result<T> {
        let mut worst = T::zero();
        for x in basis_s::<T>(self.d1, self.r1) {
            let lambda_in = in_s(&x, self.d1, self.r1, T::zero())?.lambda;
            let y = self.apply(&x)?;
            let off = (&y - &project_s(&y, self.d2, self.r2)?).frobenius_norm();
            let lambda_out = in_s(&y, self.d2, self.r2, T::zero())?.lambda;
            worst = worst.max(off + (lambda_out - lambda_in).norm());
        }
        Ok(worst)
    }

    /// PSD Choi matrix and trace-scaling preservation on `S(d1, r1)`.
    pub fn is_superchannel(&self, tol: T) -> bool {
        self.check(tol).map(|c| c.is_superchannel()).unwrap_or(false)
    }

    /// Largest Frobenius distance between the images of `basis_S(d1, r1)`.
    pub fn restriction_distance(&self, other: &Self) -> Result<T> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(format!(
                "supermaps with dims {:?} and {:?}",
                self.dims(),
                other.dims()
            )));
        }
        let mut worst = T::zero();
        for x in basis_s::<T>(self.d1, self.r1) {
            worst = worst.max((&self.apply(&x)? - &other.apply(&x)?).frobenius_norm());
        }
        Ok(worst)
    }

    /// Same QSC: both supermaps agree on the operator system `S(d1, r1)`.
    pub fn restrict_equal(&self, other: &Self, tol: T) -> Result<bool> {
        Ok(self.restriction_distance(other)? <= tol)
    }

    /// `Tr_{r1} Tr_{r2} C_Σ`, a matrix on `ℂ^{d1} ⊗ ℂ^{d2}`.
    pub fn marginal(&self) -> Matrix<T> {
        self.choi.partial_trace(&[self.d1, self.r1, self.d2, self.r2], &[1, 3]).expect("consistent dimensions")
    }

    /// Auxiliary dimension `e = rank Tr_{r1} Tr_{r2} C_Σ`.
    pub fn aux_dim(&self, eps: T) -> Result<usize> {
        rank_eps(&self.marginal().hermitian_part(), eps)
    }

    /// `N(X) = Tr_{r2} Σ̃(X ⊗ I_{r1} / r1)` without the consistency check.
    pub fn induced_map_unchecked(&self) -> Result<ChannelChoi<T>> {
        let (d1, r1, d2, r2) = self.dims();
        let inv = T::one() / usize_to::<T>(r1);
        let lift = Matrix::identity(r1).scale(inv);
        ChannelChoi::from_unit_images(
            d1,
            d2,
            &(0..d1 * d1)
                .map(|k| {
                    let y = self.apply(&Matrix::unit(d1, k / d1, k % d1).kron(&lift))?;
                    y.partial_trace(&[d2, r2], &[1])
                })
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `‖Tr_{r2} Σ̃(C) − N(Tr_{r1} C)‖_F` for one input `C`.
    pub fn induced_residual(&self, n: &ChannelChoi<T>, c: &Matrix<T>) -> Result<T> {
        let lhs = self.apply(c)?.partial_trace(&[self.d2, self.r2], &[1])?;
        let rhs = n.apply(&c.partial_trace(&[self.d1, self.r1], &[1])?)?;
        Ok((&lhs - &rhs).frobenius_norm())
    }

    /// The unital CP map `N: M_{d1} → M_{d2}` with `Tr_{r2} Σ̃(C) = N(Tr_{r1} C)`.
    /// The relation is verified on every matrix unit of `M_{d1}(M_{r1})`.
    pub fn induced_map(&self, tol: T) -> Result<ChannelChoi<T>> {
        let n = self.induced_map_unchecked()?;
        let k = self.d1 * self.r1;
        let mut worst = T::zero();
        for a in 0..k {
            for b in 0..k {
                worst = worst.max(self.induced_residual(&n, &Matrix::unit(k, a, b))?);
            }
        }
        if worst > tol * scale_of(&self.choi) {
            return Err(Error::NotSuperchannel(format!("induced-map consistency residual {:.3e}", worst.as_f64())));
        }
        Ok(n)
    }

    /// `Σ̃(I) = I`, i.e. `Γ(r1 Δ1) = r2 Δ2` for the depolarizing channels.
    pub fn check_order_unit(&self, tol: T) -> bool {
        let n_out = self.d2 * self.r2;
        self.apply(&Matrix::identity(self.d1 * self.r1))
            .map(|y| {
                (&y - &Matrix::identity(n_out)).frobenius_norm() <= tol * T::one().max(usize_to::<T>(n_out).sqrt())
            })
            .unwrap_or(false)
    }

    /// Pre/post-processing form `Γ(φ) = ψ_post ∘ (φ ⊗ id_e) ∘ ψ_pre`.
    pub fn characterize(&self, tol: T) -> Result<Characterisation<T>> {
        let check = self.check(tol)?;
        if !check.is_superchannel() {
            return Err(Error::NotSuperchannel(format!(
                "min eigenvalue {:.3e}, trace-scaling defect {:.3e}",
                check.min_eigenvalue.as_f64(),
                check.tp_defect.as_f64()
            )));
        }
        let (d1, r1, d2, r2) = self.dims();
        let n = self.induced_map(tol)?;
        // With V_a = (I ⊗ ⟨a|) V one finds N(X) = Σ_a V_aᵀ X conj(V_a), the
        // transpose coming from Tr φ(X) = Tr((Tr_r C)ᵀ X). So V_a = B_aᵀ for
        // Kraus operators B_a of N.
        let kraus = n.kraus(tol)?;
        let e = kraus.len();
        if e == 0 {
            return Err(Error::NotSuperchannel("induced map vanishes".into()));
        }
        let v_pre = Matrix::from_fn(d1 * e, d2, |row, j| kraus.ops[row % e][(j, row / e)]);

        let m_side = r1 * e;
        let unknowns = m_side * m_side;
        let n_in = d1 * r1;
        let rows = n_in * n_in * d2 * d2;
        let mut k = Matrix::zeros(rows, unknowns);
        let mut rhs = Matrix::zeros(rows, r2 * r2);
        let mut row = 0;
        for ga in 0..n_in {
            for gb in 0..n_in {
                let phi = ChannelChoi::new(d1, r1, Matrix::unit(n_in, ga, gb))?;
                let target = self.apply(phi.choi())?;
                for i in 0..d2 {
                    for j in 0..d2 {
                        let w = pushed_input(&v_pre, e, &phi, i, j)?;
                        k.data_mut()[row * unknowns..(row + 1) * unknowns].copy_from_slice(w.data());
                        for s in 0..r2 {
                            for t in 0..r2 {
                                rhs[(row, s * r2 + t)] = target[(i * r2 + s, j * r2 + t)];
                            }
                        }
                        row += 1;
                    }
                }
            }
        }
        let sol = lstsq(&k, &rhs, T::lit(1e-10))?;
        let post_choi = Matrix::from_fn(m_side * r2, m_side * r2, |x, y| {
            let (p, s) = (x / r2, x % r2);
            let (q, t) = (y / r2, y % r2);
            sol.solution[(p * m_side + q, s * r2 + t)]
        })
        .hermitian_part();
        let post = ChannelChoi::new(m_side, r2, post_choi)?;
        if !post.is_cp(tol) || !post.is_tp(tol.max(T::lit(1e-9)) * T::lit(10.0)) {
            return Err(Error::PostNotCptp(format!(
                "min eigenvalue {:.3e}, trace defect {:.3e}",
                post.min_eigenvalue()?.as_f64(),
                post.tp_defect().as_f64()
            )));
        }
        let ch = Characterisation { e, v_pre, post };
        let rebuilt = ch.recompose(d1, r1)?;
        let residual = (&rebuilt.choi - &self.choi).frobenius_norm() / scale_of(&self.choi);
        let bound = T::lit(1e-8).max(tol);
        if residual > bound {
            return Err(Error::ResidualTooLarge { residual: residual.as_f64(), tol: bound.as_f64() });
        }
        Ok(ch)
    }
}

/// `(φ ⊗ id_e)(V E_{ij} V*)`, the input handed to the post-processing channel.
fn pushed_input<T: Real>(v: &Matrix<T>, e: usize, phi: &ChannelChoi<T>, i: usize, j: usize) -> Result<Matrix<T>> {
    let n = v.rows();
    let z = Matrix::from_fn(n, n, |x, y| v[(x, i)] * v[(y, j)].conj());
    phi.apply_tensor_id(&z, e)
}

/// Pre-processing isometry `V: ℂ^{d2} → ℂ^{d1} ⊗ ℂ^e` and post-processing
/// channel `ψ_post: M_{r1} ⊗ M_e → M_{r2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Characterisation<T: Real = f64> {
    pub e: usize,
    pub v_pre: Matrix<T>,
    pub post: ChannelChoi<T>,
}

impl<T: Real> Characterisation<T> {
    /// `‖V*V − I‖_max`.
    pub fn isometry_residual(&self) -> Result<T> {
        let g = self.v_pre.adjoint().matmul(&self.v_pre)?;
        Ok((&g - &Matrix::identity(self.v_pre.cols())).max_abs())
    }

    fn validate(&self, d1: usize, r1: usize) -> Result<()> {
        let e = self.e;
        if e == 0 || self.v_pre.rows() != d1 * e || self.post.d() != r1 * e {
            return Err(Error::DimensionMismatch(format!(
                "isometry {}x{} and post-processing on M_{} do not fit d1 = {d1}, r1 = {r1}, e = {e}",
                self.v_pre.rows(),
                self.v_pre.cols(),
                self.post.d()
            )));
        }
        let defect = self.isometry_residual()?;
        if defect > T::lit(1e-9) {
            return Err(Error::NotUnitary { kind: "isometry", defect: defect.as_f64() });
        }
        let tol = T::lit(1e-9);
        if !self.post.is_cp(tol) || !self.post.is_tp(tol) {
            return Err(Error::PostNotCptp("post-processing map is not CPTP".into()));
        }
        Ok(())
    }

    /// `ψ_post ∘ (φ ⊗ id_e) ∘ Ad(V)` for a linear map `φ: M_{d1} → M_{r1}`.
    pub fn apply(&self, phi: &ChannelChoi<T>) -> Result<ChannelChoi<T>> {
        let e = self.e;
        if self.v_pre.rows() != phi.d() * e || self.post.d() != phi.r() * e {
            return Err(Error::DimensionMismatch("channel does not fit the characterisation".into()));
        }
        let d2 = self.v_pre.cols();
        let r2 = self.post.r();
        let mut images = Vec::with_capacity(d2 * d2);
        for i in 0..d2 {
            for j in 0..d2 {
                images.push(self.post.apply(&pushed_input(&self.v_pre, e, phi, i, j)?)?);
            }
        }
        ChannelChoi::from_unit_images(d2, r2, &images)
    }

    /// The superchannel given by this characterisation; `d2`, `r2` and `e` are
    /// read off the isometry and the post-processing channel.
    pub fn recompose(&self, d1: usize, r1: usize) -> Result<Superchannel<T>> {
        self.validate(d1, r1)?;
        let d2 = self.v_pre.cols();
        let r2 = self.post.r();
        Superchannel::from_map(d1, r1, d2, r2, |g| Ok(self.apply(&ChannelChoi::new(d1, r1, g.clone())?)?.into_choi()))
    }
}

/// See [`Characterisation::recompose`].
pub fn recompose<T: Real>(v_pre: &Matrix<T>, post: &ChannelChoi<T>, d1: usize) -> Result<Superchannel<T>> {
    if d1 == 0 || !v_pre.rows().is_multiple_of(d1) {
        return Err(Error::DimensionMismatch(format!(
            "isometry has {} rows, not a multiple of d1 = {d1}",
            v_pre.rows()
        )));
    }
    let e = v_pre.rows() / d1;
    if e == 0 || !post.d().is_multiple_of(e) {
        return Err(Error::DimensionMismatch(format!("post-processing input {} not a multiple of e = {e}", post.d())));
    }
    let ch = Characterisation { e, v_pre: v_pre.clone(), post: post.clone() };
    ch.recompose(d1, post.d() / e)
}

/// `Σ1 ⊗ Σ2` on `M_{d1 d3}(M_{r1 r3}) → M_{d2 d4}(M_{r2 r4})`.
pub fn tensor_super<T: Real>(a: &Superchannel<T>, b: &Superchannel<T>) -> Result<Superchannel<T>> {
    let (d1, r1, d2, r2) = a.dims();
    let (d3, r3, d4, r4) = b.dims();
    let choi = a.choi.kron(&b.choi).permute_factors(&[d1, r1, d2, r2, d3, r3, d4, r4], &[0, 4, 1, 5, 2, 6, 3, 7])?;
    Superchannel::new(d1 * d3, r1 * r3, d2 * d4, r2 * r4, choi)
}

/// See [`Superchannel::unitary`].
pub fn unitary_superchannel<T: Real>(u1: &Matrix<T>, u2: &Matrix<T>) -> Result<Superchannel<T>> {
    Superchannel::unitary(u1, u2)
}

/// Outcome of [`factor_unitary`].
#[derive(Clone, Debug, PartialEq)]
pub enum UnitaryFactorization<T: Real = f64> {
    Product { u1: Matrix<T>, u2: Matrix<T>, schmidt_coefficients: Vec<T> },
    NotFactorable { schmidt_coefficients: Vec<T> },
}

impl<T: Real> UnitaryFactorization<T> {
    pub fn is_product(&self) -> bool {
        matches!(self, Self::Product { .. })
    }

    pub fn schmidt_coefficients(&self) -> &[T] {
        match self {
            Self::Product { schmidt_coefficients, .. } | Self::NotFactorable { schmidt_coefficients } => {
                schmidt_coefficients
            }
        }
    }
}

/// Split a unitary on `ℂ^d ⊗ ℂ^r` as `U1 ⊗ U2` through its operator-Schmidt
/// decomposition. The phase is fixed by making the first nonzero entry of
/// `U1` real and positive. `eps` is the relative cut on squared Schmidt
/// coefficients.
pub fn factor_unitary<T: Real>(u: &Matrix<T>, d: usize, r: usize, eps: T) -> Result<UnitaryFactorization<T>> {
    if u.shape() != (d * r, d * r) {
        return Err(Error::DimensionMismatch(format!("unitary must be {0}x{0}", d * r)));
    }
    require_unitary(u, T::lit(1e-9))?;
    // R[(i, j), (k, l)] = U[(i, k), (j, l)]
    let realigned = Matrix::from_fn(d * d, r * r, |x, y| u[((x / d) * r + y / r, (x % d) * r + y % r)]);
    let gram = realigned.matmul(&realigned.adjoint())?;
    let eig = herm_eig(&gram)?;
    let top = eig.values[0];
    let coefficients: Vec<T> = eig.values.iter().map(|&l| l.max(T::zero()).sqrt()).collect();
    let rank = eig.values.iter().filter(|&&l| l > eps * top).count();
    let not_factorable = UnitaryFactorization::NotFactorable { schmidt_coefficients: coefficients.clone() };
    if rank != 1 {
        return Ok(not_factorable);
    }
    let sigma = top.sqrt();
    let left = eig.vector(0);
    // w = R* u / σ
    let w: Vec<Complex<T>> = (0..r * r)
        .map(|y| (0..d * d).map(|x| realigned[(x, y)].conj() * left[x]).sum::<Complex<T>>() / sigma)
        .collect();
    let dd = usize_to::<T>(d).sqrt();
    let mut u1 = Matrix::from_fn(d, d, |i, j| left[i * d + j] * dd);
    let mut u2 = Matrix::from_fn(r, r, |k, l| w[k * r + l].conj() * (sigma / dd));
    let anchor = u1.data().iter().copied().find(|z| z.norm() > T::lit(1e-8));
    if let Some(z) = anchor {
        let phase = z / z.norm();
        u1 = u1.scale_c(phase.conj());
        u2 = u2.scale_c(phase);
    }
    let defect = (&u1.kron(&u2) - u).frobenius_norm();
    if defect > T::lit(1e-8) {
        return Ok(not_factorable);
    }
    Ok(UnitaryFactorization::Product { u1, u2, schmidt_coefficients: coefficients })
}
