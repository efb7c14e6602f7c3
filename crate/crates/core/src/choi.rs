//! Choi matrices of linear maps `M_d → M_r` and their Kraus forms.
//!
//! A [`ChannelChoi`] stores the block matrix `(φ(E_{i,j}))_{i,j}`: `d × d`
//! blocks of size `r × r`, input factor first. Kraus operators `A_a` are
//! `r × d` matrices with `φ(X) = Σ_a A_a X A_a*`; the adjoint convention
//! `V_a = A_a*` (`φ(X) = Σ V_a* X V_a`) is used only in [`crate::extremal`].

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{herm_eig, min_eigenvalue, rank_eps, vector_rank, Matrix};
use crate::random;
use crate::scalar::Real;

/// Choi matrix of a linear map `M_d → M_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel<T>", bound = "")]
pub struct ChannelChoi<T: Real = f64> {
    d: usize,
    r: usize,
    choi: Matrix<T>,
}

#[derive(Deserialize)]
#[serde(bound = "")]
struct RawChannel<T: Real> {
    d: usize,
    r: usize,
    choi: Matrix<T>,
}

impl<T: Real> TryFrom<RawChannel<T>> for ChannelChoi<T> {
    type Error = Error;

    fn try_from(raw: RawChannel<T>) -> Result<Self> {
        ChannelChoi::new(raw.d, raw.r, raw.choi)
    }
}

impl<T: Real> ChannelChoi<T> {
    pub fn new(d: usize, r: usize, choi: Matrix<T>) -> Result<Self> {
        if d == 0 || r == 0 || choi.shape() != (d * r, d * r) {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix of a map M_{d} -> M_{r} must be {0}x{0}, found {1}x{2}",
                d * r,
                choi.rows(),
                choi.cols()
            )));
        }
        Ok(Self { d, r, choi })
    }

    /// Assemble the block matrix from the images of the matrix units,
    /// `images[i·d + j] = φ(E_{i,j})`.
    pub fn from_unit_images(d: usize, r: usize, images: &[Matrix<T>]) -> Result<Self> {
        if images.len() != d * d {
            return Err(Error::DimensionMismatch(format!("expected {} images, found {}", d * d, images.len())));
        }
        let mut choi = Matrix::zeros(d * r, d * r);
        for i in 0..d {
            for j in 0..d {
                let img = &images[i * d + j];
                if img.shape() != (r, r) {
                    return Err(Error::DimensionMismatch(format!(
                        "image of E_({i},{j}) is {}x{}, expected {r}x{r}",
                        img.rows(),
                        img.cols()
                    )));
                }
                choi.set_block(i, j, img);
            }
        }
        Self::new(d, r, choi)
    }

    /// Choi matrix of the map given by a closure on matrix units.
    pub fn from_map(d: usize, r: usize, f: impl Fn(&Matrix<T>) -> Matrix<T>) -> Result<Self> {
        let images: Vec<_> = (0..d * d).map(|k| f(&Matrix::unit(d, k / d, k % d))).collect();
        Self::from_unit_images(d, r, &images)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn choi(&self) -> &Matrix<T> {
        &self.choi
    }

    pub fn into_choi(self) -> Matrix<T> {
        self.choi
    }

    /// Block `(i, j)`, i.e. `φ(E_{i,j})`.
    pub fn block(&self, i: usize, j: usize) -> Matrix<T> {
        self.choi.block(i, j, self.r)
    }

    /// `φ(X) = Tr_d[(Xᵀ ⊗ I_r) C] = Σ_{ij} X_{ij} φ(E_{i,j})`.
    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.shape() != (self.d, self.d) {
            return Err(Error::DimensionMismatch(format!(
                "input is {}x{}, map acts on M_{}",
                x.rows(),
                x.cols(),
                self.d
            )));
        }
        let r = self.r;
        let mut out = Matrix::zeros(r, r);
        for i in 0..self.d {
            for j in 0..self.d {
                let xij = x[(i, j)];
                if xij.is_zero() {
                    continue;
                }
                for s in 0..r {
                    for t in 0..r {
                        out[(s, t)] += xij * self.choi[(i * r + s, j * r + t)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(φ ⊗ id_e)(Z)` for `Z ∈ M_d ⊗ M_e` (factor order `(d, e)`), result in `M_r ⊗ M_e`.
    pub fn apply_tensor_id(&self, z: &Matrix<T>, e: usize) -> Result<Matrix<T>> {
        let (d, r) = (self.d, self.r);
        if z.shape() != (d * e, d * e) {
            return Err(Error::DimensionMismatch(format!("input must be {0}x{0}", d * e)));
        }
        let mut out = Matrix::zeros(r * e, r * e);
        for i in 0..d {
            for j in 0..d {
                for a in 0..e {
                    for b in 0..e {
                        let zv = z[(i * e + a, j * e + b)];
                        if zv.is_zero() {
                            continue;
                        }
                        for s in 0..r {
                            for t in 0..r {
                                out[(s * e + a, t * e + b)] += zv * self.choi[(i * r + s, j * r + t)];
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        min_eigenvalue(&self.choi)
    }

    /// Completely positive: `λ_min(C) ≥ −tol · max(1, ‖C‖_F)`.
    pub fn is_cp(&self, tol: T) -> bool {
        if !self.choi.is_hermitian(tol) {
            return false;
        }
        match self.min_eigenvalue() {
            Ok(m) => m >= -tol * T::one().max(self.choi.frobenius_norm()),
            Err(_) => false,
        }
    }

    /// Trace preserving: diagonal blocks have trace 1, off-diagonal blocks trace 0.
    pub fn is_tp(&self, tol: T) -> bool {
        self.tp_defect() <= tol
    }

    /// Largest deviation of a block trace from the trace-preserving pattern.
    pub fn tp_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.d {
            for j in 0..self.d {
                let tr = self.block(i, j).trace();
                let target = if i == j { Complex::one() } else { Complex::zero() };
                worst = worst.max((tr - target).norm());
            }
        }
        worst
    }

    /// `φ(I_d) = I_r`.
    pub fn is_unital(&self, tol: T) -> bool {
        self.apply(&Matrix::identity(self.d))
            .map(|y| (&y - &Matrix::identity(self.r)).frobenius_norm() <= tol)
            .unwrap_or(false)
    }

    pub fn kraus_rank(&self, tol: T) -> Result<usize> {
        rank_eps(&self.choi, tol)
    }

    /// Minimal Kraus decomposition from the eigenvectors of the Choi matrix.
    pub fn kraus(&self, tol: T) -> Result<KrausSet<T>> {
        let scale = T::one().max(self.choi.frobenius_norm());
        let eig = herm_eig(&self.choi)?;
        let min = eig.values.last().copied().unwrap_or_else(T::zero);
        if min < -tol * scale {
            return Err(Error::NotCompletelyPositive { min_eigenvalue: min.as_f64() });
        }
        let (d, r) = (self.d, self.r);
        let ops = eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > tol * scale)
            .map(|(k, &l)| {
                let w = l.sqrt();
                Matrix::from_fn(r, d, |s, i| eig.vectors[(i * r + s, k)] * w)
            })
            .collect();
        Ok(KrausSet { d, r, ops, minimal: true })
    }

    pub fn from_kraus(k: &KrausSet<T>) -> Result<Self> {
        k.check_shapes()?;
        let (d, r) = (k.d, k.r);
        let mut choi = Matrix::zeros(d * r, d * r);
        for a in &k.ops {
            for i in 0..d {
                for s in 0..r {
                    let x = a[(s, i)];
                    if x.is_zero() {
                        continue;
                    }
                    for j in 0..d {
                        for t in 0..r {
                            choi[(i * r + s, j * r + t)] += x * a[(t, j)].conj();
                        }
                    }
                }
            }
        }
        Self::new(d, r, choi)
    }

    /// Choi matrix of the Hilbert–Schmidt adjoint `φ*: M_r → M_d`.
    pub fn dual(&self) -> Self {
        let (d, r) = (self.d, self.r);
        let choi = Matrix::from_fn(r * d, r * d, |row, col| {
            let (s, i) = (row / d, row % d);
            let (t, j) = (col / d, col % d);
            self.choi[(i * r + s, j * r + t)].conj()
        });
        Self { d: r, r: d, choi }
    }

    /// The map `s·φ`.
    pub fn scaled(&self, s: T) -> Self {
        Self { d: self.d, r: self.r, choi: self.choi.scale(s) }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_map(d, d, |x| x.clone()).expect("shapes agree")
    }

    /// `X ↦ Tr(X) I_r / r`.
    pub fn depolarizing(d: usize, r: usize) -> Self {
        let inv = T::one() / T::from_usize(r).expect("small dimension");
        Self::from_map(d, r, |x| Matrix::identity(r).scale_c(x.trace() * inv)).expect("shapes agree")
    }

    /// `X ↦ Tr(X)` as a map `M_d → M_1`.
    pub fn trace_map(d: usize) -> Self {
        Self::from_map(d, 1, |x| Matrix::new(1, 1, vec![x.trace()]).expect("1x1")).expect("shapes agree")
    }

    /// `X ↦ Xᵀ`.
    pub fn transpose(d: usize) -> Self {
        Self::from_map(d, d, |x| x.transpose()).expect("shapes agree")
    }

    /// `X ↦ U X U*` for an `r × d` matrix `U`.
    pub fn conjugation(u: &Matrix<T>) -> Self {
        let (r, d) = u.shape();
        Self::from_map(d, r, |x| u.conjugate_by(x).expect("shapes agree")).expect("shapes agree")
    }

    /// Random CPTP map: an isometry `ℂ^d → ℂ^{r·k}` cut into `k` Kraus operators.
    pub fn random(d: usize, r: usize, kraus_rank: usize, seed: u64) -> Result<Self> {
        if kraus_rank == 0 || kraus_rank > d * r || r * kraus_rank < d {
            return Err(Error::InvalidRank { rank: kraus_rank, d, r });
        }
        let mut rng = random::rng(seed);
        let v = random::random_isometry::<T, _>(r * kraus_rank, d, &mut rng)?;
        let ops = (0..kraus_rank).map(|a| Matrix::from_fn(r, d, |s, i| v[(a * r + s, i)])).collect();
        Self::from_kraus(&KrausSet { d, r, ops, minimal: false })
    }
}

/// Kraus operators `A_a` (`r × d`), `φ(X) = Σ_a A_a X A_a*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct KrausSet<T: Real = f64> {
    pub d: usize,
    pub r: usize,
    pub ops: Vec<Matrix<T>>,
    #[serde(default)]
    pub minimal: bool,
}

impl<T: Real> KrausSet<T> {
    pub fn new(d: usize, r: usize, ops: Vec<Matrix<T>>) -> Result<Self> {
        let k = Self { d, r, ops, minimal: false };
        k.check_shapes()?;
        Ok(k)
    }

    fn check_shapes(&self) -> Result<()> {
        match self.ops.iter().position(|a| a.shape() != (self.r, self.d)) {
            Some(idx) => Err(Error::DimensionMismatch(format!(
                "Kraus operator {idx} is {}x{}, expected {}x{}",
                self.ops[idx].rows(),
                self.ops[idx].cols(),
                self.r,
                self.d
            ))),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Numerical rank of the operators viewed as vectors.
    pub fn independent_count(&self, eps: T) -> Result<usize> {
        let vecs: Vec<_> = self.ops.iter().map(|a| a.vectorize()).collect();
        vector_rank(&vecs, eps)
    }

    /// The adjoint convention `V_a = A_a*` (`d × r`), with `φ(X) = Σ V_a* X V_a`.
    pub fn adjoint_ops(&self) -> Vec<Matrix<T>> {
        self.ops.iter().map(|a| a.adjoint()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Ch = ChannelChoi<f64>;
    type M = Matrix<f64>;

    #[test]
    fn identity_choi_pattern() {
        let c = Ch::identity(2);
        let expected = M::from_fn(4, 4, |i, j| {
            if matches!((i, j), (0, 0) | (0, 3) | (3, 0) | (3, 3)) {
                Complex::one()
            } else {
                Complex::zero()
            }
        });
        assert_eq!(c.choi(), &expected);
    }

    #[test]
    fn trace_map_choi_is_identity() {
        assert_eq!(Ch::trace_map(2).choi(), &M::identity(2));
    }

    #[test]
    fn depolarizing_choi_is_scaled_identity() {
        let c = Ch::depolarizing(2, 3);
        assert!(c.choi().approx_eq(&M::identity(6).scale(1.0 / 3.0), 1e-15));
        let rho = M::from_real(2, 2, &[0.3, 0.1, 0.1, 0.7]).unwrap();
        assert!(c.apply(&rho).unwrap().approx_eq(&M::identity(3).scale(1.0 / 3.0), 1e-15));
    }

    #[test]
    fn apply_on_units_extracts_blocks() {
        let c = Ch::random(2, 3, 2, 5).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(c.apply(&M::unit(2, i, j)).unwrap(), c.block(i, j));
            }
        }
        let x = M::from_fn(2, 2, |i, j| Complex::new(i as f64 + 0.5, j as f64));
        assert!(Ch::identity(2).apply(&x).unwrap().approx_eq(&x, 1e-15));
    }

    #[test]
    fn cp_checks() {
        assert!(Ch::identity(2).is_cp(1e-9));
        assert!(Ch::depolarizing(2, 2).is_cp(1e-9));
        let t = Ch::transpose(2);
        assert!(!t.is_cp(1e-9));
        assert!((t.min_eigenvalue().unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn tp_checks() {
        assert!(Ch::identity(2).is_tp(1e-9));
        assert!(!Ch::identity(2).scaled(0.5).is_tp(1e-9));
        let mut rng = random::rng(4);
        let u: M = random::random_unitary(3, &mut rng);
        assert!(Ch::conjugation(&u).is_tp(1e-12));
    }

    #[test]
    fn kraus_examples() {
        let k = Ch::identity(2).kraus(1e-9).unwrap();
        assert_eq!(k.len(), 1);
        let a = &k.ops[0];
        // I up to a global phase.
        let phase = a[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(a.scale_c(phase.conj()).approx_eq(&M::identity(2), 1e-12));

        let dep = Ch::depolarizing(2, 2).kraus(1e-9).unwrap();
        assert_eq!(dep.len(), 4);
        for op in &dep.ops {
            assert!((op.frobenius_norm() - 0.5f64.sqrt()).abs() < 1e-12);
        }
        assert_eq!(dep.independent_count(1e-9).unwrap(), 4);
    }

    #[test]
    fn kraus_of_non_cp_fails() {
        assert!(matches!(Ch::transpose(2).kraus(1e-9), Err(Error::NotCompletelyPositive { .. })));
    }

    #[test]
    fn choi_of_single_row_kraus() {
        let k = KrausSet::new(2, 1, vec![M::from_real(1, 2, &[1.0, 0.0]).unwrap()]).unwrap();
        assert_eq!(Ch::from_kraus(&k).unwrap().choi(), &M::unit(2, 0, 0));
        let id = KrausSet::new(2, 2, vec![M::identity(2)]).unwrap();
        assert_eq!(Ch::from_kraus(&id).unwrap(), Ch::identity(2));
    }

    #[test]
    fn dual_examples() {
        assert_eq!(Ch::identity(3).dual(), Ch::identity(3));
        // Dual of the trace map is c ↦ c·I_2.
        let dual = Ch::trace_map(2).dual();
        assert_eq!((dual.d(), dual.r()), (1, 2));
        let one = M::identity(1);
        assert!(dual.apply(&one).unwrap().approx_eq(&M::identity(2), 1e-15));
        let c = Ch::random(2, 3, 3, 8).unwrap();
        assert_eq!(c.dual().dual(), c);
    }

    #[test]
    fn random_channel_contract() {
        let iso = Ch::random(2, 2, 1, 3).unwrap();
        assert!(iso.is_tp(1e-12) && iso.is_cp(1e-9));
        assert_eq!(iso.kraus_rank(1e-9).unwrap(), 1);
        assert_eq!(Ch::random(2, 2, 4, 7).unwrap(), Ch::random(2, 2, 4, 7).unwrap());
        let c = Ch::random(2, 2, 4, 7).unwrap();
        assert!(c.is_cp(1e-9) && c.is_tp(1e-9));
        assert!(matches!(Ch::random(2, 2, 5, 0), Err(Error::InvalidRank { .. })));
        assert!(matches!(Ch::random(2, 2, 0, 0), Err(Error::InvalidRank { .. })));
        assert!(matches!(Ch::random(3, 1, 1, 0), Err(Error::InvalidRank { .. })));
    }

    #[test]
    fn rejects_wrong_shapes() {
        assert!(Ch::new(2, 2, M::identity(3)).is_err());
        assert!(Ch::from_unit_images(2, 2, &[M::identity(2)]).is_err());
        assert!(Ch::identity(2).apply(&M::identity(3)).is_err());
    }

    #[test]
    fn tensor_id_matches_kron_action() {
        let c = Ch::random(2, 3, 2, 1).unwrap();
        let x = M::from_fn(2, 2, |i, j| Complex::new(1.0 + i as f64, j as f64));
        let y = M::from_fn(2, 2, |i, j| Complex::new(j as f64, 0.5 * i as f64));
        let lhs = c.apply_tensor_id(&x.kron(&y), 2).unwrap();
        let rhs = c.apply(&x).unwrap().kron(&y);
        assert!(lhs.approx_eq(&rhs, 1e-13));
    }
}
