//! Dense complex linear algebra kernel.
//!
//! Every matrix in the crate is a [`Matrix`]: row-major `Complex<T>` storage.
//! Kronecker products, vectorisation and multi-factor index arithmetic all use
//! row-major conventions, so for factors of sizes `(n_0, …, n_{k-1})` the
//! composite index is `i_0·n_1⋯n_{k-1} + … + i_{k-1}`.

mod eig;
mod linalg;
mod serde_impl;

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use eig::{
    herm_eig, herm_eig_jacobi, min_eigenvalue, operator_norm, psd_project, rank_eps, sym_eig, HermitianEigen,
};
pub use linalg::{lstsq, orthonormalize_columns, vector_rank, LeastSquares};

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T: Real = f64> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidData(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidData(format!(
                "expected {} entries for a {rows}x{cols} matrix, found {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Matrix with real entries given row by row.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&v| Complex::new(T::lit(v), T::zero())).collect())
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex::new(T::lit(values[i]), T::zero()) } else { Complex::zero() })
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex::new(values[i], T::zero()) } else { Complex::zero() })
    }

    /// Matrix unit `E_{i,j}` (0-based) in `M_n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = Complex::one();
        m
    }

    /// Column vector from entries.
    pub fn column(values: Vec<Complex<T>>) -> Self {
        let n = values.len();
        Self { rows: n, cols: 1, data: values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Hilbert–Schmidt inner product `Tr(self* · other)`.
    pub fn hs_inner(&self, other: &Self) -> Complex<T> {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_c(&self, s: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · other · self*`.
    pub fn conjugate_by(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.matmul(&self.adjoint())
    }

    /// `‖M − M*‖_F`.
    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_defect() <= tol * T::one().max(self.frobenius_norm())
    }

    /// `(M + M*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    /// `(M − M*) / (2i)`.
    pub fn antihermitian_part(&self) -> Self {
        let factor = Complex::new(T::zero(), -T::lit(0.5));
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] - self[(j, i)].conj()) * factor)
    }

    /// Error unless `‖M − M*‖_F ≤ tol·max(1, ‖M‖_F)`.
    pub fn require_hermitian(&self, tol: T) -> Result<()> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", self.rows, self.cols)));
        }
        let defect = self.hermitian_defect();
        if defect > tol * T::one().max(self.frobenius_norm()) {
            return Err(Error::NotHermitian { defect: defect.as_f64() });
        }
        Ok(())
    }

    /// Kronecker product: entry `(a·rows_B + c, b·cols_B + d) = A[a,b]·B[c,d]`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for a in 0..self.rows {
            for b in 0..self.cols {
                let x = self[(a, b)];
                if x.is_zero() {
                    continue;
                }
                for c in 0..other.rows {
                    for d in 0..other.cols {
                        out[(a * other.rows + c, b * other.cols + d)] = x * other[(c, d)];
                    }
                }
            }
        }
        out
    }

    /// Partial trace over the factors listed in `traced` (0-based factor indices).
    pub fn partial_trace(&self, dims: &[usize], traced: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !self.is_square() || total != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "factor sizes {dims:?} do not match a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if let Some(&bad) = traced.iter().find(|&&t| t >= dims.len()) {
            return Err(Error::DimensionMismatch(format!("factor index {bad} out of range for {dims:?}")));
        }
        let strides = strides(dims);
        let is_traced = |f: usize| traced.contains(&f);
        let kept: Vec<usize> = (0..dims.len()).filter(|&f| !is_traced(f)).collect();
        let gone: Vec<usize> = (0..dims.len()).filter(|&f| is_traced(f)).collect();
        let kept_offsets = offsets(dims, &strides, &kept);
        let gone_offsets = offsets(dims, &strides, &gone);
        let n = kept_offsets.len();
        let mut out = Self::zeros(n, n);
        for (i, &ki) in kept_offsets.iter().enumerate() {
            for (j, &kj) in kept_offsets.iter().enumerate() {
                out[(i, j)] = gone_offsets.iter().map(|&g| self[(ki + g, kj + g)]).sum();
            }
        }
        Ok(out)
    }

    /// Reorder tensor factors: output factor `q` is input factor `perm[q]`.
    pub fn permute_factors(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !self.is_square() || total != self.rows || perm.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot permute factors {dims:?} by {perm:?} on a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let map = factor_permutation(dims, perm)?;
        let mut out = Self::zeros(total, total);
        for i in 0..total {
            for j in 0..total {
                out[(map[i], map[j])] = self[(i, j)];
            }
        }
        Ok(out)
    }

    /// Row-major vectorisation.
    pub fn vectorize(&self) -> Vec<Complex<T>> {
        self.data.clone()
    }

    pub fn from_vector(rows: usize, cols: usize, v: &[Complex<T>]) -> Result<Self> {
        Self::new(rows, cols, v.to_vec())
    }

    /// Copy of the `(bi, bj)` block when the matrix is viewed as blocks of size `size × size`.
    pub fn block(&self, bi: usize, bj: usize, size: usize) -> Self {
        Self::from_fn(size, size, |s, t| self[(bi * size + s, bj * size + t)])
    }

    pub fn set_block(&mut self, bi: usize, bj: usize, block: &Self) {
        for s in 0..block.rows {
            for t in 0..block.cols {
                self[(bi * block.rows + s, bj * block.cols + t)] = block[(s, t)];
            }
        }
    }

    /// Lossy conversion to another precision.
    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()))).collect(),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.shape() == other.shape() && (self - other).frobenius_norm() <= tol
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        s[f] = s[f + 1] * dims[f + 1];
    }
    s
}

/// Composite offsets of all multi-indices over `factors`, in row-major order of those factors.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &base in &out {
            for k in 0..dims[f] {
                next.push(base + k * strides[f]);
            }
        }
        out = next;
    }
    out
}

/// `map[i]` is the composite index after reordering factors by `perm`.
pub fn factor_permutation(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::DimensionMismatch(format!("{perm:?} is not a permutation of {} factors", dims.len())));
        }
        seen[p] = true;
    }
    let in_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let out_strides = strides(&new_dims);
    let total: usize = dims.iter().product();
    Ok((0..total)
        .map(|i| perm.iter().enumerate().map(|(q, &p)| ((i / in_strides[p]) % dims[p]) * out_strides[q]).sum())
        .collect())
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in matrix addition");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in matrix subtraction");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl<T: Real> Add for Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        &self + &rhs
    }
}

impl<T: Real> Sub for Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        &self - &rhs
    }
}

impl<T: Real> AddAssign<&Matrix<T>> for Matrix<T> {
    fn add_assign(&mut self, rhs: &Matrix<T>) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in matrix addition");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<T: Real> SubAssign<&Matrix<T>> for Matrix<T> {
    fn sub_assign(&mut self, rhs: &Matrix<T>) {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in matrix subtraction");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| -z).collect() }
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs).expect("shape mismatch in matrix product")
    }
}

impl<T: Real> Mul for Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        &self * &rhs
    }
}
