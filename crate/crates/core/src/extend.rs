//! Completely positive extensions of a QSC from `S(d1, r1)` to the whole of
//! `M_{d1}(M_{r1})`.
//!
//! In the Choi picture an extension is a PSD matrix in an affine subspace, so
//! the search is a convex feasibility problem. It is solved with Dykstra's
//! alternating projections between the affine set and the PSD cone, over the
//! real coordinates of Hermitian matrices.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{herm_eig, Matrix};
use crate::opsys::{basis_s, dimension, in_s, project_s};
use crate::scalar::Real;
use crate::supermap::Superchannel;

/// A QSC given by its images of the canonical basis of `S(d1, r1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQsc<T>", bound = "")]
pub struct QscAction<T: Real = f64> {
    d1: usize,
    r1: usize,
    d2: usize,
    r2: usize,
    images: Vec<Matrix<T>>,
}

#[derive(Deserialize)]
#[serde(bound = "")]
struct RawQsc<T: Real> {
    d1: usize,
    r1: usize,
    d2: usize,
    r2: usize,
    images: Vec<Matrix<T>>,
}

impl<T: Real> TryFrom<RawQsc<T>> for QscAction<T> {
    type Error = Error;

    fn try_from(raw: RawQsc<T>) -> Result<Self> {
        QscAction::new(raw.d1, raw.r1, raw.d2, raw.r2, raw.images)
    }
}

impl<T: Real> QscAction<T> {
    /// Checks counts and shapes only; see [`QscAction::validate`].
    pub fn new(d1: usize, r1: usize, d2: usize, r2: usize, images: Vec<Matrix<T>>) -> Result<Self> {
        if d1 * r1 * d2 * r2 == 0 {
            return Err(Error::DimensionMismatch("dimensions must be positive".into()));
        }
        let expected = dimension(d1, r1);
        if images.len() != expected {
            return Err(Error::InvalidQsc(format!("expected {expected} images, found {}", images.len())));
        }
        let n = d2 * r2;
        if let Some(k) = images.iter().position(|m| m.shape() != (n, n)) {
            return Err(Error::InvalidQsc(format!("image {k} is not {n}x{n}")));
        }
        Ok(Self { d1, r1, d2, r2, images })
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.d1, self.r1, self.d2, self.r2)
    }

    pub fn images(&self) -> &[Matrix<T>] {
        &self.images
    }

    /// Every image lies in `S(d2, r2)` with the trace scaling of its preimage.
    pub fn validate(&self, tol: T) -> Result<()> {
        for (k, (x, y)) in basis_s::<T>(self.d1, self.r1).iter().zip(&self.images).enumerate() {
            let lambda_in = in_s(x, self.d1, self.r1, T::zero())?.lambda;
            let out = in_s(y, self.d2, self.r2, tol)?;
            if !out.member {
                return Err(Error::InvalidQsc(format!("image {k} is not in S({}, {})", self.d2, self.r2)));
            }
            if (out.lambda - lambda_in).norm() > tol * T::one().max(y.frobenius_norm()) {
                return Err(Error::InvalidQsc(format!("image {k} changes the trace scaling")));
            }
        }
        Ok(())
    }

    /// Restriction of a supermap to `S(d1, r1)`.
    pub fn from_superchannel(s: &Superchannel<T>) -> Result<Self> {
        let (d1, r1, d2, r2) = s.dims();
        let images = basis_s::<T>(d1, r1).iter().map(|x| s.apply(x)).collect::<Result<Vec<_>>>()?;
        Self::new(d1, r1, d2, r2, images)
    }
}

/// See [`QscAction::from_superchannel`].
pub fn qsc_from_superchannel<T: Real>(s: &Superchannel<T>) -> Result<QscAction<T>> {
    QscAction::from_superchannel(s)
}

/// Isometric real coordinates of `n × n` Hermitian matrices: diagonal
/// entries, then `√2·Re` and `√2·Im` of each strictly upper entry.
#[derive(Clone, Copy, Debug)]
struct HermCoords {
    n: usize,
}

impl HermCoords {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn encode<T: Real>(&self, m: &Matrix<T>) -> Vec<T> {
        let s2 = T::lit(std::f64::consts::SQRT_2);
        let mut out = Vec::with_capacity(self.len());
        for a in 0..self.n {
            out.push(m[(a, a)].re);
        }
        for a in 0..self.n {
            for b in a + 1..self.n {
                // average with the mirrored entry so non-Hermitian noise is projected out
                let z = (m[(a, b)] + m[(b, a)].conj()) * T::lit(0.5);
                out.push(z.re * s2);
                out.push(z.im * s2);
            }
        }
        out
    }

    fn decode<T: Real>(&self, x: &[T]) -> Matrix<T> {
        let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let mut m = Matrix::zeros(self.n, self.n);
        for a in 0..self.n {
            m[(a, a)].re = x[a];
        }
        let mut k = self.n;
        for a in 0..self.n {
            for b in a + 1..self.n {
                let z = num_complex::Complex::new(x[k] * h, x[k + 1] * h);
                m[(a, b)] = z;
                m[(b, a)] = z.conj();
                k += 2;
            }
        }
        m
    }

    /// Nonzero entries `(row, col, value)` of the `c`-th coordinate matrix.
    fn unit_entries<T: Real>(&self, c: usize) -> Vec<(usize, usize, num_complex::Complex<T>)> {
        use num_complex::Complex;
        if c < self.n {
            return vec![(c, c, Complex::one())];
        }
        let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let mut k = self.n;
        for a in 0..self.n {
            for b in a + 1..self.n {
                if c == k {
                    return vec![(a, b, Complex::new(h, T::zero())), (b, a, Complex::new(h, T::zero()))];
                }
                if c == k + 1 {
                    return vec![(a, b, Complex::new(T::zero(), h)), (b, a, Complex::new(T::zero(), -h))];
                }
                k += 2;
            }
        }
        unreachable!("coordinate index out of range")
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// The affine set of supermap Choi matrices reproducing a QSC, optionally
/// with the trace condition `Tr Σ̃(G) = (d2/d1) Tr G` on all of `M_{d1 r1}`.
#[derive(Clone, Debug)]
pub struct AffineSystem<T: Real = f64> {
    dims: (usize, usize, usize, usize),
    coords: HermCoords,
    /// Rows of the original constraint matrix and right-hand side (kept for residuals).
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    /// Orthonormal basis of either the row space or the null space.
    basis: Vec<Vec<T>>,
    basis_is_null: bool,
    /// Minimum-norm point of the affine set.
    x0: Vec<T>,
    rank: usize,
}

impl<T: Real> AffineSystem<T> {
    pub fn new(q: &QscAction<T>, extra_tp: bool) -> Result<Self> {
        let (d1, r1, d2, r2) = q.dims();
        let n_in = d1 * r1;
        let n_out = d2 * r2;
        let coords = HermCoords { n: n_in * n_out };
        let p = coords.len();
        let basis = basis_s::<T>(d1, r1);
        let n_eq = basis.len() * n_out * n_out + if extra_tp { n_in * n_in } else { 0 };
        let mut re_rows = vec![vec![T::zero(); p]; n_eq];
        let mut im_rows = vec![vec![T::zero(); p]; n_eq];
        let tp_offset = basis.len() * n_out * n_out;
        for c in 0..p {
            for (x, y, val) in coords.unit_entries::<T>(c) {
                let (a, s) = (x / n_out, x % n_out);
                let (b, t) = (y / n_out, y % n_out);
                for (k, xb) in basis.iter().enumerate() {
                    let w = xb[(a, b)] * val;
                    let row = (k * n_out + s) * n_out + t;
                    re_rows[row][c] += w.re;
                    im_rows[row][c] += w.im;
                }
                if extra_tp && s == t {
                    let row = tp_offset + a * n_in + b;
                    re_rows[row][c] += val.re;
                    im_rows[row][c] += val.im;
                }
            }
        }
        let ratio = T::from_usize(d2).expect("small") / T::from_usize(d1).expect("small");
        let mut re_rhs = vec![T::zero(); n_eq];
        let mut im_rhs = vec![T::zero(); n_eq];
        for (k, y) in q.images().iter().enumerate() {
            for s in 0..n_out {
                for t in 0..n_out {
                    let row = (k * n_out + s) * n_out + t;
                    re_rhs[row] = y[(s, t)].re;
                    im_rhs[row] = y[(s, t)].im;
                }
            }
        }
        if extra_tp {
            for a in 0..n_in {
                re_rhs[tp_offset + a * n_in + a] = ratio;
            }
        }
        let mut rows = re_rows;
        rows.extend(im_rows);
        let mut rhs = re_rhs;
        rhs.extend(im_rhs);

        // Orthonormalise the rows, carrying the right-hand side along.
        let drop = T::lit(1e-9);
        let mut q_rows: Vec<Vec<T>> = Vec::new();
        let mut q_rhs: Vec<T> = Vec::new();
        for (row, &beta) in rows.iter().zip(&rhs) {
            let original = norm(row);
            if original == T::zero() {
                continue;
            }
            let mut v = row.clone();
            let mut bv = beta;
            for _ in 0..2 {
                for (u, &bu) in q_rows.iter().zip(&q_rhs) {
                    let c = dot(u, &v);
                    if c != T::zero() {
                        v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= c * *ui);
                        bv -= c * bu;
                    }
                }
            }
            let nv = norm(&v);
            if nv > drop * original {
                v.iter_mut().for_each(|x| *x /= nv);
                q_rows.push(v);
                q_rhs.push(bv / nv);
            }
        }
        let rank = q_rows.len();
        let mut x0 = vec![T::zero(); p];
        for (u, &bu) in q_rows.iter().zip(&q_rhs) {
            x0.iter_mut().zip(u).for_each(|(x, ui)| *x += bu * *ui);
        }
        let residual = Self::raw_residual(&rows, &rhs, &x0);
        let scale = T::one().max(norm(&rhs));
        if residual > T::lit(1e-8) * scale {
            return Err(Error::InconsistentConstraints { residual: residual.as_f64() });
        }

        let (basis_vecs, basis_is_null) = if 2 * rank > p {
            let mut null: Vec<Vec<T>> = Vec::with_capacity(p - rank);
            for c in 0..p {
                if null.len() == p - rank {
                    break;
                }
                let mut v = vec![T::zero(); p];
                v[c] = T::one();
                for _ in 0..2 {
                    for u in q_rows.iter().chain(null.iter()) {
                        let coef = dot(u, &v);
                        if coef != T::zero() {
                            v.iter_mut().zip(u).for_each(|(vi, ui)| *vi -= coef * *ui);
                        }
                    }
                }
                let nv = norm(&v);
                if nv > T::lit(1e-6) {
                    v.iter_mut().for_each(|x| *x /= nv);
                    null.push(v);
                }
            }
            (null, true)
        } else {
            (q_rows, false)
        };
        Ok(Self { dims: q.dims(), coords, rows, rhs, basis: basis_vecs, basis_is_null, x0, rank })
    }

    fn raw_residual(rows: &[Vec<T>], rhs: &[T], x: &[T]) -> T {
        rows.iter()
            .zip(rhs)
            .map(|(r, &b)| {
                let e = dot(r, x) - b;
                e * e
            })
            .sum::<T>()
            .sqrt()
    }

    /// Number of independent real constraints.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Real dimension of the affine set.
    pub fn dimension(&self) -> usize {
        self.coords.len() - self.rank
    }

    fn project_coords(&self, z: &[T]) -> Vec<T> {
        if self.basis_is_null {
            let mut out = self.x0.clone();
            for u in &self.basis {
                let c = dot(u, z);
                out.iter_mut().zip(u).for_each(|(o, ui)| *o += c * *ui);
            }
            out
        } else {
            let mut out: Vec<T> = z.iter().zip(&self.x0).map(|(a, b)| *a + *b).collect();
            for u in &self.basis {
                let c = dot(u, z);
                out.iter_mut().zip(u).for_each(|(o, ui)| *o -= c * *ui);
            }
            out
        }
    }

    fn check_shape(&self, c: &Matrix<T>) -> Result<()> {
        let n = self.coords.n;
        if c.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("supermap Choi matrix must be {n}x{n}")));
        }
        Ok(())
    }

    /// Frobenius-nearest point of the affine set (Hermitian part of `c` first).
    pub fn project(&self, c: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_shape(c)?;
        Ok(self.coords.decode(&self.project_coords(&self.coords.encode(c))))
    }

    /// Euclidean norm of the constraint violation of `c` (Hermitian part).
    pub fn residual(&self, c: &Matrix<T>) -> Result<T> {
        self.check_shape(c)?;
        Ok(Self::raw_residual(&self.rows, &self.rhs, &self.coords.encode(c)))
    }

    /// Minimum-norm point of the affine set.
    pub fn min_norm_point(&self) -> Matrix<T> {
        self.coords.decode(&self.x0)
    }

    fn to_superchannel(&self, x: &[T]) -> Superchannel<T> {
        let (d1, r1, d2, r2) = self.dims;
        Superchannel::new(d1, r1, d2, r2, self.coords.decode(x)).expect("consistent dimensions")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Undetermined,
}

/// Tuning of the feasibility search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendOptions {
    pub max_iter: usize,
    /// Affine residual accepted for a witness.
    pub affine_tol: f64,
    /// Relative PSD tolerance for a witness: `λ_min ≥ −psd_tol · max(1, ‖C‖_F)`.
    pub psd_tol: f64,
    /// Gap above which a stalled run is declared infeasible.
    pub gap_threshold: f64,
    /// Relative change of the gap over `stall_window` iterations counted as a stall.
    pub stall_rel: f64,
    pub stall_window: usize,
    /// Record the gap every this many iterations.
    pub trace_every: usize,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            affine_tol: 1e-8,
            psd_tol: 1e-9,
            gap_threshold: 1e-6,
            stall_rel: 1e-8,
            stall_window: 1000,
            trace_every: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct FeasibilityReport<T: Real = f64> {
    pub status: FeasibilityStatus,
    pub iterations: usize,
    /// `‖x − y‖` between the last affine and PSD iterates.
    pub gap: f64,
    /// Affine residual of the returned point (witness if any, else last affine iterate).
    pub affine_residual: f64,
    /// Most negative eigenvalue of that point, clamped at zero.
    pub psd_residual: f64,
    /// Gap recorded every `trace_every` iterations.
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Superchannel<T>>,
}

impl<T: Real> FeasibilityReport<T> {
    pub fn is_feasible(&self) -> bool {
        self.status == FeasibilityStatus::Feasible
    }
}

struct Eigs {
    coords: HermCoords,
}

impl Eigs {
    fn decompose<T: Real>(&mut self, z: &[T]) -> Result<crate::matcore::HermitianEigen<T>> {
        let m = self.coords.decode(z);
        herm_eig(&m)
    }

    fn psd_project<T: Real>(&mut self, z: &[T]) -> Result<Vec<T>> {
        let eig = self.decompose(z)?;
        Ok(self.coords.encode(&eig.reconstruct_with(|l| l.max(T::zero()))))
    }

    fn min_eigenvalue<T: Real>(&mut self, z: &[T]) -> Result<T> {
        Ok(self.decompose(z)?.values.last().copied().unwrap_or_else(T::zero))
    }
}

/// Search for a CP supermap extending `q`; with `extra_tp` the extension must
/// also be trace preserving up to the factor `d2/d1`.
///
/// Starts from the affine projection of `seed` (default: the minimum-norm
/// affine point) and runs Dykstra's algorithm with the correction applied on
/// the cone side only.
pub fn extend_qsc<T: Real>(
    q: &QscAction<T>,
    seed: Option<&Matrix<T>>,
    extra_tp: bool,
    options: &ExtendOptions,
) -> Result<FeasibilityReport<T>> {
    let system = AffineSystem::new(q, extra_tp)?;
    extend_with_system(&system, seed, options)
}

/// [`extend_qsc`] with a precomputed constraint system.
pub fn extend_with_system<T: Real>(
    system: &AffineSystem<T>,
    seed: Option<&Matrix<T>>,
    options: &ExtendOptions,
) -> Result<FeasibilityReport<T>> {
    let coords = system.coords;
    let psd_tol = T::lit(options.psd_tol);
    let affine_tol = T::lit(options.affine_tol);
    let mut x = match seed {
        Some(s) => system.project_coords(&{
            system.check_shape(s)?;
            coords.encode(s)
        }),
        None => system.x0.clone(),
    };
    let mut eigs = Eigs { coords };
    let accept = |eigs: &mut Eigs, x: &[T]| -> Result<Option<(T, T)>> {
        let scale = T::one().max(norm(x));
        let lmin = eigs.min_eigenvalue(x)?;
        let res = AffineSystem::raw_residual(&system.rows, &system.rhs, x);
        if lmin >= -psd_tol * scale && res <= affine_tol * T::one().max(norm(&system.rhs)) {
            Ok(Some((res, (-lmin).max(T::zero()))))
        } else {
            Ok(None)
        }
    };
    let feasible = |x: &[T], it: usize, gap: T, trace: Vec<f64>, res: (T, T)| FeasibilityReport {
        status: FeasibilityStatus::Feasible,
        iterations: it,
        gap: gap.as_f64(),
        affine_residual: res.0.as_f64(),
        psd_residual: res.1.as_f64(),
        residuals: trace,
        witness: Some(system.to_superchannel(x)),
    };
    if let Some(res) = accept(&mut eigs, &x)? {
        return Ok(feasible(&x, 0, T::zero(), Vec::new(), res));
    }

    let p_len = coords.len();
    let mut corr = vec![T::zero(); p_len];
    let mut trace = Vec::new();
    let mut gap = T::infinity();
    let mut window_gap: Option<T> = None;
    let gap_threshold = T::lit(options.gap_threshold);
    let stall_rel = T::lit(options.stall_rel);
    let window = options.stall_window.max(1);
    let every = options.trace_every.max(1);
    for it in 1..=options.max_iter {
        let shifted: Vec<T> = x.iter().zip(&corr).map(|(a, b)| *a + *b).collect();
        let y = eigs.psd_project(&shifted)?;
        for k in 0..p_len {
            corr[k] = shifted[k] - y[k];
        }
        x = system.project_coords(&y);
        gap = x.iter().zip(&y).map(|(a, b)| (*a - *b) * (*a - *b)).sum::<T>().sqrt();
        if it % every == 0 {
            trace.push(gap.as_f64());
        }
        let scale = T::one().max(norm(&x));
        let check_now = it < 100 || it % 10 == 0 || gap <= affine_tol * scale;
        if check_now {
            if let Some(res) = accept(&mut eigs, &x)? {
                return Ok(feasible(&x, it, gap, trace, res));
            }
            if gap <= affine_tol {
                if let Some(res) = accept(&mut eigs, &y)? {
                    return Ok(feasible(&y, it, gap, trace, res));
                }
            }
        }
        if it % window == 0 {
            if let Some(prev) = window_gap {
                if gap > gap_threshold && (prev - gap).abs() <= stall_rel * gap {
                    return unresolved(system, FeasibilityStatus::Infeasible, &x, it, gap, trace);
                }
            }
            window_gap = Some(gap);
        }
    }
    unresolved(system, FeasibilityStatus::Undetermined, &x, options.max_iter, gap, trace)
}

fn unresolved<T: Real>(
    system: &AffineSystem<T>,
    status: FeasibilityStatus,
    x: &[T],
    iterations: usize,
    gap: T,
    residuals: Vec<f64>,
) -> Result<FeasibilityReport<T>> {
    let lmin = herm_eig(&system.coords.decode(x))?.values.last().copied().unwrap_or_else(T::zero);
    Ok(FeasibilityReport {
        status,
        iterations,
        gap: gap.as_f64(),
        affine_residual: AffineSystem::raw_residual(&system.rows, &system.rhs, x).as_f64(),
        psd_residual: (-lmin).max(T::zero()).as_f64(),
        residuals,
        witness: None,
    })
}

/// [`extend_qsc`] with the trace-preservation constraints switched on.
pub fn tp_extension_exists<T: Real>(q: &QscAction<T>, options: &ExtendOptions) -> Result<FeasibilityReport<T>> {
    extend_qsc(q, None, true, options)
}

/// One witness gathered by [`extension_spread`].
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct SpreadEntry<T: Real = f64> {
    pub e: usize,
    /// Built as the midpoint of two other witnesses.
    pub midpoint: bool,
    pub witness: Superchannel<T>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct SpreadReport<T: Real = f64> {
    pub min_e: Option<usize>,
    pub max_e: Option<usize>,
    pub witnesses: Vec<SpreadEntry<T>>,
}

/// Run [`extend_qsc`] from every seed (`None` is the default seed), add the
/// midpoints of all pairs of witnesses, and report the range of auxiliary
/// dimensions. A heuristic: `min_e` only bounds the true minimum from above.
pub fn extension_spread<T: Real>(
    q: &QscAction<T>,
    seeds: &[Option<Matrix<T>>],
    eps: T,
    options: &ExtendOptions,
) -> Result<SpreadReport<T>> {
    let system = AffineSystem::new(q, false)?;
    let mut found: Vec<Superchannel<T>> = Vec::new();
    for seed in seeds {
        let report = extend_with_system(&system, seed.as_ref(), options)?;
        if let Some(w) = report.witness {
            found.push(w);
        }
    }
    let mut witnesses = Vec::new();
    for w in &found {
        witnesses.push(SpreadEntry { e: w.aux_dim(eps)?, midpoint: false, witness: w.clone() });
    }
    let half = T::lit(0.5);
    for i in 0..found.len() {
        for j in i + 1..found.len() {
            let mid = Superchannel::combine(&[(half, &found[i]), (half, &found[j])])?;
            witnesses.push(SpreadEntry { e: mid.aux_dim(eps)?, midpoint: true, witness: mid });
        }
    }
    Ok(SpreadReport {
        min_e: witnesses.iter().map(|w| w.e).min(),
        max_e: witnesses.iter().map(|w| w.e).max(),
        witnesses,
    })
}

/// Projection onto `S(d2, r2)` applied to each image; repairs rounding noise in
/// hand-made inputs before validation.
pub fn clean_images<T: Real>(q: &QscAction<T>) -> Result<QscAction<T>> {
    let (d1, r1, d2, r2) = q.dims();
    let images = q.images().iter().map(|y| project_s(y, d2, r2)).collect::<Result<Vec<_>>>()?;
    QscAction::new(d1, r1, d2, r2, images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    fn gamma(block: usize) -> Superchannel {
        Superchannel::from_map(2, 2, 1, 1, |x| {
            let t: Complex<f64> = (0..2).map(|s| x[(block * 2 + s, block * 2 + s)]).sum();
            Ok(Matrix::from_fn(1, 1, |_, _| t))
        })
        .unwrap()
    }

    #[test]
    fn coords_round_trip_and_isometry() {
        let c = HermCoords { n: 3 };
        let m: Matrix =
            Matrix::from_fn(3, 3, |i, j| Complex::new((i + 2 * j) as f64, i as f64 - j as f64)).hermitian_part();
        let x = c.encode(&m);
        assert!(c.decode(&x).approx_eq(&m, 1e-14));
        assert!((norm(&x) - m.frobenius_norm()).abs() < 1e-12);
        for k in 0..c.len() {
            let mut e = vec![0.0; c.len()];
            e[k] = 1.0;
            let direct = c.decode(&e);
            let mut sparse = Matrix::zeros(3, 3);
            for (a, b, v) in c.unit_entries::<f64>(k) {
                sparse[(a, b)] = v;
            }
            assert!(direct.approx_eq(&sparse, 1e-15));
        }
    }

    #[test]
    fn affine_system_contains_generator() {
        let g = gamma(0);
        let q = QscAction::from_superchannel(&g).unwrap();
        q.validate(1e-9).unwrap();
        let sys = AffineSystem::new(&q, false).unwrap();
        assert!(sys.residual(g.choi()).unwrap() < 1e-12);
        assert!(sys.project(g.choi()).unwrap().approx_eq(g.choi(), 1e-12));
        // minimum-norm point is the midpoint of the two compressions
        assert!(sys.min_norm_point().approx_eq(&Matrix::diag_real(&[0.5; 4]), 1e-12));
    }

    #[test]
    fn seeded_fixed_point_and_default_seed() {
        let q = QscAction::from_superchannel(&gamma(0)).unwrap();
        let opts = ExtendOptions::default();
        let r = extend_qsc(&q, Some(gamma(0).choi()), false, &opts).unwrap();
        assert!(r.is_feasible());
        assert_eq!(r.iterations, 0);
        assert!(r.witness.unwrap().choi().approx_eq(gamma(0).choi(), 1e-12));
        let r = extend_qsc(&q, None, false, &opts).unwrap();
        assert!(r.is_feasible());
    }

    #[test]
    fn inconsistent_action_is_rejected() {
        let q = QscAction::from_superchannel(&gamma(0)).unwrap();
        let mut images = q.images().to_vec();
        // an image of a traceless basis element gets a nonzero trace
        let k = basis_s::<f64>(2, 2).iter().position(|x| x.trace().norm() < 1e-12 && x[(0, 1)].norm() > 0.1).unwrap();
        images[k] = Matrix::identity(1);
        let bad = QscAction::new(2, 2, 1, 1, images).unwrap();
        assert!(bad.validate(1e-9).is_err());
    }

    #[test]
    fn spread_on_compressions() {
        let q = QscAction::from_superchannel(&gamma(0)).unwrap();
        let seeds = vec![Some(gamma(0).into_choi()), Some(gamma(1).into_choi()), None];
        let s = extension_spread(&q, &seeds, 1e-9, &ExtendOptions::default()).unwrap();
        assert_eq!(s.min_e, Some(1));
        assert_eq!(s.max_e, Some(2));
        assert!(s.witnesses.iter().any(|w| w.midpoint && w.e == 2));
    }

    #[test]
    fn serde_rejects_wrong_count() {
        let q = QscAction::from_superchannel(&gamma(0)).unwrap();
        let mut v: serde_json::Value = serde_json::to_value(&q).unwrap();
        v["images"].as_array_mut().unwrap().pop();
        assert!(serde_json::from_value::<QscAction>(v).is_err());
    }
}
