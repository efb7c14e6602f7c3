//! Named supermaps used by the examples, the fixtures and the tests.

use num_complex::Complex;

use crate::choi::ChannelChoi;
use crate::error::{Error, Result};
use crate::extend::QscAction;
use crate::matcore::Matrix;
use crate::random;
use crate::scalar::Real;
use crate::supermap::{Characterisation, Superchannel};

/// `M_2(M_{r1}) → M_1(M_1)`, `C ↦ Tr` of diagonal block `block` (0 or 1).
/// Its Choi matrix is the projection onto that block.
pub fn block_trace<T: Real>(r1: usize, block: usize) -> Result<Superchannel<T>> {
    if block > 1 || r1 == 0 {
        return Err(Error::InvalidData(format!("block {block} of M_2(M_{r1}) does not exist")));
    }
    Superchannel::from_map(2, r1, 1, 1, |x| {
        let t: Complex<T> = (0..r1).map(|s| x[(block * r1 + s, block * r1 + s)]).sum();
        Ok(Matrix::from_fn(1, 1, |_, _| t))
    })
}

/// `p · block_trace(r1, 0) + (1 − p) · block_trace(r1, 1)`.
pub fn block_trace_mixture<T: Real>(r1: usize, p: T) -> Result<Superchannel<T>> {
    let a = block_trace(r1, 0)?;
    let b = block_trace(r1, 1)?;
    Superchannel::combine(&[(p, &a), (T::one() - p, &b)])
}

/// `M_2(M_1) → M_1(M_1)` reading diagonal entry `entry` of a 2×2 matrix.
pub fn entry_readout<T: Real>(entry: usize) -> Result<Superchannel<T>> {
    block_trace(1, entry)
}

/// Images of `E_11, …, E_44` for the diagonal map `M_2(M_2) → M_2(M_2)`
/// with no trace-preserving extension.
pub fn no_tp_diagonals() -> [[f64; 4]; 4] {
    [[0.5, 0.5, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]]
}

/// The diagonal supermap `E_kk ↦ diag(row k)` of [`no_tp_diagonals`], with
/// every other matrix unit sent to zero.
pub fn diagonal_no_tp<T: Real>() -> Superchannel<T> {
    let rows = no_tp_diagonals();
    Superchannel::from_map(2, 2, 2, 2, |g| {
        let k = (0..4).find(|&k| g[(k, k)].re == T::one());
        Ok(match k {
            Some(k) => Matrix::diag(&rows[k].map(T::lit)),
            None => Matrix::zeros(4, 4),
        })
    })
    .expect("fixed dimensions")
}

/// The QSC obtained by restricting [`diagonal_no_tp`] to `S(2, 2)`.
pub fn no_tp_qsc<T: Real>() -> QscAction<T> {
    QscAction::from_superchannel(&diagonal_no_tp()).expect("fixed dimensions")
}

/// Random superchannel `ψ_post ∘ (φ ⊗ id_e) ∘ Ad(V)` with a Haar-like
/// isometry `V` and a random CPTP `ψ_post`. Its auxiliary dimension is at most `e`.
pub fn random_superchannel<T: Real>(
    d1: usize,
    r1: usize,
    d2: usize,
    r2: usize,
    e: usize,
    seed: u64,
) -> Result<Superchannel<T>> {
    random_characterisation(d1, r1, d2, r2, e, seed)?.recompose(d1, r1)
}

/// The generating data of [`random_superchannel`].
pub fn random_characterisation<T: Real>(
    d1: usize,
    r1: usize,
    d2: usize,
    r2: usize,
    e: usize,
    seed: u64,
) -> Result<Characterisation<T>> {
    if d1 * e < d2 {
        return Err(Error::InvalidData(format!("no isometry from C^{d2} into C^{d1} ⊗ C^{e}")));
    }
    let mut g = random::rng(seed);
    let v_pre = random::random_isometry::<T, _>(d1 * e, d2, &mut g)?;
    let m = r1 * e;
    let rank = (m.div_ceil(r2) + 1).min(m * r2);
    let post = ChannelChoi::random(m, r2, rank, seed.wrapping_mul(0x9e37_79b9).wrapping_add(1))?;
    Ok(Characterisation { e, v_pre, post })
}
