//! Executable versions of the worked examples: twelve numbered checks, each
//! reporting pass/fail with a one-line detail.
//!
//! Every numeric threshold can be replaced by a single override; a tiny
//! override (e.g. `1e-30`) makes the numeric checks fail, which exercises the
//! failure path. Exact integer checks ignore it.

use std::time::Instant;

use num_complex::Complex;
use serde::Serialize;

use crate::choi::ChannelChoi;
use crate::error::{Error, Result};
use crate::extend::{extend_qsc, tp_extension_exists, ExtendOptions, FeasibilityStatus, QscAction};
use crate::extremal::{is_extreme_choi, is_extreme_constrained, perturbation_search_oracle, ConstraintSpaces};
use crate::instances::{
    block_trace, block_trace_mixture, diagonal_no_tp, entry_readout, no_tp_qsc, random_characterisation,
};
use crate::matcore::{min_eigenvalue, psd_project, vector_rank, Matrix};
use crate::opsys::{basis_s, decompose_cptp, dimension, in_s, tensor_dimension_gap, tensor_elements};
use crate::random::{gaussian_matrix, random_hermitian, random_psd, random_unitary, rng};
use crate::supermap::{factor_unitary, tensor_super, Superchannel, UnitaryFactorization};

/// Names of the checks, indexed from 1.
pub const CRITERIA: [&str; 12] = [
    "dimension formula",
    "tensor-inclusion gap",
    "non-unique extension",
    "auxiliary-dimension ranks",
    "no trace-preserving extension",
    "tensoring pathology",
    "characterisation round trip",
    "induced unital map",
    "trace-scaling preservation",
    "unitary superchannels",
    "extremality",
    "property gate",
];

#[derive(Clone, Copy, Debug, Default)]
pub struct DemoOptions {
    /// Replaces every numeric tolerance.
    pub tol: Option<f64>,
    /// Iteration cap for the feasibility runs (default 200000).
    pub max_iter: Option<usize>,
    /// Seed offset for the random instances.
    pub seed: u64,
    pub parallel: bool,
}

impl DemoOptions {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {} ({:.0} ms): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_ms,
            self.detail
        )
    }
}

type Check = Result<(bool, String)>;

pub fn run_criterion(id: usize, opts: &DemoOptions) -> Outcome {
    let start = Instant::now();
    let result = match id {
        1 => dimension_formula(),
        2 => tensor_gap(),
        3 => non_unique_extension(opts),
        4 => aux_ranks(opts),
        5 => no_tp_extension(opts),
        6 => tensoring(opts),
        7 => round_trip(opts),
        8 => induced_map(opts),
        9 => trace_scaling(opts),
        10 => unitaries(opts),
        11 => extremality(opts),
        12 => property_gate(opts),
        _ => Err(Error::InvalidData(format!("no check numbered {id}"))),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    if let Some(limit) = time_limit(id) {
        if elapsed > limit {
            passed = false;
            detail.push_str(&format!("; took {elapsed:.1} s, limit {limit} s"));
        }
    }
    Outcome {
        id,
        name: CRITERIA.get(id.wrapping_sub(1)).copied().unwrap_or("unknown"),
        passed,
        detail,
        elapsed_ms: elapsed * 1e3,
    }
}

fn time_limit(id: usize) -> Option<f64> {
    match id {
        1 | 3 => Some(1.0),
        2 => Some(10.0),
        5 => Some(60.0),
        6 => Some(5.0),
        _ => None,
    }
}

/// All twelve checks in order.
pub fn run_all(opts: &DemoOptions) -> Vec<Outcome> {
    if !opts.parallel {
        return (1..=12).map(|id| run_criterion(id, opts)).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (1..=12).map(|id| s.spawn(move || run_criterion(id, opts))).collect();
        handles
            .into_iter()
            .zip(1..)
            .map(|(h, id)| {
                h.join().unwrap_or_else(|_| Outcome {
                    id,
                    name: CRITERIA[id - 1],
                    passed: false,
                    detail: "panicked".into(),
                    elapsed_ms: 0.0,
                })
            })
            .collect()
    })
}

fn verdict(ok: bool, detail: String) -> Check {
    Ok((ok, detail))
}

fn dimension_formula() -> Check {
    let mut bad = Vec::new();
    for d in 1..=3 {
        for r in 1..=3 {
            let expected = d * d * r * r - d * d + 1;
            let found = basis_s::<f64>(d, r).len();
            if found != expected || dimension(d, r) != expected {
                bad.push(format!("({d},{r}): {found} vs {expected}"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() { "|basis_S(d,r)| = d²r² − d² + 1 on {1,2,3}²".into() } else { bad.join(", ") },
    )
}

fn tensor_gap() -> Check {
    let gap = tensor_dimension_gap(2, 2, 2, 2);
    let big = basis_s::<f64>(4, 4);
    let big_rank = vector_rank(&big.iter().map(|m| m.vectorize()).collect::<Vec<_>>(), 1e-9)?;
    let small = basis_s::<f64>(2, 2);
    let mut products = Vec::with_capacity(small.len() * small.len());
    let mut inside = true;
    for x in &small {
        for y in &small {
            let z = tensor_elements(x, (2, 2), y, (2, 2))?;
            inside &= in_s(&z, 4, 4, 1e-9)?.member;
            products.push(z.vectorize());
        }
    }
    let product_rank = vector_rank(&products, 1e-9)?;
    let ok = gap == 72 && big_rank == 241 && product_rank == 169 && inside;
    verdict(
        ok,
        format!("gap {gap}; rank S(4,4) = {big_rank}, rank of products = {product_rank}, products inside: {inside}"),
    )
}

fn gammas() -> Result<(Superchannel, Superchannel)> {
    Ok((block_trace(2, 0)?, block_trace(2, 1)?))
}

fn non_unique_extension(opts: &DemoOptions) -> Check {
    let (g1, g2) = gammas()?;
    let dist = (g1.choi() - g2.choi()).frobenius_norm();
    let restricted = g1.restriction_distance(&g2)?;
    let tol = opts.tol(1e-10);
    let ok = (dist - 2.0).abs() <= tol && restricted <= tol;
    verdict(ok, format!("‖C1 − C2‖_F = {dist:.12}, restriction distance {restricted:.1e} (tol {tol:.0e})"))
}

fn aux_ranks(opts: &DemoOptions) -> Check {
    let tol = opts.tol(1e-12);
    let eps = 1e-9;
    let (g1, g2) = gammas()?;
    let mut ok = g1.aux_dim(eps)? == 1 && g2.aux_dim(eps)? == 1;
    ok &= g1.marginal().approx_eq(&Matrix::diag_real(&[2.0, 0.0]), tol);
    ok &= g2.marginal().approx_eq(&Matrix::diag_real(&[0.0, 2.0]), tol);
    let mut ranks = Vec::new();
    for p in [0.25, 0.5, 0.75] {
        let mix: Superchannel = block_trace_mixture(2, p)?;
        let e = mix.aux_dim(eps)?;
        ranks.push(e);
        ok &= e == 2 && mix.marginal().approx_eq(&Matrix::diag_real(&[2.0 * p, 2.0 - 2.0 * p]), tol);
    }
    verdict(ok, format!("e(Γ1) = e(Γ2) = 1, mixtures {ranks:?}, marginals to {tol:.0e}"))
}

fn extend_options(opts: &DemoOptions) -> ExtendOptions {
    let mut o = ExtendOptions::default();
    if let Some(m) = opts.max_iter {
        o.max_iter = m;
    }
    if let Some(t) = opts.tol {
        o.affine_tol = t;
        o.psd_tol = t;
    }
    o
}

fn no_tp_extension(opts: &DemoOptions) -> Check {
    let q: QscAction = no_tp_qsc();
    let o = extend_options(opts);
    let tp = tp_extension_exists(&q, &o)?;
    let printed = diagonal_no_tp::<f64>();
    let seeded = extend_qsc(&q, Some(printed.choi()), false, &o)?;
    let tol = opts.tol(1e-8);
    let reproduced = seeded.witness.as_ref().map(|w| (w.choi() - printed.choi()).max_abs());
    let plain = extend_qsc(&q, None, false, &o)?;
    let ok = tp.status == FeasibilityStatus::Infeasible
        && tp.gap > 1e-6
        && seeded.is_feasible()
        && reproduced.is_some_and(|e| e <= tol)
        && plain.is_feasible();
    verdict(
        ok,
        format!(
            "with TP: {:?} after {} iterations, gap {:.3e}; CP only: {:?} (witness error {:.1e}), default seed {:?}",
            tp.status,
            tp.iterations,
            tp.gap,
            seeded.status,
            reproduced.unwrap_or(f64::NAN),
            plain.status
        ),
    )
}

fn tensoring(opts: &DemoOptions) -> Check {
    let tol = opts.tol(1e-9);
    let a: Superchannel = entry_readout(0)?;
    let b: Superchannel = entry_readout(1)?;
    let small = a.restriction_distance(&b)?;
    let id = Superchannel::identity(2, 2);
    let ta = tensor_super(&id, &a)?;
    let tb = tensor_super(&id, &b)?;
    let big = ta.restriction_distance(&tb)?;
    let ok = small <= tol && big > tol && ta.dims() == (4, 2, 2, 2);
    verdict(ok, format!("distance on S(2,1) {small:.1e}; after tensoring with the identity on S(4,2) {big:.3}"))
}

/// Twenty generated superchannels, `e = 1` for even index and `2` for odd.
fn generated(opts: &DemoOptions) -> Result<Vec<(usize, Superchannel)>> {
    (0..20u64)
        .map(|k| {
            let e = 1 + (k as usize % 2);
            let c = random_characterisation(2, 2, 2, 2, e, opts.seed.wrapping_add(1000 + k))?;
            Ok((e, c.recompose(2, 2)?))
        })
        .collect()
}

fn round_trip(opts: &DemoOptions) -> Check {
    let mut worst_iso: f64 = 0.0;
    let mut worst_apply: f64 = 0.0;
    let mut ok = true;
    let mut es = Vec::new();
    for (k, (e, s)) in generated(opts)?.into_iter().enumerate() {
        let ch = s.characterize(opts.tol(1e-9))?;
        es.push(ch.e);
        ok &= ch.e <= e && ch.e <= 4;
        worst_iso = worst_iso.max(ch.isometry_residual()?);
        let back = ch.recompose(2, 2)?;
        for t in 0..10u64 {
            let phi = ChannelChoi::random(2, 2, 1 + (t as usize % 4), opts.seed.wrapping_add(k as u64 * 100 + t))?;
            let diff = (s.apply_super(&phi)?.choi() - back.apply_super(&phi)?.choi()).frobenius_norm();
            worst_apply = worst_apply.max(diff);
        }
    }
    ok &= worst_iso <= opts.tol(1e-9) && worst_apply <= opts.tol(1e-8);
    verdict(ok, format!("e found {es:?}; isometry residual {worst_iso:.1e}; apply_super mismatch {worst_apply:.1e}"))
}

fn induced_map(opts: &DemoOptions) -> Check {
    let tol = opts.tol(1e-9);
    let mut g = rng(opts.seed.wrapping_add(77));
    let (mut consistency, mut unital, mut marg): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (_, s) in generated(opts)? {
        let n = s.induced_map(1e-9)?;
        for _ in 0..50 {
            let c: Matrix = gaussian_matrix(4, 4, &mut g);
            consistency = consistency.max(s.induced_residual(&n, &c)? / c.frobenius_norm().max(1.0));
        }
        unital = unital.max((&n.apply(&Matrix::identity(2))? - &Matrix::identity(2)).frobenius_norm());
        marg = marg.max((&s.marginal() - &n.choi().scale(2.0)).frobenius_norm());
    }
    verdict(
        consistency <= tol && unital <= tol && marg <= tol,
        format!("consistency residual {consistency:.1e}, unitality {unital:.1e}, marginal vs r1·C_N {marg:.1e} (tol {tol:.0e})"),
    )
}

fn lambda(x: &Matrix, d: usize, r: usize) -> Result<Complex<f64>> {
    Ok(in_s(x, d, r, 0.0)?.lambda)
}

fn trace_scaling(opts: &DemoOptions) -> Check {
    let tol = opts.tol(1e-9);
    let (g1, g2) = gammas()?;
    let mut fixtures: Vec<Superchannel> =
        vec![g1, g2, block_trace_mixture(2, 0.5)?, Superchannel::identity(2, 2), diagonal_no_tp()];
    let mut g = rng(opts.seed.wrapping_add(5));
    fixtures.push(Superchannel::unitary(&random_unitary(2, &mut g), &random_unitary(2, &mut g))?);
    fixtures.push(tensor_super(&Superchannel::identity(2, 2), &entry_readout(0)?)?);
    fixtures.extend(generated(opts)?.into_iter().take(4).map(|(_, s)| s));
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for s in &fixtures {
        let (d1, r1, d2, r2) = s.dims();
        for x in basis_s::<f64>(d1, r1) {
            let y = s.apply(&x)?;
            worst = worst.max((lambda(&y, d2, r2)? - lambda(&x, d1, r1)?).norm());
            count += 1;
        }
    }
    verdict(
        worst <= tol,
        format!("{} fixtures, {count} basis elements, max |λ_out − λ_in| = {worst:.1e}", fixtures.len()),
    )
}

fn phase_distance(a: &Matrix, b: &Matrix) -> f64 {
    let overlap = b.hs_inner(a);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex::new(1.0, 0.0) };
    (a - &b.scale_c(phase)).frobenius_norm()
}

fn unitaries(opts: &DemoOptions) -> Check {
    let tol = opts.tol(1e-9);
    let mut g = rng(opts.seed.wrapping_add(10));
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u1: Matrix = random_unitary(2, &mut g);
        let u2: Matrix = random_unitary(2, &mut g);
        let s = Superchannel::unitary(&u1, &u2)?;
        ok &= s.is_superchannel(tol) && s.aux_dim(1e-9)? == 1 && s.check_order_unit(tol);
        match factor_unitary(&u1.kron(&u2), 2, 2, 1e-9)? {
            UnitaryFactorization::Product { u1: f1, u2: f2, .. } => {
                worst = worst.max(phase_distance(&f1, &u1)).max(phase_distance(&f2, &u2));
            }
            UnitaryFactorization::NotFactorable { .. } => ok = false,
        }
    }
    ok &= worst <= opts.tol(1e-8);
    let mut rejected = 0;
    for _ in 0..20 {
        let u: Matrix = random_unitary(4, &mut g);
        let s = Superchannel::conjugation(&u, 2, 2)?;
        if !s.is_superchannel(tol) && !factor_unitary(&u, 2, 2, 1e-9)?.is_product() {
            rejected += 1;
        }
    }
    ok &= rejected == 20;
    verdict(
        ok,
        format!(
            "20 product unitaries recovered to {worst:.1e} up to phase; {rejected}/20 entangling unitaries rejected"
        ),
    )
}

fn extremality(opts: &DemoOptions) -> Check {
    let tol = opts.tol(1e-9);
    let (g1, g2) = gammas()?;
    let mid: Superchannel = block_trace_mixture(2, 0.5)?;
    let s22 = ConstraintSpaces::operator_system(2, 2);
    let mut disagreements = Vec::new();
    let mut oracle_runs = 0;
    let mut oracle_check = |name: String, phi: &ChannelChoi, spaces: &ConstraintSpaces, expected: bool| -> Result<()> {
        match perturbation_search_oracle(phi, spaces, 8, 1e-3) {
            Ok(v) => {
                oracle_runs += 1;
                if v.extreme_likely != expected {
                    disagreements.push(name);
                }
                Ok(())
            }
            Err(Error::SizeCap { .. }) => Ok(()),
            Err(e) => Err(e),
        }
    };
    let named = [(&g1, true), (&g2, true), (&mid, false)];
    let mut ok = true;
    for (k, (s, expected)) in named.into_iter().enumerate() {
        let got = is_extreme_constrained(&s.as_channel(), &s22, tol)?;
        ok &= got == expected;
        oracle_check(format!("fixture {k}"), &s.as_channel(), &s22, got)?;
    }
    let shapes: [(usize, usize); 4] = [(2, 2), (2, 3), (3, 2), (3, 3)];
    let mut mismatch = 0;
    let mut extreme_count = 0;
    for k in 0..20usize {
        let (d, r) = shapes[k % 4];
        let rank = (1 + (k / 4) % 4).max(d.div_ceil(r));
        let phi = ChannelChoi::random(d, r, rank, opts.seed.wrapping_add(500 + k as u64))?;
        let choi = is_extreme_choi(&phi, tol)?;
        let expected = is_extreme_constrained(&phi, &ConstraintSpaces::identity_only(d), tol)?;
        extreme_count += choi as usize;
        if choi != expected {
            mismatch += 1;
        }
        oracle_check(format!("random {k}"), &phi, &ConstraintSpaces::identity_only(d), expected)?;
        // full span pins the map completely
        let full = is_extreme_constrained(&phi, &ConstraintSpaces::full(d), tol)?;
        ok &= full;
    }
    ok &= mismatch == 0 && disagreements.is_empty();
    verdict(
        ok,
        format!(
            "Γ1, Γ2 extreme, midpoint not; Choi criterion vs 𝒮 = ℂI agree on {}/20 ({extreme_count} extreme); oracle ran {oracle_runs}, disagreed on {disagreements:?}",
            20 - mismatch
        ),
    )
}

fn property_gate(opts: &DemoOptions) -> Check {
    let tol = opts.tol(1e-9);
    let mut g = rng(opts.seed.wrapping_add(12));
    let shapes = [(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)];
    let mut kraus_err: f64 = 0.0;
    for k in 0..100 {
        let (d, r) = shapes[k % shapes.len()];
        let rank = 1 + k % (d * r);
        let c: Matrix = random_psd(d * r, rank, &mut g);
        let phi = ChannelChoi::new(d, r, c)?;
        let back = ChannelChoi::from_kraus(&phi.kraus(1e-12)?)?;
        kraus_err = kraus_err.max((back.choi() - phi.choi()).frobenius_norm() / phi.choi().frobenius_norm());
    }
    let mut psd_ok = true;
    for k in 0..20 {
        let h: Matrix = random_hermitian(2 + k % 4, &mut g);
        let p = psd_project(&h)?;
        let rest = &h - &p;
        let scale = h.frobenius_norm();
        psd_ok &= min_eigenvalue(&p)? >= -tol * scale;
        psd_ok &= min_eigenvalue(&rest.scale(-1.0))? >= -tol * scale;
        psd_ok &= p.hs_inner(&rest).norm() <= tol * scale * scale;
        let best = rest.frobenius_norm();
        for _ in 0..5 {
            let q: Matrix = random_psd(h.rows(), h.rows(), &mut g);
            psd_ok &= best <= (&h - &q).frobenius_norm() + tol;
            let near = &p + &random_psd(h.rows(), 1, &mut g).scale(1e-3);
            psd_ok &= best <= (&h - &near).frobenius_norm() + tol;
        }
    }
    let mut decomp_err: f64 = 0.0;
    let mut cptp_ok = true;
    let s_shapes = [(2, 2), (2, 3), (3, 2)];
    for k in 0..50 {
        let (d, r) = s_shapes[k % 3];
        let mut x = Matrix::zeros(d * r, d * r);
        for b in basis_s::<f64>(d, r) {
            let c: Matrix = gaussian_matrix(1, 1, &mut g);
            x += &b.scale_c(c[(0, 0)]);
        }
        let terms = decompose_cptp(&x, d, r, 1e-9)?;
        let mut y = Matrix::zeros(d * r, d * r);
        for (c, ch) in &terms {
            cptp_ok &= ch.is_cp(1e-9) && ch.is_tp(1e-9);
            y += &ch.choi().scale_c(*c);
        }
        decomp_err = decomp_err.max((&x - &y).frobenius_norm() / x.frobenius_norm().max(1.0));
    }
    let ok = kraus_err <= tol && psd_ok && decomp_err <= tol && cptp_ok;
    verdict(
        ok,
        format!("Choi↔Kraus {kraus_err:.1e} (100 maps); PSD projection optimal: {psd_ok}; decompose_cptp {decomp_err:.1e} (50 elements)"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_items_pass_and_fail_on_demand() {
        let opts = DemoOptions::default();
        for id in [1, 3, 4, 6] {
            let o = run_criterion(id, &opts);
            assert!(o.passed, "{o}");
        }
        let strict = DemoOptions { tol: Some(1e-30), ..Default::default() };
        assert!(run_criterion(1, &strict).passed);
        assert!(!run_criterion(4, &strict).passed || !run_criterion(3, &strict).passed);
        assert!(!run_criterion(99, &opts).passed);
    }
}
