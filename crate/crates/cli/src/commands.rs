use std::path::PathBuf;

use anyhow::Result;
use serde_json::{json, Value};

use superchannel::choi::ChannelChoi;
use superchannel::demo::{self, DemoOptions};
use superchannel::extend::{extend_qsc, ExtendOptions, FeasibilityReport, FeasibilityStatus, QscAction};
use superchannel::extremal::{extreme_report, perturbation_search_oracle, ConstraintSpaces};
use superchannel::matcore::{min_eigenvalue, Matrix};
use superchannel::opsys::{basis_s, dimension, in_s};
use superchannel::random::{random_psd, rng};
use superchannel::supermap::{factor_unitary, unitary_defect, Superchannel, UnitaryFactorization};
use superchannel::{Error, Tolerances};

use crate::io::{input_error, parse_json, read_json, read_text, write_json};
use crate::report::{RunReport, Status};

/// Flags shared by every subcommand.
pub struct Global {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Global {
    /// `--tol` if given, else `default`.
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn base_tol(&self) -> f64 {
        self.tol(Tolerances::default().default)
    }
}

/// Library errors caused by malformed input become input errors; the rest
/// are genuine findings.
fn classify(e: Error) -> anyhow::Error {
    match e {
        Error::DimensionMismatch(_) | Error::InvalidData(_) | Error::InvalidQsc(_) => input_error(e.to_string()),
        other => other.into(),
    }
}

fn scale(m: &Matrix) -> f64 {
    m.frobenius_norm().max(1.0)
}

pub fn check_channel(path: &str, g: &Global) -> Result<RunReport> {
    let phi: ChannelChoi = read_json(path)?;
    let tol = g.base_tol();
    let mut rep = RunReport::new("check-channel", &[path]);
    rep.info("dims", json!({"d": phi.d(), "r": phi.r()}));
    let s = scale(phi.choi());
    let herm = phi.choi().hermitian_defect();
    rep.measure("hermitian_defect", herm, tol * s, herm <= tol * s);
    let min_eig = min_eigenvalue(&phi.choi().hermitian_part())?;
    rep.measure("min_eigenvalue", min_eig, tol * s, min_eig >= -tol * s);
    let cp = rep.flag("completely_positive", phi.is_cp(tol), tol);
    let tp_defect = phi.tp_defect();
    rep.measure("tp_defect", tp_defect, tol, tp_defect <= tol);
    let tp = rep.flag("trace_preserving", phi.is_tp(tol), tol);
    let membership = in_s(phi.choi(), phi.d(), phi.r(), tol)?;
    rep.flag("in_operator_system", membership.member, tol);
    rep.number("lambda", json!([membership.lambda.re, membership.lambda.im]), tol);
    if cp {
        rep.number("kraus_rank", phi.kraus_rank(tol)?, tol);
    }
    rep.residuals = vec![herm, tp_defect];
    rep.fail_unless(cp && tp);
    Ok(rep)
}

fn worst_induced_residual(s: &Superchannel) -> Result<f64> {
    let n = s.induced_map_unchecked()?;
    let (d1, r1, _, _) = s.dims();
    let k = d1 * r1;
    let mut worst = 0f64;
    for a in 0..k {
        for b in 0..k {
            worst = worst.max(s.induced_residual(&n, &Matrix::unit(k, a, b))?);
        }
    }
    Ok(worst)
}

pub fn check_super(path: &str, g: &Global) -> Result<RunReport> {
    let s: Superchannel = read_json(path)?;
    let tol = g.base_tol();
    let (d1, r1, d2, r2) = s.dims();
    let mut rep = RunReport::new("check-super", &[path]);
    rep.info("dims", json!({"d1": d1, "r1": r1, "d2": d2, "r2": r2}));
    let check = s.check(tol)?;
    let sc = scale(s.choi());
    rep.measure("hermitian_defect", check.hermitian_defect, tol * sc, check.hermitian_defect <= tol * sc);
    rep.measure("min_eigenvalue", check.min_eigenvalue, tol * sc, check.min_eigenvalue >= -tol * sc);
    rep.measure("tp_defect_on_basis", check.tp_defect, tol * sc, check.tp_preserving);
    rep.info("order_unit_preserved", s.check_order_unit(tol));
    rep.number("aux_dim", s.aux_dim(tol)?, tol);
    let n = s.induced_map_unchecked()?;
    let unital_defect = (&n.apply(&Matrix::identity(d1))? - &Matrix::identity(d2)).frobenius_norm();
    let consistency = worst_induced_residual(&s)?;
    rep.measure("induced_map_residual", consistency, tol * sc, consistency <= tol * sc);
    rep.residuals = vec![check.hermitian_defect, check.tp_defect, consistency, unital_defect];
    // N is only guaranteed unital for superchannels
    let unital = unital_defect <= tol * sc;
    if check.is_superchannel() {
        rep.measure("induced_unital_defect", unital_defect, tol * sc, unital);
    } else {
        rep.number("induced_unital_defect", unital_defect, tol * sc);
    }
    rep.fail_unless(check.is_superchannel() && unital);
    Ok(rep)
}

pub fn extend(path: &str, tp: bool, starts: &[String], g: &Global) -> Result<RunReport> {
    let q: QscAction = read_json(path)?;
    let tol = g.base_tol();
    q.validate(tol).map_err(|e| input_error(format!("{path}: inconsistent QSC action: {e}")))?;
    let (d1, r1, d2, r2) = q.dims();
    let n = d1 * r1 * d2 * r2;
    let mut options = ExtendOptions::default();
    if let Some(m) = g.max_iter {
        options.max_iter = m;
    }
    if let Some(t) = g.tol {
        options.affine_tol = t;
        options.psd_tol = t;
    }
    let mut seeds: Vec<Option<Matrix>> = Vec::new();
    for p in starts {
        let s: Superchannel = read_json(p)?;
        if s.dims() != q.dims() {
            return Err(input_error(format!("{p}: start point has dims {:?}, expected {:?}", s.dims(), q.dims())));
        }
        seeds.push(Some(s.into_choi()));
    }
    if seeds.is_empty() {
        seeds.push((g.seed != 0).then(|| random_psd(n, n, &mut rng(g.seed))));
    }

    let command = if tp { "tp-extend" } else { "extend" };
    let mut inputs = vec![path];
    inputs.extend(starts.iter().map(String::as_str));
    let mut rep = RunReport::new(command, &inputs);
    let mut best: Option<FeasibilityReport> = None;
    for seed in &seeds {
        let r = extend_qsc(&q, seed.as_ref(), tp, &options).map_err(classify)?;
        let rank = |s: FeasibilityStatus| match s {
            FeasibilityStatus::Feasible => 2,
            FeasibilityStatus::Undetermined => 1,
            FeasibilityStatus::Infeasible => 0,
        };
        if best.as_ref().is_none_or(|b| rank(r.status) > rank(b.status)) {
            best = Some(r);
        }
    }
    let report = best.expect("at least one start");
    rep.info("trace_preserving_required", tp);
    rep.info("feasibility", {
        let mut v = serde_json::to_value(&report)?;
        if g.out.is_some() {
            v.as_object_mut().expect("object").remove("witness");
        }
        v
    });
    rep.number("iterations", report.iterations, options.affine_tol);
    rep.number("gap", report.gap, options.gap_threshold);
    rep.residuals = report.residuals.clone();
    match (&report.witness, report.status) {
        (Some(w), FeasibilityStatus::Feasible) => {
            // the scales the search itself accepted the witness at
            let ps = options.psd_tol * scale(w.choi());
            let ratio = d1 as f64 / d2 as f64;
            let mut rhs_sq: f64 = q.images().iter().map(|m| m.frobenius_norm().powi(2)).sum();
            if tp {
                rhs_sq += (d1 * r1) as f64 / (ratio * ratio);
            }
            let at = options.affine_tol * rhs_sq.sqrt().max(1.0);
            let mut ok = rep.measure("affine_residual", report.affine_residual, at, report.affine_residual <= at);
            ok &= rep.measure("psd_residual", report.psd_residual, ps, report.psd_residual <= ps);
            if tp {
                // (d1/d2)·Σ is the trace-preserving map
                let defect = w.as_channel().scaled(ratio).tp_defect();
                let t = 10.0 * at;
                ok &= rep.measure("witness_tp_defect", defect, t, defect <= t);
            }
            rep.number("witness_aux_dim", w.aux_dim(tol)?, tol);
            if let Some(out) = &g.out {
                write_json(out, w)?;
                rep.info("witness_file", out.display().to_string());
            }
            rep.status = Status::from_bool(ok);
        }
        (_, FeasibilityStatus::Infeasible) => rep.status = Status::Fail,
        _ => rep.status = Status::Undetermined,
    }
    Ok(rep)
}

pub fn characterize(path: &str, g: &Global) -> Result<RunReport> {
    let s: Superchannel = read_json(path)?;
    let tol = g.base_tol();
    let mut rep = RunReport::new("characterize", &[path]);
    let ch = match s.characterize(tol) {
        Ok(ch) => ch,
        Err(
            e @ (Error::NotSuperchannel(_)
            | Error::PostNotCptp(_)
            | Error::ResidualTooLarge { .. }
            | Error::NotCompletelyPositive { .. }),
        ) => {
            let check = s.check(tol)?;
            rep.number("min_eigenvalue", check.min_eigenvalue, tol);
            rep.number("tp_defect_on_basis", check.tp_defect, tol);
            rep.info("error", e.to_string());
            rep.status = Status::Fail;
            return Ok(rep);
        }
        Err(e) => return Err(classify(e)),
    };
    let (d1, r1, _, _) = s.dims();
    rep.number("e", ch.e, tol);
    let iso = ch.isometry_residual()?;
    rep.measure("isometry_residual", iso, tol, iso <= tol);
    let back = ch.recompose(d1, r1)?;
    let recomposition = (back.choi() - s.choi()).frobenius_norm() / scale(s.choi());
    let rt = g.tol(1e-8);
    rep.measure("recomposition_residual", recomposition, rt, recomposition <= rt);
    let post_ok = ch.post.is_cp(tol) && ch.post.is_tp(tol);
    rep.flag("post_processing_cptp", post_ok, tol);
    rep.residuals = vec![iso, recomposition];
    rep.fail_unless(iso <= tol && recomposition <= rt && post_ok);
    match &g.out {
        Some(out) => {
            write_json(out, &ch)?;
            rep.info("characterisation_file", out.display().to_string());
        }
        None => rep.info("characterisation", serde_json::to_value(&ch)?),
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Constraint {
    /// Trace preserving only: the plain Choi criterion.
    Tp,
    /// Unital and trace preserving.
    UnitalTp,
    /// Every input fixed.
    Full,
    /// No constraint at all.
    None,
}

pub fn extreme(path: &str, constraint: Option<Constraint>, g: &Global) -> Result<RunReport> {
    let text = read_text(path)?;
    let probe: Value = parse_json(&text, path)?;
    let tol = g.tol(Tolerances::default().independence);
    let (phi, spaces, class) = if probe.get("d1").is_some() {
        let s: Superchannel = parse_json(&text, path)?;
        let (d1, r1, _, _) = s.dims();
        (s.as_channel(), ConstraintSpaces::operator_system(d1, r1), "extensions of the restriction")
    } else {
        let phi: ChannelChoi = parse_json(&text, path)?;
        let (d, r) = (phi.d(), phi.r());
        let (spaces, class) = match constraint.unwrap_or(Constraint::Tp) {
            Constraint::Tp => (ConstraintSpaces::identity_only(d), "trace preserving"),
            Constraint::UnitalTp => (ConstraintSpaces::unital_tp(d, r), "unital trace preserving"),
            Constraint::Full => (ConstraintSpaces::full(d), "fixed on all inputs"),
            Constraint::None => (ConstraintSpaces::new(vec![], vec![])?, "unconstrained"),
        };
        (phi, spaces, class)
    };
    let mut rep = RunReport::new("extreme", &[path]);
    rep.info("constraint_class", class);
    let report = match extreme_report(&phi, &spaces, tol) {
        Ok(r) => r,
        Err(e @ Error::NotCompletelyPositive { .. }) => {
            rep.info("error", e.to_string());
            rep.status = Status::Fail;
            return Ok(rep);
        }
        Err(e) => return Err(classify(e)),
    };
    rep.info("report", serde_json::to_value(report)?);
    rep.number("kraus_count", report.kraus_count, tol);
    match perturbation_search_oracle(&phi, &spaces, 8, 1e-3) {
        Ok(v) => {
            rep.number("oracle_null_dimension", v.null_dimension, tol);
            rep.flag("oracle_agrees", v.extreme_likely == report.extreme_constrained, tol);
        }
        Err(Error::SizeCap { unknowns, cap }) => {
            rep.info("oracle", format!("skipped: {unknowns} unknowns over cap {cap}"))
        }
        Err(e) => return Err(e.into()),
    }
    if let Some(out) = &g.out {
        write_json(out, &report)?;
    }
    rep.fail_unless(report.extreme_constrained);
    Ok(rep)
}

pub fn factor(path: &str, d: usize, r: usize, g: &Global) -> Result<RunReport> {
    let u: Matrix = read_json(path)?;
    if u.shape() != (d * r, d * r) {
        return Err(input_error(format!(
            "{path}: expected a {0}x{0} matrix, found {1}x{2}",
            d * r,
            u.rows(),
            u.cols()
        )));
    }
    let tol = g.base_tol();
    let mut rep = RunReport::new("factor-unitary", &[path]);
    let defect = unitary_defect(&u)?;
    if !rep.measure("unitary_defect", defect, tol, defect <= tol) {
        rep.status = Status::Fail;
        return Ok(rep);
    }
    let f = factor_unitary(&u, d, r, tol).map_err(classify)?;
    rep.number("schmidt_coefficients", f.schmidt_coefficients().to_vec(), tol);
    rep.flag("product", f.is_product(), tol);
    if let UnitaryFactorization::Product { u1, u2, .. } = &f {
        let residual = (&u1.kron(u2) - &u).frobenius_norm();
        rep.measure("reconstruction_residual", residual, tol * scale(&u), residual <= tol * scale(&u));
        rep.residuals = vec![defect, residual];
        if let Some(out) = &g.out {
            write_json(out, &json!({"u1": u1, "u2": u2}))?;
        }
    }
    rep.fail_unless(f.is_product());
    Ok(rep)
}

/// Writes the basis document to `--out`, or returns it for stdout.
pub fn basis(d: usize, r: usize, g: &Global) -> Result<(RunReport, Option<Value>)> {
    if d == 0 || r == 0 {
        return Err(input_error("dimensions must be positive"));
    }
    let b = basis_s::<f64>(d, r);
    let doc = json!({"d": d, "r": r, "dim": b.len(), "basis": b});
    let mut rep = RunReport::new("basis", &[]);
    let expected = dimension(d, r);
    rep.measure("dim", b.len(), 0.0, b.len() == expected);
    rep.fail_unless(b.len() == expected);
    match &g.out {
        Some(out) => {
            write_json(out, &doc)?;
            rep.info("basis_file", out.display().to_string());
            Ok((rep, None))
        }
        None => Ok((rep, Some(doc))),
    }
}

pub fn demo_reports(g: &Global, sequential: bool, mut emit: impl FnMut(&RunReport)) -> RunReport {
    let opts = DemoOptions { tol: g.tol, max_iter: g.max_iter, seed: g.seed, parallel: !sequential };
    let outcomes = demo::run_all(&opts);
    let mut summary = RunReport::new("demo-paper", &[]);
    for o in &outcomes {
        let mut item = RunReport::new("demo-paper", &[]);
        item.info("criterion", json!({"id": o.id, "name": o.name}));
        item.info("detail", format!("{} ({:.0} ms)", o.detail, o.elapsed_ms));
        item.status = Status::from_bool(o.passed);
        emit(&item);
        summary.info(&format!("{:02} {}", o.id, o.name), o.passed);
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    summary.measure("passed", passed, 0.0, passed == outcomes.len());
    summary.fail_unless(passed == outcomes.len());
    if let Some(t) = g.tol {
        summary.number("tolerance_override", t, t);
    }
    summary
}
