use rand::Rng;

use superchannel::choi::ChannelChoi;
use superchannel::extremal::{
    extreme_report, hermitian_units, is_extreme_choi, is_extreme_constrained, is_extreme_extension,
    is_extreme_unital_tp, minimal_kraus, perturbation_search_oracle, ConstraintSpaces, ORACLE_CAP,
};
use superchannel::instances::{block_trace, block_trace_mixture};
use superchannel::matcore::Matrix;
use superchannel::random::{random_psd, random_unitary, rng, SeededRng};
use superchannel::supermap::Superchannel;
use superchannel::Error;

fn random_channels() -> Vec<ChannelChoi> {
    let shapes: [(usize, usize); 4] = [(2, 2), (2, 3), (3, 2), (3, 3)];
    (0..20)
        .map(|k| {
            let (d, r) = shapes[k % 4];
            let rank = (1 + (k / 4) % 4).max(d.div_ceil(r));
            ChannelChoi::random(d, r, rank, 7000 + k as u64).unwrap()
        })
        .collect()
}

fn random_unital(g: &mut SeededRng, d: usize, terms: usize) -> ChannelChoi {
    let mut c = Matrix::zeros(d * d, d * d);
    let mut weights: Vec<f64> = (0..terms).map(|_| g.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    for w in weights {
        let u: Matrix = random_unitary(d, g);
        c += &ChannelChoi::conjugation(&u).choi().scale(w);
    }
    ChannelChoi::new(d, d, c).unwrap()
}

/// Random invertible real recombination of a Hermitian spanning set, plus one
/// redundant element.
fn respan(g: &mut SeededRng, basis: &[Matrix]) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(basis.len() + 1);
    for own in basis {
        // diagonally dominant mixing matrix, hence invertible
        let mut m = own.scale(2.0);
        for b in basis {
            m += &b.scale(g.random_range(-0.3..0.3));
        }
        out.push(m);
    }
    if !basis.is_empty() {
        let mut extra = Matrix::zeros(basis[0].rows(), basis[0].cols());
        for b in basis {
            extra += &b.scale(g.random_range(-1.0..1.0));
        }
        out.push(extra);
    }
    out
}

#[test]
fn choi_criterion_is_the_identity_constraint() {
    for phi in random_channels() {
        let choi = is_extreme_choi(&phi, 1e-9).unwrap();
        let constrained = is_extreme_constrained(&phi, &ConstraintSpaces::identity_only(phi.d()), 1e-9).unwrap();
        assert_eq!(choi, constrained);
    }
}

#[test]
fn full_span_pins_every_map() {
    for phi in random_channels() {
        assert!(is_extreme_constrained(&phi, &ConstraintSpaces::full(phi.d()), 1e-9).unwrap());
    }
    let dep = ChannelChoi::<f64>::depolarizing(2, 2);
    assert!(!is_extreme_choi(&dep, 1e-9).unwrap());
    assert!(is_extreme_constrained(&dep, &ConstraintSpaces::full(2), 1e-9).unwrap());
}

#[test]
fn unital_tp_specialisation() {
    let mut g = rng(31);
    let mut seen = [0, 0];
    for k in 0..20 {
        let d = 2 + k % 2;
        let phi = random_unital(&mut g, d, 1 + k % 4);
        let direct = is_extreme_unital_tp(&phi, 1e-9).unwrap();
        let constrained = is_extreme_constrained(&phi, &ConstraintSpaces::unital_tp(d, d), 1e-9).unwrap();
        assert_eq!(direct, constrained, "instance {k}");
        seen[direct as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn basis_independence() {
    let mut g = rng(32);
    let mut cases: Vec<(ChannelChoi, ConstraintSpaces)> = Vec::new();
    for phi in random_channels().into_iter().take(8) {
        let d = phi.d();
        cases.push((phi, ConstraintSpaces::identity_only(d)));
    }
    for k in 0..4 {
        let d = 2 + k % 2;
        cases.push((random_unital(&mut g, d, 2 + k), ConstraintSpaces::unital_tp(d, d)));
    }
    for b in 0..2 {
        let s: Superchannel = block_trace(2, b).unwrap();
        cases.push((s.as_channel(), ConstraintSpaces::operator_system(2, 2)));
    }
    let mid: Superchannel = block_trace_mixture(2, 0.5).unwrap();
    cases.push((mid.as_channel(), ConstraintSpaces::operator_system(2, 2)));
    for (phi, spaces) in cases {
        let reference = is_extreme_constrained(&phi, &spaces, 1e-9).unwrap();
        for _ in 0..5 {
            let other =
                ConstraintSpaces::new(respan(&mut g, spaces.s_basis()), respan(&mut g, spaces.t_basis())).unwrap();
            assert_eq!(is_extreme_constrained(&phi, &other, 1e-9).unwrap(), reference);
        }
    }
}

#[test]
fn oracle_agrees_wherever_it_runs() {
    let mut g = rng(33);
    let mut runs = 0;
    let mut check = |phi: &ChannelChoi, spaces: &ConstraintSpaces| {
        let criterion = is_extreme_constrained(phi, spaces, 1e-9).unwrap();
        match perturbation_search_oracle(phi, spaces, 8, 1e-3) {
            Ok(v) => {
                runs += 1;
                assert_eq!(v.extreme_likely, criterion);
                assert_eq!(v.null_dimension == 0, criterion);
                // every reported direction really is admissible
                for dir in &v.directions {
                    let dmap = ChannelChoi::new(phi.d(), phi.r(), dir.clone()).unwrap();
                    for a in spaces.s_basis() {
                        assert!(dmap.apply(a).unwrap().frobenius_norm() <= 1e-8);
                    }
                    for b in spaces.t_basis() {
                        assert!(dmap.dual().apply(b).unwrap().frobenius_norm() <= 1e-8);
                    }
                }
            }
            Err(Error::SizeCap { .. }) => {}
            Err(e) => panic!("{e}"),
        }
    };
    for phi in random_channels() {
        check(&phi, &ConstraintSpaces::identity_only(phi.d()));
        check(&phi, &ConstraintSpaces::new(vec![], vec![Matrix::identity(phi.r())]).unwrap());
        check(&phi, &ConstraintSpaces::full(phi.d()));
    }
    for k in 0..6 {
        let d = 2 + k % 2;
        let phi = random_unital(&mut g, d, 1 + k);
        check(&phi, &ConstraintSpaces::unital_tp(d, d));
    }
    let spaces = ConstraintSpaces::operator_system(2, 2);
    for p in [0.0, 0.3, 0.5, 1.0] {
        let s: Superchannel = block_trace_mixture(2, p).unwrap();
        check(&s.as_channel(), &spaces);
    }
    assert!(runs >= 70);
}

#[test]
fn midpoint_direction_is_the_difference_of_compressions() {
    let g1: Superchannel = block_trace(2, 0).unwrap();
    let g2: Superchannel = block_trace(2, 1).unwrap();
    let mid: Superchannel = block_trace_mixture(2, 0.5).unwrap();
    let v = perturbation_search_oracle(&mid.as_channel(), &ConstraintSpaces::operator_system(2, 2), 0, 1e-3).unwrap();
    // the midpoint has full-rank Choi matrix, so every Hermitian D ⊥ S(2, 2)
    // is admissible: 16 − 13 = 3 real directions
    assert_eq!(v.null_dimension, 3);
    let diff = g1.choi() - g2.choi();
    let mut projected = Matrix::zeros(4, 4);
    for dir in &v.directions {
        projected += &dir.scale(dir.hs_inner(&diff).re);
    }
    assert!((&projected - &diff).frobenius_norm() < 1e-9);
    assert!(v.step.is_some());
}

#[test]
fn unitary_superchannels_are_extreme_extensions() {
    let mut g = rng(34);
    for _ in 0..5 {
        let s = Superchannel::<f64>::unitary(&random_unitary(2, &mut g), &random_unitary(2, &mut g)).unwrap();
        assert!(is_extreme_extension(&s, 1e-9).unwrap());
    }
}

#[test]
fn minimal_kraus_counts() {
    assert_eq!(minimal_kraus(&ChannelChoi::<f64>::depolarizing(2, 2), 1e-9).unwrap().len(), 4);
    let phi = ChannelChoi::<f64>::random(3, 2, 3, 5).unwrap();
    assert_eq!(minimal_kraus(&phi, 1e-9).unwrap().len(), 3);
    let transpose = ChannelChoi::<f64>::transpose(2);
    assert!(matches!(minimal_kraus(&transpose, 1e-9), Err(Error::NotCompletelyPositive { .. })));
}

#[test]
fn report_and_errors() {
    let phi = ChannelChoi::<f64>::depolarizing(2, 2);
    let r = extreme_report(&phi, &ConstraintSpaces::identity_only(2), 1e-9).unwrap();
    assert_eq!(r.kraus_count, 4);
    assert_eq!(r.extreme_unital_tp, Some(false));
    assert!(!r.extreme_choi && !r.extreme_constrained);

    let big = ChannelChoi::new(6, 6, random_psd(36, 36, &mut rng(1))).unwrap();
    assert!(matches!(
        perturbation_search_oracle(&big, &ConstraintSpaces::identity_only(6), 1, 1e-3),
        Err(Error::SizeCap { cap: ORACLE_CAP, .. })
    ));
    let wrong = ConstraintSpaces::identity_only(3);
    assert!(is_extreme_constrained(&phi, &wrong, 1e-9).is_err());
    let mut skew = hermitian_units::<f64>(2);
    skew[1] = Matrix::unit(2, 0, 1);
    assert!(matches!(ConstraintSpaces::new(skew, vec![]), Err(Error::NonHermitianSpan { index: 1 })));
}
