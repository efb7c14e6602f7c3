use proptest::prelude::*;

use superchannel::choi::ChannelChoi;
use superchannel::matcore::{herm_eig, herm_eig_jacobi, min_eigenvalue, psd_project, Matrix};
use superchannel::opsys::{basis_s, decompose_cptp, in_s, project_s};
use superchannel::random::{gaussian_matrix, random_hermitian, random_psd, rng};

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigensolvers_agree(n in 1usize..=12, seed in any::<u64>()) {
        let h: Matrix = random_hermitian(n, &mut rng(seed));
        let a = herm_eig(&h).unwrap();
        let b = herm_eig_jacobi(&h).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + h.frobenius_norm()));
        }
        let back = a.reconstruct_with(|l| l);
        prop_assert!((&back - &h).frobenius_norm() <= 1e-10 * (1.0 + h.frobenius_norm()));
        let gram = a.vectors.adjoint().matmul(&a.vectors).unwrap();
        prop_assert!(gram.approx_eq(&Matrix::identity(n), 1e-10));
    }

    #[test]
    fn choi_kraus_round_trip((d, r) in dims(), rank in 1usize..=9, seed in any::<u64>()) {
        let rank = rank.min(d * r);
        let c: Matrix = random_psd(d * r, rank, &mut rng(seed));
        let phi = ChannelChoi::new(d, r, c).unwrap();
        let k = phi.kraus(1e-10).unwrap();
        prop_assert_eq!(k.len(), rank);
        let back = ChannelChoi::from_kraus(&k).unwrap();
        prop_assert!((back.choi() - phi.choi()).frobenius_norm() <= 1e-9 * phi.choi().frobenius_norm().max(1.0));
        let x: Matrix = gaussian_matrix(d, d, &mut rng(seed ^ 1));
        let direct = phi.apply(&x).unwrap();
        let mut via = Matrix::zeros(r, r);
        for a in &k.ops {
            via += &a.matmul(&x).unwrap().matmul(&a.adjoint()).unwrap();
        }
        prop_assert!((&direct - &via).frobenius_norm() <= 1e-9 * direct.frobenius_norm().max(1.0));
    }

    #[test]
    fn random_channels_are_cptp((d, r) in dims(), rank in 1usize..=4, seed in any::<u64>()) {
        prop_assume!(r * rank >= d && rank <= d * r);
        let phi = ChannelChoi::<f64>::random(d, r, rank, seed).unwrap();
        prop_assert!(phi.is_cp(1e-9) && phi.is_tp(1e-9));
        prop_assert!(in_s(phi.choi(), d, r, 1e-9).unwrap().member);
    }

    #[test]
    fn psd_projection_is_nearest(n in 1usize..=6, seed in any::<u64>()) {
        let mut g = rng(seed);
        let h: Matrix = random_hermitian(n, &mut g);
        let p = psd_project(&h).unwrap();
        let scale = h.frobenius_norm().max(1.0);
        prop_assert!(min_eigenvalue(&p).unwrap() >= -1e-10 * scale);
        prop_assert!(psd_project(&p).unwrap().approx_eq(&p, 1e-10 * scale));
        let best = (&h - &p).frobenius_norm();
        for _ in 0..4 {
            let q: Matrix = random_psd(n, 1 + n / 2, &mut g);
            prop_assert!(best <= (&h - &q).frobenius_norm() + 1e-10);
        }
    }

    #[test]
    fn projection_onto_s((d, r) in dims(), seed in any::<u64>()) {
        let x: Matrix = gaussian_matrix(d * r, d * r, &mut rng(seed));
        let p = project_s(&x, d, r).unwrap();
        prop_assert!(in_s(&p, d, r, 1e-10).unwrap().member);
        prop_assert!(project_s(&p, d, r).unwrap().approx_eq(&p, 1e-10));
        // the residual is orthogonal to S
        for b in basis_s::<f64>(d, r) {
            prop_assert!(b.hs_inner(&(&x - &p)).norm() <= 1e-9);
        }
    }

    #[test]
    fn decomposition_into_channels((d, r) in dims(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let mut x = Matrix::zeros(d * r, d * r);
        for b in basis_s::<f64>(d, r) {
            let c: Matrix = gaussian_matrix(1, 1, &mut g);
            x += &b.scale_c(c[(0, 0)]);
        }
        let terms = decompose_cptp(&x, d, r, 1e-9).unwrap();
        prop_assert!(terms.len() <= 4);
        let mut y = Matrix::zeros(d * r, d * r);
        for (c, ch) in &terms {
            prop_assert!(ch.is_cp(1e-9) && ch.is_tp(1e-9));
            y += &ch.choi().scale_c(*c);
        }
        prop_assert!((&x - &y).frobenius_norm() <= 1e-9 * x.frobenius_norm().max(1.0));
    }

    #[test]
    fn partial_trace_of_kron(a in 1usize..=3, b in 1usize..=3, seed in any::<u64>()) {
        let mut g = rng(seed);
        let x: Matrix = gaussian_matrix(a, a, &mut g);
        let y: Matrix = gaussian_matrix(b, b, &mut g);
        let z = x.kron(&y);
        let left = z.partial_trace(&[a, b], &[1]).unwrap();
        let right = z.partial_trace(&[a, b], &[0]).unwrap();
        prop_assert!(left.approx_eq(&x.scale_c(y.trace()), 1e-10));
        prop_assert!(right.approx_eq(&y.scale_c(x.trace()), 1e-10));
    }

    #[test]
    fn dual_is_adjoint((d, r) in dims(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let c: Matrix = gaussian_matrix(d * r, d * r, &mut g);
        let phi = ChannelChoi::new(d, r, c).unwrap();
        let x: Matrix = gaussian_matrix(d, d, &mut g);
        let y: Matrix = gaussian_matrix(r, r, &mut g);
        let lhs = y.hs_inner(&phi.apply(&x).unwrap());
        let rhs = phi.dual().apply(&y).unwrap().hs_inner(&x);
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
    }
}

#[test]
fn single_precision_instantiation() {
    let phi = ChannelChoi::<f32>::depolarizing(2, 2);
    assert!(phi.is_cp(1e-5) && phi.is_tp(1e-5));
    let k = phi.kraus(1e-5).unwrap();
    assert_eq!(k.len(), 4);
}
