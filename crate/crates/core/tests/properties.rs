use num_complex::Complex64;
use proptest::prelude::*;

use seqmeas::expm::mat_exp;
use seqmeas::iga::finite::{builtin, convolve_fg, GroupAlgebraElement};
use seqmeas::instrument::{convolve, diffusive_weak, jump_weak, total_operation, Instrument};
use seqmeas::operator::Operator;
use seqmeas::random::{random_ginibre, random_hermitian, random_kraus_set, stream_rng};
use seqmeas::superop::{channel_exp, is_cp, is_tp, kraus_sum, lindblad_dissipator, SuperOperator};

fn with_norm(a: Operator, norm: f64) -> Operator {
    let n = a.frob_norm();
    if n == 0.0 {
        a
    } else {
        a.scale_real(norm / n)
    }
}

fn random_superop(dim: usize, seed: u64, stream: u64) -> SuperOperator {
    let mut rng = stream_rng(seed, stream);
    SuperOperator::from_matrix(dim, random_ginibre(dim * dim, &mut rng)).unwrap()
}

fn povm_distance(a: &Instrument, b: &Instrument) -> f64 {
    let (pa, pb) = (a.povm(), b.povm());
    assert_eq!(pa.len(), pb.len());
    pa.iter().zip(&pb).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exp_times_exp_of_negative_is_identity(seed in any::<u64>(), dim in 1usize..=5, norm in 0.0..5.0f64) {
        let a = with_norm(random_ginibre(dim, &mut stream_rng(seed, 0)), norm);
        let prod = &mat_exp(&a).unwrap() * &mat_exp(&-&a).unwrap();
        prop_assert!(prod.max_abs_diff(&Operator::identity(dim)) <= 1e-10);
    }

    #[test]
    fn exp_splits_over_commuting_diagonals(entries in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2..=8)) {
        let half = entries.len() / 2;
        let a = Operator::diag(&entries[..half].iter().map(|&(r, i)| Complex64::new(r, i)).collect::<Vec<_>>());
        let b = Operator::diag(&entries[half..2 * half].iter().map(|&(r, i)| Complex64::new(i, r)).collect::<Vec<_>>());
        let lhs = mat_exp(&(&a + &b)).unwrap();
        let rhs = &mat_exp(&a).unwrap() * &mat_exp(&b).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
    }

    #[test]
    fn trace_is_similarity_invariant(seed in any::<u64>(), dim in 1usize..=5) {
        let mut rng = stream_rng(seed, 0);
        let a = random_ginibre(dim, &mut rng);
        let s = &random_ginibre(dim, &mut rng) + &Operator::identity(dim).scale_real(3.0);
        let conj = &(&s * &a) * &s.inverse().unwrap();
        prop_assert!((conj.trace() - a.trace()).norm() <= 1e-10);
    }

    #[test]
    fn hs_adjoint_reverses_composition(seed in any::<u64>(), dim in 1usize..=3) {
        let (x, y) = (random_superop(dim, seed, 0), random_superop(dim, seed, 1));
        let lhs = y.compose(&x).hs_adjoint();
        let rhs = x.hs_adjoint().compose(&y.hs_adjoint());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn choi_involutions(seed in any::<u64>(), dim in 1usize..=3) {
        let (x, y) = (random_superop(dim, seed, 0), random_superop(dim, seed, 1));
        prop_assert!(x.choi_involution().choi_involution().max_abs_diff(&x) == 0.0);
        prop_assert!(x.cj_quasi_adjoint().cj_quasi_adjoint().max_abs_diff(&x) == 0.0);
        let lhs = y.compose(&x).cj_quasi_adjoint();
        let rhs = y.cj_quasi_adjoint().compose(&x.cj_quasi_adjoint());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn kraus_sums_are_cp_and_cj_symmetric(seed in any::<u64>(), dim in 1usize..=4, m in 1usize..=4) {
        let mut rng = stream_rng(seed, 0);
        let ks: Vec<Operator> = (0..m).map(|_| random_ginibre(dim, &mut rng)).collect();
        let s = kraus_sum(dim, ks.iter().map(|k| (1.0, k)));
        let (cp, min) = is_cp(&s, 1e-10);
        prop_assert!(cp, "min Choi eigenvalue {min:e}");
        prop_assert!(s.cj_quasi_adjoint().frob_dist(&s) <= 1e-12);
    }

    #[test]
    fn dissipator_exponentials_are_channels(seed in any::<u64>(), dim in 1usize..=3, n_ls in 1usize..=3, kt in 0.0..5.0f64) {
        let mut rng = stream_rng(seed, 0);
        let ls: Vec<Operator> = (0..n_ls).map(|_| with_norm(random_ginibre(dim, &mut rng), 1.0)).collect();
        let e = channel_exp(&lindblad_dissipator(&ls).unwrap(), kt).unwrap();
        let (tp, defect) = is_tp(&e, 1e-10);
        prop_assert!(tp, "TP defect {defect:e}");
        let (cp, min) = is_cp(&e, 1e-10);
        prop_assert!(cp, "min Choi eigenvalue {min:e}");
    }

    #[test]
    fn convolution_is_a_homomorphism(seed in any::<u64>(), dim in 1usize..=3, kdt in 1e-4..1e-2f64) {
        let mut rng = stream_rng(seed, 0);
        let l1 = with_norm(random_ginibre(dim, &mut rng), 1.0);
        let l2 = random_hermitian(dim, &mut rng);
        let a = jump_weak(&l1, 1.0, kdt).unwrap();
        let b = diffusive_weak(&l2, 1.0, kdt, 7).unwrap();
        for (later, earlier) in [(&b, &a), (&a, &b), (&a, &a)] {
            let lhs = total_operation(&convolve(later, earlier).unwrap());
            let rhs = total_operation(later).compose(&total_operation(earlier));
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        }
    }

    #[test]
    fn jump_povm_ignores_lindblad_phase(seed in any::<u64>(), dim in 1usize..=4, phi in 0.0..std::f64::consts::TAU) {
        let l = random_ginibre(dim, &mut stream_rng(seed, 0));
        let turned = l.scale(Complex64::from_polar(1.0, phi));
        let d = povm_distance(&jump_weak(&l, 1.0, 1e-2).unwrap(), &jump_weak(&turned, 1.0, 1e-2).unwrap());
        prop_assert!(d <= 1e-13);
    }

    #[test]
    fn diffusive_kraus_positive_or_unitary(seed in any::<u64>(), dim in 1usize..=4) {
        let l = with_norm(random_hermitian(dim, &mut stream_rng(seed, 0)), 1.0);
        for atom in diffusive_weak(&l, 1.0, 1e-2, 9).unwrap().atoms() {
            prop_assert!(atom.kraus.hermiticity_defect() <= 1e-12);
            let min = atom.kraus.hermitian_part().herm_eigvals().unwrap().into_iter().fold(f64::INFINITY, f64::min);
            prop_assert!(min > 0.0);
        }
        let il = l.scale(Complex64::new(0.0, 1.0));
        for atom in diffusive_weak(&il, 1.0, 1e-2, 9).unwrap().atoms() {
            let gram = &atom.kraus.dagger() * &atom.kraus;
            prop_assert!(gram.max_abs_diff(&Operator::identity(dim)) <= 1e-10);
        }
    }

    #[test]
    fn group_algebra_identities(seed in any::<u64>(), which in 0usize..3) {
        let (group, _) = builtin(["z2", "s3", "q8"][which]).unwrap();
        let mut rng = stream_rng(seed, 0);
        let f = GroupAlgebraElement::random(group.clone(), &mut rng);
        let g = GroupAlgebraElement::random(group.clone(), &mut rng);
        let h = GroupAlgebraElement::random(group.clone(), &mut rng);
        let left = convolve_fg(&convolve_fg(&h, &g).unwrap(), &f).unwrap();
        let right = convolve_fg(&h, &convolve_fg(&g, &f).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-13 * (1.0 + left.l1_norm()));
        let lhs = convolve_fg(&g, &f).unwrap().gelfand();
        let rhs = convolve_fg(&f.gelfand(), &g.gelfand()).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-13 * (1.0 + lhs.l1_norm()));
        prop_assert!(f.gelfand().gelfand() == f);
    }

    #[test]
    fn random_kraus_sets_are_trace_preserving(seed in any::<u64>(), dim in 1usize..=4, m in 1usize..=4) {
        let mut rng = stream_rng(seed, 0);
        let ks = random_kraus_set(dim, m, &mut rng);
        let s = kraus_sum(dim, ks.iter().map(|k| (1.0, k)));
        prop_assert!(is_tp(&s, 1e-12).0);
    }
}
