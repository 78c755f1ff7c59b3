use mrmc::harness::parse_seeds;
use mrmc::linalg::{c, hermitize, CMat, CVec};
use mrmc::objective::mutual_information;
use mrmc::optimizer::{par_project, SylvesterSystem};
use mrmc::signal_model::column_par;
use proptest::prelude::*;

fn cvec(len: usize) -> impl Strategy<Value = CVec> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), len)
        .prop_map(|v| CVec::from_iterator(v.len(), v.into_iter().map(|(a, b)| c(a, b))))
}

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| CMat::from_iterator(rows, cols, v.into_iter().map(|(a, b)| c(a, b))))
}

fn gram(m: &CMat) -> CMat {
    hermitize(&(m * m.adjoint()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn par_output_feasible_and_fixed(z in (1usize..20).prop_flat_map(cvec), gamma in 1.0f64..4.0, p in 0.01f64..10.0) {
        let k = z.len() as f64;
        let gamma = gamma.min(k);
        let a = par_project(&z, p, gamma);
        prop_assert!((a.norm_squared() - p).abs() <= 1e-10 * p);
        prop_assert!(column_par(&a) <= gamma + 1e-10);
        let b = par_project(&a, p, gamma);
        prop_assert!((&a - &b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn mi_is_nonnegative(u in cmat(3, 5), s in cmat(5, 5), n in cmat(5, 5)) {
        let noise = gram(&n) + CMat::identity(5, 5) * c(0.1, 0.0);
        let mi = mutual_information(&u, &gram(&s), &noise).unwrap();
        prop_assert!(mi >= 0.0);
        // adding interference never helps
        let worse = mutual_information(&u, &gram(&s), &(&noise + gram(&s))).unwrap();
        prop_assert!(worse <= mi + 1e-10);
    }

    #[test]
    fn sylvester_residual_small(a in cmat(3, 3), f in cmat(3, 3), b in cmat(2, 2), rhs in cmat(3, 2)) {
        let sys = SylvesterSystem::new(gram(&a) + CMat::identity(3, 3), vec![(gram(&f), gram(&b))], rhs);
        let (x, res) = sys.solve().unwrap();
        prop_assert!(res < 1e-8);
        prop_assert!(sys.residual(&x) == res);
    }

    #[test]
    fn seed_ranges_have_expected_length(a in 0u64..1000, len in 1u64..50) {
        let seeds = parse_seeds(&format!("{a}..{}", a + len)).unwrap();
        prop_assert_eq!(seeds.len() as u64, len);
        prop_assert_eq!(seeds[0], a);
    }
}
