use bogodiag::diag::{self, transform_state, verify_transform, Direction};
use bogodiag::linalg::{self, CMatrix};
use bogodiag::model;
use bogodiag::tddiag;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagonalization_is_symplectic(seed in any::<u64>(), n in 1usize..5, g in 0.05f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = model::random_instance(&mut rng, n, g);
        let c = model::classify(&q).unwrap();
        let r = diag::diagonalize(&q).unwrap();
        let rep = verify_transform(&r.transform, c.norm_g, c.hs_g);
        prop_assert!(rep.max_residual < 1e-9);
        prop_assert!(rep.norm_bound_slack >= -1e-12 && rep.hs_bound_slack >= -1e-12);
        prop_assert!(r.ground_energy >= c.lower_bound - 1e-12);
        prop_assert!(r.ground_energy <= 1e-12);
        prop_assert!(r.xi_eigs.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn ground_energy_matches_state_energy(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = model::random_instance(&mut rng, n, 0.8);
        let r = diag::diagonalize(&q).unwrap();
        let e = q.energy(&r.ground_state.gamma, &r.ground_state.alpha);
        prop_assert!((e - r.ground_energy).abs() < 1e-10);
        prop_assert!(r.ground_state.purity_defect() < 1e-10);
    }

    #[test]
    fn forward_then_inverse_is_identity(seed in any::<u64>(), n in 1usize..4, m in 0.05f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = tddiag::generator_to_transform(&tddiag::random_generator(&mut rng, n, m)).unwrap();
        let s = tddiag::generator_to_transform(&tddiag::random_generator(&mut rng, n, m)).unwrap().vacuum_image();
        let there = transform_state(&t, &s, Direction::Forward).unwrap();
        let back = transform_state(&t, &there, Direction::Inverse).unwrap();
        prop_assert!(back.distance(&s) < 1e-9);
    }

    #[test]
    fn inverse_composes_to_identity(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = tddiag::generator_to_transform(&tddiag::random_generator(&mut rng, n, 0.8)).unwrap();
        let prod: CMatrix = t.full() * t.inverse().full();
        prop_assert!(linalg::max_abs(&(prod - linalg::identity(2 * n))) < 1e-10);
    }
}
