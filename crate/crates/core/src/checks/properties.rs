use proptest::prelude::*;
use crate::closedform::{bm_speed, canonicalize_bm};
use crate::jumpchain::{step_chain, ChainModel};
use crate::mcstats::{ks_test, Estimate};
use crate::pathsim::{simulate_coupling, simulate_ratchet};
use crate::rng::{derive_seed, stream, Purpose};
use crate::{Model, RatchetParams, SimConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ratchet_paths_keep_their_invariants(
        ou in any::<bool>(),
        gamma in 0.0f64..3.0,
        mu in 0.05f64..3.0,
        x0 in 0.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let model = if ou { Model::Ou } else { Model::Bm };
        let params = RatchetParams::new(model, gamma, mu).unwrap();
        let path = simulate_ratchet(&params, &SimConfig::new(1e-3, 5.0, x0, seed).unwrap()).unwrap();
        prop_assert!(path.check_invariants().is_ok());
        for j in &path.jumps {
            prop_assert!(j.r_before <= j.r_after && j.r_after <= j.x);
        }
    }

    #[test]
    fn coupling_time_is_within_horizon(
        ou in any::<bool>(),
        mu in 0.2f64..2.0,
        x_lo in 0.0f64..1.0,
        extra in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let params = if ou { RatchetParams::ou(0.5, mu) } else { RatchetParams::bm(0.5, mu) }.unwrap();
        let config = SimConfig::new(1e-2, 20.0, 0.0, seed).unwrap();
        let out = simulate_coupling(&params, x_lo + extra, x_lo, &config).unwrap();
        prop_assert!(out.time >= 0.0 && out.time <= 20.0 + 1e-9);
        if out.censored {
            prop_assert!((out.time - 20.0).abs() < 1e-9);
        }
    }

    #[test]
    fn chain_steps_split_the_killing_position(gamma in 0.1f64..4.0, mu in 0.0f64..3.0, seed in any::<u64>()) {
        let model = ChainModel::new(&RatchetParams::bm(gamma, mu).unwrap()).unwrap();
        let mut rng = stream(seed, Purpose::Test);
        let mut y = 0.0;
        for _ in 0..20 {
            let s = step_chain(&model.kernel, y, &mut rng).unwrap();
            prop_assert!(s.y >= 0.0 && s.w >= 0.0 && s.eta_mean > 0.0);
            prop_assert!((s.y + s.w - s.z).abs() <= f64::EPSILON * s.z);
            y = s.y;
        }
    }

    #[test]
    fn speed_scaling(gamma in 0.01f64..10.0, mu in 0.0f64..6.0) {
        let map = canonicalize_bm(gamma, mu).unwrap();
        let direct = bm_speed(gamma, mu);
        let mapped = map.speed_from_canonical(bm_speed(0.5, map.mu_canonical));
        prop_assert!((direct - mapped).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn seeds_are_deterministic(root in any::<u64>(), i in any::<u64>()) {
        prop_assert_eq!(derive_seed(root, i, Purpose::Replica), derive_seed(root, i, Purpose::Replica));
        prop_assert_ne!(derive_seed(root, i, Purpose::Noise), derive_seed(root, i, Purpose::Jump));
    }

    #[test]
    fn estimate_interval_is_symmetric(xs in prop::collection::vec(-1e3f64..1e3, 1..50)) {
        let e = Estimate::from_samples(&xs).unwrap();
        prop_assert!(e.stderr >= 0.0);
        prop_assert!(((e.ci95.0 + e.ci95.1) / 2.0 - e.mean).abs() <= 1e-9 * e.mean.abs().max(1.0));
    }

    #[test]
    fn ks_statistic_in_unit_interval(xs in prop::collection::vec(0.0f64..1.0, 1..100)) {
        let r = ks_test(&xs, |u| u.clamp(0.0, 1.0));
        prop_assert!((0.0..=1.0).contains(&r.statistic));
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }
}
