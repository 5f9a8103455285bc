use heisenberg_min::decomp::{fano_decompose, reconstruct};
use heisenberg_min::measures::{self, critical_window, MeasureReport};
use heisenberg_min::model::{self, ModelParams};
use heisenberg_min::sampling;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coupling() -> impl Strategy<Value = f64> {
    -4.0..4.0f64
}

fn params() -> impl Strategy<Value = ModelParams> {
    (coupling(), coupling(), coupling(), coupling(), coupling(), 0.2..3.0f64)
        .prop_map(|(j, jz, gamma, b, lambda, beta)| ModelParams::new(j, jz, gamma, b, lambda).with_beta(beta))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn thermal_state_is_a_state(p in params()) {
        let rho = model::thermal_state(&p).unwrap();
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let t = model::thermal_elements(&p);
        prop_assert!(t.mu_plus > 0.0 && t.mu_minus > 0.0 && t.nu_plus > 0.0 && t.nu_minus > 0.0);
        prop_assert!(t.mu_plus * t.mu_minus >= t.kappa * t.kappa * (1.0 - 1e-12));
        prop_assert!(t.nu_plus * t.nu_minus >= t.epsilon * t.epsilon * (1.0 - 1e-12));
    }

    #[test]
    fn measures_are_bounded(p in params()) {
        let r = MeasureReport::for_params(&p).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.concurrence));
        prop_assert!((0.0..=0.5 + 1e-12).contains(&r.min_hs));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.min_trace));
        prop_assert!((0.0..=0.5 + 1e-12).contains(&r.min_fidelity));
        prop_assert!(r.min_trace_paper >= 0.0);
    }

    #[test]
    fn measures_even_in_gamma_and_field(p in params()) {
        let base = MeasureReport::for_params(&p).unwrap().values();
        let q = ModelParams { gamma: -p.gamma, b: -p.b, ..p };
        let flipped = MeasureReport::for_params(&q).unwrap().values();
        for (a, b) in base.iter().zip(&flipped) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn concurrence_vanishes_exactly_on_window(j in 0.2..4.0f64, gamma in -1.5..1.5f64, b in -3.0..3.0f64, lambda in -1.0..1.0f64) {
        let base = ModelParams::new(j, 0.0, gamma, b, lambda);
        let w = critical_window(&base).unwrap();
        let c_at = |jz: f64| measures::concurrence_thermal(&model::thermal_elements(&ModelParams { jz, ..base }));
        let margin = 1e-6;
        prop_assert!(c_at(w.jc2 + margin) > 0.0);
        match w.jc1 {
            Some(lo) if lo < w.jc2 => {
                prop_assert!(c_at(lo - margin) > 0.0);
                prop_assert_eq!(c_at(0.5 * (lo + w.jc2)), 0.0);
                prop_assert_eq!(c_at(lo + margin), 0.0);
                prop_assert_eq!(c_at(w.jc2 - margin), 0.0);
            }
            Some(_) => {}
            None => prop_assert_eq!(c_at(w.jc2 - margin), 0.0),
        }
    }

    #[test]
    fn local_unitaries_leave_measures_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = sampling::random_state(&mut rng);
        let (u, v) = (sampling::random_unitary(&mut rng), sampling::random_unitary(&mut rng));
        let rotated = rho.local_conjugate(&u, &v).unwrap();
        let (f, g) = (fano_decompose(&rho), fano_decompose(&rotated));
        prop_assert!((measures::concurrence(&rho) - measures::concurrence(&rotated)).abs() < 1e-8);
        prop_assert!((measures::min_hs(&f) - measures::min_hs(&g)).abs() < 1e-8);
        prop_assert!((measures::min_fidelity(&f).unwrap() - measures::min_fidelity(&g).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn fano_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = sampling::random_state(&mut rng);
        let back = reconstruct(&fano_decompose(&rho)).unwrap();
        prop_assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn product_states_have_no_nonlocality(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = sampling::random_product_state(&mut rng);
        let f = fano_decompose(&rho);
        prop_assert!(measures::concurrence(&rho) < 1e-7);
        prop_assert!(measures::min_hs(&f) < 1e-12);
        prop_assert!(measures::min_fidelity(&f).unwrap() < 1e-12);
    }

    #[test]
    fn thermal_formulas_agree_with_general_ones_off_zero_field(p in params()) {
        let f = fano_decompose(&model::thermal_state(&p).unwrap());
        prop_assume!(!f.x_is_zero());
        let t = model::thermal_elements(&p);
        prop_assert!((measures::min_hs_thermal(&t) - measures::min_hs(&f)).abs() < 1e-12);
        prop_assert!((measures::min_fidelity_thermal(&t) - measures::min_fidelity(&f).unwrap()).abs() < 1e-9);
        prop_assert!((2.0 * measures::min_trace_thermal(&t) - measures::min_trace(&f).unwrap()).abs() < 1e-12);
    }
}
