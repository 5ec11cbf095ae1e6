mod common;

use std::f64::consts::PI;

use common::{c, close, full_row_factor_moments, random_matrix, random_row_normalized, wick_moments};
use fopa_noise::mode_algebra::{selector_abcd, selector_s, selector_sigma};
use fopa_noise::noise_figure::{gain_psa, gain_psa_general, nf_from_moments, nf_psa_general, nf_psa_two_injected};
use fopa_noise::{
    build_four_mode, build_two_mode, moments_general, moments_pia, nf_pia, validate_symplectic, InputState, Ladder,
    LadderSignature, NonlinearPhase, PhaseConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn signature() -> impl Strategy<Value = LadderSignature> {
    prop::collection::vec(any::<bool>(), 1..7).prop_map(|v| {
        LadderSignature::new(
            v.into_iter()
                .map(|c| if c { Ladder::Creation } else { Ladder::Annihilation })
                .collect(),
        )
        .unwrap()
    })
}

fn amplitude() -> impl Strategy<Value = num_complex::Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn selectors_agree(sig in signature()) {
        let n = sig.len();
        for j in 1..=n {
            for k in 1..=n {
                let s = selector_s(&sig, j, k).unwrap();
                let sigma = selector_sigma(&sig, j, k).unwrap();
                prop_assert_eq!(s as i32, 1 - 2 * sigma as i32);
                prop_assert_eq!(selector_s(&sig, k, j).unwrap(), s);
                if k > j {
                    let (a, b, cc, d) = selector_abcd(&sig, j, k).unwrap();
                    prop_assert_eq!(a + b + cc + d, 1);
                    prop_assert_eq!(a + b, sigma);
                }
            }
        }
    }

    #[test]
    fn general_moments_reduce_to_signal_only(seed in any::<u64>(), n in 2usize..6, a in amplitude()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, n, 1.5);
        let p = moments_pia(&m, a).unwrap();
        let g = moments_general(&m, &InputState::signal_only(n, a).unwrap()).unwrap();
        for (x, y) in p.modes.iter().zip(&g.modes) {
            prop_assert!(close(x.mean_out, y.mean_out, 1e-12, 1e-12));
            prop_assert!(close(x.var_out, y.var_out, 1e-12, 1e-12));
        }
    }

    #[test]
    fn general_moments_match_wick_form(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, n, 1.5);
        let alphas: Vec<_> = (0..n).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let got = moments_general(&m, &InputState::from_alphas(alphas.clone()).unwrap()).unwrap();
        let wick = wick_moments(&m, &alphas);
        let expanded = full_row_factor_moments(&m, &alphas);
        for j in 0..n {
            prop_assert!(close(got.modes[j].mean_out, wick[j].0, 1e-11, 1e-11));
            prop_assert!(close(got.modes[j].var_out, wick[j].1, 1e-11, 1e-11));
            prop_assert!(close(expanded[j].1, wick[j].1, 1e-10, 1e-10));
        }
    }

    #[test]
    fn global_input_phase_is_irrelevant_for_signal_only(seed in any::<u64>(), phi in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, 3, 1.0);
        let a = c(0.9, -0.4);
        let r0 = moments_pia(&m, a).unwrap();
        let r1 = moments_pia(&m, a * num_complex::Complex64::from_polar(1.0, phi)).unwrap();
        for (x, y) in r0.modes.iter().zip(&r1.modes) {
            prop_assert!(close(x.mean_out, y.mean_out, 1e-12, 1e-12));
            prop_assert!(close(x.var_out, y.var_out, 1e-12, 1e-12));
        }
    }

    #[test]
    fn psa_depends_on_relative_phase_only(seed in any::<u64>(), theta in -PI..PI, j in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_row_normalized(&mut rng, 3, 1.0);
        let base = PhaseConfig::realizing(&m, j, theta).unwrap();
        let input = InputState::leading(3, 2, 1.0, base.mode_phases()).unwrap();
        let a = nf_psa_general(&m, j, &input);
        let b = nf_psa_two_injected(&m, j, theta);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(close(a, b, 1e-9, 1e-12), "{} vs {}", a, b);
        }
        let g = gain_psa_general(&m, j, &input).unwrap();
        prop_assert!(close(g, gain_psa(&m, j, theta).unwrap(), 1e-10, 1e-12));
        let shifted = PhaseConfig::realizing(&m, j, theta + 2.0 * PI).unwrap();
        let input2 = InputState::leading(3, 2, 1.0, shifted.mode_phases()).unwrap();
        prop_assert!(close(gain_psa_general(&m, j, &input2).unwrap(), g, 1e-10, 1e-12));
    }

    #[test]
    fn psa_gain_is_non_negative(seed in any::<u64>(), p in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, 4, 2.0);
        let phases: Vec<f64> = (0..4).map(|_| rng.gen_range(-PI..PI)).collect();
        let input = InputState::leading(4, p, 1.0, &phases).unwrap();
        for j in 1..=4 {
            prop_assert!(gain_psa_general(&m, j, &input).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn pia_noise_figure_at_least_one(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, n, 3.0);
        for j in 1..=n {
            if let Ok(nf) = nf_pia(&m, j) {
                prop_assert!(nf >= 1.0);
            }
        }
    }

    #[test]
    fn closed_form_is_the_large_amplitude_limit(seed in any::<u64>(), p in 1usize..4, j in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_row_normalized(&mut rng, 3, 1.0);
        let phases: Vec<f64> = (0..3).map(|_| rng.gen_range(-PI..PI)).collect();
        let unit = InputState::leading(3, p, 1.0, &phases).unwrap();
        let Ok(closed) = nf_psa_general(&m, j, &unit) else { return Ok(()) };
        let omega = gain_psa_general(&m, j, &unit).unwrap();
        prop_assume!(omega > 1e-3);
        let a2: f64 = 1e10;
        let big = InputState::leading(3, p, a2.sqrt(), &phases).unwrap();
        let r = moments_general(&m, &big).unwrap();
        let exact = nf_from_moments(a2, a2, &r, j).unwrap();
        prop_assert!(close(exact, closed, 1e-5, 0.0), "{} vs {}", exact, closed);
    }

    #[test]
    fn row_normalized_matrices_pass_row_checks(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_row_normalized(&mut rng, n, 2.0);
        prop_assert!(validate_symplectic(&m, 1e-12).rows_pass());
    }

    #[test]
    fn built_in_models_are_consistent(xi in 0.0..100.0f64) {
        let phase = NonlinearPhase::new(xi).unwrap();
        prop_assert!(validate_symplectic(&build_two_mode(phase), 1e-12).passed());
        prop_assert!(validate_symplectic(&build_four_mode(phase), 1e-12).passed());
    }
}
