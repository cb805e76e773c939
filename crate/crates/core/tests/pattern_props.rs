use coherence_core::pattern::{evaluate_pattern, find_pattern_max, PhaseVector};
use coherence_core::qstate::{sample_random_state, DensityMatrix};
use proptest::prelude::*;

#[test]
fn two_path_maximum_is_analytic() {
    for seed in 0..1000u64 {
        let rho: DensityMatrix<f64> = sample_random_state(2, seed).unwrap();
        let best = find_pattern_max(&rho, 4, seed).unwrap();
        let exact = 1.0 + 2.0 * rho.get(0, 1).norm();
        assert!((best.value - exact).abs() < 1e-8, "seed {seed}: {} vs {exact}", best.value);
        assert!((evaluate_pattern(&rho, &best.argmax).unwrap() - best.value).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn global_phase_and_l1_bound(seed in 0u64..10_000, d in 1usize..7, c in -20.0f64..20.0, phases in proptest::collection::vec(-7.0f64..7.0, 6)) {
        let rho: DensityMatrix<f64> = sample_random_state(d, seed).unwrap();
        let phi = PhaseVector::new(phases[..d].to_vec()).unwrap();
        let p = evaluate_pattern(&rho, &phi).unwrap();
        prop_assert!((p - evaluate_pattern(&rho, &phi.rotated(c)).unwrap()).abs() <= 1e-12);
        prop_assert!(p <= 1.0 + rho.l1_coherence() + 1e-12);
    }
}
