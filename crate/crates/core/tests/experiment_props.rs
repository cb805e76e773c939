use coherence_core::experiments::{detection_ratio_random, detection_ratio_rho_a, ExperimentConfig, Population};
use coherence_core::moments::{generalized_moment, MomentRequest, WrappedNormalSpec};
use coherence_core::pattern::find_pattern_max;
use coherence_core::qstate::sample_random_state;
use coherence_core::thresholds::certify;

#[test]
fn k_coherent_population_never_certifies_more() {
    for k in 1..=4 {
        let cfg = ExperimentConfig {
            d: 5,
            targets: vec![k + 1],
            orders: vec![1, 2, 3],
            sigmas: vec![0.0, 0.3, 0.9, 1.5],
            sigma_gs: vec![0.0, 0.2, 0.8],
            n_delta: 4,
            population: Population::KCoherentPure { k, size: 60 },
            restarts: 6,
            seed: k as u64,
        };
        let rep = detection_ratio_random::<f64>(&cfg).unwrap();
        assert!(rep.rows.iter().all(|r| r.r_mean == 0.0), "k = {k}");
    }
}

#[test]
fn higher_orders_agree_at_the_peak() {
    for seed in 0..100u64 {
        let d = 3 + seed as usize % 4;
        let rho = sample_random_state::<f64>(d, seed).unwrap();
        let phi = find_pattern_max(&rho, 10, seed).unwrap().argmax;
        let ks: Vec<usize> = (1..=3)
            .map(|n| {
                let q = generalized_moment(&rho, &MomentRequest::new(n, WrappedNormalSpec::new(phi.clone(), 0.0).unwrap()).unwrap()).unwrap();
                certify(q, n, 0.0, d).unwrap().certified_k
            })
            .collect();
        assert!(ks[1] >= ks[0] && ks[2] >= ks[1], "{ks:?}");
    }
}

#[test]
fn detection_decays_with_deviation_width() {
    let cfg = ExperimentConfig {
        d: 7,
        targets: vec![7],
        orders: vec![3],
        sigmas: vec![0.0, 0.5, 0.9],
        sigma_gs: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        n_delta: 300,
        population: Population::RhoA,
        restarts: 1,
        seed: 4,
    };
    let rep = detection_ratio_rho_a::<f64>(&cfg).unwrap();
    for &s in &cfg.sigmas {
        for w in cfg.sigma_gs.windows(2) {
            let (a, b) = (rep.get(7, 3, s, w[0]).unwrap(), rep.get(7, 3, s, w[1]).unwrap());
            assert!(b.r_mean <= a.r_mean + 2.0 * (a.r_stderr.powi(2) + b.r_stderr.powi(2)).sqrt(), "sigma {s}: {a:?} {b:?}");
        }
    }
}
