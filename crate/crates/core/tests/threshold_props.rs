use coherence_core::moments::{generalized_moment, MomentRequest, WrappedNormalSpec};
use coherence_core::pattern::PhaseVector;
use coherence_core::qstate::{rho_max_purity, sample_k_coherent_pure};
use coherence_core::thresholds::{critical_purity, threshold, ThresholdTable};

#[test]
fn monotone_in_k_and_sigma() {
    for n in 1..=3 {
        for sigma in [0.0, 0.4, 1.0, 2.0] {
            for k in 1..20u64 {
                assert!(threshold(n, k + 1, sigma).unwrap() > threshold(n, k, sigma).unwrap());
            }
        }
        for k in 2..10u64 {
            for w in [0.0, 0.3, 0.8, 1.5, 3.0f64].windows(2) {
                assert!(threshold(n, k, w[1]).unwrap() < threshold(n, k, w[0]).unwrap());
            }
        }
    }
}

#[test]
fn broken_table_is_caught() {
    let mut t = ThresholdTable::new(3, 10).unwrap();
    assert!(t.sum_rule_violations().is_empty());
    t.set(7, 4, t.get(7, 4).unwrap() + 1).unwrap();
    let v = t.sum_rule_violations();
    assert_eq!(v.len(), 1);
    assert_eq!((v[0].n, v[0].k), (3, 7));
}

#[test]
fn two_state_mixtures_stay_below() {
    for i in 0..300u64 {
        let d = 2 + i as usize % 5;
        let k = 1 + i as usize % d;
        let a = sample_k_coherent_pure::<f64>(k, d, 2 * i).unwrap().density();
        let b = sample_k_coherent_pure::<f64>(k, d, 2 * i + 1).unwrap().density();
        let rho = a.mix(0.1 + 0.8 * (i as f64 / 300.0), &b).unwrap();
        let mu = PhaseVector::new((0..d).map(|j| (j * 7 + i as usize) as f64 * 0.37).collect()).unwrap();
        for sigma in [0.0, 0.5, 1.5] {
            for n in 1..=3 {
                let q = generalized_moment(&rho, &MomentRequest::new(n, WrappedNormalSpec::new(mu.clone(), sigma).unwrap()).unwrap()).unwrap();
                assert!(q <= threshold(n, k as u64, sigma).unwrap() + 1e-9);
            }
        }
    }
}

#[test]
fn critical_purity_state_is_bounded() {
    for d in 2..=7 {
        for k in 1..=d {
            let rho = rho_max_purity(d, critical_purity::<f64>(d, k).unwrap()).unwrap();
            for sigma in [0.0, 0.5, 1.0, 2.0] {
                let q = generalized_moment(&rho, &MomentRequest::new(2, WrappedNormalSpec::centered(d, sigma).unwrap()).unwrap()).unwrap();
                assert!(q <= threshold(2, k as u64, sigma).unwrap() + 1e-9, "d={d} k={k} sigma={sigma}");
            }
        }
    }
}
