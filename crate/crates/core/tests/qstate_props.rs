use coherence_core::moments::{generalized_moment, MomentRequest, WrappedNormalSpec};
use coherence_core::pattern::PhaseVector;
use coherence_core::qstate::{rho_max_purity, sample_cue_unitary, sample_k_coherent_pure, sample_random_state, DensityMatrix};
use coherence_core::rng::stream;
use rand::Rng;

#[test]
fn constructors_validate() {
    for seed in 0..50 {
        let d = 1 + (seed as usize % 6);
        let rho: DensityMatrix<f64> = sample_random_state(d, seed).unwrap();
        DensityMatrix::validate(rho.matrix().clone()).unwrap();
        let psi = sample_k_coherent_pure::<f64>(1 + seed as usize % d, d, seed).unwrap();
        DensityMatrix::validate(psi.density().matrix().clone()).unwrap();
    }
}

#[test]
fn max_purity_family_hits_its_purity() {
    for d in [2, 5, 7] {
        for i in 0..=20 {
            let p = 1.0 / d as f64 + (1.0 - 1.0 / d as f64) * i as f64 / 20.0;
            assert!((rho_max_purity(d, p).unwrap().purity() - p).abs() < 1e-10);
        }
    }
}

#[test]
fn cue_is_seed_deterministic() {
    let a = sample_cue_unitary::<f64>(5, 99).unwrap();
    let b = sample_cue_unitary::<f64>(5, 99).unwrap();
    assert_eq!(a.as_slice(), b.as_slice());
    assert_ne!(a.as_slice(), sample_cue_unitary::<f64>(5, 100).unwrap().as_slice());
}

#[test]
fn cue_and_state_moments() {
    let (d, m) = (4, 20_000u64);
    let vals: Vec<f64> = (0..m).map(|s| sample_cue_unitary::<f64>(d, s).unwrap()[(0, 0)].norm_sqr()).collect();
    let (mean, se) = mean_se(&vals);
    assert!((mean - 1.0 / d as f64).abs() <= 4.0 * se, "{mean} ± {se}");
    let pur: Vec<f64> = (0..m).map(|s| sample_random_state::<f64>(2, s).unwrap().purity()).collect();
    let (mean, se) = mean_se(&pur);
    assert!((mean - 2.0 / 3.0).abs() <= 4.0 * se, "{mean} ± {se}");
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn l1_bound_on_moments() {
    let mut rng = stream(17, 0);
    for i in 0..1000u64 {
        let d = rng.random_range(1..=6usize);
        let rho: DensityMatrix<f64> = sample_random_state(d, i).unwrap();
        let mu = PhaseVector::new((0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap();
        let sigma = rng.random_range(0.0..2.0);
        let c = rho.l1_coherence();
        for n in 1..=3 {
            let q = generalized_moment(&rho, &MomentRequest::new(n, WrappedNormalSpec::new(mu.clone(), sigma).unwrap()).unwrap()).unwrap();
            assert!(c >= q.abs().powf(1.0 / n as f64) - 1.0 - 1e-12, "d={d} n={n}: {c} vs {q}");
        }
    }
}
