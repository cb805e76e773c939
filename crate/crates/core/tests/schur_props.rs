use coherence_core::rng::stream;
use coherence_core::schur::{g_n, g_n_brute, SimplexVector};
use rand::Rng;

#[test]
fn robin_hood_transfers_raise_g() {
    let mut rng = stream(3, 0);
    for i in 0..1000u64 {
        let d = rng.random_range(2..=6usize);
        let lam = SimplexVector::<f64>::random(d, d, i).unwrap();
        let w = lam.weights();
        let (a, b) = (rng.random_range(0..d), rng.random_range(0..d));
        let (from, to) = if w[a] >= w[b] { (a, b) } else { (b, a) };
        let eps = rng.random_range(0.0..=1.0) * (w[from] - w[to]) / 2.0;
        let moved = lam.robin_hood(from, to, eps).unwrap();
        assert!(moved.is_majorized_by(&lam, 1e-12));
        for n in [2, 3] {
            for sigma in [0.1, 1.0, 2.0] {
                assert!(g_n(&moved, sigma, n).unwrap() >= g_n(&lam, sigma, n).unwrap() - 1e-10);
            }
        }
    }
}

#[test]
fn decomposition_matches_direct_sum() {
    for i in 0..40u64 {
        let d = 2 + i as usize % 4;
        let lam = SimplexVector::<f64>::random(d, 1 + i as usize % d, 100 + i).unwrap();
        for n in [2, 3] {
            for sigma in [0.0, 0.7, 1.9] {
                let (a, b) = (g_n(&lam, sigma, n).unwrap(), g_n_brute(&lam, sigma, n).unwrap());
                assert!((a - b).abs() <= 1e-10, "d={d} n={n}: {a} vs {b}");
            }
        }
    }
}
