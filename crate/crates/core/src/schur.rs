//! Bound functions `g_n(λ)` for k-coherent pure states, their building blocks
//! `G_AB`, and the Schur condition `S_ij ≤ 0`.
//!
//! `g_n(λ)` is `Q_n` of the pure state with weights `λ` when every phase is
//! aligned with the distribution centers.

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{out_of_range, Error, Result};
use crate::moments::{generalized_moment, MomentRequest, WrappedNormalSpec};
use crate::pattern::PhaseVector;
use crate::qstate::PureState;
use crate::rng::stream;
use crate::scalar::Real;

/// Probability vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexVector<T> {
    weights: Vec<T>,
}

impl<T: Real> SimplexVector<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(&w) = weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
            return Err(out_of_range("lambda", w.to_f64_lossy(), "[0, 1]"));
        }
        let s: T = weights.iter().copied().sum();
        if (s - T::one()).abs() > T::structure_tol() {
            return Err(Error::NotNormalized { norm_sqr: s.to_f64_lossy() });
        }
        Ok(Self { weights })
    }

    /// `1/k` on the first `k` of `d` entries.
    pub fn uniform(k: usize, d: usize) -> Result<Self> {
        if k < 1 || k > d {
            return Err(out_of_range("k", k as f64, format!("[1, {d}]")));
        }
        let w = T::one() / T::from_usize_lossy(k);
        Self::new((0..d).map(|i| if i < k { w } else { T::zero() }).collect())
    }

    /// Flat Dirichlet weights on the first `support` entries.
    pub fn random_with<R: Rng + ?Sized>(d: usize, support: usize, rng: &mut R) -> Result<Self> {
        if support < 1 || support > d {
            return Err(out_of_range("support", support as f64, format!("[1, {d}]")));
        }
        let mut w: Vec<f64> = (0..support).map(|_| rng.sample::<f64, _>(Exp1).max(1e-300)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        w.resize(d, 0.0);
        Self::new(w.into_iter().map(T::lit).collect())
    }

    pub fn random(d: usize, support: usize, seed: u64) -> Result<Self> {
        Self::random_with(d, support, &mut stream(seed, 0))
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Moves `eps` from entry `from` to entry `to`. With
    /// `0 ≤ eps ≤ (λ_from - λ_to)/2` the result is majorized by `self`.
    pub fn robin_hood(&self, from: usize, to: usize, eps: T) -> Result<Self> {
        let d = self.dim();
        if from >= d || to >= d {
            return Err(Error::DimensionMismatch { expected: d, found: from.max(to) + 1 });
        }
        if !(eps >= T::zero() && eps <= self.weights[from]) {
            return Err(out_of_range("eps", eps.to_f64_lossy(), "[0, lambda_from]"));
        }
        let mut w = self.weights.clone();
        w[from] -= eps;
        w[to] += eps;
        Ok(Self { weights: w })
    }

    /// `λ ≺ other` (both sorted decreasingly, partial sums dominated).
    pub fn is_majorized_by(&self, other: &Self, tol: T) -> bool {
        let sorted = |v: &[T]| {
            let mut v = v.to_vec();
            v.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
            v
        };
        let (a, b) = (sorted(&self.weights), sorted(&other.weights));
        let mut sa = T::zero();
        let mut sb = T::zero();
        a.len() == b.len()
            && a.iter().zip(&b).all(|(x, y)| {
                sa += *x;
                sb += *y;
                sa <= sb + tol
            })
    }
}

/// `Σ` over pairwise distinct ordered index tuples of `∏_s λ_{i_s}^{e_s}`,
/// together with its gradient in `λ`.
///
/// Gradient entries of zero coordinates are meaningless when some exponent is
/// below one.
fn distinct_sum<T: Real>(lambda: &[T], exps: &[T], grad: Option<&mut [T]>) -> T {
    let d = lambda.len();
    let m = exps.len();
    if m > d {
        if let Some(g) = grad {
            g.iter_mut().for_each(|v| *v = T::zero());
        }
        return T::zero();
    }
    // pow[s][i] = λ_i^{e_s}, dpow[s][i] = e_s λ_i^{e_s - 1}
    let pow: Vec<Vec<T>> = exps.iter().map(|&e| lambda.iter().map(|&l| l.powf(e)).collect()).collect();
    let want_grad = grad.is_some();
    let dpow: Vec<Vec<T>> = if want_grad {
        exps.iter().map(|&e| lambda.iter().map(|&l| if e == T::one() { T::one() } else { e * l.powf(e - T::one()) }).collect()).collect()
    } else {
        Vec::new()
    };
    let mut g = vec![T::zero(); if want_grad { d } else { 0 }];
    let mut used = vec![false; d];
    let mut idx = vec![0usize; m];
    let mut prefix = vec![T::one(); m + 1];
    let mut total = T::zero();

    fn dfs<T: Real>(
        depth: usize,
        pow: &[Vec<T>],
        dpow: &[Vec<T>],
        used: &mut [bool],
        idx: &mut [usize],
        prefix: &mut [T],
        total: &mut T,
        g: &mut [T],
    ) {
        let m = idx.len();
        if depth == m {
            *total += prefix[m];
            if !g.is_empty() {
                let mut suffix = T::one();
                for s in (0..m).rev() {
                    let i = idx[s];
                    g[i] += prefix[s] * suffix * dpow[s][i];
                    suffix *= pow[s][i];
                }
            }
            return;
        }
        for i in 0..used.len() {
            if used[i] {
                continue;
            }
            let f = pow[depth][i];
            if f == T::zero() && g.is_empty() {
                continue;
            }
            used[i] = true;
            idx[depth] = i;
            prefix[depth + 1] = prefix[depth] * f;
            dfs(depth + 1, pow, dpow, used, idx, prefix, total, g);
            used[i] = false;
        }
    }

    dfs(0, &pow, &dpow, &mut used, &mut idx, &mut prefix, &mut total, &mut g);
    if let Some(out) = grad {
        out.copy_from_slice(&g);
    }
    total
}

fn exponents<T: Real>(a: usize, b: usize) -> Vec<T> {
    let mut e = vec![T::one(); a];
    e.extend(std::iter::repeat_n(T::lit(0.5), b));
    e
}

/// `G_AB = Σ_≠ λ_{i_1}···λ_{i_A} √(λ_{j_1}···λ_{j_B})`; zero when `A + B > d`.
pub fn g_ab<T: Real>(lambda: &SimplexVector<T>, a: usize, b: usize) -> T {
    distinct_sum(lambda.weights(), &exponents(a, b), None)
}

/// One term of `g_n`: polynomial prefactor in `R_1..R_3` times a distinct sum.
struct Term<T> {
    coeff: T,
    exps: Vec<T>,
}

fn terms<T: Real>(sigma: T, n: u32) -> Result<Vec<Term<T>>> {
    let r = |m: i32| (-T::from_i32(m * m).expect("small") * sigma * sigma / T::lit(2.0)).exp();
    let (r1, r2, r3) = (r(1), r(2), r(3));
    let c = T::lit;
    let g = |a, b| exponents::<T>(a, b);
    let (h, one, three_half) = (c(0.5), T::one(), c(1.5));
    Ok(match n {
        2 => vec![
            Term { coeff: one + r2 * r2, exps: g(2, 0) },
            Term { coeff: c(2.0) * r1 * r1, exps: g(0, 2) },
            Term { coeff: c(2.0) * r1 * r1 * (one + r2), exps: g(1, 2) },
            Term { coeff: r1.powi(4), exps: g(0, 4) },
        ],
        3 => vec![
            Term { coeff: c(3.0) * r1 * r1, exps: g(0, 2) },
            Term { coeff: c(3.0) * (one + r2 * r2), exps: g(2, 0) },
            Term { coeff: c(6.0) * r1 * r1 * (one + r2), exps: g(1, 2) },
            Term { coeff: c(3.0) * r1.powi(4), exps: g(0, 4) },
            Term { coeff: c(2.0) * (one + c(3.0) * r2 * r2), exps: g(3, 0) },
            Term { coeff: c(3.0) * r1 * r1 * (c(3.0) + c(4.0) * r2 + c(3.0) * r2 * r2), exps: g(2, 2) },
            Term { coeff: c(6.0) * r1.powi(4) * (one + r2), exps: g(1, 4) },
            Term { coeff: r1.powi(6), exps: g(0, 6) },
            Term { coeff: c(6.0) * r1 * (c(2.0) * r1 + r1 * r2 + r2 * r3), exps: vec![three_half, one, h] },
            Term { coeff: c(2.0) * r1.powi(3) * (c(3.0) * r1 + r3), exps: vec![three_half, h, h, h] },
            Term { coeff: c(3.0) * r1 * r1 + r3 * r3, exps: vec![three_half, three_half] },
        ],
        other => return Err(Error::UnsupportedOrder(other)),
    })
}

fn g_n_raw<T: Real>(lambda: &[T], sigma: T, n: u32, mut grad: Option<&mut [T]>) -> Result<T> {
    let mut total = T::one();
    let d = lambda.len();
    let mut part = vec![T::zero(); d];
    if let Some(g) = grad.as_deref_mut() {
        g.iter_mut().for_each(|v| *v = T::zero());
    }
    for term in terms(sigma, n)? {
        if let Some(g) = grad.as_deref_mut() {
            total += term.coeff * distinct_sum(lambda, &term.exps, Some(&mut part));
            for (gi, pi) in g.iter_mut().zip(&part) {
                *gi += term.coeff * *pi;
            }
        } else {
            total += term.coeff * distinct_sum(lambda, &term.exps, None);
        }
    }
    Ok(total)
}

fn check_sigma<T: Real>(sigma: T) -> Result<()> {
    if !(sigma >= T::zero()) || !sigma.is_finite() {
        return Err(out_of_range("sigma", sigma.to_f64_lossy(), "[0, inf)"));
    }
    Ok(())
}

/// `g_n(λ)` for `n ∈ {2, 3}`.
pub fn g_n<T: Real>(lambda: &SimplexVector<T>, sigma: T, n: u32) -> Result<T> {
    check_sigma(sigma)?;
    g_n_raw(lambda.weights(), sigma, n, None)
}

/// `g_n` and its gradient, treating `g_n` as a function on the nonnegative
/// orthant.
pub fn g_n_gradient<T: Real>(lambda: &SimplexVector<T>, sigma: T, n: u32) -> Result<(T, Vec<T>)> {
    check_sigma(sigma)?;
    let mut g = vec![T::zero(); lambda.dim()];
    let v = g_n_raw(lambda.weights(), sigma, n, Some(&mut g))?;
    Ok((v, g))
}

/// Direct `2n`-fold sum `Σ ∏_l √(λ_{i_l} λ_{i_{n+l}}) ∏_j R_{n_j}`: the
/// aligned moment without the `G_AB` decomposition.
pub fn g_n_brute<T: Real>(lambda: &SimplexVector<T>, sigma: T, n: u32) -> Result<T> {
    check_sigma(sigma)?;
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedOrder(n));
    }
    let w = lambda.weights();
    let d = w.len();
    let n = n as usize;
    let sq: Vec<T> = w.iter().map(|x| x.sqrt()).collect();
    let r: Vec<T> = (0..=n).map(|m| (-T::from_usize_lossy(m * m) * sigma * sigma / T::lit(2.0)).exp()).collect();
    let mut idx = vec![0usize; 2 * n];
    let mut exps = vec![0i32; d];
    let mut total = T::zero();
    for flat in 0..d.pow(2 * n as u32) {
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % d;
            rest /= d;
        }
        let mut term = T::one();
        for &i in &idx {
            term *= sq[i];
        }
        if term == T::zero() {
            continue;
        }
        exps.iter_mut().for_each(|e| *e = 0);
        for l in 0..n {
            exps[idx[l]] += 1;
            exps[idx[n + l]] -= 1;
        }
        for &e in &exps {
            term *= r[e.unsigned_abs() as usize];
        }
        total += term;
    }
    Ok(total)
}

fn check_pair(d: usize, i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::Config(format!("schur condition needs distinct indices, got i = j = {i}")));
    }
    if i >= d || j >= d {
        return Err(Error::DimensionMismatch { expected: d, found: i.max(j) + 1 });
    }
    Ok(())
}

/// `S_ij = (λ_i - λ_j)(∂g_n/∂λ_i - ∂g_n/∂λ_j)` with exact partial
/// derivatives. Schur-concavity means `S_ij ≤ 0`.
pub fn schur_condition<T: Real>(lambda: &SimplexVector<T>, sigma: T, n: u32, i: usize, j: usize) -> Result<T> {
    check_pair(lambda.dim(), i, j)?;
    let (_, g) = g_n_gradient(lambda, sigma, n)?;
    let w = lambda.weights();
    Ok((w[i] - w[j]) * (g[i] - g[j]))
}

/// All `S_ij`, `i < j`, from one gradient evaluation.
pub fn schur_conditions<T: Real>(lambda: &SimplexVector<T>, sigma: T, n: u32) -> Result<Vec<(usize, usize, T)>> {
    let (_, g) = g_n_gradient(lambda, sigma, n)?;
    let w = lambda.weights();
    let d = w.len();
    Ok((0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).map(|(i, j)| (i, j, (w[i] - w[j]) * (g[i] - g[j]))).collect())
}

/// `S_ij` from central differences with step `h` on the raw coordinates.
pub fn schur_condition_fd<T: Real>(lambda: &SimplexVector<T>, sigma: T, n: u32, i: usize, j: usize, h: T) -> Result<T> {
    check_pair(lambda.dim(), i, j)?;
    check_sigma(sigma)?;
    let w = lambda.weights();
    let partial = |c: usize| -> Result<T> {
        let mut plus = w.to_vec();
        let mut minus = w.to_vec();
        plus[c] += h;
        minus[c] -= h;
        Ok((g_n_raw(&plus, sigma, n, None)? - g_n_raw(&minus, sigma, n, None)?) / (T::lit(2.0) * h))
    };
    Ok((w[i] - w[j]) * (partial(i)? - partial(j)?))
}

/// `(Q_n of Σ √λ_j e^{-iφ_j}|j⟩ at centers μ, g_n(λ))`.
pub fn pure_moment_vs_g<T: Real>(lambda: &SimplexVector<T>, phases: &[T], mu: &PhaseVector<T>, sigma: T, n: u32) -> Result<(T, T)> {
    let psi = PureState::from_weights(lambda.weights(), phases)?;
    let req = MomentRequest::new(n, WrappedNormalSpec::new(mu.clone(), sigma)?)?;
    let lhs = generalized_moment(&psi.density(), &req)?;
    Ok((lhs, g_n(lambda, sigma, n)?))
}

/// Same with `μ = φ`, where the two sides agree.
pub fn aligned_pure_moment_equals_g<T: Real>(lambda: &SimplexVector<T>, phases: &[T], sigma: T, n: u32) -> Result<(T, T)> {
    pure_moment_vs_g(lambda, phases, &PhaseVector::new(phases.to_vec())?, sigma, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thresholds::threshold;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simplex_validation() {
        assert!(SimplexVector::new(vec![0.5, 0.6f64]).is_err());
        assert!(SimplexVector::new(vec![1.5, -0.5f64]).is_err());
        assert!(SimplexVector::<f64>::new(vec![]).is_err());
        assert!(SimplexVector::new(vec![0.25f64; 4]).is_ok());
        assert!(SimplexVector::<f64>::uniform(5, 4).is_err());
    }

    #[test]
    fn g_ab_examples() {
        for k in 1..=6 {
            let u = SimplexVector::<f64>::uniform(k, 7).unwrap();
            let kf = k as f64;
            assert_abs_diff_eq!(g_ab(&u, 2, 0), (kf - 1.0) / kf, epsilon = 1e-14);
            assert_abs_diff_eq!(g_ab(&u, 0, 2), kf - 1.0, epsilon = 1e-13);
        }
        let three = SimplexVector::new(vec![0.2, 0.3, 0.5, 0.0f64]).unwrap();
        assert_eq!(g_ab(&three, 0, 4), 0.0);
        assert_eq!(g_ab(&three, 3, 3), 0.0);
    }

    #[test]
    fn g_n_examples() {
        for k in 1..=6 {
            let u = SimplexVector::<f64>::uniform(k, 6).unwrap();
            assert_abs_diff_eq!(g_n(&u, 0.0, 2).unwrap(), (k * k) as f64, epsilon = 1e-11);
            for sigma in [0.0, 0.4, 1.0, 2.0] {
                for n in 2..=3 {
                    assert_abs_diff_eq!(g_n(&u, sigma, n).unwrap(), threshold(n, k as u64, sigma).unwrap(), epsilon = 1e-10);
                }
            }
        }
        let e1 = SimplexVector::new(vec![1.0, 0.0, 0.0f64]).unwrap();
        for n in 2..=3 {
            assert_eq!(g_n(&e1, 0.7, n).unwrap(), 1.0);
        }
        assert!(g_n(&e1, 0.7, 4).is_err());
    }

    #[test]
    fn decomposition_matches_brute_force() {
        for seed in 0..20 {
            let d = 2 + (seed as usize % 4);
            let lam = SimplexVector::<f64>::random(d, 1 + seed as usize % d, seed).unwrap();
            for n in 2..=3 {
                for sigma in [0.0, 0.3, 1.1] {
                    assert_abs_diff_eq!(g_n(&lam, sigma, n).unwrap(), g_n_brute(&lam, sigma, n).unwrap(), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..10 {
            let lam = SimplexVector::<f64>::random(5, 5, seed).unwrap();
            for n in 2..=3 {
                let (_, g) = g_n_gradient(&lam, 0.6, n).unwrap();
                for c in 0..5 {
                    let h = 1e-6;
                    let mut p = lam.weights().to_vec();
                    let mut m = p.clone();
                    p[c] += h;
                    m[c] -= h;
                    let fd = (g_n_raw(&p, 0.6, n, None).unwrap() - g_n_raw(&m, 0.6, n, None).unwrap()) / (2.0 * h);
                    assert!((fd - g[c]).abs() < 1e-6 * (1.0 + g[c].abs()), "n={n} c={c}: {fd} vs {}", g[c]);
                }
                let s = schur_condition(&lam, 0.6, n, 0, 3).unwrap();
                let s_fd = schur_condition_fd(&lam, 0.6, n, 0, 3, 1e-6).unwrap();
                assert!((s - s_fd).abs() <= 1e-8 * (1.0 + s.abs()), "{s} vs {s_fd}");
            }
        }
    }

    #[test]
    fn schur_condition_examples() {
        let lam = SimplexVector::new(vec![0.3, 0.3, 0.4f64]).unwrap();
        assert_eq!(schur_condition(&lam, 1.0, 2, 0, 1).unwrap(), 0.0);
        assert!(schur_condition(&lam, 1.0, 2, 1, 1).is_err());
        for seed in 0..50 {
            let lam = SimplexVector::<f64>::random(5, 5, seed).unwrap();
            for n in 2..=3 {
                for sigma in [0.1, 1.0, 2.0] {
                    for (i, j, s) in schur_conditions(&lam, sigma, n).unwrap() {
                        assert!(s <= 1e-8, "seed={seed} n={n} sigma={sigma} ({i},{j}): {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn robin_hood_lowers_order() {
        let lam = SimplexVector::new(vec![0.6, 0.3, 0.1f64]).unwrap();
        let moved = lam.robin_hood(0, 2, 0.2).unwrap();
        assert!(moved.is_majorized_by(&lam, 1e-15));
        assert!(!lam.is_majorized_by(&moved, 1e-15));
        for n in 2..=3 {
            assert!(g_n(&moved, 0.5, n).unwrap() >= g_n(&lam, 0.5, n).unwrap());
        }
        assert!(lam.robin_hood(2, 0, 0.2).is_err());
    }

    #[test]
    fn aligned_moment_examples() {
        let u = SimplexVector::<f64>::uniform(3, 3).unwrap();
        let (lhs, rhs) = aligned_pure_moment_equals_g(&u, &[0.0; 3], 0.8, 3).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        assert_abs_diff_eq!(lhs, threshold(3, 3, 0.8).unwrap(), epsilon = 1e-10);

        let lam = SimplexVector::<f64>::random(4, 4, 3).unwrap();
        let phases = [0.3, -1.1, 2.0, 0.7];
        for n in 2..=3 {
            let (lhs, rhs) = aligned_pure_moment_equals_g(&lam, &phases, 0.5, n).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
            let shifted = PhaseVector::new(phases.to_vec()).unwrap().rotated(1.3);
            let (lhs2, _) = pure_moment_vs_g(&lam, &phases, &shifted, 0.5, n).unwrap();
            assert_abs_diff_eq!(lhs2, rhs, epsilon = 1e-10);
            let mut off = phases.to_vec();
            off[0] += std::f64::consts::PI / 3.0;
            let (lhs3, _) = pure_moment_vs_g(&lam, &phases, &PhaseVector::new(off).unwrap(), 0.5, n).unwrap();
            assert!(lhs3 < rhs - 1e-6);
        }
    }
}
