//! Self-checks behind `cohcert verify`: exact identities, oracle agreement and
//! the Schur property, each reported as one named pass/fail line.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::{generalized_moment, generalized_moment_direct, mc_oracle, MomentRequest, WrappedNormalSpec};
use crate::pattern::{evaluate_pattern, PhaseVector};
use crate::qstate::{sample_random_state, w_state_zero, DensityMatrix};
use crate::rng::{derive_seed, stream};
use crate::schur::{g_n, schur_conditions, SimplexVector};
use crate::thresholds::{threshold, ThresholdTable};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<4}  {:<28}  {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    All,
    Moments,
    Thresholds,
    Schur,
}

impl FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Scope::All),
            "moments" => Ok(Scope::Moments),
            "thresholds" => Ok(Scope::Thresholds),
            "schur" => Ok(Scope::Schur),
            _ => Err(Error::Config(format!("unknown scope {s:?}; expected all, moments, thresholds or schur"))),
        }
    }
}

/// Runs every check in `scope`.
pub fn run(scope: Scope, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if matches!(scope, Scope::All | Scope::Thresholds) {
        let tables: Vec<ThresholdTable> = (1..=3).map(|n| ThresholdTable::new(n, 10)).collect::<Result<_>>()?;
        out.push(sum_rule_check(&tables));
        out.push(v1_report());
        out.push(w_state_identity()?);
    }
    if matches!(scope, Scope::All | Scope::Moments) {
        out.push(fast_vs_direct(seed)?);
        out.push(global_phase(seed)?);
        out.push(monte_carlo(seed)?);
    }
    if matches!(scope, Scope::All | Scope::Schur) {
        out.push(schur_sign(10_000, seed)?);
        out.push(uniform_maximal(1_000, seed)?);
    }
    Ok(out)
}

/// `Σ_l v_l = k^{2n-1}` on every row of every table. Failures name `(n, k)`.
pub fn sum_rule_check(tables: &[ThresholdTable]) -> Check {
    let bad: Vec<String> = tables
        .iter()
        .flat_map(|t| t.sum_rule_violations())
        .map(|v| format!("(n={}, k={}): sum {} != {}", v.n, v.k, v.sum, v.expected))
        .collect();
    let rows: u64 = tables.iter().map(|t| t.max_k()).sum();
    if bad.is_empty() {
        Check::new("coefficient sum rule", true, format!("{rows} rows exact"))
    } else {
        Check::new("coefficient sum rule", false, bad.join("; "))
    }
}

/// The `n = 2`, `l = 1` coefficient: a constant 4 only satisfies the sum rule
/// at `k = 2`, while `4(k-1)²` does for every `k`.
pub fn v1_report() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for k in 2..=10u64 {
        let row = ThresholdTable::new(2, k).ok().and_then(|t| t.row(k)).unwrap_or_default();
        let sum: i64 = row.iter().sum();
        let with_const = sum - row.get(1).copied().unwrap_or(0) + 4;
        let k3 = (k as i64).pow(3);
        ok &= row.get(1) == Some(&(4 * (k as i64 - 1).pow(2))) && sum == k3;
        parts.push(format!("k={k}: v1={} sum={} (v1=4 gives {})", row.get(1).copied().unwrap_or(0), sum, with_const));
    }
    Check::new("n=2 v1 discrepancy", ok, parts.join("; "))
}

/// `Q_n^(k)(σ) = Q_n(|W_k⟩, μ = 0, σ)` for `k ≤ d ≤ 7`.
pub fn w_state_identity() -> Result<Check> {
    let mut worst = 0.0f64;
    for d in 1..=7 {
        for k in 1..=d {
            let rho = w_state_zero::<f64>(k, d)?.density();
            for sigma in [0.0, 0.5, 1.0, 2.0] {
                for n in 1..=3 {
                    let q = generalized_moment(&rho, &MomentRequest::new(n, WrappedNormalSpec::centered(d, sigma)?)?)?;
                    worst = worst.max((q - threshold(n, k as u64, sigma)?).abs());
                }
            }
        }
    }
    Ok(Check::new("threshold = Q_n(W_k)", worst <= 1e-10, format!("max deviation {worst:.3e}")))
}

fn random_tuple(seed: u64, i: u64) -> Result<(DensityMatrix<f64>, PhaseVector<f64>, f64, u32)> {
    use rand::Rng;
    let mut rng = stream(seed, i);
    let d = rng.random_range(1..=5usize);
    let rho = sample_random_state(d, rng.random())?;
    let mu = PhaseVector::new((0..d).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect())?;
    let sigma = rng.random_range(0.0..2.0);
    let n = rng.random_range(1..=3u32);
    Ok((rho, mu, sigma, n))
}

fn fast_vs_direct(seed: u64) -> Result<Check> {
    let seed = derive_seed(seed, 1);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let (rho, mu, sigma, n) = random_tuple(seed, i)?;
        let req = MomentRequest::new(n, WrappedNormalSpec::new(mu, sigma)?)?;
        let (a, b) = (generalized_moment(&rho, &req)?, generalized_moment_direct(&rho, &req)?);
        worst = worst.max((a - b).abs() / (1.0 + b.abs()));
    }
    Ok(Check::new("fast = direct moments", worst <= 1e-12, format!("max relative deviation {worst:.3e} over 200 tuples")))
}

fn global_phase(seed: u64) -> Result<Check> {
    let seed = derive_seed(seed, 2);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let (rho, mu, sigma, n) = random_tuple(seed, i)?;
        let c = 0.37 + i as f64;
        let p = (evaluate_pattern(&rho, &mu)? - evaluate_pattern(&rho, &mu.rotated(c))?).abs();
        let q0 = generalized_moment(&rho, &MomentRequest::new(n, WrappedNormalSpec::new(mu.clone(), sigma)?)?)?;
        let q1 = generalized_moment(&rho, &MomentRequest::new(n, WrappedNormalSpec::new(mu.rotated(c), sigma)?)?)?;
        worst = worst.max(p).max((q0 - q1).abs());
    }
    Ok(Check::new("global phase invariance", worst <= 1e-12, format!("max deviation {worst:.3e}")))
}

fn monte_carlo(seed: u64) -> Result<Check> {
    let seed = derive_seed(seed, 3);
    let devs: Vec<f64> = (0..12u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let (rho, mu, sigma, n) = random_tuple(seed, i)?;
            let req = MomentRequest::new(n, WrappedNormalSpec::new(mu, sigma)?)?;
            let mc = mc_oracle(&rho, &req, 200_000, derive_seed(seed, i))?;
            Ok(mc.deviation_in_stderr(generalized_moment(&rho, &req)?))
        })
        .collect::<Result<_>>()?;
    let worst = devs.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(Check::new("Monte-Carlo oracle", worst <= 4.0, format!("max |closed - MC| = {worst:.2} stderr over 12 tuples")))
}

fn simplex_point(seed: u64, i: u64) -> Result<SimplexVector<f64>> {
    use rand::Rng;
    let mut rng = stream(seed, i);
    let d = rng.random_range(2..=6usize);
    SimplexVector::random_with(d, d, &mut rng)
}

/// Largest `S_ij` over `samples` random simplex points, `n ∈ {2, 3}`,
/// `σ ∈ {0.1, 1, 2}`, all index pairs.
pub fn max_schur_condition(samples: u64, seed: u64) -> Result<f64> {
    let seed = derive_seed(seed, 4);
    let per: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let lam = simplex_point(seed, i)?;
            let mut worst = f64::NEG_INFINITY;
            for n in [2, 3] {
                for sigma in [0.1, 1.0, 2.0] {
                    for (_, _, s) in schur_conditions(&lam, sigma, n)? {
                        worst = worst.max(s);
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn schur_sign(samples: u64, seed: u64) -> Result<Check> {
    let worst = max_schur_condition(samples, seed)?;
    Ok(Check::new("Schur condition S_ij <= 1e-8", worst <= 1e-8, format!("max S_ij = {worst:.3e} over {samples} points")))
}

/// Largest `g_n(λ) - g_n(uniform)` over random `λ` on `k` of `d` entries.
pub fn max_excess_over_uniform(samples: u64, seed: u64) -> Result<f64> {
    use rand::Rng;
    let seed = derive_seed(seed, 5);
    let per: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut rng = stream(seed, i);
            let d = rng.random_range(2..=6usize);
            let k = rng.random_range(1..=d);
            let lam = SimplexVector::random_with(d, k, &mut rng)?;
            let uni = SimplexVector::uniform(k, d)?;
            let mut worst = f64::NEG_INFINITY;
            for n in [2, 3] {
                for sigma in [0.1, 1.0, 2.0] {
                    worst = worst.max(g_n(&lam, sigma, n)? - g_n(&uni, sigma, n)?);
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn uniform_maximal(samples: u64, seed: u64) -> Result<Check> {
    let worst = max_excess_over_uniform(samples, seed)?;
    Ok(Check::new("g_n maximal at uniform", worst <= 1e-10, format!("max excess {worst:.3e} over {samples} points")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injected_coefficient_is_named() {
        let mut tables: Vec<ThresholdTable> = (1..=3).map(|n| ThresholdTable::new(n, 10).unwrap()).collect();
        assert!(sum_rule_check(&tables).passed);
        tables[1].set(5, 1, 4).unwrap();
        let c = sum_rule_check(&tables);
        assert!(!c.passed);
        assert!(c.detail.contains("(n=2, k=5)"), "{}", c.detail);
        assert!(!c.detail.contains("k=4"));
    }

    #[test]
    fn scope_parsing() {
        assert_eq!("schur".parse::<Scope>().unwrap(), Scope::Schur);
        assert!("everything".parse::<Scope>().is_err());
    }

    #[test]
    fn threshold_and_moment_scopes_pass() {
        for c in run(Scope::Thresholds, 0).unwrap().into_iter().chain(run(Scope::Moments, 0).unwrap()) {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn v1_report_lists_constant_variant() {
        let c = v1_report();
        assert!(c.passed);
        assert!(c.detail.contains("k=3: v1=16 sum=27 (v1=4 gives 15)"), "{}", c.detail);
    }
}
