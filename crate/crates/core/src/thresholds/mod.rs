//! Threshold values `Q_n^(k)`, the integer coefficient table behind them,
//! k-coherence certification and the purity-resolved bounds on `Q_2`.

mod purity;

pub use purity::{purity_constrained_max_q2, purity_constrained_max_q2_with, PurityMaxOptions, PurityMaxResult};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{out_of_range, Error, Result};
use crate::moments::{generalized_moment, MomentOrder, MomentRequest, WrappedNormalSpec};
use crate::qstate::rho_max_purity;
use crate::scalar::Real;

/// Largest `k` accepted by [`coefficient`]; keeps `k^{2n-1}` well inside `i64`.
pub const MAX_K: u64 = 10_000;

/// Integer coefficient `v_l^(n,k)` of the threshold polynomial.
///
/// Rows follow the published table with `K_m = k - m`, except `n = 2, l = 1`,
/// which is `4(k-1)²` (the printed constant 4 only holds at `k = 2`).
pub fn coefficient(n: u32, k: u64, l: u32) -> Result<i64> {
    let order = MomentOrder::new(n)?;
    if !(1..=MAX_K).contains(&k) {
        return Err(out_of_range("k", k as f64, format!("[1, {MAX_K}]")));
    }
    if l > n * n {
        return Err(out_of_range("l", l as f64, format!("[0, {}]", n * n)));
    }
    let k = k as i64;
    let km = |m: i64| k - m;
    let (k1, k2, k3) = (km(1), km(2), km(3));
    Ok(match (order.get(), l) {
        (1, 0) => 1,
        (1, 1) => k1,
        (2, 0) => 2 * k - 1,
        (2, 1) => 4 * k1 * k1,
        (2, 2) => k1 * k2 * k3,
        (2, 3) => 2 * k1 * k2,
        (2, 4) => k1,
        (3, 0) => 4 - 9 * k + 6 * k * k,
        (3, 1) => 3 * k1 * (11 + 3 * k * (2 * k - 5)),
        (3, 2) => 9 * k1 * k2 * k2 * k3,
        (3, 3) => k1 * k2 * k2 * (45 + k * km(10)),
        (3, 4) => 3 * k1 * (k * (55 + 2 * k * km(9)) - 52),
        (3, 5) => 9 * k1 * k2 * k3,
        (3, 6) => 2 * k1 * k2 * k3,
        (3, 7) => 6 * k1 * k2,
        (3, 8) => 0,
        (3, 9) => k1,
        _ => unreachable!("order and level checked above"),
    })
}

/// A sum-rule failure `Σ_l v_l ≠ k^{2n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SumRuleViolation {
    pub n: u32,
    pub k: u64,
    pub sum: i64,
    pub expected: i64,
}

/// Coefficient rows for one order and `k = 1..=max_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThresholdTable {
    order: MomentOrder,
    max_k: u64,
    entries: BTreeMap<(u64, u32), i64>,
}

impl ThresholdTable {
    pub fn new(n: u32, max_k: u64) -> Result<Self> {
        let order = MomentOrder::new(n)?;
        if !(1..=MAX_K).contains(&max_k) {
            return Err(out_of_range("max_k", max_k as f64, format!("[1, {MAX_K}]")));
        }
        let mut entries = BTreeMap::new();
        for k in 1..=max_k {
            for l in 0..=n * n {
                entries.insert((k, l), coefficient(n, k, l)?);
            }
        }
        Ok(Self { order, max_k, entries })
    }

    pub fn order(&self) -> u32 {
        self.order.get()
    }

    pub fn max_k(&self) -> u64 {
        self.max_k
    }

    pub fn get(&self, k: u64, l: u32) -> Option<i64> {
        self.entries.get(&(k, l)).copied()
    }

    /// Replaces one entry. Used to feed deliberately broken tables to the
    /// checks.
    pub fn set(&mut self, k: u64, l: u32, v: i64) -> Result<()> {
        match self.entries.get_mut(&(k, l)) {
            Some(slot) => {
                *slot = v;
                Ok(())
            }
            None => Err(out_of_range("(k, l)", k as f64, format!("k in [1, {}], l in [0, {}]", self.max_k, self.order.get().pow(2)))),
        }
    }

    /// Row `v_0..v_{n²}` for `k`.
    pub fn row(&self, k: u64) -> Option<Vec<i64>> {
        (0..=self.order.get().pow(2)).map(|l| self.get(k, l)).collect()
    }

    /// Every `k` whose row does not sum to `k^{2n-1}`.
    pub fn sum_rule_violations(&self) -> Vec<SumRuleViolation> {
        let n = self.order.get();
        (1..=self.max_k)
            .filter_map(|k| {
                let sum: i64 = self.row(k)?.iter().sum();
                let expected = (k as i64).pow(2 * n - 1);
                (sum != expected).then_some(SumRuleViolation { n, k, sum, expected })
            })
            .collect()
    }

    /// `(n, k, l, v)` rows in `k`-then-`l` order.
    pub fn rows(&self) -> impl Iterator<Item = (u32, u64, u32, i64)> + '_ {
        let n = self.order.get();
        self.entries.iter().map(move |(&(k, l), &v)| (n, k, l, v))
    }
}

fn check_sigma<T: Real>(sigma: T) -> Result<()> {
    if !sigma.is_finite() {
        return Err(Error::NonFinite("sigma"));
    }
    if sigma < T::zero() {
        return Err(out_of_range("sigma", sigma.to_f64_lossy(), "[0, inf)"));
    }
    Ok(())
}

/// `Q_n^(k)(σ) = k^{1-n} Σ_l v_l e^{-lσ²}`, the largest `Q_n` of any
/// k-coherent state.
pub fn threshold<T: Real>(n: u32, k: u64, sigma: T) -> Result<T> {
    check_sigma(sigma)?;
    MomentOrder::new(n)?;
    let x = (-sigma * sigma).exp();
    let mut acc = T::zero();
    for l in (0..=n * n).rev() {
        acc = acc * x + T::lit(coefficient(n, k, l)? as f64);
    }
    Ok(acc / T::from_u64(k).expect("k fits").powi(n as i32 - 1))
}

/// `[(k, Q_n^(k)(σ)) for k in 1..=d]`.
pub fn threshold_ladder<T: Real>(n: u32, sigma: T, d: usize) -> Result<Vec<(usize, T)>> {
    (1..=d).map(|k| Ok((k, threshold(n, k as u64, sigma)?))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoherenceVerdict<T> {
    /// Largest certified coherence number; 1 means nothing beyond trivial.
    pub certified_k: usize,
    pub order: u32,
    pub sigma: T,
    pub value: T,
    /// `value - Q_n^(certified_k - 1)`, defined once something is certified.
    pub margin: Option<T>,
    /// `Q_n^(certified_k) - value`, the shortfall for the next level, when
    /// `certified_k < d`.
    pub shortfall: Option<T>,
}

/// `q` beats `threshold` by more than roundoff (1000 ulps, relative).
/// Saturating states such as `W_k` land on their threshold only up to
/// rounding, and must not certify.
pub fn exceeds<T: Real>(q: T, threshold: T) -> bool {
    q > threshold * (T::one() + T::lit(1e3) * T::epsilon())
}

/// Certifies `k+1`-coherence for the largest `k ∈ [1, d-1]` with
/// `q > Q_n^(k)(σ)`. Equality (see [`exceeds`]) does not certify.
pub fn certify<T: Real>(q: T, n: u32, sigma: T, d: usize) -> Result<CoherenceVerdict<T>> {
    if !q.is_finite() {
        return Err(Error::NonFinite("moment value"));
    }
    if q < T::zero() {
        return Err(out_of_range("q", q.to_f64_lossy(), "[0, inf)"));
    }
    if d < 1 {
        return Err(out_of_range("d", 0.0, "[1, inf)"));
    }
    let ladder = threshold_ladder(n, sigma, d)?;
    // thresholds increase with k, so the exceeded levels form a prefix
    let exceeded = ladder[..d - 1].iter().take_while(|(_, t)| exceeds(q, *t)).count();
    let certified_k = exceeded + 1;
    Ok(CoherenceVerdict {
        certified_k,
        order: n,
        sigma,
        value: q,
        margin: (exceeded > 0).then(|| q - ladder[exceeded - 1].1),
        shortfall: (certified_k < d).then(|| ladder[certified_k - 1].1 - q),
    })
}

/// `P_k = (k² - 2k + d) / (d(d-1))`: at or below this purity the global
/// `Q_2` maximizer is at most k-coherent.
pub fn critical_purity<T: Real>(d: usize, k: usize) -> Result<T> {
    if d < 2 {
        return Err(out_of_range("d", d as f64, "[2, inf)"));
    }
    if k < 1 || k > d {
        return Err(out_of_range("k", k as f64, format!("[1, {d}]")));
    }
    let (d, k) = (T::from_usize_lossy(d), T::from_usize_lossy(k));
    Ok((k * k - T::lit(2.0) * k + d) / (d * (d - T::one())))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PurityBound<T> {
    pub d: usize,
    pub k: usize,
    pub critical_purity: T,
    pub sigma: T,
}

impl<T: Real> PurityBound<T> {
    pub fn new(d: usize, k: usize, sigma: T) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self { d, k, critical_purity: critical_purity(d, k)?, sigma })
    }

    /// Global `Q_2` maximum at purity `p`; equal to the k-coherent maximum
    /// when `p ≤ P_k`.
    pub fn bound_at(&self, p: T) -> Result<T> {
        purity_bound_q2(self.d, p, self.sigma)
    }

    pub fn is_k_attainable(&self, p: T) -> bool {
        p <= self.critical_purity
    }
}

/// `Q_2(ρ_max(P))` at `μ = 0`, the largest `Q_2` of any state with purity `P`.
pub fn purity_bound_q2<T: Real>(d: usize, purity: T, sigma: T) -> Result<T> {
    let rho = rho_max_purity(d, purity)?;
    let req = MomentRequest::new(2, WrappedNormalSpec::centered(d, sigma)?)?;
    generalized_moment(&rho, &req)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coefficient_examples() {
        assert_eq!(coefficient(1, 5, 1).unwrap(), 4);
        assert_eq!(coefficient(3, 2, 0).unwrap(), 10);
        assert_eq!(coefficient(2, 3, 1).unwrap(), 16);
        assert_eq!(coefficient(2, 2, 1).unwrap(), 4);
        assert!(coefficient(2, 3, 5).is_err());
        assert!(coefficient(4, 3, 0).is_err());
        assert!(coefficient(2, 0, 0).is_err());
    }

    #[test]
    fn sum_rule_holds() {
        for n in 1..=3 {
            let table = ThresholdTable::new(n, 200).unwrap();
            assert!(table.sum_rule_violations().is_empty(), "n = {n}");
        }
    }

    #[test]
    fn coefficients_are_nonnegative() {
        for n in 1..=3 {
            for k in 1..=200 {
                for l in 0..=n * n {
                    assert!(coefficient(n, k, l).unwrap() >= 0, "n={n} k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn injected_entry_breaks_sum_rule() {
        let mut table = ThresholdTable::new(2, 10).unwrap();
        table.set(3, 1, 4).unwrap();
        let bad = table.sum_rule_violations();
        assert_eq!(bad, vec![SumRuleViolation { n: 2, k: 3, sum: 15, expected: 27 }]);
        assert!(table.set(11, 0, 1).is_err());
    }

    #[test]
    fn threshold_examples() {
        for k in 1..=6u64 {
            for sigma in [0.0, 0.3, 1.7f64] {
                let expected = 1.0 + (k as f64 - 1.0) * (-sigma * sigma).exp();
                assert_abs_diff_eq!(threshold(1, k, sigma).unwrap(), expected, epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(threshold(2, 2, 0.0f64).unwrap(), 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(threshold(3, 2, 0.0f64).unwrap(), 8.0, epsilon = 1e-14);
        // (5 + 16/e + 4/e³ + 2/e⁴) / 3
        let e = std::f64::consts::E;
        let expected = (5.0 + 16.0 / e + 4.0 / e.powi(3) + 2.0 / e.powi(4)) / 3.0;
        assert_abs_diff_eq!(threshold(2, 3, 1.0f64).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 3.7071, epsilon = 5e-4);
        assert!(threshold(2, 3, -0.1f64).is_err());
    }

    #[test]
    fn threshold_monotonicity() {
        for n in 1..=3 {
            for sigma in [0.0, 0.5, 1.0, 2.0f64] {
                let ladder = threshold_ladder(n, sigma, 10).unwrap();
                assert!(ladder.windows(2).all(|w| w[1].1 > w[0].1), "n={n} sigma={sigma}");
            }
            for k in 2..=8 {
                let vals: Vec<f64> = (0..20).map(|i| threshold(n, k, 0.1 * i as f64).unwrap()).collect();
                assert!(vals.windows(2).all(|w| w[1] < w[0]), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn certify_examples() {
        let v = certify(1.0f64, 2, 0.3, 5).unwrap();
        assert_eq!(v.certified_k, 1);
        assert_eq!(v.margin, None);

        let t = threshold(3, 4, 0.6f64).unwrap();
        assert_eq!(certify(t, 3, 0.6, 7).unwrap().certified_k, 4);
        let above = certify(t * (1.0 + 1e-12), 3, 0.6, 7).unwrap();
        assert_eq!(above.certified_k, 5);
        assert!(above.margin.unwrap() > 0.0);

        let q = (1.0 + 6.0 * 0.9f64).powi(3);
        let v = certify(q, 3, 1e-6, 7).unwrap();
        assert_eq!(v.certified_k, 7);
        assert_eq!(v.shortfall, None);

        assert!(certify(-1.0f64, 1, 0.0, 3).is_err());
        assert!(certify(f64::NAN, 1, 0.0, 3).is_err());
        assert_eq!(certify(100.0f64, 1, 0.0, 1).unwrap().certified_k, 1);
    }

    #[test]
    fn critical_purity_examples() {
        assert_abs_diff_eq!(critical_purity::<f64>(5, 2).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(critical_purity::<f64>(5, 3).unwrap(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(critical_purity::<f64>(5, 4).unwrap(), 0.65, epsilon = 1e-15);
        for d in 2..=9 {
            assert_abs_diff_eq!(critical_purity::<f64>(d, d).unwrap(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(critical_purity::<f64>(d, 1).unwrap(), 1.0 / d as f64, epsilon = 1e-15);
        }
        assert!(critical_purity::<f64>(5, 6).is_err());
        assert!(critical_purity::<f64>(1, 1).is_err());
    }

    #[test]
    fn purity_bound_examples() {
        for d in 2..=6 {
            for sigma in [0.0, 0.7, 1.5f64] {
                assert_abs_diff_eq!(purity_bound_q2(d, 1.0 / d as f64, sigma).unwrap(), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(purity_bound_q2(d, 1.0, sigma).unwrap(), threshold(2, d as u64, sigma).unwrap(), epsilon = 1e-10);
            }
        }
        let vals: Vec<f64> = (0..=16).map(|i| purity_bound_q2(5, 0.2 + 0.05 * i as f64, 1.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        assert!(purity_bound_q2(5, 0.1f64, 1.0).is_err());
    }

    #[test]
    fn critical_purity_state_is_k_bounded() {
        for d in 3..=6 {
            for k in 1..d {
                let pk = critical_purity::<f64>(d, k).unwrap();
                for sigma in [0.0, 0.5, 1.0, 2.0] {
                    let q = purity_bound_q2(d, pk, sigma).unwrap();
                    assert!(q <= threshold(2, k as u64, sigma).unwrap() + 1e-9, "d={d} k={k} sigma={sigma}");
                }
            }
        }
    }
}
