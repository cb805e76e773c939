//! Real polynomials on `[0, 1]`: root isolation and the Lebesgue measure of
//! `{a : p(a) > t}`. Coefficients are in increasing degree.

use crate::scalar::Real;

pub fn eval<T: Real>(coeffs: &[T], a: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * a + c)
}

fn derivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * T::from_usize_lossy(k)).collect()
}

fn trimmed<T: Real>(coeffs: &[T]) -> &[T] {
    let len = coeffs.iter().rposition(|c| *c != T::zero()).map_or(0, |i| i + 1);
    &coeffs[..len]
}

/// Root of a monotone piece with a sign change on `[lo, hi]`.
fn bisect<T: Real>(coeffs: &[T], mut lo: T, mut hi: T) -> T {
    let lo_neg = eval(coeffs, lo) < T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if (eval(coeffs, mid) < T::zero()) == lo_neg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

/// Sorted distinct roots in `[lo, hi]`. Empty for the zero polynomial.
pub fn roots_in<T: Real>(coeffs: &[T], lo: T, hi: T) -> Vec<T> {
    let c = trimmed(coeffs);
    if c.len() <= 1 {
        return Vec::new();
    }
    let mut knots = vec![lo];
    knots.extend(roots_in(&derivative(c), lo, hi).into_iter().filter(|&x| x > lo && x < hi));
    knots.push(hi);
    let mut roots: Vec<T> = Vec::new();
    let push = |x: T, roots: &mut Vec<T>| {
        if roots.last().is_none_or(|&r| x > r) {
            roots.push(x);
        }
    };
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(c, a), eval(c, b));
        if fa == T::zero() {
            push(a, &mut roots);
        }
        if fa != T::zero() && fb != T::zero() && (fa < T::zero()) != (fb < T::zero()) {
            push(bisect(c, a, b), &mut roots);
        }
    }
    if eval(c, hi) == T::zero() {
        push(hi, &mut roots);
    }
    roots
}

pub fn roots_in_unit_interval<T: Real>(coeffs: &[T]) -> Vec<T> {
    roots_in(coeffs, T::zero(), T::one())
}

/// Measure of `{a ∈ [0, 1] : p(a) > t}`.
pub fn superlevel_measure<T: Real>(coeffs: &[T], t: T) -> T {
    let mut shifted = coeffs.to_vec();
    if shifted.is_empty() {
        shifted.push(T::zero());
    }
    shifted[0] -= t;
    let mut cuts = vec![T::zero()];
    cuts.extend(roots_in_unit_interval(&shifted).into_iter().filter(|&x| x > T::zero() && x < T::one()));
    cuts.push(T::one());
    cuts.windows(2)
        .filter(|w| eval(&shifted, (w[0] + w[1]) / T::lit(2.0)) > T::zero())
        .map(|w| w[1] - w[0])
        .sum()
}
