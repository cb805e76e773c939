//! Uniform and generalized moments of the interference pattern under
//! independent, equal-width wrapped normal phase distributions.
//!
//! For the wrapped normal, `Θ_m(μ) = e^{imμ} R_m` with `R_m = e^{-m²σ²/2}`.
//! Every index tuple `(i_1..i_2n)` contributes
//! `∏_l ρ_{i_l i_{n+l}} e^{i(μ_{i_l} - μ_{i_{n+l}})} · x^{L}` where
//! `x = e^{-σ²}` and `L = Σ_j n_j² / 2` is an integer in `0..=n²`. The
//! moment is therefore a polynomial in `x` ([`WidthPolynomial`]) whose
//! coefficients depend on `ρ` and `μ` only; one tuple sweep serves any
//! number of widths.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{solve_real, CMatrix};
use crate::pattern::{offdiagonal_sum, PhaseVector};
use crate::qstate::DensityMatrix;
use crate::rng::{normal, stream};
use crate::scalar::{cis, czero, Cx, Real};

/// Highest supported moment order.
pub const MAX_ORDER: u32 = 3;

/// `Θ_n(μ) = e^{inμ} e^{-n²σ²/2}`.
pub fn trig_moment<T: Real>(n: i32, mu: T, sigma: T) -> Cx<T> {
    let nf = T::from_i32(n).expect("small integer");
    cis(nf * mu) * (-(nf * nf) * sigma * sigma / T::lit(2.0)).exp()
}

/// Moment order `n ∈ {1, 2, 3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MomentOrder(u32);

impl MomentOrder {
    pub fn new(n: u32) -> Result<Self> {
        if (1..=MAX_ORDER).contains(&n) {
            Ok(Self(n))
        } else {
            Err(Error::UnsupportedOrder(n))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub(crate) fn usize(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> [MomentOrder; 3] {
        [Self(1), Self(2), Self(3)]
    }
}

/// Centers `μ` and common width `σ ≥ 0` of the per-phase wrapped normals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WrappedNormalSpec<T> {
    pub centers: PhaseVector<T>,
    pub width: T,
}

impl<T: Real> WrappedNormalSpec<T> {
    pub fn new(centers: PhaseVector<T>, width: T) -> Result<Self> {
        if !width.is_finite() {
            return Err(Error::NonFinite("width"));
        }
        if width < T::zero() {
            return Err(crate::error::out_of_range("sigma", width.to_f64_lossy(), "[0, inf)"));
        }
        Ok(Self { centers, width })
    }

    pub fn centered(dim: usize, width: T) -> Result<Self> {
        Self::new(PhaseVector::zeros(dim), width)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRequest<T> {
    pub order: MomentOrder,
    pub spec: WrappedNormalSpec<T>,
}

impl<T: Real> MomentRequest<T> {
    pub fn new(order: u32, spec: WrappedNormalSpec<T>) -> Result<Self> {
        Ok(Self { order: MomentOrder::new(order)?, spec })
    }
}

/// For every tuple of `n` index pairs `(i_l, i_{n+l})`, flattened as
/// `p_l = i_l·d + i_{n+l}`, the integer `Σ_j n_j² / 2`.
pub(crate) struct LevelTable {
    pub(crate) levels: Vec<u8>,
}

impl LevelTable {
    fn build(d: usize, n: usize) -> Self {
        let pairs = d * d;
        let total = pairs.pow(n as u32);
        let mut levels = Vec::with_capacity(total);
        // fixed-size scratch: at most 2n = 6 distinct indices per tuple
        let mut idx = [0usize; 6];
        let mut cnt = [0i32; 6];
        let mut tuple = [0usize; 3];
        for flat in 0..total {
            let mut rest = flat;
            for l in (0..n).rev() {
                tuple[l] = rest % pairs;
                rest /= pairs;
            }
            let mut used = 0;
            let mut bump = |i: usize, s: i32, used: &mut usize| {
                for k in 0..*used {
                    if idx[k] == i {
                        cnt[k] += s;
                        return;
                    }
                }
                idx[*used] = i;
                cnt[*used] = s;
                *used += 1;
            };
            for &p in &tuple[..n] {
                bump(p / d, 1, &mut used);
                bump(p % d, -1, &mut used);
            }
            let sq: i32 = cnt[..used].iter().map(|c| c * c).sum();
            debug_assert!(sq % 2 == 0);
            levels.push((sq / 2) as u8);
        }
        Self { levels }
    }

    pub(crate) fn cached(d: usize, n: usize) -> Arc<LevelTable> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<LevelTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().expect("level cache").get(&(d, n)) {
            return t.clone();
        }
        let t = Arc::new(Self::build(d, n));
        cache.lock().expect("level cache").entry((d, n)).or_insert(t).clone()
    }
}

/// `Q_n` as a polynomial `Σ_l c_l x^l` in `x = e^{-σ²}`, `l = 0..=n²`.
#[derive(Clone, Debug, PartialEq)]
pub struct WidthPolynomial<T> {
    order: MomentOrder,
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> WidthPolynomial<T> {
    pub fn order(&self) -> MomentOrder {
        self.order
    }

    pub fn coefficients(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// Real value at width `σ`, after checking the imaginary residue.
    pub fn at(&self, sigma: T) -> Result<T> {
        real_part(self.at_complex(sigma))
    }

    pub fn at_complex(&self, sigma: T) -> Cx<T> {
        let x = (-sigma * sigma).exp();
        self.coeffs.iter().rev().fold(czero(), |acc, c| acc * x + c)
    }

    /// Limit `σ → ∞`: only balanced tuples (`L = 0`) survive.
    pub fn uniform_limit(&self) -> Result<T> {
        real_part(self.coeffs[0])
    }
}

fn real_part<T: Real>(z: Cx<T>) -> Result<T> {
    if z.im.abs() > T::imag_tol() * z.re.abs().max(T::one()) {
        return Err(Error::ImaginaryResidue { residue: z.im.to_f64_lossy() });
    }
    Ok(z.re)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Width polynomial of `Q_n(ρ)` for centers `mu`.
pub fn width_polynomial<T: Real>(rho: &DensityMatrix<T>, mu: &[T], order: MomentOrder) -> Result<WidthPolynomial<T>> {
    check_dim(rho.dim(), mu.len())?;
    Ok(width_polynomial_raw(rho.matrix(), mu, order))
}

/// Tuple sweep over a raw matrix; callers guarantee the dimensions agree.
pub(crate) fn width_polynomial_raw<T: Real>(m: &CMatrix<T>, mu: &[T], order: MomentOrder) -> WidthPolynomial<T> {
    let d = m.dim();
    let n = order.usize();
    let pairs = d * d;
    // ρ̃_ab = ρ_ab e^{i(μ_a - μ_b)}
    let ph: Vec<Cx<T>> = mu.iter().map(|&x| cis(x)).collect();
    let mut rt = Vec::with_capacity(pairs);
    for a in 0..d {
        for b in 0..d {
            rt.push(m[(a, b)] * ph[a] * ph[b].conj());
        }
    }
    let table = LevelTable::cached(d, n);
    let lv = &table.levels;
    let mut acc = [czero::<T>(); 10];
    let is_zero = |z: &Cx<T>| z.re == T::zero() && z.im == T::zero();
    match n {
        1 => {
            for (p, r) in rt.iter().enumerate() {
                acc[lv[p] as usize] += *r;
            }
        }
        2 => {
            for (p1, r1) in rt.iter().enumerate() {
                if is_zero(r1) {
                    continue;
                }
                let base = p1 * pairs;
                for (p2, r2) in rt.iter().enumerate() {
                    acc[lv[base + p2] as usize] += r1 * r2;
                }
            }
        }
        _ => {
            for (p1, r1) in rt.iter().enumerate() {
                if is_zero(r1) {
                    continue;
                }
                for (p2, r2) in rt.iter().enumerate() {
                    if is_zero(r2) {
                        continue;
                    }
                    let r12 = r1 * r2;
                    let base = (p1 * pairs + p2) * pairs;
                    let row = &lv[base..base + pairs];
                    for (l, r3) in row.iter().zip(rt.iter()) {
                        acc[*l as usize] += r12 * r3;
                    }
                }
            }
        }
    }
    WidthPolynomial { order, coeffs: acc[..=n * n].to_vec() }
}

/// `Q_n = ∫ F(φ) P(ρ, φ)^n dφ` for the wrapped normal `F` of `req`.
pub fn generalized_moment<T: Real>(rho: &DensityMatrix<T>, req: &MomentRequest<T>) -> Result<T> {
    width_polynomial(rho, req.spec.centers.angles(), req.order)?.at(req.spec.width)
}

/// Reference evaluation of the same sum: per index tuple, build the exponent
/// vector `n_j` and multiply memoized trigonometric moments `Θ_{n_j}(μ_j)`.
///
/// Costs `O(d^{2n}·d)`; kept as an independent route for cross-checks.
pub fn generalized_moment_direct<T: Real>(rho: &DensityMatrix<T>, req: &MomentRequest<T>) -> Result<T> {
    let d = rho.dim();
    let mu = req.spec.centers.angles();
    check_dim(d, mu.len())?;
    let n = req.order.usize();
    let span = 2 * n + 1;
    let theta: Vec<Cx<T>> = (0..d)
        .flat_map(|j| (0..span).map(move |s| (j, s as i32 - n as i32)))
        .map(|(j, m)| trig_moment(m, mu[j], req.spec.width))
        .collect();
    let mut exps = vec![0i32; d];
    let mut idx = vec![0usize; 2 * n];
    let total = d.pow(2 * n as u32);
    let mut sum = czero();
    for flat in 0..total {
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % d;
            rest /= d;
        }
        let mut term = Cx::new(T::one(), T::zero());
        for l in 0..n {
            term *= rho.get(idx[l], idx[n + l]);
        }
        if term.re == T::zero() && term.im == T::zero() {
            continue;
        }
        exps.iter_mut().for_each(|e| *e = 0);
        for l in 0..n {
            exps[idx[l]] += 1;
            exps[idx[n + l]] -= 1;
        }
        for (j, &e) in exps.iter().enumerate() {
            term *= theta[j * span + (e + n as i32) as usize];
        }
        sum += term;
    }
    real_part(sum)
}

/// `Q_1 = 1 + e^{-σ²} Σ_{i≠j} ρ_ij e^{i(μ_i-μ_j)}`.
pub fn q1_fast<T: Real>(rho: &DensityMatrix<T>, spec: &WrappedNormalSpec<T>) -> Result<T> {
    check_dim(rho.dim(), spec.centers.dim())?;
    let mut scratch = vec![czero(); rho.dim()];
    let s = offdiagonal_sum(rho, spec.centers.angles(), &mut scratch);
    Ok(T::one() + (-spec.width * spec.width).exp() * real_part(s)?)
}

/// Moments under the flat phase distribution, the `σ → ∞` limit.
pub fn uniform_moment<T: Real>(rho: &DensityMatrix<T>, order: u32) -> Result<T> {
    let order = MomentOrder::new(order)?;
    width_polynomial(rho, &vec![T::zero(); rho.dim()], order)?.uniform_limit()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate<T> {
    pub estimate: T,
    pub stderr: T,
    pub samples: usize,
}

impl<T: Real> McEstimate<T> {
    /// `|value - estimate|` in units of the standard error. Gaps at roundoff
    /// level count as zero (a constant integrand has zero stderr); other gaps
    /// against a zero stderr give ∞.
    pub fn deviation_in_stderr(&self, value: T) -> T {
        let gap = (value - self.estimate).abs();
        if gap <= T::structure_tol() * (T::one() + value.abs()) {
            T::zero()
        } else {
            gap / self.stderr
        }
    }
}

const MC_BLOCK: usize = 8192;

/// Running mean / sum of squared deviations, merged with Chan's update so
/// identical samples reproduce their value exactly.
#[derive(Clone, Copy, Default)]
struct Moments2 {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments2 {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if other.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Self { n, mean: self.mean + delta * (other.n / n), m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n }
    }
}

/// Monte-Carlo estimate of `Q_n = E[P(φ)^n]`, `φ_j ~ N(μ_j, σ²)`.
///
/// Wrapping is unnecessary because `P` is 2π-periodic in every phase. Blocks
/// of samples run in parallel, each on its own random stream, and are merged
/// in block order.
pub fn mc_oracle<T: Real>(rho: &DensityMatrix<T>, req: &MomentRequest<T>, samples: usize, seed: u64) -> Result<McEstimate<T>> {
    if samples < 1000 {
        return Err(crate::error::out_of_range("samples", samples as f64, "[1000, inf)"));
    }
    let d = rho.dim();
    let mu = req.spec.centers.angles();
    check_dim(d, mu.len())?;
    let sigma = req.spec.width;
    let n = req.order.get() as i32;
    let blocks = samples.div_ceil(MC_BLOCK);
    let parts: Vec<Result<Moments2>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut rng = stream(seed, b as u64);
            let mut phi = vec![T::zero(); d];
            let mut scratch = vec![czero(); d];
            let mut acc = Moments2::default();
            for _ in 0..count {
                for (p, &m) in phi.iter_mut().zip(mu) {
                    *p = m + sigma * normal::<T, _>(&mut rng);
                }
                let s = offdiagonal_sum(rho, &phi, &mut scratch);
                let p = T::one() + real_part(s)?;
                acc.push(p.powi(n).to_f64_lossy());
            }
            Ok(acc)
        })
        .collect();
    let mut total = Moments2::default();
    for p in parts {
        total = total.merge(p?);
    }
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok(McEstimate { estimate: T::lit(total.mean), stderr: T::lit((var.max(0.0) / total.n).sqrt()), samples })
}

/// `Q_n((1-a)ρ0 + aρ1)` as a bivariate polynomial in `a` (degree ≤ n) and
/// `x = e^{-σ²}`.
///
/// Built from `n+1` tuple sweeps at the nodes `a = i/n` and a Vandermonde
/// solve per width level.
#[derive(Clone, Debug)]
pub struct AffineMomentPolynomial<T> {
    order: MomentOrder,
    /// `coeffs[deg][level]`
    coeffs: Vec<Vec<Cx<T>>>,
}

impl<T: Real> AffineMomentPolynomial<T> {
    pub fn new(rho0: &DensityMatrix<T>, rho1: &DensityMatrix<T>, mu: &[T], order: MomentOrder) -> Result<Self> {
        check_dim(rho0.dim(), rho1.dim())?;
        check_dim(rho0.dim(), mu.len())?;
        let n = order.usize();
        let nodes: Vec<T> = (0..=n).map(|i| T::from_usize_lossy(i) / T::from_usize_lossy(n)).collect();
        let values: Vec<Vec<Cx<T>>> = nodes
            .iter()
            .map(|&a| {
                let m = rho0.matrix().combine(T::one() - a, rho1.matrix(), a);
                width_polynomial_raw(&m, mu, order).coeffs
            })
            .collect();
        let vander: Vec<Vec<T>> = nodes.iter().map(|&a| (0..=n).map(|k| a.powi(k as i32)).collect()).collect();
        let levels = n * n + 1;
        let mut coeffs = vec![vec![czero(); levels]; n + 1];
        for l in 0..levels {
            let re = solve_real(vander.clone(), values.iter().map(|v| v[l].re).collect()).expect("distinct nodes");
            let im = solve_real(vander.clone(), values.iter().map(|v| v[l].im).collect()).expect("distinct nodes");
            for k in 0..=n {
                coeffs[k][l] = Cx::new(re[k], im[k]);
            }
        }
        Ok(Self { order, coeffs })
    }

    pub fn order(&self) -> MomentOrder {
        self.order
    }

    /// Coefficients `c_0..c_n` of `Q_n` in `a` at width `σ`.
    pub fn at_sigma(&self, sigma: T) -> Result<Vec<T>> {
        let x = (-sigma * sigma).exp();
        self.coeffs
            .iter()
            .map(|row| real_part(row.iter().rev().fold(czero(), |acc, c| acc * x + c)))
            .collect()
    }
}

/// Coefficients of `Q_n((1-a)ρ0 + aρ1)` as a polynomial in `a`.
pub fn moment_polynomial_affine<T: Real>(rho0: &DensityMatrix<T>, rho1: &DensityMatrix<T>, req: &MomentRequest<T>) -> Result<Vec<T>> {
    AffineMomentPolynomial::new(rho0, rho1, req.spec.centers.angles(), req.order)?.at_sigma(req.spec.width)
}

/// Horner evaluation of `Σ c_k a^k`.
pub fn eval_poly<T: Real>(coeffs: &[T], a: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * a + c)
}
