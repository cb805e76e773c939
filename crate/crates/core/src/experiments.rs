//! Detection-ratio experiments: imperfectly centered phase distributions,
//! averaged over random deviation vectors.
//!
//! Random streams are addressed by index. Deviation draw `t` is the same
//! standard-normal vector for every `σ_G`, order and width, so comparisons
//! along any grid axis are paired.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::moments::{width_polynomial, AffineMomentPolynomial, MomentOrder, MomentRequest, WrappedNormalSpec};
use crate::moments::generalized_moment;
use crate::pattern::{find_pattern_max, PhaseVector};
use crate::poly::superlevel_measure;
use crate::qstate::{rho_a, DensityMatrix, EnsembleKind, EnsembleSpec};
use crate::report::{Cell, Csv};
use crate::rng::{derive_seed, normal, stream};
use crate::scalar::Real;
use crate::thresholds::{critical_purity, exceeds, purity_bound_q2, purity_constrained_max_q2_with, threshold, PurityMaxOptions};

const SALT_DELTA: u64 = 0x6465_6c74;
const SALT_ENSEMBLE: u64 = 0x656e_7365;
const SALT_PATTERN: u64 = 0x7061_7474;

/// Normal deviations of the distribution centers from the pattern maximum.
///
/// Components have variance `d/(d-1)·σ_G²`, so that the centered vector
/// `δ - δ̄` has per-component variance `σ_G²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationModel<T> {
    pub d: usize,
    pub sigma_g: T,
    pub seed: u64,
}

impl<T: Real> DeviationModel<T> {
    pub fn new(d: usize, sigma_g: T, seed: u64) -> Result<Self> {
        if d < 1 {
            return Err(out_of_range("d", 0.0, "[1, inf)"));
        }
        if !sigma_g.is_finite() || sigma_g < T::zero() {
            return Err(out_of_range("sigma_g", sigma_g.to_f64_lossy(), "[0, inf)"));
        }
        Ok(Self { d, sigma_g, seed })
    }

    /// Per-component standard deviation; zero for `d = 1`.
    pub fn scale(&self) -> T {
        if self.d < 2 {
            return T::zero();
        }
        let d = T::from_usize_lossy(self.d);
        self.sigma_g * (d / (d - T::one())).sqrt()
    }

    /// Draw `t` as raw angles (not reduced modulo 2π).
    pub fn draw_raw(&self, t: u64) -> Vec<T> {
        let s = self.scale();
        unit_draw::<T>(self.d, self.seed, t).into_iter().map(|z| z * s).collect()
    }
}

/// Draw `t` of `model` as a phase vector.
pub fn sample_deviation<T: Real>(model: &DeviationModel<T>, t: u64) -> PhaseVector<T> {
    PhaseVector::new(model.draw_raw(t)).expect("finite draws")
}

fn unit_draw<T: Real>(d: usize, seed: u64, id: u64) -> Vec<T> {
    let mut rng = stream(seed, id);
    (0..d).map(|_| normal(&mut rng)).collect()
}

/// Which states are probed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Population {
    /// `ρ_a = a|W_d⟩⟨W_d| + (1-a)/d`, `a` uniform on `[0, 1]`; `R` is the
    /// measure of certified `a`.
    RhoA,
    /// `size` random states from the unitary ensemble.
    Cue { size: usize },
    /// `size` random pure states supported on `k` basis states.
    KCoherentPure { k: usize, size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub d: usize,
    /// Coherence numbers to certify; a state (or `a`) counts as detected for
    /// target `k` when its certified coherence number is at least `k`.
    pub targets: Vec<usize>,
    pub orders: Vec<u32>,
    pub sigmas: Vec<f64>,
    pub sigma_gs: Vec<f64>,
    /// Deviation draws per grid point.
    pub n_delta: usize,
    pub population: Population,
    /// Multistart count for the pattern maximum (random populations only).
    pub restarts: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.d < 1 {
            return bad("d must be at least 1".into());
        }
        if self.targets.is_empty() || self.orders.is_empty() || self.sigmas.is_empty() || self.sigma_gs.is_empty() {
            return bad("targets, orders, sigmas and sigma_gs must be nonempty".into());
        }
        if let Some(k) = self.targets.iter().find(|&&k| k < 1 || k > self.d) {
            return bad(format!("target k = {k} outside [1, {}]", self.d));
        }
        for &n in &self.orders {
            MomentOrder::new(n)?;
        }
        for (name, grid) in [("sigma", &self.sigmas), ("sigma_g", &self.sigma_gs)] {
            if let Some(x) = grid.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return bad(format!("{name} grid value {x} outside [0, inf)"));
            }
        }
        if self.n_delta < 1 {
            return bad("n_delta must be at least 1".into());
        }
        if self.restarts < 1 {
            return bad("restarts must be at least 1".into());
        }
        match self.population {
            Population::RhoA => {}
            Population::Cue { size } | Population::KCoherentPure { size, .. } if size < 1 => {
                return bad("population size must be at least 1".into());
            }
            Population::KCoherentPure { k, .. } if k < 1 || k > self.d => {
                return bad(format!("population k = {k} outside [1, {}]", self.d));
            }
            _ => {}
        }
        Ok(())
    }

    /// Ensemble behind a random population.
    pub fn ensemble(&self) -> Option<EnsembleSpec> {
        let seed = derive_seed(self.seed, SALT_ENSEMBLE);
        let (kind, size) = match self.population {
            Population::RhoA => return None,
            Population::Cue { size } => (EnsembleKind::CueRandom, size),
            Population::KCoherentPure { k, size } => (EnsembleKind::KCoherentPure { k }, size),
        };
        Some(EnsembleSpec { kind, dim: self.d, size, seed })
    }

    pub fn deviation_seed(&self) -> u64 {
        derive_seed(self.seed, SALT_DELTA)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub k: usize,
    pub n: u32,
    pub sigma: f64,
    pub sigma_g: f64,
    pub r_mean: f64,
    pub r_stderr: f64,
    pub n_delta: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub population: Population,
    pub d: usize,
    pub seed: u64,
    /// Ordered by target, order, `σ_G`, then `σ`.
    pub rows: Vec<DetectionRow>,
    pub config_hash: Option<String>,
    pub timestamp: Option<String>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs())
}

impl DetectionReport {
    pub fn get(&self, k: usize, n: u32, sigma: f64, sigma_g: f64) -> Option<&DetectionRow> {
        self.rows.iter().find(|r| r.k == k && r.n == n && same(r.sigma, sigma) && same(r.sigma_g, sigma_g))
    }

    /// Rows of one `(k, n, σ_G)` slice, in `σ` order.
    pub fn slice(&self, k: usize, n: u32, sigma_g: f64) -> Vec<&DetectionRow> {
        self.rows.iter().filter(|r| r.k == k && r.n == n && same(r.sigma_g, sigma_g)).collect()
    }

    /// Timestamps stay out of the CSV so reruns are byte-identical.
    pub fn to_csv(&self) -> Csv {
        let mut csv = Csv::new(["k", "n", "sigma", "sigma_G", "R_mean", "R_stderr", "N_delta"]);
        if let Some(h) = &self.config_hash {
            csv.meta("config_hash", h);
        }
        csv.meta("seed", self.seed).meta("d", self.d).meta("population", population_label(&self.population));
        for r in &self.rows {
            csv.row([r.k.into(), r.n.into(), r.sigma.into(), r.sigma_g.into(), r.r_mean.into(), r.r_stderr.into(), r.n_delta.into()]);
        }
        csv
    }
}

fn population_label(p: &Population) -> String {
    match p {
        Population::RhoA => "rho_a".into(),
        Population::Cue { size } => format!("cue(size={size})"),
        Population::KCoherentPure { k, size } => format!("k_coherent_pure(k={k},size={size})"),
    }
}

/// Mean and standard error of the mean (zero for a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `[k][n][σ]` thresholds for certifying `k`, i.e. `Q_n^(k-1)(σ)`; `None`
/// for `k = 1`, which every state reaches.
fn certification_thresholds<T: Real>(cfg: &ExperimentConfig) -> Result<Vec<Vec<Vec<Option<T>>>>> {
    cfg.targets
        .iter()
        .map(|&k| {
            cfg.orders
                .iter()
                .map(|&n| {
                    cfg.sigmas
                        .iter()
                        .map(|&s| if k < 2 { Ok(None) } else { threshold(n, k as u64 - 1, T::lit(s)).map(Some) })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `R` as the measure of `a ∈ [0, 1]` for which `Q_n(ρ_a)` exceeds `thr`.
fn measure_above<T: Real>(coeffs: &[T], thr: Option<T>) -> T {
    match thr {
        None => T::one(),
        Some(t) => superlevel_measure(coeffs, t),
    }
}

/// Collects per-draw values laid out as `[k][n][σ_G][σ]` into report rows.
fn assemble(cfg: &ExperimentConfig, per_draw: &[Vec<f64>]) -> Vec<DetectionRow> {
    let (ns, ng, nsig) = (cfg.orders.len(), cfg.sigma_gs.len(), cfg.sigmas.len());
    let mut rows = Vec::new();
    let mut column = Vec::with_capacity(per_draw.len());
    for (ki, &k) in cfg.targets.iter().enumerate() {
        for (ni, &n) in cfg.orders.iter().enumerate() {
            for (gi, &sigma_g) in cfg.sigma_gs.iter().enumerate() {
                for (si, &sigma) in cfg.sigmas.iter().enumerate() {
                    let idx = ((ki * ns + ni) * ng + gi) * nsig + si;
                    column.clear();
                    column.extend(per_draw.iter().map(|v| v[idx]));
                    let (r_mean, r_stderr) = mean_stderr(&column);
                    rows.push(DetectionRow { k, n, sigma, sigma_g, r_mean, r_stderr, n_delta: per_draw.len() });
                }
            }
        }
    }
    rows
}

fn report(cfg: &ExperimentConfig, rows: Vec<DetectionRow>) -> DetectionReport {
    DetectionReport { population: cfg.population.clone(), d: cfg.d, seed: cfg.seed, rows, config_hash: None, timestamp: None }
}

/// Detection ratio over the `ρ_a` family, with `μ = δ` (the pattern maximum
/// of every `ρ_a` sits at the origin).
///
/// `Q_n(ρ_a)` is a polynomial in `a` of degree `n`; the certified set is its
/// superlevel set, measured exactly from the polynomial roots.
pub fn detection_ratio_rho_a<T: Real>(cfg: &ExperimentConfig) -> Result<DetectionReport> {
    cfg.check()?;
    if cfg.population != Population::RhoA {
        return Err(Error::Config("detection_ratio_rho_a needs the rho_a population".into()));
    }
    let d = cfg.d;
    let rho0 = DensityMatrix::<T>::maximally_mixed(d);
    let rho1 = rho_a(d, T::one())?;
    let thr = certification_thresholds::<T>(cfg)?;
    let orders: Vec<MomentOrder> = cfg.orders.iter().map(|&n| MomentOrder::new(n)).collect::<Result<_>>()?;
    let models: Vec<DeviationModel<T>> =
        cfg.sigma_gs.iter().map(|&g| DeviationModel::new(d, T::lit(g), cfg.deviation_seed())).collect::<Result<_>>()?;
    let (nk, ns, ng, nsig) = (cfg.targets.len(), orders.len(), models.len(), cfg.sigmas.len());

    let per_draw: Vec<Vec<f64>> = (0..cfg.n_delta as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let mut out = vec![0.0; nk * ns * ng * nsig];
            for (gi, model) in models.iter().enumerate() {
                let mu = model.draw_raw(t);
                for (ni, &order) in orders.iter().enumerate() {
                    let poly = AffineMomentPolynomial::new(&rho0, &rho1, &mu, order)?;
                    for (si, &sigma) in cfg.sigmas.iter().enumerate() {
                        let coeffs = poly.at_sigma(T::lit(sigma))?;
                        for ki in 0..nk {
                            let r = measure_above(&coeffs, thr[ki][ni][si]);
                            out[((ki * ns + ni) * ng + gi) * nsig + si] = r.to_f64_lossy();
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(report(cfg, assemble(cfg, &per_draw)))
}

/// Certified measure of `a` for one deviation vector, via the polynomial path.
pub fn detection_ratio_rho_a_at<T: Real>(d: usize, k: usize, n: u32, sigma: T, mu: &[T]) -> Result<T> {
    let order = MomentOrder::new(n)?;
    if k < 1 || k > d {
        return Err(out_of_range("k", k as f64, format!("[1, {d}]")));
    }
    let poly = AffineMomentPolynomial::new(&DensityMatrix::maximally_mixed(d), &rho_a(d, T::one())?, mu, order)?;
    let thr = if k < 2 { None } else { Some(threshold(n, k as u64 - 1, sigma)?) };
    Ok(measure_above(&poly.at_sigma(sigma)?, thr))
}

/// Same quantity from direct moment evaluations: sign changes of
/// `Q_n(ρ_a) - threshold` bracketed on a fine `a` grid, then bisected.
pub fn detection_ratio_rho_a_direct<T: Real>(d: usize, k: usize, n: u32, sigma: T, mu: &[T]) -> Result<T> {
    if k < 1 || k > d {
        return Err(out_of_range("k", k as f64, format!("[1, {d}]")));
    }
    if k < 2 {
        return Ok(T::one());
    }
    let thr = threshold(n, k as u64 - 1, sigma)?;
    let req = MomentRequest::new(n, WrappedNormalSpec::new(PhaseVector::new(mu.to_vec())?, sigma)?)?;
    let f = |a: T| -> Result<T> { Ok(generalized_moment(&rho_a(d, a)?, &req)? - thr) };
    const GRID: usize = 512;
    let nodes: Vec<T> = (0..=GRID).map(|i| T::from_usize_lossy(i) / T::from_usize_lossy(GRID)).collect();
    let vals: Vec<T> = nodes.iter().map(|&a| f(a)).collect::<Result<_>>()?;
    let mut cuts = vec![T::zero()];
    for i in 0..GRID {
        let (fa, fb) = (vals[i], vals[i + 1]);
        if (fa > T::zero()) != (fb > T::zero()) {
            let (mut lo, mut hi) = (nodes[i], nodes[i + 1]);
            let lo_pos = fa > T::zero();
            for _ in 0..100 {
                let mid = (lo + hi) / T::lit(2.0);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (f(mid)? > T::zero()) == lo_pos {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push((lo + hi) / T::lit(2.0));
        }
    }
    cuts.push(T::one());
    let mut total = T::zero();
    for w in cuts.windows(2) {
        if f((w[0] + w[1]) / T::lit(2.0))? > T::zero() {
            total += w[1] - w[0];
        }
    }
    Ok(total)
}

/// Detection ratio over a random ensemble: each state's pattern maximum is
/// located numerically, the centers are set to `φ^max + δ` and the state
/// counts as detected when its certified coherence number reaches the target.
///
/// Every state gets its own deviation draws.
pub fn detection_ratio_random<T: Real>(cfg: &ExperimentConfig) -> Result<DetectionReport> {
    cfg.check()?;
    let spec = cfg.ensemble().ok_or_else(|| Error::Config("detection_ratio_random needs a random population".into()))?;
    let d = cfg.d;
    let orders: Vec<MomentOrder> = cfg.orders.iter().map(|&n| MomentOrder::new(n)).collect::<Result<_>>()?;
    let scales: Vec<T> =
        cfg.sigma_gs.iter().map(|&g| DeviationModel::new(d, T::lit(g), 0).map(|m| m.scale())).collect::<Result<_>>()?;
    // ladders[n][σ][k-1] = Q_n^(k)(σ) for k = 1..d-1
    let ladders: Vec<Vec<Vec<T>>> = cfg
        .orders
        .iter()
        .map(|&n| cfg.sigmas.iter().map(|&s| (1..d).map(|k| threshold(n, k as u64, T::lit(s))).collect()).collect())
        .collect::<Result<_>>()?;
    let (nt, ng, ns, nsig) = (cfg.n_delta, scales.len(), orders.len(), cfg.sigmas.len());
    let delta_seed = cfg.deviation_seed();
    let pattern_seed = derive_seed(cfg.seed, SALT_PATTERN);

    // certified coherence number per (state, draw, σ_G, n, σ)
    let certified: Vec<Vec<u8>> = (0..spec.size)
        .into_par_iter()
        .map(|i| -> Result<Vec<u8>> {
            let rho: DensityMatrix<T> = spec.member(i)?;
            let phi_max = find_pattern_max(&rho, cfg.restarts, derive_seed(pattern_seed, i as u64))?.argmax;
            let mut out = vec![0u8; nt * ng * ns * nsig];
            let mut mu = vec![T::zero(); d];
            for t in 0..nt {
                let z = unit_draw::<T>(d, delta_seed, ((i as u64) << 32) | t as u64);
                for (gi, &scale) in scales.iter().enumerate() {
                    for ((m, &p), &zj) in mu.iter_mut().zip(phi_max.angles()).zip(&z) {
                        *m = p + scale * zj;
                    }
                    for (ni, &order) in orders.iter().enumerate() {
                        let wp = width_polynomial(&rho, &mu, order)?;
                        for (si, &sigma) in cfg.sigmas.iter().enumerate() {
                            let q = wp.at(T::lit(sigma))?;
                            let exceeded = ladders[ni][si].iter().take_while(|&&thr| exceeds(q, thr)).count();
                            out[((t * ng + gi) * ns + ni) * nsig + si] = (exceeded + 1) as u8;
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let size = spec.size as f64;
    let (nk,) = (cfg.targets.len(),);
    let per_draw: Vec<Vec<f64>> = (0..nt)
        .map(|t| {
            let mut out = vec![0.0; nk * ns * ng * nsig];
            for (ki, &k) in cfg.targets.iter().enumerate() {
                for gi in 0..ng {
                    for ni in 0..ns {
                        for si in 0..nsig {
                            let src = ((t * ng + gi) * ns + ni) * nsig + si;
                            let hits = certified.iter().filter(|c| c[src] as usize >= k).count();
                            out[((ki * ns + ni) * ng + gi) * nsig + si] = hits as f64 / size;
                        }
                    }
                }
            }
            out
        })
        .collect();
    Ok(report(cfg, assemble(cfg, &per_draw)))
}

/// Dispatches on the population.
pub fn run_detection<T: Real>(cfg: &ExperimentConfig) -> Result<DetectionReport> {
    match cfg.population {
        Population::RhoA => detection_ratio_rho_a::<T>(cfg),
        _ => detection_ratio_random::<T>(cfg),
    }
}

/// Gain of order `n` over the first-moment reference at one `(k, σ_G)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RStatistic {
    pub k: usize,
    pub sigma_g: f64,
    pub n: u32,
    /// Width maximizing `⟨R⟩_n`; the smallest one among ties (relative
    /// difference below 1e-12).
    pub sigma_max: f64,
    pub r_max: f64,
    pub r_reference: f64,
    /// `r_max / r_reference`; `None` when the reference detects nothing.
    pub ratio: Option<f64>,
}

/// `r_n = max_σ ⟨R⟩_n / ⟨R⟩_ref` for every `(k, σ_G, n)` slice of `report`.
/// The reference is the first-order slice of `reference` at the same
/// `(k, σ_G)`; `⟨R⟩_1` does not depend on `σ`, its largest value is used.
pub fn r_statistics(report: &DetectionReport, reference: &DetectionReport) -> Result<Vec<RStatistic>> {
    let mut keys: Vec<(usize, f64, u32)> = Vec::new();
    for r in &report.rows {
        if !keys.iter().any(|&(k, g, n)| k == r.k && same(g, r.sigma_g) && n == r.n) {
            keys.push((r.k, r.sigma_g, r.n));
        }
    }
    if keys.is_empty() {
        return Err(Error::Config("empty report".into()));
    }
    keys.into_iter()
        .map(|(k, sigma_g, n)| {
            let mut slice = report.slice(k, n, sigma_g);
            slice.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
            // values equal up to roundoff count as ties
            let best = slice.iter().fold(slice[0], |best, r| {
                if r.r_mean > best.r_mean + 1e-12 * (1.0 + best.r_mean.abs()) {
                    r
                } else {
                    best
                }
            });
            let refs = reference.slice(k, 1, sigma_g);
            if refs.is_empty() {
                return Err(Error::Config(format!("reference has no first-order rows for k = {k}, sigma_G = {sigma_g}")));
            }
            let r_reference = refs.iter().map(|r| r.r_mean).fold(f64::NEG_INFINITY, f64::max);
            Ok(RStatistic {
                k,
                sigma_g,
                n,
                sigma_max: best.sigma,
                r_max: best.r_mean,
                r_reference,
                ratio: (r_reference > 0.0).then(|| best.r_mean / r_reference),
            })
        })
        .collect()
}

pub fn r_statistics_csv(stats: &[RStatistic]) -> Csv {
    let mut csv = Csv::new(["k", "sigma_G", "n", "sigma_max", "R_max", "R_ref", "r"]);
    for s in stats {
        let ratio = s.ratio.map_or(Cell::from("nan"), Cell::from);
        csv.row([s.k.into(), s.sigma_g.into(), s.n.into(), s.sigma_max.into(), s.r_max.into(), s.r_reference.into(), ratio]);
    }
    csv
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityCurveRow {
    pub k: usize,
    pub purity: f64,
    /// Numerical maximum of `Q_2` over k-coherent states of this purity.
    pub constrained_max: f64,
    /// `Q_2(ρ_max(P))`, the maximum over all states of this purity.
    pub bound: f64,
    /// `Q_2^(k)(σ)`.
    pub threshold: f64,
    pub critical_purity: f64,
}

/// Purity-resolved `Q_2` maxima at `μ = 0`, one row per `(k, P)`.
pub fn purity_curve<T: Real>(d: usize, ks: &[usize], sigma: T, purities: &[T], budget: usize, seed: u64) -> Result<Vec<PurityCurveRow>> {
    if d < 2 {
        return Err(out_of_range("d", d as f64, "[2, inf)"));
    }
    let jobs: Vec<(usize, T)> = ks.iter().flat_map(|&k| purities.iter().map(move |&p| (k, p))).collect();
    let opts = PurityMaxOptions { budget, seed, ..PurityMaxOptions::default() };
    jobs.into_par_iter()
        .map(|(k, p)| {
            let found = purity_constrained_max_q2_with(d, k, p, sigma, &opts)?;
            Ok(PurityCurveRow {
                k,
                purity: p.to_f64_lossy(),
                constrained_max: found.value.to_f64_lossy(),
                bound: purity_bound_q2(d, p, sigma)?.to_f64_lossy(),
                threshold: threshold(2, k as u64, sigma)?.to_f64_lossy(),
                critical_purity: critical_purity::<T>(d, k)?.to_f64_lossy(),
            })
        })
        .collect()
}

pub fn purity_curve_csv(rows: &[PurityCurveRow]) -> Csv {
    let mut csv = Csv::new(["k", "P", "Q2_k_max", "Q2_bound", "threshold", "P_k"]);
    for r in rows {
        csv.row([r.k.into(), r.purity.into(), r.constrained_max.into(), r.bound.into(), r.threshold.into(), r.critical_purity.into()]);
    }
    csv
}
