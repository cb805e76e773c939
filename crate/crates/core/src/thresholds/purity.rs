//! Numerical maximum of `Q_2` (at `μ = 0`) over k-coherent states with
//! prescribed purity.
//!
//! A k-coherent state is `S / Tr S` with `S = Σ_s E_s L_s L_s† E_s^T`, one
//! positive block per k-subset `s` of the basis. The purity is pinned by
//! shrinking towards `1/d` when it is too high and penalized when it is too
//! low; shrinking keeps the state k-coherent since `1/d` is incoherent.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{out_of_range, Result};
use crate::linalg::CMatrix;
use crate::moments::{generalized_moment, LevelTable, MomentRequest, WrappedNormalSpec};
use crate::optim::{gradient_ascent, AscentOptions};
use crate::qstate::DensityMatrix;
use crate::rng::{complex_normal, stream};
use crate::scalar::{cx, czero, Cx, Real};

#[derive(Clone, Copy, Debug)]
pub struct PurityMaxOptions<T> {
    /// Number of restarts; the first two are structured, the rest random.
    pub budget: usize,
    pub seed: u64,
    /// Weight of `(P - Tr ρ²)²` below the target purity.
    pub penalty: T,
    pub ascent: AscentOptions<T>,
}

impl<T: Real> Default for PurityMaxOptions<T> {
    fn default() -> Self {
        Self {
            budget: 50,
            seed: 0,
            penalty: T::lit(1e3),
            ascent: AscentOptions { max_iter: 5_000, ..AscentOptions::default() },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PurityMaxResult<T> {
    pub value: T,
    #[serde(skip)]
    pub state: DensityMatrix<T>,
    pub purity: T,
    pub best_restart: usize,
    pub converged_restarts: usize,
    pub feasible_restarts: usize,
}

/// Best `Q_2` found over `budget` restarts.
pub fn purity_constrained_max_q2<T: Real>(d: usize, k: usize, purity: T, sigma: T, seed: u64, budget: usize) -> Result<T> {
    let opts = PurityMaxOptions { budget, seed, ..PurityMaxOptions::default() };
    Ok(purity_constrained_max_q2_with(d, k, purity, sigma, &opts)?.value)
}

pub fn purity_constrained_max_q2_with<T: Real>(
    d: usize,
    k: usize,
    purity: T,
    sigma: T,
    opts: &PurityMaxOptions<T>,
) -> Result<PurityMaxResult<T>> {
    let problem = Problem::new(d, k, purity, sigma, opts.penalty)?;
    if opts.budget < 1 {
        return Err(out_of_range("budget", 0.0, "[1, inf)"));
    }
    let runs: Vec<(usize, Option<(T, DensityMatrix<T>)>, bool)> = (0..opts.budget)
        .into_par_iter()
        .map(|r| {
            let x0 = problem.start(r, opts.seed);
            let res = gradient_ascent(|x, g| problem.objective(x, Some(g)).0, x0, &opts.ascent);
            let (_, eval) = problem.objective(&res.x, None);
            let found = eval.feasible.then(|| {
                let rho = eval.state();
                (problem.q2(&rho), rho)
            });
            (r, found, res.converged)
        })
        .collect();
    let converged_restarts = runs.iter().filter(|r| r.2).count();
    let feasible_restarts = runs.iter().filter(|r| r.1.is_some()).count();
    let mut best: Option<(usize, T, DensityMatrix<T>)> = None;
    for (r, found, _) in runs {
        if let Some((v, rho)) = found {
            if best.as_ref().is_none_or(|b| v > b.1) {
                best = Some((r, v, rho));
            }
        }
    }
    let (best_restart, value, state) = match best {
        Some(b) => b,
        // unreachable in practice: structured start 0 is feasible once
        // ascent has pushed the purity up, and pure mode always is
        None => return Err(crate::error::Error::Config("no restart reached the target purity".into())),
    };
    Ok(PurityMaxResult { purity: state.purity(), value, state, best_restart, converged_restarts, feasible_restarts })
}

fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < d - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

struct Problem<T> {
    d: usize,
    k: usize,
    target: T,
    penalty: T,
    sigma: T,
    subsets: Vec<Vec<usize>>,
    /// Block factor is `k × rank`.
    rank: usize,
    /// Free entries `(row, col)` of each block factor.
    entries: Vec<(usize, usize)>,
    /// `Q_2 = Σ_{p,q} w[p·d² + q] ρ_p ρ_q` over flattened index pairs.
    weights: Vec<T>,
}

struct Eval<T> {
    rho: CMatrix<T>,
    feasible: bool,
}

impl<T: Real> Eval<T> {
    fn state(&self) -> DensityMatrix<T> {
        let m = &self.rho;
        DensityMatrix::from_trusted(CMatrix::from_fn(m.dim(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * T::lit(0.5)))
    }
}

impl<T: Real> Problem<T> {
    fn new(d: usize, k: usize, target: T, sigma: T, penalty: T) -> Result<Self> {
        if d < 1 {
            return Err(out_of_range("d", 0.0, "[1, inf)"));
        }
        if k < 1 || k > d {
            return Err(out_of_range("k", k as f64, format!("[1, {d}]")));
        }
        let inv_d = T::one() / T::from_usize_lossy(d);
        let tol = T::structure_tol();
        if !(target >= inv_d - tol && target <= T::one() + tol) {
            return Err(out_of_range("purity", target.to_f64_lossy(), format!("[1/{d}, 1]")));
        }
        let spec = WrappedNormalSpec::centered(d, sigma)?;
        let target = target.max(inv_d).min(T::one());
        // A pure target leaves no room for mixing: optimize over single
        // k-sparse vectors. Index permutations preserve Q_2 at μ = 0, so one
        // support suffices.
        let pure = target >= T::one() - tol;
        let (subsets, rank) = if pure { (vec![(0..k).collect()], 1) } else { (combinations(d, k), k) };
        let entries = (0..k).flat_map(|i| (0..=i.min(rank - 1)).map(move |j| (i, j))).collect();
        let x = (-spec.width * spec.width).exp();
        let table = LevelTable::cached(d, 2);
        let weights = table.levels.iter().map(|&l| x.powi(l as i32)).collect();
        Ok(Self { d, k, target, penalty, sigma, subsets, rank, entries, weights })
    }

    fn n_params(&self) -> usize {
        2 * self.subsets.len() * self.entries.len()
    }

    fn block(&self, s: usize, x: &[T]) -> Vec<Cx<T>> {
        let mut l = vec![czero(); self.k * self.rank];
        let base = 2 * s * self.entries.len();
        for (e, &(i, j)) in self.entries.iter().enumerate() {
            l[i * self.rank + j] = cx(x[base + 2 * e], x[base + 2 * e + 1]);
        }
        l
    }

    fn start(&self, r: usize, seed: u64) -> Vec<T> {
        let mut x = vec![T::zero(); self.n_params()];
        let ones_first_column = |x: &mut [T], s: usize| {
            let base = 2 * s * self.entries.len();
            for (e, &(_, j)) in self.entries.iter().enumerate() {
                if j == 0 {
                    x[base + 2 * e] = T::one();
                }
            }
        };
        let mut rng = stream(seed, r as u64);
        match r {
            // every block the all-ones matrix: ρ_max at the critical purity
            0 => (0..self.subsets.len()).for_each(|s| ones_first_column(&mut x, s)),
            // one W_k block plus a little of everything else
            1 => {
                for v in x.iter_mut() {
                    *v = complex_normal::<T, _>(&mut rng).re * T::lit(1e-2);
                }
                ones_first_column(&mut x, 0);
            }
            _ => {
                for pair in x.chunks_mut(2) {
                    let z: Cx<T> = complex_normal(&mut rng);
                    pair[0] = z.re;
                    pair[1] = z.im;
                }
            }
        }
        x
    }

    /// `Q_2` and `Γ` with `dQ_2 = 2 Re Tr(Γ dρ)` for Hermitian `dρ`.
    fn q2_and_gamma(&self, rho: &CMatrix<T>) -> (T, CMatrix<T>) {
        let pairs = self.d * self.d;
        let flat = rho.as_slice();
        let mut m = vec![czero::<T>(); pairs];
        for (p, mp) in m.iter_mut().enumerate() {
            let row = &self.weights[p * pairs..(p + 1) * pairs];
            *mp = row.iter().zip(flat).fold(czero(), |acc, (&w, z)| acc + z * w);
        }
        let q = flat.iter().zip(&m).fold(czero::<T>(), |acc, (a, b)| acc + a * b).re;
        let d = self.d;
        (q, CMatrix::from_fn(d, |a, b| m[b * d + a]))
    }

    fn q2(&self, rho: &DensityMatrix<T>) -> T {
        let req = MomentRequest::new(2, WrappedNormalSpec::centered(self.d, self.sigma).expect("checked")).expect("order 2");
        generalized_moment(rho, &req).expect("valid state")
    }

    /// Objective value; writes the gradient into `grad` when given.
    fn objective(&self, x: &[T], grad: Option<&mut [T]>) -> (T, Eval<T>) {
        let d = self.d;
        let inv_d = T::one() / T::from_usize_lossy(d);
        let blocks: Vec<Vec<Cx<T>>> = (0..self.subsets.len()).map(|s| self.block(s, x)).collect();
        let mut s_mat = CMatrix::zeros(d);
        for (sub, l) in self.subsets.iter().zip(&blocks) {
            for (bi, &i) in sub.iter().enumerate() {
                for (bj, &j) in sub.iter().enumerate() {
                    let mut acc = czero();
                    for c in 0..self.rank {
                        acc += l[bi * self.rank + c] * l[bj * self.rank + c].conj();
                    }
                    s_mat[(i, j)] += acc;
                }
            }
        }
        let tr = s_mat.trace().re;
        if !(tr > T::min_positive_value().sqrt()) {
            if let Some(g) = grad {
                g.iter_mut().for_each(|v| *v = T::zero());
            }
            return (T::neg_infinity(), Eval { rho: CMatrix::identity(d).scale(inv_d), feasible: false });
        }
        let rho0 = s_mat.scale(T::one() / tr);
        let pi0: T = rho0.as_slice().iter().map(|z| z.norm_sqr()).sum();
        let feas_tol = T::lit(1e-9);
        let excess = pi0 - inv_d;
        let (value, rho, gamma0, feasible) = if pi0 + feas_tol >= self.target {
            let shrink = pi0 > self.target && excess > T::epsilon();
            let t = if shrink { ((self.target - inv_d) / excess).sqrt() } else { T::one() };
            let rho = rho0.combine(t, &CMatrix::identity(d), (T::one() - t) * inv_d);
            let (q, gamma) = self.q2_and_gamma(&rho);
            let mut g0 = gamma.scale(t);
            if shrink {
                let centered = rho0.combine(T::one(), &CMatrix::identity(d), -inv_d);
                let c = re_trace_product(&gamma, &centered) * t / excess;
                g0 = g0.combine(T::one(), &rho0, -c);
            }
            (q, rho, g0, true)
        } else {
            let (q, gamma) = self.q2_and_gamma(&rho0);
            let gap = self.target - pi0;
            let g0 = gamma.combine(T::one(), &rho0, T::lit(2.0) * self.penalty * gap);
            (q - self.penalty * gap * gap, rho0.clone(), g0, false)
        };
        if let Some(g) = grad {
            // normalization ρ0 = S / Tr S
            let shift = re_trace_product(&gamma0, &rho0);
            let gamma_s = gamma0.combine(T::one() / tr, &CMatrix::identity(d), -shift / tr);
            for (s, (sub, l)) in self.subsets.iter().zip(&blocks).enumerate() {
                // A = L† (B + B†), B the block of Γ_S on this subset
                let k = self.k;
                let r = self.rank;
                let mut sym = vec![czero::<T>(); k * k];
                for (bi, &i) in sub.iter().enumerate() {
                    for (bj, &j) in sub.iter().enumerate() {
                        sym[bi * k + bj] = gamma_s[(i, j)] + gamma_s[(j, i)].conj();
                    }
                }
                let base = 2 * s * self.entries.len();
                for (e, &(i, j)) in self.entries.iter().enumerate() {
                    // A_ji = Σ_m conj(L_mj) sym_mi
                    let mut a = czero::<T>();
                    for m in 0..k {
                        a += l[m * r + j].conj() * sym[m * k + i];
                    }
                    g[base + 2 * e] = T::lit(2.0) * a.re;
                    g[base + 2 * e + 1] = -T::lit(2.0) * a.im;
                }
            }
        }
        (value, Eval { rho, feasible })
    }
}

/// `Re Tr(A B)`.
fn re_trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    let d = a.dim();
    let mut s = T::zero();
    for i in 0..d {
        for j in 0..d {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thresholds::{critical_purity, purity_bound_q2, threshold};
    use approx::assert_abs_diff_eq;

    #[test]
    fn combinations_enumerate_subsets() {
        let c = combinations(5, 3);
        assert_eq!(c.len(), 10);
        assert_eq!(c[0], vec![0, 1, 2]);
        assert_eq!(c[9], vec![2, 3, 4]);
        assert_eq!(combinations(4, 4), vec![vec![0, 1, 2, 3]]);
        assert_eq!(combinations(3, 1).len(), 3);
    }

    fn check_gradient(problem: &Problem<f64>, x: &[f64]) {
        let mut g = vec![0.0; x.len()];
        problem.objective(x, Some(&mut g));
        let h = 1e-6;
        for i in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fd = (problem.objective(&xp, None).0 - problem.objective(&xm, None).0) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + fd.abs()), "param {i}: fd {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // shrink branch (random start is fairly pure relative to 0.3),
        // penalty branch (target 0.9), pure mode
        for (k, p) in [(2, 0.3), (3, 0.9), (3, 1.0), (5, 0.5)] {
            let problem = Problem::new(5, k, p, 0.8, 1e3).unwrap();
            for r in 2..4 {
                let x = problem.start(r, 5);
                check_gradient(&problem, &x);
            }
        }
    }

    #[test]
    fn structured_start_hits_bound_below_critical_purity() {
        let sigma = 1.0;
        for k in 2..=4 {
            let pk: f64 = critical_purity(5, k).unwrap();
            for p in [0.2, 0.5 * (0.2 + pk), pk] {
                let problem = Problem::new(5, k, p, sigma, 1e3).unwrap();
                let (v, eval) = problem.objective(&problem.start(0, 0), None);
                assert!(eval.feasible);
                assert_abs_diff_eq!(v, purity_bound_q2(5, p, sigma).unwrap(), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn pure_target_recovers_threshold() {
        for k in 1..=4 {
            let res = purity_constrained_max_q2_with(5, k, 1.0, 1.0, &PurityMaxOptions { budget: 6, ..Default::default() }).unwrap();
            let t: f64 = threshold(2, k as u64, 1.0).unwrap();
            assert!(res.value <= t + 1e-9);
            assert!((res.value - t).abs() <= 1e-6 * t, "k={k}: {} vs {t}", res.value);
            assert_abs_diff_eq!(res.purity, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn unconstrained_coherence_matches_bound() {
        for p in [0.3, 0.6, 0.95] {
            let v = purity_constrained_max_q2(4, 4, p, 0.7, 1, 4).unwrap();
            assert_abs_diff_eq!(v, purity_bound_q2(4, p, 0.7).unwrap(), epsilon = 1e-8);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(purity_constrained_max_q2(5, 6, 0.5, 1.0, 0, 2).is_err());
        assert!(purity_constrained_max_q2(5, 2, 0.1, 1.0, 0, 2).is_err());
        assert!(purity_constrained_max_q2(5, 2, 0.5, 1.0, 0, 0).is_err());
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let a = purity_constrained_max_q2(4, 2, 0.6, 1.0, 3, 4).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| purity_constrained_max_q2(4, 2, 0.6, 1.0, 3, 4).unwrap());
        assert_eq!(a, b);
    }
}
