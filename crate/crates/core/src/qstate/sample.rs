use rand::seq::index;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::{rho_a, DensityMatrix, PureState};
use crate::error::{out_of_range, Result};
use crate::linalg::CMatrix;
use crate::rng::{complex_normal, stream, uniform_angle};
use crate::scalar::{cis, czero, Real};

/// Haar-random `d×d` unitary from the QR decomposition of a complex Ginibre matrix.
pub fn cue_unitary_with<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix<T> {
    loop {
        let z = CMatrix::from_fn(d, |_, _| complex_normal(rng));
        if let Some(q) = z.qr_q() {
            return q;
        }
    }
}

pub fn sample_cue_unitary<T: Real>(d: usize, seed: u64) -> Result<CMatrix<T>> {
    if d < 1 {
        return Err(out_of_range("d", 0.0, "[1, inf)"));
    }
    Ok(cue_unitary_with(d, &mut stream(seed, 0)))
}

/// `U Λ U†` with `U` from the CUE and `Λ` the squared moduli of one column of
/// an independent CUE unitary.
pub fn random_state_with<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix<T> {
    let u: CMatrix<T> = cue_unitary_with(d, rng);
    let v: CMatrix<T> = cue_unitary_with(d, rng);
    let spectrum: Vec<T> = v.column(0).iter().map(|z| z.norm_sqr()).collect();
    let total: T = spectrum.iter().copied().sum();
    let mut lam = CMatrix::zeros(d);
    for (i, &s) in spectrum.iter().enumerate() {
        lam[(i, i)] = (s / total).into();
    }
    let rho = &(&u * &lam) * &u.adjoint();
    // symmetrize away roundoff
    let herm = CMatrix::from_fn(d, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * T::lit(0.5));
    DensityMatrix::from_trusted(herm)
}

pub fn sample_random_state<T: Real>(d: usize, seed: u64) -> Result<DensityMatrix<T>> {
    if d < 1 {
        return Err(out_of_range("d", 0.0, "[1, inf)"));
    }
    Ok(random_state_with(d, &mut stream(seed, 0)))
}

/// Random pure state supported on exactly `k` of the `d` basis states: flat
/// Dirichlet weights, independent uniform phases, uniformly chosen support.
pub fn k_coherent_pure_with<T: Real, R: Rng + ?Sized>(k: usize, d: usize, rng: &mut R) -> Result<PureState<T>> {
    if k < 1 || k > d {
        return Err(out_of_range("k", k as f64, format!("[1, {d}]")));
    }
    let support = index::sample(rng, d, k).into_vec();
    // Exp(1) draws normalized to the simplex are Dirichlet(1, ..., 1); the
    // floor keeps every chosen amplitude strictly nonzero.
    let mut w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1).max(1e-300)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let mut amps = vec![czero::<T>(); d];
    for (&j, &wj) in support.iter().zip(&w) {
        let phase: T = uniform_angle(rng);
        amps[j] = cis(-phase) * T::lit(wj).sqrt();
    }
    let norm: T = amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    amps.iter_mut().for_each(|z| *z /= norm);
    PureState::new(amps)
}

pub fn sample_k_coherent_pure<T: Real>(k: usize, d: usize, seed: u64) -> Result<PureState<T>> {
    k_coherent_pure_with(k, d, &mut stream(seed, 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EnsembleKind {
    /// ρ_a on an evenly spaced `a` grid of `size` points in [0, 1].
    RhoAFamily,
    CueRandom,
    KCoherentPure { k: usize },
}

/// A reproducible ensemble of states: member `i` is drawn from stream `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub dim: usize,
    pub size: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn check(&self) -> Result<()> {
        if self.size < 1 {
            return Err(out_of_range("size", self.size as f64, "[1, inf)"));
        }
        if self.dim < 1 {
            return Err(out_of_range("dim", 0.0, "[1, inf)"));
        }
        if let EnsembleKind::KCoherentPure { k } = self.kind {
            if k < 1 || k > self.dim {
                return Err(out_of_range("k", k as f64, format!("[1, {}]", self.dim)));
            }
        }
        Ok(())
    }

    pub fn member<T: Real>(&self, i: usize) -> Result<DensityMatrix<T>> {
        self.check()?;
        let mut rng = stream(self.seed, i as u64);
        Ok(match self.kind {
            EnsembleKind::RhoAFamily => {
                let a = if self.size == 1 { T::one() } else { T::from_usize_lossy(i) / T::from_usize_lossy(self.size - 1) };
                rho_a(self.dim, a)?
            }
            EnsembleKind::CueRandom => random_state_with(self.dim, &mut rng),
            EnsembleKind::KCoherentPure { k } => k_coherent_pure_with(k, self.dim, &mut rng)?.density(),
        })
    }

    pub fn generate<T: Real>(&self) -> Result<Vec<DensityMatrix<T>>> {
        (0..self.size).map(|i| self.member(i)).collect()
    }
}
