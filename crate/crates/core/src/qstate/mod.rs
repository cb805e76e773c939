//! Quantum states and the state families used by the certification pipeline.

mod io;
mod sample;

pub use io::{read_state_json, state_to_json, StateFile};
pub use sample::{
    random_state_with, sample_cue_unitary, sample_k_coherent_pure, sample_random_state, EnsembleKind, EnsembleSpec,
    cue_unitary_with, k_coherent_pure_with,
};

use crate::error::{out_of_range, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cis, cx, czero, Cx, Real};

/// A validated density matrix: Hermitian, unit trace and positive semidefinite
/// up to the tolerances of the scalar type.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    m: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Checks Hermiticity, trace and positivity, in that order.
    pub fn validate(m: CMatrix<T>) -> Result<Self> {
        let (dev, row, col) = m.hermitian_deviation();
        if !dev.is_finite() || dev > T::structure_tol() {
            return Err(Error::NotHermitian { row, col, deviation: dev.to_f64_lossy() });
        }
        let tr = m.trace();
        if !((tr.re - T::one()).abs() <= T::structure_tol() && tr.im.abs() <= T::structure_tol()) {
            return Err(Error::TraceNotOne { trace_re: tr.re.to_f64_lossy(), trace_im: tr.im.to_f64_lossy() });
        }
        let min_ev = m.hermitian_eigenvalues()[0];
        if min_ev < -T::psd_tol() {
            return Err(Error::NotPositive { eigenvalue: min_ev.to_f64_lossy() });
        }
        Ok(Self { m })
    }

    /// Wraps a matrix already known to be a state (convex combinations,
    /// constructions with a closed-form guarantee).
    pub(crate) fn from_trusted(m: CMatrix<T>) -> Self {
        debug_assert!(m.hermitian_deviation().0 <= T::lit(1e3) * T::structure_tol());
        Self { m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(CMatrix::identity(dim).scale(T::one() / T::from_usize_lossy(dim)))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &PureState<T>) -> Self {
        Self::from_trusted(CMatrix::outer(&psi.amps, &psi.amps))
    }

    /// `η·self + (1-η)·other`.
    pub fn mix(&self, eta: T, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(out_of_range("eta", eta.to_f64_lossy(), "[0, 1]"));
        }
        Ok(Self::from_trusted(self.m.combine(eta, &other.m, T::one() - eta)))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.m[(i, j)]
    }

    /// `Tr ρ²`, which for Hermitian ρ is the squared Frobenius norm.
    pub fn purity(&self) -> T {
        self.m.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// l₁-norm of coherence `Σ_{i≠j} |ρ_ij|`.
    pub fn l1_coherence(&self) -> T {
        let d = self.dim();
        let mut s = T::zero();
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    s += self.m[(i, j)].norm();
                }
            }
        }
        s
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.m.hermitian_eigenvalues()
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    amps: Vec<Cx<T>>,
}

impl<T: Real> PureState<T> {
    pub fn new(amps: Vec<Cx<T>>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Empty);
        }
        let n: T = amps.iter().map(|z| z.norm_sqr()).sum();
        if !((n - T::one()).abs() <= T::structure_tol()) {
            return Err(Error::NotNormalized { norm_sqr: n.to_f64_lossy() });
        }
        Ok(Self { amps })
    }

    /// Builds `Σ_j √λ_j e^{-iφ_j} |j⟩` from weights and phases.
    pub fn from_weights(weights: &[T], phases: &[T]) -> Result<Self> {
        if weights.len() != phases.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), found: phases.len() });
        }
        Self::new(weights.iter().zip(phases).map(|(&w, &p)| cis(-p) * w.sqrt()).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Cx<T>] {
        &self.amps
    }

    /// Indices of the nonzero amplitudes.
    pub fn support(&self) -> Vec<usize> {
        self.amps.iter().enumerate().filter(|(_, z)| z.norm_sqr() > T::zero()).map(|(i, _)| i).collect()
    }

    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_pure(self)
    }
}

/// Balanced superposition `k^{-1/2} Σ_{j<k} e^{-iφ_j} |j⟩` of the first `k`
/// basis states of a `d`-dimensional space.
pub fn w_state<T: Real>(k: usize, d: usize, phases: &[T]) -> Result<PureState<T>> {
    if k < 1 || k > d {
        return Err(out_of_range("k", k as f64, format!("[1, {d}]")));
    }
    if phases.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: phases.len() });
    }
    let amp = T::one() / T::from_usize_lossy(k).sqrt();
    let mut amps = vec![czero(); d];
    for (a, &p) in amps.iter_mut().zip(phases) {
        *a = cis(-p) * amp;
    }
    Ok(PureState { amps })
}

/// Uniform-phase W state `|W_k⟩` with all phases zero.
pub fn w_state_zero<T: Real>(k: usize, d: usize) -> Result<PureState<T>> {
    w_state(k, d, &vec![T::zero(); k.min(d).max(1)])
}

/// `a|Ψ_W⟩⟨Ψ_W| + (1-a)·1/d`: every diagonal entry `1/d`, every off-diagonal `a/d`.
pub fn rho_a<T: Real>(d: usize, a: T) -> Result<DensityMatrix<T>> {
    if d < 1 {
        return Err(out_of_range("d", d as f64, "[1, inf)"));
    }
    if !(a >= T::zero() && a <= T::one()) {
        return Err(out_of_range("a", a.to_f64_lossy(), "[0, 1]"));
    }
    Ok(uniform_offdiagonal(d, a))
}

/// Purity-`P` state maximizing Q₂: identity/d mixed with `|W_d⟩⟨W_d|` at
/// weight `√((Pd-1)/(d-1))`.
pub fn rho_max_purity<T: Real>(d: usize, purity: T) -> Result<DensityMatrix<T>> {
    let df = T::from_usize_lossy(d);
    let lo = T::one() / df;
    let tol = T::structure_tol();
    if d < 1 || !(purity >= lo - tol && purity <= T::one() + tol) {
        return Err(out_of_range("purity", purity.to_f64_lossy(), format!("[1/{d}, 1]")));
    }
    if d == 1 {
        return Ok(DensityMatrix::maximally_mixed(1));
    }
    let w = ((purity * df - T::one()) / (df - T::one())).max(T::zero()).sqrt().min(T::one());
    Ok(uniform_offdiagonal(d, w))
}

fn uniform_offdiagonal<T: Real>(d: usize, w: T) -> DensityMatrix<T> {
    let inv = T::one() / T::from_usize_lossy(d);
    DensityMatrix::from_trusted(CMatrix::from_fn(d, |i, j| {
        if i == j {
            cx(inv, T::zero())
        } else {
            cx(w * inv, T::zero())
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn raw(rows: &[&[f64]]) -> CMatrix<f64> {
        CMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| cx(x, 0.0)).collect()).collect()).unwrap()
    }

    #[test]
    fn maximally_mixed_is_valid() {
        let rho = DensityMatrix::validate(CMatrix::<f64>::identity(3).scale(1.0 / 3.0)).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let err = DensityMatrix::validate(raw(&[&[0.5, 0.6], &[0.6, 0.5]])).unwrap_err();
        match err {
            Error::NotPositive { eigenvalue } => assert_abs_diff_eq!(eigenvalue, -0.1, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_hermitian_and_bad_trace_rejected() {
        let err = DensityMatrix::validate(raw(&[&[0.5, 0.1], &[0.0, 0.5]])).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { row: 0, col: 1, .. }));
        let err = DensityMatrix::validate(raw(&[&[0.5, 0.0], &[0.0, 0.6]])).unwrap_err();
        assert!(matches!(err, Error::TraceNotOne { .. }));
        assert!(err.to_string().contains("TraceNotOne"));
    }

    #[test]
    fn w_state_examples() {
        let e1 = w_state(1, 3, &[0.0f64]).unwrap();
        assert_eq!(e1.amplitudes()[0], cx(1.0, 0.0));
        assert_eq!(e1.support(), vec![0]);

        let w2 = w_state(2, 2, &[0.0f64, 0.0]).unwrap();
        for a in w2.amplitudes() {
            assert_abs_diff_eq!(a.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        }

        let w3 = w_state(3, 5, &[0.0, PI, 0.0]).unwrap();
        let n: f64 = w3.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(n, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w3.density().l1_coherence(), 2.0, epsilon = 1e-14);

        assert!(w_state::<f64>(0, 3, &[]).is_err());
        assert!(w_state::<f64>(4, 3, &[0.0; 4]).is_err());
    }

    #[test]
    fn rho_a_examples() {
        let r0 = rho_a(7, 0.0f64).unwrap();
        assert_eq!(r0, DensityMatrix::maximally_mixed(7));
        let r1 = rho_a(7, 1.0f64).unwrap();
        let w = w_state_zero::<f64>(7, 7).unwrap().density();
        for (a, b) in r1.matrix().as_slice().iter().zip(w.matrix().as_slice()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
        let r = rho_a(4, 0.5f64).unwrap();
        assert_abs_diff_eq!(r.get(0, 3).re, 0.125, epsilon = 1e-16);
        assert_abs_diff_eq!(r.get(2, 2).re, 0.25, epsilon = 1e-16);
        assert!(rho_a(4, 1.5f64).is_err());
        assert!(DensityMatrix::validate(r.matrix().clone()).is_ok());
    }

    #[test]
    fn rho_max_purity_examples() {
        let top = rho_max_purity(5, 1.0f64).unwrap();
        assert_abs_diff_eq!(top.get(0, 1).re, 0.2, epsilon = 1e-15);
        let bottom = rho_max_purity(5, 0.2f64).unwrap();
        assert_eq!(bottom, DensityMatrix::maximally_mixed(5));
        let mid = rho_max_purity(5, 0.4f64).unwrap();
        assert_abs_diff_eq!(mid.get(1, 4).re, 0.1, epsilon = 1e-15);
        assert!(rho_max_purity(5, 0.1f64).is_err());
    }

    #[test]
    fn rho_max_purity_hits_requested_purity() {
        for d in 2..=7 {
            for i in 0..=20 {
                let lo = 1.0 / d as f64;
                let p = lo + (1.0 - lo) * i as f64 / 20.0;
                let rho = rho_max_purity(d, p).unwrap();
                assert_abs_diff_eq!(rho.purity(), p, epsilon = 1e-10);
                DensityMatrix::validate(rho.matrix().clone()).unwrap();
            }
        }
    }

    #[test]
    fn purity_examples() {
        assert_abs_diff_eq!(DensityMatrix::<f64>::maximally_mixed(5).purity(), 0.2, epsilon = 1e-15);
        let psi = w_state(3, 4, &[0.1, 0.2, 0.3f64]).unwrap();
        assert_abs_diff_eq!(psi.density().purity(), 1.0, epsilon = 1e-14);
        // entrywise: 7 diagonal entries 1/7, 42 off-diagonal entries of modulus a/7
        let rho = rho_a(7, 0.5f64).unwrap();
        let entrywise: f64 = rho.matrix().as_slice().iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(entrywise, 7.0 / 49.0 + 42.0 * 0.25 / 49.0, epsilon = 1e-15);
        // closed form (1 - a²)/d + a²
        assert_abs_diff_eq!(rho.purity(), 0.75 / 7.0 + 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(rho.purity(), 5.0 / 14.0, epsilon = 1e-14);
    }

    #[test]
    fn l1_coherence_examples() {
        assert_eq!(DensityMatrix::<f64>::maximally_mixed(4).l1_coherence(), 0.0);
        for k in 1..=5 {
            let w = w_state_zero::<f64>(k, 6).unwrap().density();
            assert_abs_diff_eq!(w.l1_coherence(), (k - 1) as f64, epsilon = 1e-13);
        }
        let r = rho_a(6, 0.3f64).unwrap();
        assert_abs_diff_eq!(r.l1_coherence(), 0.3 * 5.0, epsilon = 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let r = rho_a(4, 0.5f32).unwrap();
        assert!(DensityMatrix::validate(r.matrix().clone()).is_ok());
        assert!((r.l1_coherence() - 1.5).abs() < 1e-6);
    }
}
