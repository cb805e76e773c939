//! The multipath interference pattern `P(ρ, φ) = ⟨Φ|ρ|Φ⟩` and its maximum
//! over phase settings.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::{gradient_ascent, AscentOptions};
use crate::qstate::DensityMatrix;
use crate::rng::{stream, uniform_angle};
use crate::scalar::{cis, czero, Cx, Real};

/// Phases in radians, each reduced to `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseVector<T> {
    angles: Vec<T>,
}

/// Canonical representative of `theta` in `[0, 2π)`.
pub fn reduce_angle<T: Real>(theta: T) -> T {
    let tau = T::TAU();
    let r = theta - tau * (theta / tau).floor();
    if r >= tau || r < T::zero() {
        T::zero()
    } else {
        r
    }
}

impl<T: Real> PhaseVector<T> {
    pub fn new(angles: Vec<T>) -> Result<Self> {
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("phase vector"));
        }
        Ok(Self { angles: angles.into_iter().map(reduce_angle).collect() })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { angles: vec![T::zero(); dim] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    #[inline]
    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    /// Componentwise sum, reduced.
    pub fn shifted_by(&self, delta: &[T]) -> Result<Self> {
        if delta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: delta.len() });
        }
        Self::new(self.angles.iter().zip(delta).map(|(a, b)| *a + *b).collect())
    }

    /// Adds the same constant to every component.
    pub fn rotated(&self, c: T) -> Self {
        Self { angles: self.angles.iter().map(|a| reduce_angle(*a + c)).collect() }
    }
}

fn check_dims<T: Real>(rho: &DensityMatrix<T>, phases: &[T]) -> Result<()> {
    if rho.dim() != phases.len() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: phases.len() });
    }
    Ok(())
}

/// `Σ_{j≠m} ρ_jm e^{i(φ_j-φ_m)}`, complex; `phasors` is scratch of length d.
pub(crate) fn offdiagonal_sum<T: Real>(rho: &DensityMatrix<T>, phases: &[T], phasors: &mut [Cx<T>]) -> Cx<T> {
    let d = rho.dim();
    for (c, &p) in phasors.iter_mut().zip(phases) {
        *c = cis(p);
    }
    let m = rho.matrix().as_slice();
    let mut s = czero();
    for j in 0..d {
        let row = &m[j * d..(j + 1) * d];
        let mut inner = czero();
        for (mm, (&r, c)) in row.iter().zip(phasors.iter()).enumerate() {
            if mm != j {
                inner += r * c.conj();
            }
        }
        s += phasors[j] * inner;
    }
    s
}

fn checked_real<T: Real>(z: Cx<T>) -> Result<T> {
    if z.im.abs() > T::imag_tol() * z.re.abs().max(T::one()) {
        return Err(Error::ImaginaryResidue { residue: z.im.to_f64_lossy() });
    }
    Ok(z.re)
}

/// `1 + Σ_{j≠m} ρ_jm e^{i(φ_j-φ_m)}`.
pub fn evaluate_pattern<T: Real>(rho: &DensityMatrix<T>, phi: &PhaseVector<T>) -> Result<T> {
    pattern_at(rho, phi.angles())
}

/// [`evaluate_pattern`] on unreduced angles.
pub fn pattern_at<T: Real>(rho: &DensityMatrix<T>, phases: &[T]) -> Result<T> {
    check_dims(rho, phases)?;
    let mut scratch = vec![czero(); phases.len()];
    checked_real(offdiagonal_sum(rho, phases, &mut scratch)).map(|s| T::one() + s)
}

/// Writes `∂P/∂φ_l = -2 Im(e^{iφ_l} Σ_m ρ_lm e^{-iφ_m})` into `grad` and returns `P`.
pub(crate) fn value_and_gradient<T: Real>(
    rho: &DensityMatrix<T>,
    phases: &[T],
    phasors: &mut [Cx<T>],
    grad: &mut [T],
) -> T {
    let d = rho.dim();
    for (c, &p) in phasors.iter_mut().zip(phases) {
        *c = cis(p);
    }
    let m = rho.matrix().as_slice();
    let two = T::lit(2.0);
    let mut value = T::zero();
    for l in 0..d {
        let row = &m[l * d..(l + 1) * d];
        let mut w = czero();
        for (mm, (&r, c)) in row.iter().zip(phasors.iter()).enumerate() {
            if mm != l {
                w += r * c.conj();
            }
        }
        let t = phasors[l] * w;
        grad[l] = -two * t.im;
        value += t.re;
    }
    T::one() + value
}

/// Analytic gradient of the pattern with respect to each phase.
pub fn pattern_gradient<T: Real>(rho: &DensityMatrix<T>, phi: &PhaseVector<T>) -> Result<Vec<T>> {
    check_dims(rho, phi.angles())?;
    let d = rho.dim();
    let mut grad = vec![T::zero(); d];
    let mut scratch = vec![czero(); d];
    value_and_gradient(rho, phi.angles(), &mut scratch, &mut grad);
    Ok(grad)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternMaxResult<T> {
    pub argmax: PhaseVector<T>,
    pub value: T,
    pub restarts_used: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct MaxSearchOptions<T> {
    /// Number of starts: the origin plus `restarts - 1` uniform random points.
    pub restarts: usize,
    pub seed: u64,
    pub ascent: AscentOptions<T>,
}

impl<T: Real> MaxSearchOptions<T> {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self { restarts, seed, ascent: AscentOptions::default() }
    }
}

impl<T: Real> Default for MaxSearchOptions<T> {
    fn default() -> Self {
        Self::new(20, 0)
    }
}

pub fn find_pattern_max<T: Real>(rho: &DensityMatrix<T>, restarts: usize, seed: u64) -> Result<PatternMaxResult<T>> {
    find_pattern_max_with(rho, &MaxSearchOptions::new(restarts, seed))
}

/// Multistart gradient ascent over `φ_2..φ_d` with `φ_1 = 0`.
///
/// Starts run in parallel; the best value wins and ties go to the lowest
/// start index, so the result does not depend on scheduling.
pub fn find_pattern_max_with<T: Real>(rho: &DensityMatrix<T>, opts: &MaxSearchOptions<T>) -> Result<PatternMaxResult<T>> {
    if opts.restarts < 1 {
        return Err(crate::error::out_of_range("restarts", 0.0, "[1, inf)"));
    }
    let d = rho.dim();
    if d == 1 {
        return Ok(PatternMaxResult { argmax: PhaseVector::zeros(1), value: T::one(), restarts_used: opts.restarts, converged: true });
    }
    let runs: Vec<_> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let x0: Vec<T> = if r == 0 {
                vec![T::zero(); d - 1]
            } else {
                let mut rng = stream(opts.seed, r as u64);
                (0..d - 1).map(|_| uniform_angle(&mut rng)).collect()
            };
            let mut phases = vec![T::zero(); d];
            let mut full_grad = vec![T::zero(); d];
            let mut phasors = vec![czero(); d];
            gradient_ascent(
                |x: &[T], g: &mut [T]| {
                    phases[1..].copy_from_slice(x);
                    let v = value_and_gradient(rho, &phases, &mut phasors, &mut full_grad);
                    g.copy_from_slice(&full_grad[1..]);
                    v
                },
                x0,
                &opts.ascent,
            )
        })
        .collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let b = &runs[best];
    let mut angles = vec![T::zero(); d];
    angles[1..].copy_from_slice(&b.x);
    Ok(PatternMaxResult {
        argmax: PhaseVector::new(angles)?,
        value: b.value,
        restarts_used: opts.restarts,
        converged: runs.iter().any(|r| r.converged),
    })
}
