//! Coherence certification from interference-pattern moments.
//!
//! A state `ρ` fed into a `d`-path interferometer produces the pattern
//! `P(ρ, φ)`. Averaging `P^n` over wrapped-normal phase settings gives the
//! moment `Q_n`; exceeding the k-coherent threshold `Q_n^(k)` certifies a
//! coherence number of at least `k + 1`.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below pin the scalar.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod moments;
pub mod optim;
pub mod pattern;
pub mod poly;
pub mod qstate;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod schur;
pub mod thresholds;
pub mod verify;

pub use error::{Error, Result};
pub use moments::{generalized_moment, mc_oracle, uniform_moment, MomentOrder, MomentRequest, WrappedNormalSpec};
pub use pattern::{evaluate_pattern, find_pattern_max, PhaseVector};
pub use qstate::{rho_a, w_state, w_state_zero, DensityMatrix, PureState};
pub use scalar::{Cx, Real};
pub use thresholds::{certify, critical_purity, threshold, CoherenceVerdict};

pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type PureState64 = PureState<f64>;
pub type PureState32 = PureState<f32>;
pub type PhaseVector64 = PhaseVector<f64>;
pub type PhaseVector32 = PhaseVector<f32>;
pub type WrappedNormalSpec64 = WrappedNormalSpec<f64>;
pub type WrappedNormalSpec32 = WrappedNormalSpec<f32>;
pub type MomentRequest64 = MomentRequest<f64>;
pub type MomentRequest32 = MomentRequest<f32>;
pub type CoherenceVerdict64 = CoherenceVerdict<f64>;
pub type CoherenceVerdict32 = CoherenceVerdict<f32>;
pub type Complex64 = Cx<f64>;
pub type Complex32 = Cx<f32>;
