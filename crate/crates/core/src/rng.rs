//! Reproducible random streams.
//!
//! All randomness flows through ChaCha8 with a 64-bit seed and a 64-bit stream
//! id. ChaCha is counter based, so `(seed, stream)` pins the whole sequence and
//! parallel tasks that each own a stream produce identical results regardless
//! of scheduling or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::{Cx, Real};

pub type StreamRng = ChaCha8Rng;

/// Generator for task `stream` under master seed `seed`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives an independent master seed for a named sub-experiment.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::lit(z)
}

pub(crate) fn uniform_angle<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let u: f64 = rng.random::<f64>();
    T::lit(u * std::f64::consts::TAU)
}

/// Complex standard normal: real and imaginary parts each with variance 1/2.
pub(crate) fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Cx<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cx::new(T::lit(re * s), T::lit(im * s))
}
