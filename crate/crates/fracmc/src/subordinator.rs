//! Sampling of the inverse b-stable random time T_b(t).
//!
//! The clock T_b(t) has density g_b(.; t) and is simulated through the
//! one-sided stable law: if S has Laplace transform exp(-s^b) then
//! T_b(t) = (t / S)^b in distribution, pointwise in t. S itself is drawn
//! by Kanter's exact representation (no rejection step):
//!
//!   S = [sin(b pi U) / sin(pi U)^{1/b}] * [sin((1-b) pi U) / E]^{(1-b)/b}
//!
//! with U uniform on (0,1) and E unit exponential. At b = 1 both laws
//! collapse to point masses (S = 1, T = t) and no randomness is consumed.
//!
//! Reproducibility: every consumer addresses randomness through an
//! [`RngStream`] value. Identical (seed, stream_id) pairs replay identical
//! variate sequences; distinct stream ids are statistically independent,
//! which is what makes parallel replication deterministic.

use crate::error::{Error, Result};
use crate::specfun::FracOrder;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Addressable random stream: a (seed, stream_id) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Instantiate the generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Draws of T_b(t) for one clock time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSampleBatch {
    pub t: f64,
    pub samples: Vec<f64>,
}

#[inline]
fn clamp_open01(u: f64) -> f64 {
    u.clamp(1e-12, 1.0 - 1e-12)
}

/// One draw of the standard one-sided b-stable law (Laplace transform
/// exp(-s^b)). Returns exactly 1 at the degenerate order b = 1.
pub fn stable_variate<R: Rng + ?Sized>(beta: FracOrder, rng: &mut R) -> f64 {
    if beta.is_degenerate() {
        return 1.0;
    }
    let b = beta.get();
    let u = clamp_open01(rng.gen::<f64>()) * PI;
    let e: f64 = -(clamp_open01(rng.gen::<f64>())).ln();
    let s1 = (b * u).sin() / u.sin().powf(1.0 / b);
    let s2 = (((1.0 - b) * u).sin() / e).powf((1.0 - b) / b);
    s1 * s2
}

/// One draw of the inverse time T_b(t) via the scaling identity (t/S)^b.
/// Returns exactly t at b = 1.
pub fn inverse_time_variate<R: Rng + ?Sized>(beta: FracOrder, t: f64, rng: &mut R) -> f64 {
    if beta.is_degenerate() {
        return t;
    }
    let s = stable_variate(beta, rng);
    (t / s).powf(beta.get())
}

/// m independent draws of T_b(t) from the given stream.
pub fn sample_batch(
    beta: FracOrder,
    t: f64,
    m: usize,
    stream: RngStream,
) -> Result<TimeSampleBatch> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "sample_batch requires t > 0, got {t}"
        )));
    }
    if m == 0 {
        return Err(Error::EmptyInput("sample_batch requires m >= 1"));
    }
    let mut rng = stream.rng();
    let samples = (0..m)
        .map(|_| inverse_time_variate(beta, t, &mut rng))
        .collect();
    Ok(TimeSampleBatch { t, samples })
}
