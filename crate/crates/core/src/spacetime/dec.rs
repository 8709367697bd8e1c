use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Event, SpacetimeModel};
use crate::error::Result;
use crate::linalg::{bilinear, Vec4};
use crate::Real;

/// Outcome of sampling the dominant energy condition at one event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecReport<T> {
    /// Smallest sampled `G(u, v)` over future-causal pairs.
    pub min: T,
    pub pass: bool,
    pub trials: usize,
    pub tolerance: T,
    pub seed: u64,
}

/// A random future-causal vector `e_0 + s n̂` with `s ∈ [0, 1]` and `n̂` a
/// uniformly distributed unit spatial direction of the orthonormal frame.
fn future_causal<T: Real>(frame: &[Vec4<T>; 4], rng: &mut ChaCha8Rng) -> Vec4<T> {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    // null directions (s = 1) are sampled with positive probability
    let s: f64 = if rng.gen_bool(0.25) {
        1.0
    } else {
        rng.gen_range(0.0..=1.0)
    };
    let w = (1.0 - z * z).max(0.0).sqrt();
    let n = [w * phi.cos(), w * phi.sin(), z];
    let mut u = frame[0];
    for k in 0..3 {
        let c = T::lit(s * n[k]);
        for i in 0..4 {
            u[i] += c * frame[k + 1][i];
        }
    }
    u
}

pub(super) fn sample<T: Real>(
    model: &SpacetimeModel<T>,
    p: &Event<T>,
    trials: usize,
    seed: u64,
    tolerance: T,
) -> Result<DecReport<T>> {
    let frame = model.orthonormal_frame(p)?;
    let g = model.einstein_at(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = T::infinity();
    for _ in 0..trials.max(1) {
        let u = future_causal(&frame, &mut rng);
        let v = future_causal(&frame, &mut rng);
        min = min.min(bilinear(&g, &u, &v));
    }
    Ok(DecReport {
        min,
        pass: min >= -tolerance,
        trials: trials.max(1),
        tolerance,
        seed,
    })
}
