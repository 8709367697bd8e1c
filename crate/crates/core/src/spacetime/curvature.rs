use serde::Serialize;

use crate::linalg::{inverse4, zero_mat4, Mat4, Riemann};
use crate::Real;

/// Ricci tensor, scalar curvature and Einstein tensor at one event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureBundle<T> {
    pub ricci: Mat4<T>,
    pub scalar: T,
    pub einstein: Mat4<T>,
}

impl<T: Real> CurvatureBundle<T> {
    /// Contracts `R_{σν} = R^ρ_{σρν}` (symmetrized), `R = g^{σν} R_{σν}` and
    /// assembles `G = Ric - (R/2) g`.
    pub fn from_riemann(riem: &Riemann<T>, g: &Mat4<T>) -> Self {
        let mut ricci = zero_mat4();
        for s in 0..4 {
            for n in 0..4 {
                let mut acc = T::zero();
                for r in 0..4 {
                    acc += riem[r][s][r][n];
                }
                ricci[s][n] = acc;
            }
        }
        let half = T::lit(0.5);
        for s in 0..4 {
            for n in (s + 1)..4 {
                let v = half * (ricci[s][n] + ricci[n][s]);
                ricci[s][n] = v;
                ricci[n][s] = v;
            }
        }
        let ginv = inverse4(g).unwrap_or_else(zero_mat4);
        let mut scalar = T::zero();
        for s in 0..4 {
            for n in 0..4 {
                scalar += ginv[s][n] * ricci[s][n];
            }
        }
        let mut einstein = zero_mat4();
        for s in 0..4 {
            for n in 0..4 {
                einstein[s][n] = ricci[s][n] - half * scalar * g[s][n];
            }
        }
        Self {
            ricci,
            scalar,
            einstein,
        }
    }
}
