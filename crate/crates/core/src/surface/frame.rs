use super::extrinsic::connection_form;
use super::ExtrinsicData;
use crate::error::{Error, Result};
use crate::linalg::{euclid_norm4, inner, Vec4};
use crate::Real;

/// Tangential fraction above which a vector is rejected as not normal.
const NORMAL_TOLERANCE: f64 = 1e-8;

/// The Lorentzian quarter turn `a ν_H + b ν_H^⊥ ↦ b ν_H + a ν_H^⊥` on the
/// normal plane at node `node`.
pub fn perp_rotate<T: Real>(extr: &ExtrinsicData<T>, node: usize, v: &Vec4<T>) -> Result<Vec4<T>> {
    let g = &extr.metric4[node];
    let er = &extr.frame.nu_h[node];
    let et = &extr.frame.nu_perp[node];
    let a = inner(g, v, er);
    let b = -inner(g, v, et);
    let residual: Vec4<T> = std::array::from_fn(|k| v[k] - a * er[k] - b * et[k]);
    let scale = euclid_norm4(v);
    if scale > T::zero() {
        let fraction = euclid_norm4(&residual) / scale;
        if fraction > T::attainable(NORMAL_TOLERANCE) {
            return Err(Error::NotNormal {
                fraction: fraction.as_f64(),
            });
        }
    }
    Ok(std::array::from_fn(|k| b * er[k] + a * et[k]))
}

/// A rotated normal frame `ν_θ = cosh θ ν_H + sinh θ ν_H^⊥`,
/// `ν_θ^⊥ = sinh θ ν_H + cosh θ ν_H^⊥`, with its connection 1-form.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedFrame<T> {
    pub nu: Vec<Vec4<T>>,
    pub nu_perp: Vec<Vec4<T>>,
    /// `α_{ν_θ}(X) = ⟨∇_X ν_θ, ν_θ^⊥⟩`, computed by differentiating `ν_θ` directly.
    pub alpha: Vec<[T; 2]>,
}

/// Rotates the mean-curvature frame by the hyperbolic angle field `theta`.
pub fn rotated_frame<T: Real>(extr: &ExtrinsicData<T>, theta: &[T]) -> RotatedFrame<T> {
    assert_eq!(theta.len(), extr.len(), "angle field does not match grid");
    let mut nu = Vec::with_capacity(theta.len());
    let mut nu_perp = Vec::with_capacity(theta.len());
    for (k, &th) in theta.iter().enumerate() {
        let (c, s) = (th.cosh(), th.sinh());
        let (a, b) = (&extr.frame.nu_h[k], &extr.frame.nu_perp[k]);
        nu.push(std::array::from_fn(|i| c * a[i] + s * b[i]));
        nu_perp.push(std::array::from_fn(|i| s * a[i] + c * b[i]));
    }
    let alpha = connection_form(
        extr.basis(),
        &extr.metric4,
        &extr.christoffel,
        &extr.tangents,
        &nu,
        &nu_perp,
    );
    RotatedFrame { nu, nu_perp, alpha }
}
