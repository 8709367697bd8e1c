//! Hawking mass of spacelike 2-spheres in Lorentzian backgrounds, the
//! variation formulas for uniformly area expanding flows, and a flow
//! integrator built on top of them.

mod error;
mod scalar;

pub mod calculus;
pub mod flow;
pub mod linalg;
pub mod mass;
pub mod spacetime;
pub mod sphere;
pub mod surface;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double precision instantiations.
pub mod f64 {
    pub type SpacetimeModel = crate::spacetime::SpacetimeModel<f64>;
    pub type SurfaceFamily = crate::surface::SurfaceFamily<f64>;
    pub type SurfaceGrid = crate::surface::SurfaceGrid<f64>;
    pub type ExtrinsicData = crate::surface::ExtrinsicData<f64>;
    pub type BetaStrategy = crate::flow::BetaStrategy<f64>;
    pub type FlowState = crate::flow::FlowState<f64>;
}

/// Single precision instantiations.
pub mod f32 {
    pub type SpacetimeModel = crate::spacetime::SpacetimeModel<f32>;
    pub type SurfaceFamily = crate::surface::SurfaceFamily<f32>;
    pub type SurfaceGrid = crate::surface::SurfaceGrid<f32>;
    pub type ExtrinsicData = crate::surface::ExtrinsicData<f32>;
    pub type BetaStrategy = crate::flow::BetaStrategy<f32>;
    pub type FlowState = crate::flow::FlowState<f32>;
}
