//! Implicit smooth domains, the uniform chart radius `r₀`, and the
//! boundary-flattening charts `Φ_{x⋆}` with sampled bilipschitz certificates.

mod chart;
mod domain;
mod region;

use thiserror::Error;

pub use chart::{build_chart, estimate_r0, BilipschitzChart, ChartOptions, R0Estimate, CHART_RADIUS_FACTOR, MAX_DISTORTION};
pub use domain::{ellipsoid_max_curvature, tangent_frame, SmoothDomain};
pub use region::{pull_back_region, RegionMesh, REGION_MESH_FORMAT};

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("sampled curvature {curvature} exceeds cap {cap}")]
    CurvatureBlowup { curvature: f64, cap: f64 },
    #[error("point is not on the boundary (|phi| = {residual:.3e})")]
    NotOnBoundary { residual: f64 },
    #[error("boundary is not a graph over the tangent plane at u = {u:?}")]
    GraphFailure { u: [f64; 2] },
    #[error("chart distortion {distortion} exceeds 2 after shrinking from r0 = {r0}")]
    DistortionExceeded { distortion: f64, r0: f64 },
    #[error("region leaves the chart: {0}")]
    ContainmentFailure(String),
}
