//! The clam body: a smooth convex body of revolution whose boundary is a
//! paraboloid near the origin and a spherical cap on top, together with its
//! foliation by dilated copies `(1 - s) Σ₀` that all touch the plane `z = 0`
//! tangentially at the origin and nowhere else.

mod clam;
mod profile;
mod report;
mod volume;

use thiserror::Error;

pub use clam::{build_clam, check_tangency, folia_min_distance, folium, z0, ClamBody, Folium, TangencyCheck};
pub use profile::{BallProfile, Profile, RadialProfile, ScaledProfile, APEX_HEIGHT, CAP_FLOOR, ZONE_TOP};
pub use report::{check_clam, GeometryCheckConfig, GeometryPass, GeometryReport};
pub use volume::{body_volume, john_volume, john_volume_of, EllipsoidOfRevolution, VolumeEstimate, VolumeMethod};

/// Closed-form zone residual tolerance.
pub const TOL_GEOM: f64 = 1e-8;
/// Concavity tolerance, relative to the largest radius.
pub const TOL_CONVEXITY: f64 = 1e-10;
/// Agreement of one-sided derivatives across zone junctions.
pub const TOL_SMOOTH: f64 = 1e-6;

/// Default blend width: the blend occupies `[1/8, 1/4]`.
pub const DEFAULT_MOLLIFIER_WIDTH: f64 = 0.125;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("vanishing order must be at least 1, got {0}")]
    InvalidOrder(u32),
    #[error("no concavity-preserving blend at width {width}: {reason}")]
    BlendFailure { width: f64, reason: String },
    #[error("foliation parameter {0} out of range")]
    OutOfRange(f64),
    #[error("Monte-Carlo budget too small: relative error {estimated:.3e} exceeds {requested:.3e}")]
    BudgetTooSmall { estimated: f64, requested: f64 },
    #[error("John ellipsoid search failed: {0}")]
    OptimizationFailure(String),
}
