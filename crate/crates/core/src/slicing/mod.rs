//! Surface quadrature of `|U|⁴` over folia, the coarea identity for the
//! foliated shell, and pigeonhole selection of a spatial slice `s⋆` and an
//! initial time `t₀`.

mod boundary;
mod fubini;
mod quadrature;
mod select;

use thiserror::Error;

use crate::charts::ChartError;
use crate::fields::FieldError;
use crate::geometry::GeometryError;

pub use boundary::{assemble_boundary_data, BoundaryData, BoundaryOptions, QUADRATURE_SLACK};
pub use fubini::{fubini_identity_check, FubiniReport, FubiniResolution};
pub use quadrature::{coarea_density, coarea_weight, surface_trace_l4, SurfaceQuadrature};
pub use select::{
    select_spatial_slice, select_temporal_slice, SliceBounds, SliceReport, SpatialOptions, SpatialSlice, TemporalSlice,
    TEMPORAL_INTERVAL, TEMPORAL_SLACK,
};

#[derive(Debug, Error)]
pub enum SlicingError {
    #[error("only {found} grid times fall in the slicing interval, need at least 4")]
    IntervalTooCoarse { found: usize },
    #[error("pigeonhole violated: selected {value} exceeds mean {mean}")]
    PigeonholeViolation { value: f64, mean: f64 },
    #[error("invalid slicing parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Chart(#[from] ChartError),
}

// Mean written as `min + Σ(g - min)/n`, so `min ≤ mean` holds in floating point.
pub(crate) fn min_and_mean(values: &[f64]) -> (usize, f64, f64) {
    let (arg, min) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let excess: f64 = values.iter().map(|v| v - min).sum();
    (arg, min, min + excess / values.len() as f64)
}
