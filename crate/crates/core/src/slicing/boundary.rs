use serde::{Deserialize, Serialize};

use crate::charts::{pull_back_region, BilipschitzChart};
use crate::fields::{slice_integrals, time_integral, SpaceTimeField, FULL_WINDOW};
use crate::geometry::ClamBody;

use super::{surface_trace_l4, SlicingError, SurfaceQuadrature};

/// Relative slack allowed on the factor-8 boundary-data estimate.
pub const QUADRATURE_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryOptions {
    pub mesh_height: usize,
    pub mesh_azimuth: usize,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions { mesh_height: 24, mesh_azimuth: 32 }
    }
}

/// Norms of the trace data `a` on `]t₀, 0[ × ∂ℛ` and `b = U(t₀)` on
/// `Φ⁻¹(B⁺_{16r₀})`, against `8 ‖U‖_{L⁴L⁴(]-1,0[ × chart ball)}`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryData {
    pub a_norm: f64,
    pub b_norm: f64,
    pub combined: f64,
    pub reference: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
    pub region_area: f64,
}

/// `clam` must be scaled to `16 r₀` of `chart`; `field` lives in physical coordinates.
pub fn assemble_boundary_data(
    field: &SpaceTimeField,
    chart: &BilipschitzChart,
    clam: &ClamBody,
    s_star: f64,
    t0: f64,
    opts: &BoundaryOptions,
) -> Result<BoundaryData, SlicingError> {
    if !(-1.0..0.0).contains(&t0) {
        return Err(SlicingError::InvalidParameters(format!("t0 = {t0} outside [-1, 0[")));
    }
    let mesh = pull_back_region(chart, clam, s_star, opts.mesh_height, opts.mesh_azimuth)?;
    let surface = SurfaceQuadrature::from_mesh(&mesh);
    let a_norm = surface_trace_l4(field, &surface, (t0, 0.0))?.powf(0.25);

    let domain = chart.domain();
    let base = nalgebra::Vector3::from(chart.base_point);
    let half_ball = 16.0 * chart.r0;
    let in_b = |x: &nalgebra::Vector3<f64>| {
        (x - base).norm() <= 2.0 * half_ball
            && domain.contains(x)
            && chart.forward(x).map(|y| y.norm() < half_ball).unwrap_or(false)
    };
    let at_t0: Vec<f64> = slice_integrals(field, 4.0, in_b)?;
    let b_norm = time_value(field, &at_t0, t0).powf(0.25);

    let chart_ball = |x: &nalgebra::Vector3<f64>| (x - base).norm() < chart.radius && domain.contains(x);
    let reference = time_integral(field, &slice_integrals(field, 4.0, chart_ball)?, FULL_WINDOW)?.powf(0.25);
    let combined = a_norm + b_norm;
    let bound = 8.0 * reference * (1.0 + QUADRATURE_SLACK);
    Ok(BoundaryData {
        a_norm,
        b_norm,
        combined,
        reference,
        bound,
        margin: if bound > 0.0 { combined / bound } else { 0.0 },
        pass: combined <= bound,
        region_area: mesh.area(),
    })
}

// Linear interpolation in time of per-node values.
fn time_value(field: &SpaceTimeField, values: &[f64], t: f64) -> f64 {
    let f = (t + 1.0) * (field.nt() - 1) as f64;
    let n0 = (f.floor() as usize).min(field.nt() - 2);
    let w = f - n0 as f64;
    (1.0 - w) * values[n0] + w * values[n0 + 1]
}
