use std::io::Write;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{slice_integrals, time_integral, whole_space, SpaceTimeField, FULL_WINDOW};
use crate::geometry::{folium, ClamBody, Folium, RadialProfile};
use crate::numerics::bisect;

use super::{coarea_density, min_and_mean, surface_trace_l4, SlicingError, SurfaceQuadrature};

/// Initial-time interval `]-1, -7/8[`.
pub const TEMPORAL_INTERVAL: (f64, f64) = (-1.0, -0.875);
/// Quadrature slack on the temporal factor 8.
pub const TEMPORAL_SLACK: f64 = 8.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialOptions {
    pub s_range: (f64, f64),
    pub n_s: usize,
    pub window: (f64, f64),
    pub surface_panels: usize,
    pub surface_azimuth: usize,
    /// Excision radius as a fraction of the clam scale.
    pub delta_factor: f64,
}

impl Default for SpatialOptions {
    fn default() -> Self {
        SpatialOptions {
            s_range: (0.25, 0.5),
            n_s: 64,
            window: FULL_WINDOW,
            surface_panels: 12,
            surface_azimuth: 48,
            delta_factor: 1e-3,
        }
    }
}

/// Outcome of [`select_spatial_slice`]. `value ≤ mean` always; `excised_value`
/// is the trace on `{|x| ≥ δ}` and is compared against `shell_bound`.
#[derive(Debug, Clone, Serialize)]
pub struct SpatialSlice {
    pub s_star: f64,
    pub value: f64,
    pub mean: f64,
    pub samples: Vec<[f64; 2]>,
    pub delta: f64,
    pub w_min: f64,
    pub shell_l4_4: f64,
    pub shell_bound: f64,
    pub excised_value: f64,
    pub paper_8x: f64,
}

/// Argmin over midpoint samples of `s ↦ ∫_window ∫_{Σ_s} |U|⁴ dH² dt`.
pub fn select_spatial_slice(field: &SpaceTimeField, clam: &ClamBody, opts: &SpatialOptions) -> Result<SpatialSlice, SlicingError> {
    let (s1, s2) = opts.s_range;
    if opts.n_s < 2 || !(0.0 <= s1 && s1 < s2 && s2 < 1.0) {
        return Err(SlicingError::InvalidParameters(format!("s_range {:?}, n_s = {}", opts.s_range, opts.n_s)));
    }
    let ds = (s2 - s1) / opts.n_s as f64;
    let s_values: Vec<f64> = (0..opts.n_s).map(|j| s1 + (j as f64 + 0.5) * ds).collect();
    let quads = s_values
        .iter()
        .map(|&s| Ok(SurfaceQuadrature::folium(&folium(clam, s)?, opts.surface_panels, opts.surface_azimuth)))
        .collect::<Result<Vec<_>, SlicingError>>()?;
    let g = quads
        .par_iter()
        .map(|q| surface_trace_l4(field, q, opts.window))
        .collect::<Result<Vec<f64>, SlicingError>>()?;
    let (arg, value, mean) = min_and_mean(&g);
    if value > mean {
        return Err(SlicingError::PigeonholeViolation { value, mean });
    }

    let delta = opts.delta_factor * clam.scale;
    let w_min = s_values.iter().map(|&s| min_weight_outside(&Folium { parent: clam, s }, delta)).fold(f64::INFINITY, f64::min);
    let outer = folium(clam, s1)?;
    let inner = folium(clam, s2)?;
    let shell = |p: &Vector3<f64>| p.norm() >= delta && outer.contains(p) && !inner.contains(p);
    let shell_l4_4 = time_integral(field, &slice_integrals(field, 4.0, shell)?, opts.window)?;
    let shell_bound = shell_l4_4 / ((s2 - s1) * w_min);
    let mut excised = quads[arg].clone();
    retain_outside(&mut excised, delta);
    let excised_value = surface_trace_l4(field, &excised, opts.window)?;
    let total = time_integral(field, &slice_integrals(field, 4.0, whole_space)?, opts.window)?;

    Ok(SpatialSlice {
        s_star: s_values[arg],
        value,
        mean,
        samples: s_values.iter().zip(&g).map(|(s, v)| [*s, *v]).collect(),
        delta,
        w_min,
        shell_l4_4,
        shell_bound,
        excised_value,
        paper_8x: 8.0 * total,
    })
}

fn retain_outside(q: &mut SurfaceQuadrature, delta: f64) {
    let keep: Vec<bool> = q.nodes.iter().map(|x| x.norm() >= delta).collect();
    let mut it = keep.iter();
    q.nodes.retain(|_| *it.next().unwrap());
    let mut it = keep.iter();
    q.weights.retain(|_| *it.next().unwrap());
    let mut it = keep.iter();
    q.normals.retain(|_| *it.next().unwrap());
}

// Smallest coarea density on the folium outside the ball of radius δ,
// sampled along a meridian starting at the height where |x| = δ.
fn min_weight_outside(f: &Folium<'_>, delta: f64) -> f64 {
    let h = f.height();
    let dist = |z: f64| f.point(z, 0.0).norm() - delta;
    let z_delta = bisect(dist, 0.0, f.equator_height(), 0.0).unwrap_or(0.0);
    let n = 2048;
    (0..=n)
        .map(|i| {
            let xi = i as f64 / n as f64;
            let z = z_delta + (h - z_delta) * xi * xi;
            let z = z.min(h * (1.0 - 1e-12));
            let x = f.point(z, 0.0);
            if x.norm() < delta {
                f64::INFINITY
            } else {
                coarea_density(&x, &f.normal(z, 0.0), f.s)
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Outcome of [`select_temporal_slice`].
#[derive(Debug, Clone, Serialize)]
pub struct TemporalSlice {
    pub t0: f64,
    pub value: f64,
    pub mean: f64,
    pub samples: Vec<[f64; 2]>,
    /// `‖U‖⁴_{L⁴(]-1,0[ × region)}`.
    pub total_l4_4: f64,
    pub bound_8x: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Grid time in the open `interval` minimizing `∫_region |U(t)|⁴ dx`.
pub fn select_temporal_slice<R>(field: &SpaceTimeField, interval: (f64, f64), region: R) -> Result<TemporalSlice, SlicingError>
where
    R: Fn(&Vector3<f64>) -> bool + Sync,
{
    let (a, b) = interval;
    if !(-1.0 <= a && a < b && b <= 0.0) {
        return Err(SlicingError::InvalidParameters(format!("interval {interval:?}")));
    }
    let inside: Vec<usize> = (0..field.nt()).filter(|&n| field.time(n) > a && field.time(n) < b).collect();
    if inside.len() < 4 {
        return Err(SlicingError::IntervalTooCoarse { found: inside.len() });
    }
    let per_time = slice_integrals(field, 4.0, region)?;
    let vals: Vec<f64> = inside.iter().map(|&n| per_time[n]).collect();
    let (arg, value, mean) = min_and_mean(&vals);
    if value > mean {
        return Err(SlicingError::PigeonholeViolation { value, mean });
    }
    let total_l4_4 = time_integral(field, &per_time, FULL_WINDOW)?;
    let bound_8x = 8.0 * total_l4_4;
    let slack = TEMPORAL_SLACK * total_l4_4;
    Ok(TemporalSlice {
        t0: field.time(inside[arg]),
        value,
        mean,
        samples: inside.iter().zip(&vals).map(|(&n, v)| [field.time(n), *v]).collect(),
        total_l4_4,
        bound_8x,
        margin: if slack > 0.0 { value / slack } else { 0.0 },
        pass: value <= slack,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SliceBounds {
    pub discrete_avg: f64,
    pub shell_bound: f64,
    pub paper_8x: f64,
}

/// Combined spatial and temporal slice selection.
#[derive(Debug, Clone, Serialize)]
pub struct SliceReport {
    pub s_star: f64,
    pub t0: f64,
    pub spatial_value: f64,
    pub temporal_value: f64,
    pub bounds: SliceBounds,
    /// `spatial_value / discrete_avg`, `excised_value / shell_bound`, `spatial_value / paper_8x`.
    pub margins: SliceBounds,
    pub temporal: TemporalSlice,
    pub spatial: SpatialSlice,
}

impl SliceReport {
    pub fn new(spatial: SpatialSlice, temporal: TemporalSlice) -> Self {
        let ratio = |v: f64, b: f64| if b > 0.0 { v / b } else { 0.0 };
        SliceReport {
            s_star: spatial.s_star,
            t0: temporal.t0,
            spatial_value: spatial.value,
            temporal_value: temporal.value,
            bounds: SliceBounds { discrete_avg: spatial.mean, shell_bound: spatial.shell_bound, paper_8x: spatial.paper_8x },
            margins: SliceBounds {
                discrete_avg: ratio(spatial.value, spatial.mean),
                shell_bound: ratio(spatial.excised_value, spatial.shell_bound),
                paper_8x: ratio(spatial.value, spatial.paper_8x),
            },
            temporal,
            spatial,
        }
    }

    /// Pigeonhole certificates that must hold: the discrete average and the
    /// temporal factor 8 with slack.
    pub fn pass(&self) -> bool {
        self.spatial.value <= self.spatial.mean && self.temporal.pass
    }

    /// `s,g` rows of the spatial curve.
    pub fn write_spatial_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        write_curve(w, "s", "g", &self.spatial.samples)
    }

    /// `t,integral` rows of the temporal curve.
    pub fn write_temporal_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        write_curve(w, "t", "integral", &self.temporal.samples)
    }
}

fn write_curve<W: Write>(w: W, x: &str, y: &str, rows: &[[f64; 2]]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([x, y])?;
    for r in rows {
        out.write_record([r[0].to_string(), r[1].to_string()])?;
    }
    out.flush()?;
    Ok(())
}
