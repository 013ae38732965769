use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FieldError, SpaceTimeField};

pub const FULL_WINDOW: (f64, f64) = (-1.0, 0.0);

/// Region predicate accepting every point.
pub fn whole_space(_: &Vector3<f64>) -> bool {
    true
}

/// Energy-class quantities of a field; `m = linf_l2 + l2_h1dot`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l4l4: f64,
    pub linf_l2: f64,
    pub l2_h1dot: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

/// `(∫ (∫_region |U|^q dx)^{p/q} dt)^{1/p}` over `window`, midpoint rule in
/// space and the exact integral of the piecewise-linear time interpolant.
/// Infinite exponents (`f64::INFINITY`) take maxima over nodes.
pub fn lp_lq_norm<R>(field: &SpaceTimeField, p: f64, q: f64, region: R, window: (f64, f64)) -> Result<f64, FieldError>
where
    R: Fn(&Vector3<f64>) -> bool + Sync,
{
    for e in [p, q] {
        if !(e >= 1.0) {
            return Err(FieldError::InvalidNorm(format!("exponent {e} outside [1, inf]")));
        }
    }
    let mask = region_mask(field, &region)?;
    let spatial = spatial_norms(field, &mask, q);
    time_norm(field, &spatial, p, window)
}

pub fn norm_report<R>(field: &SpaceTimeField, region: R) -> Result<NormReport, FieldError>
where
    R: Fn(&Vector3<f64>) -> bool + Sync,
{
    let mask = region_mask(field, &region)?;
    let l4l4 = time_norm(field, &spatial_norms(field, &mask, 4.0), 4.0, FULL_WINDOW)?;
    let linf_l2 = time_norm(field, &spatial_norms(field, &mask, 2.0), f64::INFINITY, FULL_WINDOW)?;
    let grad: Vec<f64> = (0..field.nt()).into_par_iter().map(|n| gradient_l2(field, n, &mask)).collect();
    let l2_h1dot = time_norm(field, &grad, 2.0, FULL_WINDOW)?;
    Ok(NormReport { l4l4, linf_l2, l2_h1dot, m: linf_l2 + l2_h1dot })
}

/// `∫_region |U(t_n)|^q dx` for every time node.
pub fn slice_integrals<R>(field: &SpaceTimeField, q: f64, region: R) -> Result<Vec<f64>, FieldError>
where
    R: Fn(&Vector3<f64>) -> bool + Sync,
{
    if !(q >= 1.0 && q.is_finite()) {
        return Err(FieldError::InvalidNorm(format!("exponent {q} outside [1, inf[")));
    }
    let mask = region_mask(field, &region)?;
    let dv = field.grid().cell_volume();
    Ok((0..field.nt())
        .into_par_iter()
        .map(|n| {
            let s: f64 = field
                .slice(n)
                .chunks_exact(3)
                .zip(&mask)
                .filter(|(_, &m)| m)
                .map(|(u, _)| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).powf(0.5 * q))
                .sum();
            s * dv
        })
        .collect())
}

fn region_mask<R>(field: &SpaceTimeField, region: &R) -> Result<Vec<bool>, FieldError>
where
    R: Fn(&Vector3<f64>) -> bool + Sync,
{
    let mask: Vec<bool> = field.grid().centers().par_iter().map(region).collect();
    if mask.iter().any(|&m| m) {
        Ok(mask)
    } else {
        Err(FieldError::EmptyRegion)
    }
}

// Per-slice ‖U(t_n)‖_{L^q(region)}.
fn spatial_norms(field: &SpaceTimeField, mask: &[bool], q: f64) -> Vec<f64> {
    let dv = field.grid().cell_volume();
    (0..field.nt())
        .into_par_iter()
        .map(|n| {
            let cells = field.slice(n).chunks_exact(3).zip(mask).filter(|(_, &m)| m).map(|(u, _)| u);
            if q.is_infinite() {
                cells.map(|u| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()).fold(0.0, f64::max)
            } else {
                let s: f64 = cells.map(|u| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).powf(0.5 * q)).sum();
                (s * dv).powf(1.0 / q)
            }
        })
        .collect()
}

fn time_norm(field: &SpaceTimeField, g: &[f64], p: f64, window: (f64, f64)) -> Result<f64, FieldError> {
    if p.is_infinite() {
        check_window(window)?;
        let (ta, tb) = window;
        let inner = field.times().into_iter().zip(g).filter(|(t, _)| *t >= ta && *t <= tb).map(|(_, v)| *v);
        let ends = [ta, tb].map(|t| interpolate_in_time(field.nt(), t, |n| g[n]));
        return Ok(inner.chain(ends).fold(0.0, f64::max));
    }
    let gp: Vec<f64> = g.iter().map(|v| v.powf(p)).collect();
    Ok(time_integral(field, &gp, window)?.powf(1.0 / p))
}

fn check_window((ta, tb): (f64, f64)) -> Result<(), FieldError> {
    if -1.0 <= ta && ta < tb && tb <= 0.0 {
        Ok(())
    } else {
        Err(FieldError::InvalidNorm(format!("time window [{ta}, {tb}] not inside [-1, 0]")))
    }
}

fn interpolate_in_time(nt: usize, t: f64, vals: impl Fn(usize) -> f64) -> f64 {
    let f = (t + 1.0) * (nt - 1) as f64;
    let n0 = (f.floor() as usize).min(nt - 2);
    let w = f - n0 as f64;
    (1.0 - w) * vals(n0) + w * vals(n0 + 1)
}

/// Exact integral over `window` of the piecewise-linear interpolant of
/// `values` (one per time node).
pub fn time_integral(field: &SpaceTimeField, values: &[f64], window: (f64, f64)) -> Result<f64, FieldError> {
    check_window(window)?;
    let (ta, tb) = window;
    let times = field.times();
    let at = |t: f64| interpolate_in_time(field.nt(), t, |n| values[n]);
    let mut total = 0.0;
    for n in 0..field.nt() - 1 {
        let (a, b) = (times[n].max(ta), times[n + 1].min(tb));
        if b > a {
            total += 0.5 * (b - a) * (at(a) + at(b));
        }
    }
    Ok(total)
}

// ‖∇U(t_n)‖_{L²(region)}, central differences, one-sided at the faces.
fn gradient_l2(field: &SpaceTimeField, n: usize, mask: &[bool]) -> f64 {
    let g = field.grid();
    let h = g.spacing();
    let dims = g.dims();
    let mut sum = 0.0;
    for k in 0..g.nz {
        for j in 0..g.ny {
            for i in 0..g.nx {
                if !mask[g.index(i, j, k)] {
                    continue;
                }
                let idx = [i, j, k];
                for a in 0..3 {
                    if dims[a] == 1 {
                        continue;
                    }
                    let (lo, hi) = match idx[a] {
                        0 => (0, 1),
                        m if m + 1 == dims[a] => (m - 1, m),
                        m => (m - 1, m + 1),
                    };
                    let mut pa = idx;
                    let mut pb = idx;
                    pa[a] = lo;
                    pb[a] = hi;
                    let d = (field.value(n, pb[0], pb[1], pb[2]) - field.value(n, pa[0], pa[1], pa[2]))
                        / ((hi - lo) as f64 * h[a]);
                    sum += d.norm_squared();
                }
            }
        }
    }
    (sum * g.cell_volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn constant_and_zero_fields() {
        let f = SpaceTimeField::from_fn(Grid::unit(6), 5, "c", |_, _| Vector3::new(0.6, 0.0, 0.8) * 2.5).unwrap();
        assert!((lp_lq_norm(&f, 4.0, 4.0, whole_space, FULL_WINDOW).unwrap() - 2.5).abs() < 1e-13);
        assert!((lp_lq_norm(&f, f64::INFINITY, f64::INFINITY, whole_space, FULL_WINDOW).unwrap() - 2.5).abs() < 1e-13);
        let z = SpaceTimeField::zeros(Grid::unit(4), 3).unwrap();
        assert_eq!(lp_lq_norm(&z, 4.0, 4.0, whole_space, FULL_WINDOW).unwrap(), 0.0);
        let r = norm_report(&z, whole_space).unwrap();
        assert_eq!(r.m, 0.0);
    }

    #[test]
    fn single_mode_sine() {
        let g = Grid::new([1, 1, 256], [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let f = SpaceTimeField::from_fn(g, 3, "sine", |_, p| Vector3::new((TAU * p.z).sin(), 0.0, 0.0)).unwrap();
        let v = lp_lq_norm(&f, 4.0, 4.0, whole_space, FULL_WINDOW).unwrap();
        assert!((v - 0.375f64.powf(0.25)).abs() < 1e-6, "{v}");
    }

    #[test]
    fn partial_window_integrates_linear_interpolant() {
        // |U| = 1 + t is linear in time, so |U|^1 integrates exactly.
        let f = SpaceTimeField::from_fn(Grid::unit(2), 3, "ramp", |t, _| Vector3::new(1.0 + t, 0.0, 0.0)).unwrap();
        let v = lp_lq_norm(&f, 1.0, 1.0, whole_space, (-0.7, -0.1)).unwrap();
        let exact = 0.5 * (0.9f64.powi(2) - 0.3f64.powi(2));
        assert!((v - exact).abs() < 1e-14);
        let sup = lp_lq_norm(&f, f64::INFINITY, 1.0, whole_space, (-0.8, -0.3)).unwrap();
        assert!((sup - 0.7).abs() < 1e-14);
    }

    #[test]
    fn empty_region_and_bad_parameters() {
        let f = SpaceTimeField::zeros(Grid::unit(2), 2).unwrap();
        assert!(matches!(lp_lq_norm(&f, 4.0, 4.0, |p| p.x > 2.0, FULL_WINDOW), Err(FieldError::EmptyRegion)));
        assert!(lp_lq_norm(&f, 0.5, 4.0, whole_space, FULL_WINDOW).is_err());
        assert!(lp_lq_norm(&f, 4.0, 4.0, whole_space, (-0.2, -0.5)).is_err());
    }

    #[test]
    fn energy_norms_of_a_shear() {
        // U = (sin(πz), 0, 0): ‖U(t)‖₂² = 1/2, ‖∇U(t)‖₂² = π²/2.
        let g = Grid::new([1, 1, 400], [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let f = SpaceTimeField::from_fn(g, 2, "shear", |_, p| Vector3::new((PI * p.z).sin(), 0.0, 0.0)).unwrap();
        let r = norm_report(&f, whole_space).unwrap();
        assert!((r.linf_l2 - 0.5f64.sqrt()).abs() < 1e-5);
        assert!((r.l2_h1dot - PI / 2f64.sqrt()).abs() < 2e-3);
        assert_eq!(r.m, r.linf_l2 + r.l2_h1dot);
    }
}
