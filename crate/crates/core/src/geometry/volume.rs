use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::numerics::{composite_gauss8, golden_max};

use super::clam::{folium, ClamBody};
use super::profile::RadialProfile;
use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeMethod {
    /// `∫ π r(z)² dz` with composite Gauss–Legendre panels per zone.
    DiskQuadrature { panels: usize },
    /// Hit-or-miss sampling of the bounding box.
    MonteCarlo { samples: u64, seed: u64, max_rel_err: f64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    /// Standard error (Monte Carlo) or panel-halving difference (quadrature).
    pub error: f64,
}

/// Volume of `V_s = (1 - s) V` for the (scaled) clam.
pub fn body_volume(clam: &ClamBody, s: f64, method: VolumeMethod) -> Result<VolumeEstimate, GeometryError> {
    let f = folium(clam, s)?;
    let breaks: Vec<f64> = zone_breaks(clam).iter().map(|z| z * f.factor()).collect();
    match method {
        VolumeMethod::DiskQuadrature { panels } => {
            let fine = disk_volume(&f, &breaks, panels);
            let coarse = disk_volume(&f, &breaks, (panels / 2).max(1));
            Ok(VolumeEstimate { value: fine, error: (fine - coarse).abs() })
        }
        VolumeMethod::MonteCarlo { samples, seed, max_rel_err } => monte_carlo_volume(&f, samples, seed, max_rel_err),
    }
}

fn zone_breaks(clam: &ClamBody) -> Vec<f64> {
    let p = &clam.profile;
    vec![0.0, p.blend_zone[0], p.blend_zone[1], p.equator_height(), p.height()]
}

/// Disk quadrature with cosine-graded panels between consecutive breakpoints,
/// which absorbs the square-root behaviour of `r` at the poles.
pub(crate) fn disk_volume<P: RadialProfile + ?Sized>(p: &P, breaks: &[f64], panels: usize) -> f64 {
    let mut breaks = breaks.to_vec();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            composite_gauss8(
                |u| {
                    let z = a + half * (1.0 - (PI * u).cos());
                    let r = p.radius(z);
                    PI * r * r * half * PI * (PI * u).sin()
                },
                0.0,
                1.0,
                panels,
            )
        })
        .sum()
}

const MC_CHUNK: u64 = 1 << 16;

fn monte_carlo_volume<P: RadialProfile + ?Sized>(
    p: &P,
    samples: u64,
    seed: u64,
    max_rel_err: f64,
) -> Result<VolumeEstimate, GeometryError> {
    let rmax = p.max_radius();
    let h = p.height();
    let box_volume = 4.0 * rmax * rmax * h;
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut hits = 0u64;
            for _ in 0..n {
                let x = rng.gen_range(-rmax..rmax);
                let y = rng.gen_range(-rmax..rmax);
                let z = rng.gen_range(0.0..h);
                let r = p.radius(z);
                if x * x + y * y <= r * r {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let n = samples.max(1) as f64;
    let frac = hits as f64 / n;
    let value = box_volume * frac;
    let error = box_volume * (frac * (1.0 - frac) / n).sqrt();
    let rel = if value > 0.0 { error / value } else { f64::INFINITY };
    if rel > max_rel_err {
        return Err(GeometryError::BudgetTooSmall { estimated: rel, requested: max_rel_err });
    }
    Ok(VolumeEstimate { value, error })
}

/// Axis-centered ellipsoid of revolution `{ |x'|²/a² + (z - c)²/b² <= 1 }`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EllipsoidOfRevolution {
    pub center_z: f64,
    pub radial: f64,
    pub vertical: f64,
}

impl EllipsoidOfRevolution {
    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radial * self.radial * self.vertical
    }
}

/// Lower bound for the John-ellipsoid volume of `V_s`.
pub fn john_volume(clam: &ClamBody, s: f64) -> Result<f64, GeometryError> {
    let f = folium(clam, s)?;
    Ok(john_volume_of(&f)?.volume())
}

/// Largest inscribed axis-centered ellipsoid of revolution, certified by
/// dense sampling of the profile constraint.
pub fn john_volume_of<P: RadialProfile + ?Sized>(p: &P) -> Result<EllipsoidOfRevolution, GeometryError> {
    let h = p.height();
    if !(h > 0.0 && p.max_radius() > 0.0) {
        return Err(GeometryError::OptimizationFailure("empty profile".into()));
    }
    // normalized variables: center c = u h, vertical semi-axis b = f · min(c, h - c)
    let objective = |u: f64, f: f64| -> f64 {
        let c = u * h;
        let b = f * c.min(h - c);
        if b <= 0.0 {
            return 0.0;
        }
        let a = inscribed_radial(p, c, b);
        a * a * b
    };
    let n = 32;
    let mut best = (0.5, 0.5, 0.0);
    for i in 1..n {
        for j in 1..=n {
            let u = i as f64 / n as f64;
            let f = j as f64 / n as f64;
            let v = objective(u, f);
            if v > best.2 {
                best = (u, f, v);
            }
        }
    }
    let (mut u, mut f, mut val) = best;
    let mut width = 1.0 / n as f64;
    for _ in 0..40 {
        let (nu, vu) = golden_max(|x| objective(x, f), (u - width).max(1e-9), (u + width).min(1.0 - 1e-9), 1e-12);
        if vu >= val {
            u = nu;
            val = vu;
        }
        let (nf, vf) = golden_max(|x| objective(u, x), (f - width).max(1e-9), (f + width).min(1.0), 1e-12);
        if vf >= val {
            f = nf;
            val = vf;
        }
        width = (width * 0.7).max(1e-6);
    }
    if !(val.is_finite() && val > 0.0) {
        return Err(GeometryError::OptimizationFailure(format!("objective {val}")));
    }
    let c = u * h;
    let b = f * c.min(h - c);
    let a = inscribed_radial(p, c, b) * (1.0 - 1e-9);
    let e = EllipsoidOfRevolution { center_z: c, radial: a, vertical: b };
    certify_inscribed(p, &e)?;
    Ok(e)
}

/// Largest `a` with `a sqrt(1 - ((z - c)/b)²) <= r(z)` on `[c - b, c + b]`.
fn inscribed_radial<P: RadialProfile + ?Sized>(p: &P, c: f64, b: f64) -> f64 {
    let ratio = |theta: f64| {
        let cos = theta.cos();
        if cos <= 0.0 {
            return f64::INFINITY;
        }
        p.radius(c + b * theta.sin()) / cos
    };
    let m = 256;
    let step = PI / m as f64;
    let mut arg = 0.0;
    let mut min = f64::INFINITY;
    for k in 0..m {
        let theta = -0.5 * PI + (k as f64 + 0.5) * step;
        let v = ratio(theta);
        if v < min {
            min = v;
            arg = theta;
        }
    }
    let lo = (arg - step).max(-0.5 * PI);
    let hi = (arg + step).min(0.5 * PI);
    let (_, neg) = golden_max(|t| -ratio(t), lo, hi, 1e-13);
    min.min(-neg)
}

fn certify_inscribed<P: RadialProfile + ?Sized>(p: &P, e: &EllipsoidOfRevolution) -> Result<(), GeometryError> {
    let n = 100_000;
    for k in 0..=n {
        let t = -1.0 + 2.0 * k as f64 / n as f64;
        let z = e.center_z + e.vertical * t;
        let w = e.radial * (1.0 - t * t).max(0.0).sqrt();
        if w > p.radius(z) {
            return Err(GeometryError::OptimizationFailure(format!(
                "ellipsoid leaves the body at z = {z}: {w} > {}",
                p.radius(z)
            )));
        }
    }
    Ok(())
}
