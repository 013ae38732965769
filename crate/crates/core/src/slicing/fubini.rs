use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{folium, ClamBody, RadialProfile};

use super::{coarea_density, SlicingError, SurfaceQuadrature};

/// Resolution of both sides of the coarea identity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FubiniResolution {
    /// Midpoint samples of the foliation parameter.
    pub n_s: usize,
    /// Cylindrical `(z, θ, ρ)` midpoint grid of the shell.
    pub n_z: usize,
    pub n_theta: usize,
    pub n_rho: usize,
    /// Height panels (4 Gauss nodes each) and azimuths of every folium rule.
    pub surface_panels: usize,
    pub surface_azimuth: usize,
}

impl FubiniResolution {
    /// `grid` cells per cylindrical direction and `grid` surface nodes per direction.
    pub fn uniform(n_s: usize, grid: usize) -> Self {
        FubiniResolution {
            n_s,
            n_z: grid,
            n_theta: grid,
            n_rho: grid,
            surface_panels: (grid / 4).max(1),
            surface_azimuth: grid,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FubiniReport {
    pub volume_integral: f64,
    pub iterated_integral: f64,
    pub relative_error: f64,
}

/// Compares `∫_shell f dV` with `∫_{s₁}^{s₂} ∫_{Σ_s} f w dH² ds` on the shell
/// between the folia `s₁ < s₂`.
pub fn fubini_identity_check<F>(
    f: F,
    clam: &ClamBody,
    s_range: (f64, f64),
    res: &FubiniResolution,
) -> Result<FubiniReport, SlicingError>
where
    F: Fn(&Vector3<f64>) -> f64 + Sync,
{
    let (s1, s2) = s_range;
    if !(0.0 <= s1 && s1 < s2 && s2 < 1.0) || res.n_s == 0 {
        return Err(SlicingError::InvalidParameters(format!("shell [{s1}, {s2}] with n_s = {}", res.n_s)));
    }
    let volume_integral = shell_integral(&f, clam, s1, s2, res)?;
    let ds = (s2 - s1) / res.n_s as f64;
    let iterated_integral = (0..res.n_s)
        .into_par_iter()
        .map(|j| {
            let s = s1 + (j as f64 + 0.5) * ds;
            let q = SurfaceQuadrature::folium(&folium(clam, s)?, res.surface_panels, res.surface_azimuth);
            Ok(q.integrate(|x, n| f(x) * coarea_density(x, n, s)) * ds)
        })
        .collect::<Result<Vec<f64>, SlicingError>>()?
        .iter()
        .sum::<f64>();
    let scale = volume_integral.abs().max(iterated_integral.abs());
    let relative_error = if scale == 0.0 { 0.0 } else { (volume_integral - iterated_integral).abs() / scale };
    Ok(FubiniReport { volume_integral, iterated_integral, relative_error })
}

// Cylindrical midpoint rule; heights are cosine graded on [0, h₂] (annular
// sections) and [h₂, h₁] (disks), clustering nodes at the poles.
fn shell_integral<F>(f: &F, clam: &ClamBody, s1: f64, s2: f64, res: &FubiniResolution) -> Result<f64, SlicingError>
where
    F: Fn(&Vector3<f64>) -> f64 + Sync,
{
    let outer = folium(clam, s1)?;
    let inner = folium(clam, s2)?;
    let (h1, h2) = (outer.height(), inner.height());
    let nz = (res.n_z / 2).max(1);
    let n_theta = res.n_theta.max(1);
    let n_rho = res.n_rho.max(1);
    let dtheta = TAU / n_theta as f64;
    let segments = [(0.0, h2, true), (h2, h1, false)];
    let nodes: Vec<(f64, f64, bool)> = segments
        .iter()
        .flat_map(|&(a, b, annular)| {
            (0..nz).map(move |i| {
                let xi = (i as f64 + 0.5) / nz as f64;
                let z = a + 0.5 * (b - a) * (1.0 - (PI * xi).cos());
                let dz = 0.5 * (b - a) * PI * (PI * xi).sin() / nz as f64;
                (z, dz, annular)
            })
        })
        .collect();
    Ok(nodes
        .par_iter()
        .map(|&(z, dz, annular)| {
            let ro = outer.radius(z);
            let ri = if annular { inner.radius(z).min(ro) } else { 0.0 };
            let dr = (ro - ri) / n_rho as f64;
            let mut acc = 0.0;
            for a in 0..n_rho {
                let rho = ri + (a as f64 + 0.5) * dr;
                for k in 0..n_theta {
                    let th = (k as f64 + 0.5) * dtheta;
                    acc += f(&Vector3::new(rho * th.cos(), rho * th.sin(), z)) * rho;
                }
            }
            acc * dr * dtheta * dz
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{body_volume, build_clam, VolumeMethod, DEFAULT_MOLLIFIER_WIDTH};

    #[test]
    fn unit_integrand_gives_shell_volume() {
        let c = build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 1024).unwrap();
        let r = fubini_identity_check(|_| 1.0, &c, (0.25, 0.5), &FubiniResolution::uniform(32, 64)).unwrap();
        let v = |s| body_volume(&c, s, VolumeMethod::DiskQuadrature { panels: 256 }).unwrap().value;
        let shell = v(0.25) - v(0.5);
        assert!((r.iterated_integral - shell).abs() <= 1e-2 * shell, "{r:?} vs {shell}");
        assert!((r.volume_integral - shell).abs() <= 1e-2 * shell);
        assert!(r.relative_error <= 1e-2);
    }

    #[test]
    fn zero_integrand() {
        let c = build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 256).unwrap();
        let r = fubini_identity_check(|_| 0.0, &c, (0.25, 0.5), &FubiniResolution::uniform(4, 8)).unwrap();
        assert_eq!((r.volume_integral, r.iterated_integral, r.relative_error), (0.0, 0.0, 0.0));
    }

    #[test]
    fn error_drops_under_refinement() {
        let c = build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 1024).unwrap();
        let f = |p: &Vector3<f64>| (1.0 + p.x * p.y + p.z).powi(2) * (3.0 * p.x).cos().powi(2);
        let a = fubini_identity_check(f, &c, (0.25, 0.5), &FubiniResolution::uniform(16, 32)).unwrap();
        let b = fubini_identity_check(f, &c, (0.25, 0.5), &FubiniResolution::uniform(32, 64)).unwrap();
        assert!(b.relative_error <= 0.5 * a.relative_error, "{a:?} {b:?}");
    }
}
