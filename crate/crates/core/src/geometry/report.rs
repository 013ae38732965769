use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::clam::{check_tangency, folia_min_distance, folium, z0, ClamBody};
use super::profile::RadialProfile;
use super::volume::{body_volume, john_volume, VolumeMethod};
use super::{GeometryError, TOL_CONVEXITY, TOL_GEOM, TOL_SMOOTH};

/// Knobs for [`check_clam`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryCheckConfig {
    pub convexity_samples: usize,
    pub tol_geom: f64,
    pub tol_convexity: f64,
    pub tol_smooth: f64,
    pub quadrature_panels: usize,
    /// Monte-Carlo cross-check of `Vol(V₀)`; zero skips it.
    pub mc_samples: u64,
    pub seed: u64,
    pub disjoint_pairs: Vec<[f64; 2]>,
    pub disjoint_exclusion: f64,
}

impl Default for GeometryCheckConfig {
    fn default() -> Self {
        Self {
            convexity_samples: 100_000,
            tol_geom: TOL_GEOM,
            tol_convexity: TOL_CONVEXITY,
            tol_smooth: TOL_SMOOTH,
            quadrature_panels: 256,
            mc_samples: 0,
            seed: 0,
            disjoint_pairs: vec![[0.25, 0.5], [0.0, 0.1], [0.5, 0.9]],
            disjoint_exclusion: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryPass {
    pub convexity: bool,
    pub smoothness: bool,
    pub star_shaped: bool,
    pub tangency: bool,
    pub z0: bool,
    pub scaling: bool,
    pub disjointness: bool,
    pub volume_scaling: bool,
    pub shell_volume: bool,
    pub volume_chain: bool,
    pub monte_carlo_agreement: Option<bool>,
}

impl GeometryPass {
    pub fn all(&self) -> bool {
        self.convexity
            && self.smoothness
            && self.star_shaped
            && self.tangency
            && self.z0
            && self.scaling
            && self.disjointness
            && self.volume_scaling
            && self.shell_volume
            && self.volume_chain
            && self.monte_carlo_agreement.unwrap_or(true)
    }
}

/// Numerical certificate for the clam construction. Key names are part of
/// the JSON output format.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub vanishing_order: u32,
    pub scale: f64,
    pub blend_zone: [f64; 2],
    pub cap_center_z: f64,
    pub cap_radius: f64,
    /// `[half-width, height]` of the box `[-w, w]² × [0, h]` containing the body.
    pub containment_box: [f64; 2],
    pub convexity_max_second_diff: f64,
    pub convexity_threshold: f64,
    pub smoothness_max_jump: f64,
    pub tangency_max_residual: f64,
    pub tangency_origin_slope: f64,
    pub z0_max_error: f64,
    pub scaling_max_residual: f64,
    pub disjointness_min_distance: f64,
    pub volumes: BTreeMap<String, f64>,
    pub shell_volume: f64,
    pub shell_ratio: f64,
    pub monte_carlo_volume: Option<f64>,
    pub monte_carlo_std_error: Option<f64>,
    pub john_volume_quarter: f64,
    pub c0: f64,
    pub pass: GeometryPass,
    pub all_pass: bool,
}

/// Runs every construction check on `clam` and collects residuals.
pub fn check_clam(clam: &ClamBody, cfg: &GeometryCheckConfig) -> Result<GeometryReport, GeometryError> {
    let p = &clam.profile;
    let scale = clam.scale;

    // concavity: centered second differences of r on a dense uniform grid
    let n = cfg.convexity_samples.max(3);
    let h = p.height() / n as f64;
    let mut max_d2 = f64::NEG_INFINITY;
    for i in 1..n {
        let z = i as f64 * h;
        let d2 = p.radius(z - h) - 2.0 * p.radius(z) + p.radius(z + h);
        max_d2 = max_d2.max(d2);
    }
    let max_d2 = max_d2 * scale;
    let convexity_threshold = cfg.tol_convexity * p.max_radius() * scale;

    // one-sided first and second derivatives across the blend junctions
    let eps = 1e-10;
    let mut jump: f64 = 0.0;
    for z in p.blend_zone {
        let d1 = (p.slope(z - eps) - p.slope(z + eps)).abs() / p.slope(z).abs().max(1.0);
        let d2 = (p.second(z - eps) - p.second(z + eps)).abs() / p.second(z).abs().max(1.0);
        jump = jump.max(d1).max(d2);
    }

    let s_grid = [0.0, 0.25, 0.5, 0.75, 0.9];
    let mut tangency_residual: f64 = 0.0;
    let mut origin_slope: f64 = 0.0;
    let mut z0_err: f64 = 0.0;
    let mut scaling: f64 = 0.0;
    for &s in &s_grid {
        let f = folium(clam, s)?;
        let t = check_tangency(&f, 257, cfg.tol_geom);
        tangency_residual = tangency_residual.max(t.residual);
        origin_slope = origin_slope.max(t.origin_slope);
        let expected = scale * (1.0 - s) / 8.0;
        z0_err = z0_err.max((z0(clam, s)? - expected).abs());
        scaling = scaling.max(f.scaling_residual(64, 16));
    }
    z0_err = z0_err.max(z0(clam, 1.0)?.abs());

    let mut disjoint = f64::INFINITY;
    for [a, b] in &cfg.disjoint_pairs {
        let d = folia_min_distance(clam, *a, *b, cfg.disjoint_exclusion * scale, 48, 24)?;
        disjoint = disjoint.min(d);
    }

    let quad = VolumeMethod::DiskQuadrature { panels: cfg.quadrature_panels };
    let mut volumes = BTreeMap::new();
    let v0 = body_volume(clam, 0.0, quad)?.value;
    let v_quarter = body_volume(clam, 0.25, quad)?.value;
    let v_half = body_volume(clam, 0.5, quad)?.value;
    volumes.insert("0".to_string(), v0);
    volumes.insert("0.25".to_string(), v_quarter);
    volumes.insert("0.5".to_string(), v_half);
    let shell = v_quarter - v_half;
    let shell_ratio = shell / v0;
    let volume_scaling = ((v_quarter / v0) / 0.75f64.powi(3) - 1.0).abs() <= 0.01
        && ((v_half / v0) / 0.5f64.powi(3) - 1.0).abs() <= 0.01;
    let shell_ok = (shell_ratio / (19.0 / 64.0) - 1.0).abs() <= 0.01;

    let john_quarter = john_volume(clam, 0.25)?;
    let c0 = 0.25 * john_quarter;
    // Vol(shell) >= Vol(V_1/4)/4 >= John(V_1/4)/4, each with 1% slack
    let chain = shell >= 0.99 * 0.25 * v_quarter && 0.25 * v_quarter >= 0.99 * c0 && c0 > 0.0 && shell - c0 > 0.0;

    let (mc_v, mc_e, mc_ok) = if cfg.mc_samples > 0 {
        let est = body_volume(
            clam,
            0.0,
            VolumeMethod::MonteCarlo { samples: cfg.mc_samples, seed: cfg.seed, max_rel_err: 1.0 },
        )?;
        (Some(est.value), Some(est.error), Some((est.value / v0 - 1.0).abs() <= 0.005))
    } else {
        (None, None, None)
    };

    let pass = GeometryPass {
        convexity: max_d2 <= convexity_threshold,
        smoothness: jump <= cfg.tol_smooth,
        star_shaped: clam.star_shaped_check(64, 32),
        tangency: tangency_residual <= cfg.tol_geom && origin_slope <= cfg.tol_geom,
        z0: z0_err == 0.0,
        scaling: scaling <= cfg.tol_geom * scale,
        disjointness: disjoint > 0.0,
        volume_scaling,
        shell_volume: shell_ok,
        volume_chain: chain,
        monte_carlo_agreement: mc_ok,
    };
    let all_pass = pass.all();
    Ok(GeometryReport {
        vanishing_order: clam.vanishing_order,
        scale,
        blend_zone: p.blend_zone,
        cap_center_z: p.cap_center_z,
        cap_radius: p.cap_radius,
        containment_box: clam.bounding_box(),
        convexity_max_second_diff: max_d2,
        convexity_threshold,
        smoothness_max_jump: jump,
        tangency_max_residual: tangency_residual,
        tangency_origin_slope: origin_slope,
        z0_max_error: z0_err,
        scaling_max_residual: scaling,
        disjointness_min_distance: disjoint,
        volumes,
        shell_volume: shell,
        shell_ratio,
        monte_carlo_volume: mc_v,
        monte_carlo_std_error: mc_e,
        john_volume_quarter: john_quarter,
        c0,
        pass,
        all_pass,
    })
}
