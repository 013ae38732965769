use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use super::profile::{Profile, RadialProfile};
use super::GeometryError;

/// The clam body `scale · V₀`, stored through its generating profile.
#[derive(Debug, Clone, Serialize)]
pub struct ClamBody {
    pub profile: Profile,
    pub scale: f64,
    pub vanishing_order: u32,
}

/// Builds the unit clam (`scale = 1`) with tangency of order `vanishing_order`.
pub fn build_clam(vanishing_order: u32, mollifier_width: f64, samples: usize) -> Result<ClamBody, GeometryError> {
    let profile = Profile::build(vanishing_order, mollifier_width, samples)?;
    Ok(ClamBody { profile, scale: 1.0, vanishing_order })
}

impl ClamBody {
    /// The same body dilated to `scale` (e.g. `16 r₀` for the chart clam).
    pub fn with_scale(&self, scale: f64) -> ClamBody {
        ClamBody { profile: self.profile.clone(), scale, vanishing_order: self.vanishing_order }
    }

    /// Coefficient `c` of the tangency zone `z = c |x'|^(l+1)` of the unit body.
    pub fn bottom_coef(&self) -> f64 {
        self.profile.bottom_coef
    }

    /// Membership test for the closed body.
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        folium_contains(self, 0.0, p)
    }

    /// Half-width and height of the axis-aligned box containing the body.
    pub fn bounding_box(&self) -> [f64; 2] {
        [self.scale * self.profile.max_radius(), self.scale * self.profile.height()]
    }

    /// Star-shapedness with respect to the origin, by ray sampling:
    /// every point `t x` with `x` in the body and `t ∈ [0, 1]` is in the body.
    pub fn star_shaped_check(&self, rays: usize, steps: usize) -> bool {
        let p = &self.profile;
        (1..rays).all(|i| {
            let z = p.height() * i as f64 / rays as f64;
            let x = Vector3::new(self.scale * p.radius(z) * (1.0 - 1e-12), 0.0, self.scale * z);
            (0..=steps).all(|k| {
                let t = k as f64 / steps as f64;
                self.contains(&(x * t))
            })
        })
    }
}

fn folium_contains(clam: &ClamBody, s: f64, p: &Vector3<f64>) -> bool {
    let f = clam.scale * (1.0 - s);
    let z = p.z / f;
    if !(0.0..=clam.profile.height()).contains(&z) {
        return false;
    }
    let rho = (p.x * p.x + p.y * p.y).sqrt() / f;
    rho <= clam.profile.radius(z) * (1.0 + 1e-12) + 1e-15
}

/// Tangency height of the folium `s`: below `z0(s)` the folium is the
/// closed-form tangency surface.
pub fn z0(clam: &ClamBody, s: f64) -> Result<f64, GeometryError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(GeometryError::OutOfRange(s));
    }
    Ok(clam.scale * (1.0 - s) * clam.profile.parab_zone_top)
}

/// One leaf `Σ_s = (1 - s) · scale · Σ₀` of the foliation.
#[derive(Debug, Clone, Copy)]
pub struct Folium<'a> {
    pub parent: &'a ClamBody,
    pub s: f64,
}

pub fn folium(clam: &ClamBody, s: f64) -> Result<Folium<'_>, GeometryError> {
    if !(0.0..1.0).contains(&s) {
        return Err(GeometryError::OutOfRange(s));
    }
    Ok(Folium { parent: clam, s })
}

impl Folium<'_> {
    /// Dilation factor relative to the unit body.
    pub fn factor(&self) -> f64 {
        self.parent.scale * (1.0 - self.s)
    }

    /// Height of the graph over `|x'| = rho` on the lower sheet.
    pub fn graph_height(&self, rho: f64) -> Option<f64> {
        self.lower_height(rho)
    }

    /// Closed-form tangency graph `coef(s) |x'|^(l+1)`.
    pub fn tangency_graph(&self, rho: f64) -> f64 {
        let l = self.parent.vanishing_order as i32;
        self.parent.profile.bottom_coef / self.factor().powi(l) * rho.powi(l + 1)
    }

    /// Point at height `z` and azimuth `theta`.
    pub fn point(&self, z: f64, theta: f64) -> Vector3<f64> {
        let r = self.radius(z);
        Vector3::new(r * theta.cos(), r * theta.sin(), z)
    }

    /// Outward unit normal at height `z` and azimuth `theta`.
    pub fn normal(&self, z: f64, theta: f64) -> Vector3<f64> {
        let (nr, nz) = self.meridian_normal(z);
        Vector3::new(nr * theta.cos(), nr * theta.sin(), nz)
    }

    /// Product mesh: `n_height` heights (endpoints excluded) × `n_azimuth` angles.
    pub fn sample_points(&self, n_height: usize, n_azimuth: usize) -> Vec<Vector3<f64>> {
        let h = self.height();
        let mut out = Vec::with_capacity(n_height * n_azimuth);
        for i in 0..n_height {
            // cosine grading clusters nodes at both poles
            let xi = (i as f64 + 0.5) / n_height as f64;
            let z = 0.5 * h * (1.0 - (std::f64::consts::PI * xi).cos());
            for k in 0..n_azimuth {
                let theta = std::f64::consts::TAU * k as f64 / n_azimuth as f64;
                out.push(self.point(z, theta));
            }
        }
        out
    }

    /// Largest distance from `x / (1 - s)` (in units of the parent scale) to
    /// the base surface `Σ₀`, over the sampled mesh.
    pub fn scaling_residual(&self, n_height: usize, n_azimuth: usize) -> f64 {
        let base = &self.parent.profile;
        let scale = self.parent.scale;
        self.sample_points(n_height, n_azimuth)
            .iter()
            .map(|x| {
                let y = x / self.factor();
                let rho = (y.x * y.x + y.y * y.y).sqrt();
                (rho - base.radius(y.z)).abs() * scale
            })
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        folium_contains(self.parent, self.s, p)
    }
}

impl RadialProfile for Folium<'_> {
    fn height(&self) -> f64 {
        self.factor() * self.parent.profile.height()
    }

    fn radius(&self, z: f64) -> f64 {
        let f = self.factor();
        f * self.parent.profile.radius(z / f)
    }

    fn slope(&self, z: f64) -> f64 {
        self.parent.profile.slope(z / self.factor())
    }

    fn second(&self, z: f64) -> f64 {
        let f = self.factor();
        self.parent.profile.second(z / f) / f
    }

    fn max_radius(&self) -> f64 {
        self.factor() * self.parent.profile.max_radius()
    }

    fn equator_height(&self) -> f64 {
        self.factor() * self.parent.profile.equator_height()
    }
}

/// Outcome of [`check_tangency`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TangencyCheck {
    /// `max |height(x') - coef(s) |x'|^(l+1)|` over the sampled radii.
    pub residual: f64,
    /// Graph slope at the radius closest to the origin in a dyadic sequence;
    /// tends to zero when the tangent plane at the origin is horizontal.
    pub origin_slope: f64,
    pub pass: bool,
}

/// Compares the folium's lower sheet against the closed-form tangency graph on
/// `samples` radii in `[0, δ]`, `δ` the radius at the tangency-zone top.
pub fn check_tangency(f: &Folium<'_>, samples: usize, tol: f64) -> TangencyCheck {
    let zone_top = f.factor() * f.parent.profile.parab_zone_top;
    let delta = f.radius(zone_top);
    let mut residual: f64 = 0.0;
    for i in 0..samples {
        let rho = if samples <= 1 { 0.0 } else { delta * i as f64 / (samples - 1) as f64 };
        let h = f.graph_height(rho).unwrap_or(f64::INFINITY);
        residual = residual.max((h - f.tangency_graph(rho)).abs());
    }
    let origin_slope = if samples <= 1 {
        0.0
    } else {
        // dh/dρ = 1 / r'(z); walk towards the origin
        let mut slope = f64::INFINITY;
        for k in 1..=40 {
            let rho = delta * 0.5f64.powi(k);
            if let Some(z) = f.graph_height(rho) {
                slope = (1.0 / f.slope(z)).abs();
            }
        }
        slope
    };
    TangencyCheck { residual, origin_slope, pass: residual <= tol && origin_slope <= tol }
}

/// Minimum distance between sampled meshes of two folia, ignoring nodes inside
/// the ball of radius `exclusion` around the origin. Exhaustive over pairs.
pub fn folia_min_distance(
    clam: &ClamBody,
    s1: f64,
    s2: f64,
    exclusion: f64,
    n_height: usize,
    n_azimuth: usize,
) -> Result<f64, GeometryError> {
    let keep = |v: Vec<Vector3<f64>>| v.into_iter().filter(|p| p.norm() > exclusion).collect::<Vec<_>>();
    let a = keep(folium(clam, s1)?.sample_points(n_height, n_azimuth));
    let b = keep(folium(clam, s2)?.sample_points(n_height, n_azimuth));
    Ok(a
        .par_iter()
        .map(|p| b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min))
}
