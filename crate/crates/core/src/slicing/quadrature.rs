use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::charts::RegionMesh;
use crate::fields::{time_integral, SpaceTimeField};
use crate::geometry::{ClamBody, Folium, RadialProfile};
use crate::numerics::composite_gauss4_rule;

use super::SlicingError;

/// Nodes, area weights `dH²` and outward unit normals on a surface.
#[derive(Debug, Clone, Default)]
pub struct SurfaceQuadrature {
    pub nodes: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
    pub normals: Vec<Vector3<f64>>,
}

impl SurfaceQuadrature {
    /// Product rule on a folium: 4-point Gauss on `panels` cosine-graded height
    /// panels times the midpoint rule in azimuth. The area element
    /// `r √(1 + r'²) dz dθ = √(r² + (r r')²) dz dθ` stays bounded at both poles.
    pub fn folium(f: &Folium<'_>, panels: usize, n_azimuth: usize) -> Self {
        let h = f.height();
        let panels = panels.max(1);
        let n_azimuth = n_azimuth.max(3);
        let dtheta = TAU / n_azimuth as f64;
        let mut q = SurfaceQuadrature::default();
        for p in 0..panels {
            let lo = 0.5 * h * (1.0 - (PI * p as f64 / panels as f64).cos());
            let hi = 0.5 * h * (1.0 - (PI * (p + 1) as f64 / panels as f64).cos());
            for (z, wz) in composite_gauss4_rule(lo, hi, 1) {
                let r = f.radius(z);
                let rr = r * f.slope(z);
                let da = (r * r + rr * rr).sqrt() * wz * dtheta;
                for k in 0..n_azimuth {
                    let theta = (k as f64 + 0.5) * dtheta;
                    q.nodes.push(Vector3::new(r * theta.cos(), r * theta.sin(), z));
                    q.weights.push(da);
                    q.normals.push(f.normal(z, theta));
                }
            }
        }
        q
    }

    /// Lumped-area nodes of a pulled-back mesh with area-weighted vertex normals.
    pub fn from_mesh(mesh: &RegionMesh) -> Self {
        let nodes: Vec<Vector3<f64>> = mesh.nodes.iter().map(|p| Vector3::from(*p)).collect();
        let mut normals = vec![Vector3::zeros(); nodes.len()];
        for t in &mesh.triangles {
            let n = (nodes[t[1]] - nodes[t[0]]).cross(&(nodes[t[2]] - nodes[t[0]]));
            for &i in t {
                normals[i] += n;
            }
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        SurfaceQuadrature { nodes, weights: mesh.weights.clone(), normals }
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i g(x_i, n_i)`.
    pub fn integrate<G>(&self, g: G) -> f64
    where
        G: Fn(&Vector3<f64>, &Vector3<f64>) -> f64 + Sync,
    {
        self.nodes
            .par_iter()
            .zip(&self.normals)
            .zip(&self.weights)
            .map(|((x, n), w)| w * g(x, n))
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    }
}

/// `∫_window ∫_surface |U|⁴ dH² dt` by interpolating the field at the nodes.
pub fn surface_trace_l4(field: &SpaceTimeField, surface: &SurfaceQuadrature, window: (f64, f64)) -> Result<f64, SlicingError> {
    let per_time = (0..field.nt())
        .into_par_iter()
        .map(|n| {
            let mut acc = 0.0;
            for (x, w) in surface.nodes.iter().zip(&surface.weights) {
                acc += w * field.sample_slice(n, x)?.norm_squared().powi(2);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>, crate::fields::FieldError>>()?;
    Ok(time_integral(field, &per_time, window)?)
}

/// Coarea density `x·n̂ / (1 - s)` of the dilation foliation at a point of
/// `Σ_s` with outward normal `n`.
pub fn coarea_density(x: &Vector3<f64>, n: &Vector3<f64>, s: f64) -> f64 {
    x.dot(n) / (1.0 - s)
}

/// Coarea weight at a point `x` of the folium `s`; `∫_shell f dV = ∫ ds ∫_{Σ_s} f w dH²`.
pub fn coarea_weight(clam: &ClamBody, s: f64, x: &Vector3<f64>) -> f64 {
    let f = Folium { parent: clam, s };
    let theta = x.y.atan2(x.x);
    coarea_density(x, &f.normal(x.z, theta), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Grid, FULL_WINDOW};
    use crate::geometry::{build_clam, folium, DEFAULT_MOLLIFIER_WIDTH};

    fn unit() -> ClamBody {
        build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 1024).unwrap()
    }

    #[test]
    fn area_converges_under_refinement() {
        let c = unit();
        let f = folium(&c, 0.0).unwrap();
        let coarse = SurfaceQuadrature::folium(&f, 16, 64).area();
        let fine = SurfaceQuadrature::folium(&f, 32, 128).area();
        assert!((coarse - fine).abs() <= 5e-3 * fine);
        // dilation by (1 - s) scales areas by (1 - s)²
        let half = SurfaceQuadrature::folium(&folium(&c, 0.5).unwrap(), 32, 128).area();
        assert!((half - 0.25 * fine).abs() <= 1e-12 * fine);
    }

    #[test]
    fn sphere_area_is_exact() {
        use crate::geometry::BallProfile;
        let b = BallProfile { radius: 0.5 };
        let rule = composite_gauss4_rule(0.0, 1.0, 64);
        let area: f64 = rule
            .iter()
            .map(|&(z, w)| {
                let r = b.radius(z);
                let rr = r * b.slope(z);
                (r * r + rr * rr).sqrt() * w * TAU
            })
            .sum();
        assert!((area - PI).abs() < 1e-12);
    }

    #[test]
    fn paraboloid_zone_density() {
        let c = unit();
        let rho: f64 = 0.2;
        let x = Vector3::new(rho, 0.0, rho * rho / 4.0);
        let w = coarea_weight(&c, 0.0, &x);
        let exact = 0.01 / 1.01f64.sqrt();
        assert!((w - exact).abs() < 1e-12, "{w} vs {exact}");
        assert_eq!(coarea_weight(&c, 0.3, &Vector3::zeros()), 0.0);
    }

    #[test]
    fn constant_field_trace() {
        let c = unit();
        let f = folium(&c, 0.0).unwrap();
        let q = SurfaceQuadrature::folium(&f, 16, 48);
        let g = Grid::new([4, 4, 4], [-0.9, 0.9, -0.9, 0.9, 0.0, 1.0]).unwrap();
        let u = SpaceTimeField::from_fn(g, 3, "c", |_, _| Vector3::new(0.0, 1.5, 0.0)).unwrap();
        let v = surface_trace_l4(&u, &q, FULL_WINDOW).unwrap();
        assert!((v - 1.5f64.powi(4) * q.area()).abs() < 1e-12 * v);
        let zero = SpaceTimeField::zeros(g, 3).unwrap();
        assert_eq!(surface_trace_l4(&zero, &q, FULL_WINDOW).unwrap(), 0.0);
        let small = Grid::new([4, 4, 4], [-0.5, 0.5, -0.5, 0.5, 0.0, 1.0]).unwrap();
        let u = SpaceTimeField::zeros(small, 2).unwrap();
        assert!(matches!(surface_trace_l4(&u, &q, FULL_WINDOW), Err(SlicingError::Field(_))));
    }

    #[test]
    fn vertical_field_matches_refined_reference() {
        let c = unit();
        let f = folium(&c, 0.0).unwrap();
        let g = Grid::new([2, 2, 64], [-0.9, 0.9, -0.9, 0.9, 0.0, 1.0]).unwrap();
        // U = (0, 0, z) is affine, so interpolation is exact and only the
        // surface rule is being compared.
        let u = SpaceTimeField::from_fn(g, 2, "z", |_, p| Vector3::new(0.0, 0.0, p.z)).unwrap();
        let v = surface_trace_l4(&u, &SurfaceQuadrature::folium(&f, 16, 32), FULL_WINDOW).unwrap();
        let reference = surface_trace_l4(&u, &SurfaceQuadrature::folium(&f, 160, 320), FULL_WINDOW).unwrap();
        assert!((v - reference).abs() <= 2e-3 * reference, "{v} vs {reference}");
    }
}
