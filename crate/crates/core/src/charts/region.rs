use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::geometry::{folium, ClamBody, RadialProfile};

use super::chart::BilipschitzChart;
use super::ChartError;

/// Indexed triangle mesh of `∂ℛ = Φ⁻¹(Σ'_s)` with lumped area weights.
///
/// JSON layout: `{"format": "RegionMesh-1", "s": .., "nodes": [[x, y, z], ..],
/// "chart_nodes": [[y1, y2, y3], ..], "triangles": [[i, j, k], ..], "weights": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionMesh {
    pub format: String,
    pub s: f64,
    pub nodes: Vec<[f64; 3]>,
    pub chart_nodes: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    pub weights: Vec<f64>,
}

pub const REGION_MESH_FORMAT: &str = "RegionMesh-1";

impl RegionMesh {
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Area of the same triangulation in chart coordinates.
    pub fn chart_area(&self) -> f64 {
        self.triangles.iter().map(|t| triangle_area(&self.chart_nodes, t)).sum()
    }

    pub fn node(&self, i: usize) -> Vector3<f64> {
        Vector3::from(self.nodes[i])
    }
}

fn triangle_area(nodes: &[[f64; 3]], t: &[usize; 3]) -> f64 {
    let a = Vector3::from(nodes[t[0]]);
    let b = Vector3::from(nodes[t[1]]);
    let c = Vector3::from(nodes[t[2]]);
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Triangulates the folium `s` of `clam` in chart coordinates and pulls it
/// back through `Φ⁻¹`. The clam must be scaled to `16 r₀`.
pub fn pull_back_region(
    chart: &BilipschitzChart,
    clam: &ClamBody,
    s: f64,
    n_height: usize,
    n_azimuth: usize,
) -> Result<RegionMesh, ChartError> {
    let limit = 16.0 * chart.r0;
    if (clam.scale - limit).abs() > 1e-12 * limit {
        return Err(ChartError::ContainmentFailure(format!(
            "clam scale {} differs from 16 r0 = {limit}",
            clam.scale
        )));
    }
    let f = folium(clam, s).map_err(|e| ChartError::ContainmentFailure(e.to_string()))?;
    let n_height = n_height.max(2);
    let n_azimuth = n_azimuth.max(3);
    let h = f.height();

    let mut chart_nodes = vec![[0.0, 0.0, 0.0]];
    for i in 1..n_height {
        let xi = i as f64 / n_height as f64;
        let z = 0.5 * h * (1.0 - (PI * xi).cos());
        let r = f.radius(z);
        for k in 0..n_azimuth {
            let th = TAU * k as f64 / n_azimuth as f64;
            chart_nodes.push([r * th.cos(), r * th.sin(), z]);
        }
    }
    chart_nodes.push([0.0, 0.0, h]);
    let apex = chart_nodes.len() - 1;

    let mut triangles = Vec::new();
    let ring = |i: usize, k: usize| 1 + (i - 1) * n_azimuth + (k % n_azimuth);
    for k in 0..n_azimuth {
        triangles.push([0, ring(1, k + 1), ring(1, k)]);
    }
    for i in 1..n_height - 1 {
        for k in 0..n_azimuth {
            let (a, b, c, d) = (ring(i, k), ring(i, k + 1), ring(i + 1, k), ring(i + 1, k + 1));
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    for k in 0..n_azimuth {
        triangles.push([apex, ring(n_height - 1, k), ring(n_height - 1, k + 1)]);
    }

    for y in &chart_nodes {
        let n = Vector3::from(*y).norm();
        if n > limit * (1.0 + 1e-9) || n > chart.radius {
            return Err(ChartError::ContainmentFailure(format!("chart node at |y| = {n} exceeds 16 r0 = {limit}")));
        }
    }
    let nodes = chart_nodes
        .iter()
        .map(|y| chart.inverse(&Vector3::from(*y)).map(Into::into))
        .collect::<Result<Vec<[f64; 3]>, _>>()?;

    let mut weights = vec![0.0; nodes.len()];
    for t in &triangles {
        let a = triangle_area(&nodes, t) / 3.0;
        for &i in t {
            weights[i] += a;
        }
    }
    Ok(RegionMesh { format: REGION_MESH_FORMAT.to_string(), s, nodes, chart_nodes, triangles, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{build_chart, ChartOptions, SmoothDomain};
    use crate::geometry::{build_clam, DEFAULT_MOLLIFIER_WIDTH};

    fn clam(r0: f64) -> ClamBody {
        build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 1024).unwrap().with_scale(16.0 * r0)
    }

    #[test]
    fn flat_chart_pull_back_is_rigid() {
        let d = SmoothDomain::HalfSpace { half_width: 1.0 };
        let r0 = 1.0 / 64.0;
        let base = Vector3::new(0.1, 0.2, 0.0);
        let chart = build_chart(&d, &base, r0, &ChartOptions { pairs: 500, ..Default::default() }).unwrap();
        let m = pull_back_region(&chart, &clam(r0), 0.0, 16, 12).unwrap();
        for (x, y) in m.nodes.iter().zip(&m.chart_nodes) {
            // the half-space chart frame maps y to base + (y1 e1 + y2 e2 + y3 ν)
            let back = chart.forward(&Vector3::from(*x)).unwrap();
            assert!((back - Vector3::from(*y)).norm() <= 1e-12);
        }
        assert!((m.area() - m.chart_area()).abs() <= 1e-12 * m.area());
    }

    #[test]
    fn unit_ball_region_touches_boundary_only_at_base() {
        let d = SmoothDomain::unit_ball();
        let r0 = 1.0 / 64.0;
        let base = Vector3::new(0.0, 0.0, 1.0);
        let chart = build_chart(&d, &base, r0, &ChartOptions { pairs: 2000, ..Default::default() }).unwrap();
        let m = pull_back_region(&chart, &clam(r0), 0.0, 32, 24).unwrap();
        assert!((m.node(0) - base).norm() < 1e-15);
        let away = m
            .nodes
            .iter()
            .map(|p| Vector3::from(*p))
            .filter(|p| (p - base).norm() > 0.05 * r0)
            .map(|p| d.boundary_distance(&p))
            .fold(f64::INFINITY, f64::min);
        assert!(away > 0.0);
        let ratio = m.area() / m.chart_area();
        assert!((0.25..=4.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn wrong_scale_is_a_containment_failure() {
        let d = SmoothDomain::unit_ball();
        let chart = build_chart(&d, &Vector3::new(0.0, 0.0, 1.0), 1.0 / 64.0, &ChartOptions { pairs: 200, ..Default::default() })
            .unwrap();
        let big = build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 256).unwrap();
        assert!(matches!(pull_back_region(&chart, &big, 0.0, 8, 8), Err(ChartError::ContainmentFailure(_))));
    }

    #[test]
    fn mesh_json_roundtrip() {
        let d = SmoothDomain::unit_ball();
        let r0 = 1.0 / 64.0;
        let chart = build_chart(&d, &Vector3::new(0.0, 0.0, 1.0), r0, &ChartOptions { pairs: 200, ..Default::default() }).unwrap();
        let m = pull_back_region(&chart, &clam(r0), 0.3, 6, 6).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: RegionMesh = serde_json::from_str(&s).unwrap();
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.format, REGION_MESH_FORMAT);
    }
}
