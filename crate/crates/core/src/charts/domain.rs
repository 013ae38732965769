use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::ChartError;

/// A bounded (or box-truncated) smooth domain `Ω = {φ < 0}` given by one of
/// the built-in implicit fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fixture", rename_all = "snake_case")]
pub enum SmoothDomain {
    Ball {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
    },
    Ellipsoid {
        #[serde(default)]
        center: [f64; 3],
        semi_axes: [f64; 3],
    },
    /// `{z > 0}` truncated to the box `[-w, w]³`.
    HalfSpace { half_width: f64 },
    /// `{z > A exp(-|x'|²/L²)}` truncated to the box `[-w, w]²×[-w, w]`.
    PerturbedHalfSpace { amplitude: f64, length: f64, half_width: f64 },
}

impl SmoothDomain {
    pub fn unit_ball() -> Self {
        SmoothDomain::Ball { center: [0.0; 3], radius: 1.0 }
    }

    pub fn phi(&self, p: &Vector3<f64>) -> f64 {
        match self {
            SmoothDomain::Ball { center, radius } => {
                let d = p - Vector3::from(*center);
                (d.norm_squared() - radius * radius) / (2.0 * radius)
            }
            SmoothDomain::Ellipsoid { center, semi_axes } => {
                let d = p - Vector3::from(*center);
                let q: f64 = (0..3).map(|i| (d[i] / semi_axes[i]).powi(2)).sum();
                0.5 * (q - 1.0)
            }
            SmoothDomain::HalfSpace { .. } => -p.z,
            SmoothDomain::PerturbedHalfSpace { amplitude, length, .. } => {
                amplitude * (-(p.x * p.x + p.y * p.y) / (length * length)).exp() - p.z
            }
        }
    }

    pub fn gradient(&self, p: &Vector3<f64>) -> Vector3<f64> {
        match self {
            SmoothDomain::Ball { center, radius } => (p - Vector3::from(*center)) / *radius,
            SmoothDomain::Ellipsoid { center, semi_axes } => {
                let d = p - Vector3::from(*center);
                Vector3::new(
                    d.x / semi_axes[0].powi(2),
                    d.y / semi_axes[1].powi(2),
                    d.z / semi_axes[2].powi(2),
                )
            }
            SmoothDomain::HalfSpace { .. } => Vector3::new(0.0, 0.0, -1.0),
            SmoothDomain::PerturbedHalfSpace { amplitude, length, .. } => {
                let l2 = length * length;
                let g = amplitude * (-(p.x * p.x + p.y * p.y) / l2).exp();
                Vector3::new(-2.0 * p.x / l2 * g, -2.0 * p.y / l2 * g, -1.0)
            }
        }
    }

    pub fn hessian(&self, p: &Vector3<f64>) -> Matrix3<f64> {
        match self {
            SmoothDomain::Ball { radius, .. } => Matrix3::identity() / *radius,
            SmoothDomain::Ellipsoid { semi_axes, .. } => Matrix3::from_diagonal(&Vector3::new(
                1.0 / semi_axes[0].powi(2),
                1.0 / semi_axes[1].powi(2),
                1.0 / semi_axes[2].powi(2),
            )),
            SmoothDomain::HalfSpace { .. } => Matrix3::zeros(),
            SmoothDomain::PerturbedHalfSpace { amplitude, length, .. } => {
                let l2 = length * length;
                let g = amplitude * (-(p.x * p.x + p.y * p.y) / l2).exp();
                let (x, y) = (p.x, p.y);
                let hxx = g * (4.0 * x * x / (l2 * l2) - 2.0 / l2);
                let hyy = g * (4.0 * y * y / (l2 * l2) - 2.0 / l2);
                let hxy = g * 4.0 * x * y / (l2 * l2);
                Matrix3::new(hxx, hxy, 0.0, hxy, hyy, 0.0, 0.0, 0.0, 0.0)
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        match self {
            SmoothDomain::Ball { center, radius } => (
                [center[0] - radius, center[1] - radius, center[2] - radius],
                [center[0] + radius, center[1] + radius, center[2] + radius],
            ),
            SmoothDomain::Ellipsoid { center, semi_axes } => (
                [center[0] - semi_axes[0], center[1] - semi_axes[1], center[2] - semi_axes[2]],
                [center[0] + semi_axes[0], center[1] + semi_axes[1], center[2] + semi_axes[2]],
            ),
            SmoothDomain::HalfSpace { half_width: w } | SmoothDomain::PerturbedHalfSpace { half_width: w, .. } => {
                ([-w, -w, -w], [*w, *w, *w])
            }
        }
    }

    /// Half of the smallest bounding-box side; caps the reach of flat boundaries.
    pub fn box_scale(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (0..3).map(|i| 0.5 * (hi[i] - lo[i])).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        self.phi(p) < 0.0
    }

    /// Outward unit normal `∇φ / |∇φ|`.
    pub fn normal(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.gradient(p).normalize()
    }

    /// Distance to `∂Ω`: exact for balls and flat half-spaces, first order
    /// (`|φ| / |∇φ|`) otherwise.
    pub fn boundary_distance(&self, p: &Vector3<f64>) -> f64 {
        match self {
            SmoothDomain::Ball { center, radius } => ((p - Vector3::from(*center)).norm() - radius).abs(),
            SmoothDomain::HalfSpace { .. } => p.z.abs(),
            _ => self.phi(p).abs() / self.gradient(p).norm(),
        }
    }

    /// Newton projection onto `{φ = 0}` along the gradient.
    pub fn project_to_boundary(&self, p: &Vector3<f64>) -> Result<Vector3<f64>, ChartError> {
        let mut x = *p;
        for _ in 0..100 {
            let f = self.phi(&x);
            let g = self.gradient(&x);
            let g2 = g.norm_squared();
            if g2 < 1e-300 {
                break;
            }
            let step = g * (f / g2);
            x -= step;
            if step.norm() < 1e-15 * (1.0 + x.norm()) {
                return Ok(x);
            }
        }
        if self.phi(&x).abs() < 1e-12 {
            Ok(x)
        } else {
            Err(ChartError::NotOnBoundary { residual: self.phi(&x).abs() })
        }
    }

    /// Principal curvatures at a boundary point, signed so that convex
    /// domains have non-negative curvature.
    pub fn principal_curvatures(&self, p: &Vector3<f64>) -> [f64; 2] {
        let g = self.gradient(p);
        let gn = g.norm();
        let n = g / gn;
        let [e1, e2] = tangent_frame(&n);
        let h = self.hessian(p);
        let a = e1.dot(&(h * e1)) / gn;
        let b = e1.dot(&(h * e2)) / gn;
        let c = e2.dot(&(h * e2)) / gn;
        let mean = 0.5 * (a + c);
        let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        [mean + disc, mean - disc]
    }

    /// Deterministic boundary sample of roughly `n` points.
    pub fn sample_boundary(&self, n: usize) -> Vec<Vector3<f64>> {
        let n = n.max(8);
        match self {
            SmoothDomain::Ball { center, radius } => fibonacci_directions(n)
                .into_iter()
                .map(|d| Vector3::from(*center) + d * *radius)
                .collect(),
            SmoothDomain::Ellipsoid { center, semi_axes } => {
                let mut dirs = fibonacci_directions(n);
                for i in 0..3 {
                    let mut e = Vector3::zeros();
                    e[i] = 1.0;
                    dirs.push(e);
                    dirs.push(-e);
                }
                dirs.into_iter()
                    .map(|d| {
                        let q: f64 = (0..3).map(|i| (d[i] / semi_axes[i]).powi(2)).sum();
                        Vector3::from(*center) + d / q.sqrt()
                    })
                    .collect()
            }
            SmoothDomain::HalfSpace { half_width } | SmoothDomain::PerturbedHalfSpace { half_width, .. } => {
                let m = (n as f64).sqrt().ceil() as usize;
                let w = *half_width;
                let mut out = Vec::with_capacity(m * m);
                for i in 0..m {
                    for j in 0..m {
                        let x = -w + 2.0 * w * (i as f64 + 0.5) / m as f64;
                        let y = -w + 2.0 * w * (j as f64 + 0.5) / m as f64;
                        let z = -self.phi(&Vector3::new(x, y, 0.0));
                        out.push(Vector3::new(x, y, z));
                    }
                }
                out
            }
        }
    }

    /// Smallest `|∇φ|` over a shell of points within `band` of the sampled boundary.
    pub fn min_gradient_near_boundary(&self, n: usize, band: f64) -> f64 {
        self.sample_boundary(n)
            .iter()
            .flat_map(|p| {
                let nrm = self.normal(p);
                [-1.0, 0.0, 1.0].map(|k| self.gradient(&(p + nrm * (k * band))).norm())
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Right-handed orthonormal tangent pair for the unit normal `n`.
pub fn tangent_frame(n: &Vector3<f64>) -> [Vector3<f64>; 2] {
    let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - n * n.dot(&helper)).normalize();
    let e2 = n.cross(&e1);
    [e1, e2]
}

fn fibonacci_directions(n: usize) -> Vec<Vector3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Closed-form largest principal curvature of the ellipsoid with the given
/// semi-axes: `max_i a_i / min_{j != i} a_j²`.
pub fn ellipsoid_max_curvature(semi_axes: [f64; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let others = (0..3).filter(|&j| j != i).map(|j| semi_axes[j]).fold(f64::INFINITY, f64::min);
            semi_axes[i] / (others * others)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_curvature_is_inverse_radius() {
        let d = SmoothDomain::Ball { center: [0.3, 0.0, -1.0], radius: 2.0 };
        for p in d.sample_boundary(50) {
            let [k1, k2] = d.principal_curvatures(&p);
            assert!((k1 - 0.5).abs() < 1e-14 && (k2 - 0.5).abs() < 1e-14);
            assert!(d.phi(&p).abs() < 1e-14);
        }
    }

    #[test]
    fn ellipsoid_pole_curvature_oracle() {
        let axes = [1.0, 1.0, 2.0];
        let d = SmoothDomain::Ellipsoid { center: [0.0; 3], semi_axes: axes };
        let [k1, k2] = d.principal_curvatures(&Vector3::new(0.0, 0.0, 2.0));
        assert!((k1 - 2.0).abs() < 1e-14 && (k2 - 2.0).abs() < 1e-14);
        let [k1, k2] = d.principal_curvatures(&Vector3::new(1.0, 0.0, 0.0));
        assert!((k1 - 1.0).abs() < 1e-14 && (k2 - 0.25).abs() < 1e-14);
        assert_eq!(ellipsoid_max_curvature(axes), 2.0);
        assert_eq!(ellipsoid_max_curvature([1.0, 1.0, 0.5]), 4.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let fixtures = [
            SmoothDomain::unit_ball(),
            SmoothDomain::Ellipsoid { center: [0.1, 0.2, 0.3], semi_axes: [1.0, 0.7, 1.3] },
            SmoothDomain::PerturbedHalfSpace { amplitude: 0.1, length: 0.5, half_width: 1.0 },
        ];
        let p = Vector3::new(0.21, -0.13, 0.4);
        for d in fixtures {
            let g = d.gradient(&p);
            let h = d.hessian(&p);
            for i in 0..3 {
                let mut e = Vector3::zeros();
                e[i] = 1e-6;
                let fd = (d.phi(&(p + e)) - d.phi(&(p - e))) / 2e-6;
                assert!((fd - g[i]).abs() < 1e-8);
                let gd = (d.gradient(&(p + e)) - d.gradient(&(p - e))) / 2e-6;
                for j in 0..3 {
                    assert!((gd[j] - h[(j, i)]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn projection_lands_on_boundary() {
        let d = SmoothDomain::Ellipsoid { center: [0.0; 3], semi_axes: [1.0, 2.0, 0.5] };
        let q = d.project_to_boundary(&Vector3::new(0.3, 0.9, 0.4)).unwrap();
        assert!(d.phi(&q).abs() < 1e-12);
    }

    #[test]
    fn serde_tagged_fixture() {
        let d: SmoothDomain = serde_json::from_str(r#"{"fixture":"ball","radius":1.0}"#).unwrap();
        assert_eq!(d, SmoothDomain::unit_ball());
        let t: SmoothDomain = toml::from_str("fixture = \"half_space\"\nhalf_width = 1.0").unwrap();
        assert_eq!(t, SmoothDomain::HalfSpace { half_width: 1.0 });
    }

    #[test]
    fn gradient_nonvanishing_near_boundary() {
        assert!(SmoothDomain::unit_ball().min_gradient_near_boundary(200, 0.05) > 0.9);
    }
}
