use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::domain::{tangent_frame, SmoothDomain};
use super::ChartError;

/// Largest pairwise distortion a shipped chart may have.
pub const MAX_DISTORTION: f64 = 2.0;
/// Chart domain radius in units of `r₀`.
pub const CHART_RADIUS_FACTOR: f64 = 32.0;

#[derive(Debug, Clone, Serialize)]
pub struct R0Estimate {
    pub r0: f64,
    pub max_curvature: f64,
    pub reach_lower_bound: f64,
    pub samples: usize,
}

/// Uniform chart radius `r₀ = reach / 64` with `reach >= 1 / sup|κ|`
/// over a deterministic boundary sample (capped by the box scale for flat
/// boundaries).
pub fn estimate_r0(domain: &SmoothDomain, curvature_samples: usize, curvature_cap: f64) -> Result<R0Estimate, ChartError> {
    let pts = domain.sample_boundary(curvature_samples);
    let kmax = pts
        .par_iter()
        .map(|p| {
            let [a, b] = domain.principal_curvatures(p);
            a.abs().max(b.abs())
        })
        .reduce(|| 0.0, f64::max);
    if kmax > curvature_cap || !kmax.is_finite() {
        return Err(ChartError::CurvatureBlowup { curvature: kmax, cap: curvature_cap });
    }
    let cap = domain.box_scale();
    let reach = if kmax * cap > 1.0 { 1.0 / kmax } else { cap };
    Ok(R0Estimate { r0: reach / 64.0, max_curvature: kmax, reach_lower_bound: reach, samples: pts.len() })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ChartOptions {
    pub pairs: usize,
    pub seed: u64,
    pub shrink_budget: u32,
    pub surface_tol: f64,
}

impl Default for ChartOptions {
    fn default() -> Self {
        Self { pairs: 10_000, seed: 0, shrink_budget: 8, surface_tol: 1e-10 }
    }
}

/// Graph-flattening chart `Φ(p) = (u, t - h(u))` near a boundary point, in
/// the frame `(e₁, e₂, ν)` with `ν` the inward normal at the base point.
#[derive(Debug, Clone, Serialize)]
pub struct BilipschitzChart {
    pub base_point: [f64; 3],
    pub tangent: [[f64; 3]; 2],
    pub inward_normal: [f64; 3],
    pub r0: f64,
    /// Validity radius `32 r₀`.
    pub radius: f64,
    /// `max(max ratio, 1 / min ratio)` over the sampled pairs.
    pub verified_distortion: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Singular-value bound `(g + sqrt(g² + 4)) / 2` from the sampled `g = sup|∇h|`.
    pub gradient_bound: f64,
    pub pairs: usize,
    /// Set when `r₀` had to be halved to meet the distortion bound.
    pub shrunk: bool,
    #[serde(skip)]
    domain: SmoothDomain,
}

/// Builds and verifies the flattening chart at `base`, halving `r0` (up to
/// `shrink_budget` times) until the sampled distortion is at most 2.
pub fn build_chart(
    domain: &SmoothDomain,
    base: &Vector3<f64>,
    r0: f64,
    opts: &ChartOptions,
) -> Result<BilipschitzChart, ChartError> {
    let residual = domain.phi(base).abs();
    if residual > opts.surface_tol {
        return Err(ChartError::NotOnBoundary { residual });
    }
    let mut r = r0;
    let mut last = f64::INFINITY;
    for attempt in 0..=opts.shrink_budget {
        let mut chart = BilipschitzChart::frame(domain, base, r);
        match chart.verify(opts) {
            Ok(d) if d <= MAX_DISTORTION => {
                chart.shrunk = attempt > 0;
                return Ok(chart);
            }
            Ok(d) => last = d,
            Err(_) => last = f64::INFINITY,
        }
        r *= 0.5;
    }
    Err(ChartError::DistortionExceeded { distortion: last, r0 })
}

impl BilipschitzChart {
    fn frame(domain: &SmoothDomain, base: &Vector3<f64>, r0: f64) -> Self {
        let n = domain.normal(base);
        let nu = -n;
        let [e1, e2] = tangent_frame(&nu);
        BilipschitzChart {
            base_point: (*base).into(),
            tangent: [e1.into(), e2.into()],
            inward_normal: nu.into(),
            r0,
            radius: CHART_RADIUS_FACTOR * r0,
            verified_distortion: f64::NAN,
            max_ratio: f64::NAN,
            min_ratio: f64::NAN,
            gradient_bound: f64::NAN,
            pairs: 0,
            shrunk: false,
            domain: domain.clone(),
        }
    }

    pub fn domain(&self) -> &SmoothDomain {
        &self.domain
    }

    fn base(&self) -> Vector3<f64> {
        Vector3::from(self.base_point)
    }

    fn e(&self, i: usize) -> Vector3<f64> {
        Vector3::from(self.tangent[i])
    }

    fn nu(&self) -> Vector3<f64> {
        Vector3::from(self.inward_normal)
    }

    /// Height `h(u)` of `∂Ω` above the tangent plane along `ν`.
    pub fn height(&self, u: Vector2<f64>) -> Result<f64, ChartError> {
        let q = self.base() + self.e(0) * u.x + self.e(1) * u.y;
        let nu = self.nu();
        let mut t = 0.0;
        for _ in 0..60 {
            let p = q + nu * t;
            let f = self.domain.phi(&p);
            let df = self.domain.gradient(&p).dot(&nu);
            if df.abs() < 1e-14 {
                break;
            }
            let step = f / df;
            t -= step;
            if step.abs() <= 1e-16 * (1.0 + t.abs()) {
                return Ok(t);
            }
        }
        let p = q + nu * t;
        if self.domain.phi(&p).abs() < 1e-13 && t.is_finite() {
            Ok(t)
        } else {
            Err(ChartError::GraphFailure { u: [u.x, u.y] })
        }
    }

    /// Gradient of `h` by the implicit function theorem.
    pub fn height_gradient(&self, u: Vector2<f64>) -> Result<Vector2<f64>, ChartError> {
        let t = self.height(u)?;
        let p = self.base() + self.e(0) * u.x + self.e(1) * u.y + self.nu() * t;
        let g = self.domain.gradient(&p);
        let gn = g.dot(&self.nu());
        Ok(Vector2::new(-g.dot(&self.e(0)) / gn, -g.dot(&self.e(1)) / gn))
    }

    pub fn forward(&self, p: &Vector3<f64>) -> Result<Vector3<f64>, ChartError> {
        let d = p - self.base();
        let u = Vector2::new(d.dot(&self.e(0)), d.dot(&self.e(1)));
        let t = d.dot(&self.nu());
        Ok(Vector3::new(u.x, u.y, t - self.height(u)?))
    }

    pub fn inverse(&self, y: &Vector3<f64>) -> Result<Vector3<f64>, ChartError> {
        let h = self.height(Vector2::new(y.x, y.y))?;
        Ok(self.base() + self.e(0) * y.x + self.e(1) * y.y + self.nu() * (y.z + h))
    }

    /// Uniform sample of `B_radius(x⋆) ∩ Ω` by rejection, drawn in the chart
    /// frame so that congruent base points see congruent samples.
    pub fn sample_domain_points(&self, n: usize, seed: u64) -> Vec<Vector3<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        let base = self.base();
        let (e1, e2, nu) = (self.e(0), self.e(1), self.nu());
        let mut tries = 0usize;
        while out.len() < n && tries < 1000 * n.max(1) {
            tries += 1;
            let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if v.norm_squared() > 1.0 {
                continue;
            }
            let p = base + (e1 * v.x + e2 * v.y + nu * v.z) * self.radius;
            if self.domain.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    fn verify(&mut self, opts: &ChartOptions) -> Result<f64, ChartError> {
        let pts = self.sample_domain_points(2 * opts.pairs, opts.seed);
        if pts.len() < 2 {
            return Err(ChartError::GraphFailure { u: [0.0, 0.0] });
        }
        let images = pts.iter().map(|p| self.forward(p)).collect::<Result<Vec<_>, _>>()?;
        let half = pts.len() / 2;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for k in 0..half {
            let d = (pts[k] - pts[k + half]).norm();
            if d == 0.0 {
                continue;
            }
            let r = (images[k] - images[k + half]).norm() / d;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        // |∇h| on a polar grid over the validity disc and under every sample
        let mut g: f64 = 0.0;
        for p in &pts {
            let d = p - self.base();
            let grad = self.height_gradient(Vector2::new(d.dot(&self.e(0)), d.dot(&self.e(1))))?;
            g = g.max(grad.norm());
        }
        for i in 0..=24 {
            let rho = self.radius * i as f64 / 24.0;
            for k in 0..32 {
                let th = std::f64::consts::TAU * k as f64 / 32.0;
                if let Ok(grad) = self.height_gradient(Vector2::new(rho * th.cos(), rho * th.sin())) {
                    g = g.max(grad.norm());
                }
            }
        }
        self.max_ratio = hi;
        self.min_ratio = lo;
        self.pairs = half;
        self.gradient_bound = 0.5 * (g + (g * g + 4.0).sqrt());
        self.verified_distortion = hi.max(1.0 / lo).max(self.gradient_bound);
        Ok(self.verified_distortion)
    }

    /// Largest `|Φ⁻¹(Φ(p)) - p|` over sampled points of the validity ball.
    pub fn round_trip_residual(&self, n: usize, seed: u64) -> Result<f64, ChartError> {
        let mut worst: f64 = 0.0;
        for p in self.sample_domain_points(n, seed) {
            let q = self.inverse(&self.forward(&p)?)?;
            worst = worst.max((q - p).norm());
        }
        Ok(worst)
    }

    /// Largest `|Φ(p)³|` over sampled boundary points inside the validity ball.
    pub fn boundary_flatness(&self, n: usize) -> Result<f64, ChartError> {
        let mut worst: f64 = 0.0;
        let m = (n as f64).sqrt().ceil() as usize;
        for i in 0..m {
            for k in 0..m {
                let rho = 0.999 * self.radius * (i as f64 + 0.5) / m as f64;
                let th = std::f64::consts::TAU * k as f64 / m as f64;
                let u = Vector2::new(rho * th.cos(), rho * th.sin());
                let Ok(p) = self.inverse(&Vector3::new(u.x, u.y, 0.0)) else { continue };
                if (p - self.base()).norm() > self.radius {
                    continue;
                }
                worst = worst.max(self.forward(&p)?.z.abs());
            }
        }
        Ok(worst)
    }
}
