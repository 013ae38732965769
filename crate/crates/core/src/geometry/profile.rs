use serde::Serialize;

use crate::numerics::{bisect, gauss8};

use super::GeometryError;

/// Generating curve of a body of revolution about the z-axis.
///
/// The body is `{(x', z) : 0 <= z <= height(), |x'| <= radius(z)}`.
pub trait RadialProfile: Sync {
    /// Apex height; the profile lives on `[0, height()]`.
    fn height(&self) -> f64;
    /// Radius `r(z)`; zero outside `[0, height()]`.
    fn radius(&self, z: f64) -> f64;
    /// `dr/dz`.
    fn slope(&self, z: f64) -> f64;
    /// `d²r/dz²`.
    fn second(&self, z: f64) -> f64;
    /// Largest radius over the profile.
    fn max_radius(&self) -> f64;
    /// Height at which the largest radius is attained.
    fn equator_height(&self) -> f64;

    /// Height on the lower (increasing) branch with `radius(z) == rho`.
    /// Returns `None` when `rho` exceeds the maximal radius.
    fn lower_height(&self, rho: f64) -> Option<f64> {
        if rho <= 0.0 {
            return Some(0.0);
        }
        if rho > self.max_radius() {
            return None;
        }
        let top = self.equator_height();
        bisect(|z| self.radius(z) - rho, 0.0, top, 0.0).or(Some(top))
    }

    /// Outward unit normal of the surface in the meridian half-plane,
    /// returned as `(radial, vertical)` components.
    fn meridian_normal(&self, z: f64) -> (f64, f64) {
        let d = self.slope(z);
        if !d.is_finite() {
            return if z < 0.5 * self.height() { (0.0, -1.0) } else { (0.0, 1.0) };
        }
        let n = (1.0 + d * d).sqrt();
        (1.0 / n, -d / n)
    }
}

/// Smooth `C^infinity` step: 0 for `t <= 0`, 1 for `t >= 1`.
pub(crate) fn smooth_step(t: f64) -> f64 {
    let a = flat_exp(t);
    let b = flat_exp(1.0 - t);
    if a + b == 0.0 {
        return if t > 0.5 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

/// Derivative of [`smooth_step`] with respect to `t`.
pub(crate) fn smooth_step_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = flat_exp(t);
    let b = flat_exp(1.0 - t);
    let da = flat_exp_derivative(t);
    let db = flat_exp_derivative(1.0 - t);
    let den = a + b;
    if den == 0.0 {
        return 0.0;
    }
    (da * b + a * db) / (den * den)
}

fn flat_exp(t: f64) -> f64 {
    if t <= 1.0 / 700.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn flat_exp_derivative(t: f64) -> f64 {
    if t <= 1.0 / 700.0 {
        0.0
    } else {
        (-1.0 / t).exp() / (t * t)
    }
}

/// Radius-versus-height profile of the clam body.
///
/// Three zones, bottom to top:
/// * `[0, parab_zone_top]`: the tangency zone `z = c |x'|^(l+1)`
///   (the paraboloid `z = |x'|²/4` for `l = 1`);
/// * `blend_zone`: the derivative `r'` is blended between the two closed forms
///   with a `C^infinity` partition of unity and integrated;
/// * above the blend zone: a spherical cap centered on the axis with apex at
///   height `apex_height`.
#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub order: u32,
    pub bottom_coef: f64,
    pub parab_zone_top: f64,
    pub blend_zone: [f64; 2],
    pub cap_center_z: f64,
    pub cap_radius: f64,
    pub mollifier_width: f64,
    pub apex_height: f64,
    pub equator_z: f64,
    pub max_r: f64,
    #[serde(skip)]
    blend_table: Vec<f64>,
}

/// Height of the tangency zone top, and of the apex, for the unit clam.
pub const ZONE_TOP: f64 = 0.125;
pub const APEX_HEIGHT: f64 = 1.0;
/// Latest height at which the spherical cap may begin.
pub const CAP_FLOOR: f64 = 0.5;

impl Profile {
    /// Builds the profile for vanishing order `order` with blend width
    /// `mollifier_width` and `samples` table cells in the blend zone.
    pub(crate) fn build(order: u32, mollifier_width: f64, samples: usize) -> Result<Self, GeometryError> {
        if order < 1 {
            return Err(GeometryError::InvalidOrder(order));
        }
        if !(mollifier_width > 0.0 && ZONE_TOP + mollifier_width <= CAP_FLOOR) {
            return Err(GeometryError::BlendFailure {
                width: mollifier_width,
                reason: format!(
                    "blend zone [{ZONE_TOP}, {}] must lie inside [{ZONE_TOP}, {CAP_FLOOR}]",
                    ZONE_TOP + mollifier_width
                ),
            });
        }
        // c(l) puts the zone top at height 1/8 over |x'| = 1/sqrt(2)
        let bottom_coef = ZONE_TOP / 0.5f64.powf(0.5 * (order as f64 + 1.0));
        let samples = samples.max(16);
        let mut width = mollifier_width;
        let mut last_reason = String::new();
        for _ in 0..8 {
            match Self::try_build(order, bottom_coef, width, samples) {
                Ok(p) => {
                    if let Some(z) = p.blend_concavity_violation() {
                        last_reason = format!("r' increases near z = {z:.6} at width {width}");
                    } else {
                        return Ok(p);
                    }
                }
                Err(reason) => last_reason = reason,
            }
            width *= 0.5;
        }
        Err(GeometryError::BlendFailure { width: mollifier_width, reason: last_reason })
    }

    fn try_build(order: u32, bottom_coef: f64, width: f64, samples: usize) -> Result<Self, String> {
        let lo = ZONE_TOP;
        let hi = ZONE_TOP + width;
        let mut p = Profile {
            order,
            bottom_coef,
            parab_zone_top: lo,
            blend_zone: [lo, hi],
            cap_center_z: 0.0,
            cap_radius: 1.0,
            mollifier_width: width,
            apex_height: APEX_HEIGHT,
            equator_z: 0.0,
            max_r: 0.0,
            blend_table: Vec::new(),
        };
        // The blended profile lands on the cap at `hi` iff the psi'-weighted
        // mean of (bottom - cap) over the blend zone vanishes.
        let mismatch = |radius: f64| {
            let mut q = p.clone();
            q.set_cap(radius);
            let panels = 256;
            let h = (hi - lo) / panels as f64;
            (0..panels)
                .map(|k| {
                    let a = lo + k as f64 * h;
                    gauss8(|z| q.blend_weight_derivative(z) * (q.bottom(z) - q.cap(z)), a, a + h)
                })
                .sum::<f64>()
        };
        let r_min = 0.5 * (APEX_HEIGHT - lo) * (1.0 + 1e-9);
        let mut r_max = 2.0 * r_min;
        while mismatch(r_max) > 0.0 {
            r_max *= 2.0;
            if r_max > 1e6 {
                return Err("no cap radius closes the blend".into());
            }
        }
        let radius = bisect(mismatch, r_min, r_max, 0.0).ok_or("cap radius not bracketed")?;
        p.set_cap(radius);
        p.fill_table(samples);
        p.locate_equator();
        Ok(p)
    }

    fn set_cap(&mut self, radius: f64) {
        self.cap_radius = radius;
        self.cap_center_z = self.apex_height - radius;
    }

    fn fill_table(&mut self, cells: usize) {
        let [lo, hi] = self.blend_zone;
        let h = (hi - lo) / cells as f64;
        let mut table = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for k in 0..cells {
            let a = lo + k as f64 * h;
            acc += gauss8(|z| self.blend_integrand(z), a, a + h);
            table.push(acc);
        }
        self.blend_table = table;
    }

    fn locate_equator(&mut self) {
        let top = self.apex_height;
        let z = bisect(|z| self.slope(z), 1e-12, top * (1.0 - 1e-12), 0.0).unwrap_or(top);
        self.equator_z = z;
        self.max_r = self.radius(z);
    }

    fn blend_integrand(&self, z: f64) -> f64 {
        self.blend_weight_derivative(z) * (self.bottom(z) - self.cap(z))
    }

    fn blend_t(&self, z: f64) -> f64 {
        let [lo, hi] = self.blend_zone;
        (z - lo) / (hi - lo)
    }

    fn blend_weight(&self, z: f64) -> f64 {
        smooth_step(self.blend_t(z))
    }

    fn blend_weight_derivative(&self, z: f64) -> f64 {
        smooth_step_derivative(self.blend_t(z)) / self.mollifier_width
    }

    /// Blend correction `int_lo^z psi'(bottom - cap)`.
    fn blend_correction(&self, z: f64) -> f64 {
        let [lo, hi] = self.blend_zone;
        let cells = self.blend_table.len() - 1;
        let h = (hi - lo) / cells as f64;
        let k = (((z - lo) / h).floor() as isize).clamp(0, cells as isize - 1) as usize;
        let a = lo + k as f64 * h;
        self.blend_table[k] + gauss8(|x| self.blend_integrand(x), a, z)
    }

    /// Tangency-zone radius `(z / c)^(1/(l+1))`, extended past the zone top.
    pub fn bottom(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        if self.order == 1 {
            return 2.0 * z.sqrt();
        }
        (z / self.bottom_coef).powf(1.0 / (self.order as f64 + 1.0))
    }

    fn bottom_slope(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return f64::INFINITY;
        }
        self.bottom(z) / ((self.order as f64 + 1.0) * z)
    }

    fn bottom_second(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let k = self.order as f64 + 1.0;
        self.bottom(z) * (1.0 / k) * (1.0 / k - 1.0) / (z * z)
    }

    /// Spherical-cap radius; defined wherever the horizontal slice meets the sphere.
    pub fn cap(&self, z: f64) -> f64 {
        let u = self.apex_height - z;
        let v = u * (2.0 * self.cap_radius - u);
        if v <= 0.0 {
            0.0
        } else {
            v.sqrt()
        }
    }

    fn cap_slope(&self, z: f64) -> f64 {
        let c = self.cap(z);
        if c == 0.0 {
            return f64::NEG_INFINITY;
        }
        -(z - self.cap_center_z) / c
    }

    fn cap_second(&self, z: f64) -> f64 {
        let c = self.cap(z);
        if c == 0.0 {
            return f64::NEG_INFINITY;
        }
        -self.cap_radius * self.cap_radius / (c * c * c)
    }

    /// Largest `z` in the blend zone where `r'` fails to decrease, if any.
    fn blend_concavity_violation(&self) -> Option<f64> {
        let [lo, hi] = self.blend_zone;
        let n = 20_000;
        let mut prev = self.slope(lo);
        for i in 1..=n {
            let z = lo + (hi - lo) * i as f64 / n as f64;
            let d = self.slope(z);
            if d > prev + 1e-12 * prev.abs().max(1.0) {
                return Some(z);
            }
            prev = d;
        }
        None
    }

    /// Samples `(z, r(z))` at `n + 1` equispaced heights.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|i| {
                let z = self.apex_height * i as f64 / n as f64;
                (z, self.radius(z))
            })
            .collect()
    }

    /// Writes the profile as CSV with columns `z,r`.
    pub fn write_csv<W: std::io::Write>(&self, out: W, n: usize) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["z", "r"])?;
        for (z, r) in self.samples(n) {
            w.write_record([format!("{z:.17e}"), format!("{r:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl RadialProfile for Profile {
    fn height(&self) -> f64 {
        self.apex_height
    }

    fn radius(&self, z: f64) -> f64 {
        let [lo, hi] = self.blend_zone;
        if z <= 0.0 || z >= self.apex_height {
            0.0
        } else if z <= lo {
            self.bottom(z)
        } else if z >= hi {
            self.cap(z)
        } else {
            let w = self.blend_weight(z);
            (1.0 - w) * self.bottom(z) + w * self.cap(z) + self.blend_correction(z)
        }
    }

    fn slope(&self, z: f64) -> f64 {
        let [lo, hi] = self.blend_zone;
        if z <= lo {
            self.bottom_slope(z)
        } else if z >= hi {
            self.cap_slope(z)
        } else {
            let w = self.blend_weight(z);
            (1.0 - w) * self.bottom_slope(z) + w * self.cap_slope(z)
        }
    }

    fn second(&self, z: f64) -> f64 {
        let [lo, hi] = self.blend_zone;
        if z <= lo {
            self.bottom_second(z)
        } else if z >= hi {
            self.cap_second(z)
        } else {
            let w = self.blend_weight(z);
            let dw = self.blend_weight_derivative(z);
            (1.0 - w) * self.bottom_second(z)
                + w * self.cap_second(z)
                + dw * (self.cap_slope(z) - self.bottom_slope(z))
        }
    }

    fn max_radius(&self) -> f64 {
        self.max_r
    }

    fn equator_height(&self) -> f64 {
        self.equator_z
    }
}

/// A ball of radius `radius` resting on the plane `z = 0`; test fixture.
#[derive(Debug, Clone, Copy)]
pub struct BallProfile {
    pub radius: f64,
}

impl RadialProfile for BallProfile {
    fn height(&self) -> f64 {
        2.0 * self.radius
    }

    fn radius(&self, z: f64) -> f64 {
        let v = z * (2.0 * self.radius - z);
        if v <= 0.0 {
            0.0
        } else {
            v.sqrt()
        }
    }

    fn slope(&self, z: f64) -> f64 {
        let r = RadialProfile::radius(self, z);
        if r == 0.0 {
            return if z < self.radius { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        (self.radius - z) / r
    }

    fn second(&self, z: f64) -> f64 {
        let r = RadialProfile::radius(self, z);
        -self.radius * self.radius / (r * r * r)
    }

    fn max_radius(&self) -> f64 {
        self.radius
    }

    fn equator_height(&self) -> f64 {
        self.radius
    }
}

/// The profile dilated about the origin by `factor`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledProfile<'a, P: RadialProfile + ?Sized> {
    pub inner: &'a P,
    pub factor: f64,
}

impl<'a, P: RadialProfile + ?Sized> ScaledProfile<'a, P> {
    pub fn new(inner: &'a P, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl<P: RadialProfile + ?Sized> RadialProfile for ScaledProfile<'_, P> {
    fn height(&self) -> f64 {
        self.factor * self.inner.height()
    }

    fn radius(&self, z: f64) -> f64 {
        self.factor * self.inner.radius(z / self.factor)
    }

    fn slope(&self, z: f64) -> f64 {
        self.inner.slope(z / self.factor)
    }

    fn second(&self, z: f64) -> f64 {
        self.inner.second(z / self.factor) / self.factor
    }

    fn max_radius(&self) -> f64 {
        self.factor * self.inner.max_radius()
    }

    fn equator_height(&self) -> f64 {
        self.factor * self.inner.equator_height()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Profile {
        Profile::build(1, 0.125, 4096).unwrap()
    }

    #[test]
    fn smooth_step_is_a_partition_of_unity() {
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let s = smooth_step(t) + smooth_step(1.0 - t);
            assert!((s - 1.0).abs() < 1e-15, "t = {t}");
        }
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
    }

    #[test]
    fn smooth_step_derivative_matches_difference() {
        for &t in &[0.1, 0.3, 0.5, 0.77, 0.95] {
            let h = 1e-6;
            let fd = (smooth_step(t + h) - smooth_step(t - h)) / (2.0 * h);
            assert!((fd - smooth_step_derivative(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn paraboloid_zone_is_exact() {
        let p = unit();
        // z = r²/4: r = 0.2 sits at height 0.01
        assert!((p.radius(0.01) - 0.2).abs() < 1e-15);
        assert_eq!(p.radius(0.0), 0.0);
        assert_eq!(p.radius(p.apex_height), 0.0);
        assert!((p.radius(ZONE_TOP) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn blend_lands_on_cap() {
        let p = unit();
        let [_, hi] = p.blend_zone;
        let inside = p.radius(hi - 1e-12);
        assert!((inside - p.cap(hi)).abs() < 1e-10, "{inside} vs {}", p.cap(hi));
        assert!(p.blend_correction(hi).abs() < 1e-12);
    }

    #[test]
    fn slope_is_derivative_of_radius() {
        let p = unit();
        for &z in &[0.05, 0.13, 0.17, 0.2, 0.24, 0.4, 0.9] {
            let h = 1e-7;
            let fd = (p.radius(z + h) - p.radius(z - h)) / (2.0 * h);
            assert!((fd - p.slope(z)).abs() < 1e-6 * (1.0 + fd.abs()), "z = {z}: {fd} vs {}", p.slope(z));
        }
    }

    #[test]
    fn rejects_order_zero_and_wide_blends() {
        assert!(matches!(Profile::build(0, 0.1, 64), Err(GeometryError::InvalidOrder(0))));
        assert!(matches!(Profile::build(1, 0.5, 64), Err(GeometryError::BlendFailure { .. })));
        assert!(matches!(Profile::build(1, 0.0, 64), Err(GeometryError::BlendFailure { .. })));
    }

    #[test]
    fn higher_orders_build() {
        for order in 2..=4 {
            let p = Profile::build(order, 0.125, 2048).unwrap();
            assert!((p.radius(ZONE_TOP) - 0.5f64.sqrt()).abs() < 1e-14);
            assert!(p.max_r > 0.5f64.sqrt());
        }
    }

    #[test]
    fn lower_height_inverts_radius() {
        let p = unit();
        for &rho in &[0.0, 0.1, 0.5, 0.7] {
            let z = p.lower_height(rho).unwrap();
            assert!((p.radius(z) - rho).abs() < 1e-14);
        }
        assert!(p.lower_height(p.max_r * 1.01).is_none());
    }

    #[test]
    fn ball_profile_slope() {
        let b = BallProfile { radius: 2.0 };
        assert!((b.radius(2.0) - 2.0).abs() < 1e-15);
        assert_eq!(b.slope(2.0), 0.0);
        let s = ScaledProfile::new(&b, 0.5);
        assert!((s.radius(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(s.height(), 2.0);
    }
}
