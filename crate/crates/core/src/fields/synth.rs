use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{lp_lq_norm, whole_space, FieldError, Grid, SpaceTimeField, FULL_WINDOW};

/// Parameters of [`synth_divfree`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub modes: usize,
    pub amplitude: f64,
    pub wall_adapted: bool,
    pub grid: Grid,
    pub nt: usize,
    /// Largest integer wavenumber per axis, relative to the box side.
    pub max_wavenumber: u32,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 0,
            modes: 8,
            amplitude: 1.0,
            wall_adapted: false,
            grid: Grid::unit(32),
            nt: 17,
            max_wavenumber: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Mode {
    k: [f64; 3],
    omega: f64,
    phase: f64,
    a: [f64; 3],
}

/// Closed-form `U = curl A` with `A = Σ a_m cos(k_m·x + ω_m t + φ_m)`,
/// multiplied by `z²` when wall adapted, times a normalizing factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivFreeModel {
    modes: Vec<Mode>,
    origin: [f64; 3],
    wall_adapted: bool,
    pub scale: f64,
}

impl DivFreeModel {
    fn potential(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64> {
        let d = x - Vector3::from(self.origin);
        self.modes.iter().fold(Vector3::zeros(), |acc, m| {
            let th = Vector3::from(m.k).dot(&d) + m.omega * t + m.phase;
            acc + Vector3::from(m.a) * th.cos()
        })
    }

    fn curl(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64> {
        let d = x - Vector3::from(self.origin);
        self.modes.iter().fold(Vector3::zeros(), |acc, m| {
            let k = Vector3::from(m.k);
            let th = k.dot(&d) + m.omega * t + m.phase;
            acc - k.cross(&Vector3::from(m.a)) * th.sin()
        })
    }

    pub fn eval(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64> {
        let u = if self.wall_adapted {
            // curl(z² A) = z² curl A + 2z e_z × A
            let a = self.potential(t, x);
            self.curl(t, x) * (x.z * x.z) + Vector3::new(-a.y, a.x, 0.0) * (2.0 * x.z)
        } else {
            self.curl(t, x)
        };
        u * self.scale
    }

    /// Analytic divergence, identically zero up to rounding.
    pub fn divergence(&self, t: f64, x: &Vector3<f64>) -> f64 {
        let d = x - Vector3::from(self.origin);
        let mut div = 0.0;
        for m in &self.modes {
            let k = Vector3::from(m.k);
            let a = Vector3::from(m.a);
            let th = k.dot(&d) + m.omega * t + m.phase;
            let c = k.cross(&a);
            let base = -c.dot(&k) * th.cos();
            if self.wall_adapted {
                // z² ∇·curl A + 2z (curl A)_z - 2z (curl A)_z
                let cz = -c.z * th.sin();
                div += x.z * x.z * base + 2.0 * x.z * cz - 2.0 * x.z * cz;
            } else {
                div += base;
            }
        }
        div * self.scale
    }
}

pub fn synth_model(spec: &SynthSpec) -> Result<DivFreeModel, FieldError> {
    if spec.modes == 0 {
        return Err(FieldError::InvalidSpec("modes must be at least 1".into()));
    }
    spec.grid.validate()?;
    let e = spec.grid.extents;
    let side = [e[1] - e[0], e[3] - e[2], e[5] - e[4]];
    let kmax = spec.max_wavenumber.max(1) as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let modes = (0..spec.modes)
        .map(|_| {
            let n = loop {
                let n: [i32; 3] = std::array::from_fn(|_| rng.gen_range(-kmax..=kmax));
                if n != [0, 0, 0] {
                    break n;
                }
            };
            Mode {
                k: std::array::from_fn(|i| TAU * n[i] as f64 / side[i]),
                omega: PI * rng.gen_range(-1.0..1.0),
                phase: TAU * rng.gen::<f64>(),
                a: std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
            }
        })
        .collect();
    Ok(DivFreeModel { modes, origin: [e[0], e[2], e[4]], wall_adapted: spec.wall_adapted, scale: 1.0 })
}

/// Samples a random divergence-free field rescaled to `‖U‖_{L⁴L⁴} = amplitude`.
pub fn synth_divfree(spec: &SynthSpec) -> Result<SpaceTimeField, FieldError> {
    synth_divfree_with_model(spec).map(|(f, _)| f)
}

/// As [`synth_divfree`], also returning the closed form with its scale set.
pub fn synth_divfree_with_model(spec: &SynthSpec) -> Result<(SpaceTimeField, DivFreeModel), FieldError> {
    let mut model = synth_model(spec)?;
    let tag = format!(
        "synth_divfree(seed={}, modes={}, amplitude={}, wall_adapted={})",
        spec.seed, spec.modes, spec.amplitude, spec.wall_adapted
    );
    let raw = SpaceTimeField::from_fn(spec.grid, spec.nt, tag, |t, x| model.eval(t, x))?;
    let norm = lp_lq_norm(&raw, 4.0, 4.0, whole_space, FULL_WINDOW)?;
    if norm == 0.0 {
        return Ok((raw, model));
    }
    model.scale = spec.amplitude / norm;
    Ok((raw.scaled(model.scale)?, model))
}

/// Central-difference divergence over interior cells, `max_abs ≤ constant · h`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub max_abs: f64,
    pub h: f64,
    pub constant: f64,
}

pub fn discrete_divergence(field: &SpaceTimeField) -> DivergenceReport {
    let g = field.grid();
    let sp = g.spacing();
    let mut max_abs = 0.0f64;
    for n in 0..field.nt() {
        for k in 1..g.nz.saturating_sub(1) {
            for j in 1..g.ny.saturating_sub(1) {
                for i in 1..g.nx.saturating_sub(1) {
                    let d = (field.value(n, i + 1, j, k).x - field.value(n, i - 1, j, k).x) / (2.0 * sp[0])
                        + (field.value(n, i, j + 1, k).y - field.value(n, i, j - 1, k).y) / (2.0 * sp[1])
                        + (field.value(n, i, j, k + 1).z - field.value(n, i, j, k - 1).z) / (2.0 * sp[2]);
                    max_abs = max_abs.max(d.abs());
                }
            }
        }
    }
    let h = sp.iter().copied().fold(0.0, f64::max);
    DivergenceReport { max_abs, h, constant: max_abs / h }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64, wall: bool) -> SynthSpec {
        SynthSpec { seed, modes: 6, amplitude: 0.01, wall_adapted: wall, grid: Grid::unit(16), nt: 5, max_wavenumber: 2 }
    }

    #[test]
    fn exact_amplitude() {
        for seed in 0..3 {
            let f = synth_divfree(&spec(seed, seed % 2 == 1)).unwrap();
            let v = lp_lq_norm(&f, 4.0, 4.0, whole_space, FULL_WINDOW).unwrap();
            assert!((v - 0.01).abs() < 1e-9 * 0.01, "{v}");
        }
    }

    #[test]
    fn analytic_divergence_vanishes_and_discrete_is_consistent() {
        let s = spec(7, false);
        let m = synth_model(&s).unwrap();
        let p = Vector3::new(0.3, 0.1, 0.9);
        assert!(m.divergence(-0.2, &p).abs() < 1e-12);
        let coarse = discrete_divergence(&synth_divfree(&s).unwrap());
        let fine = discrete_divergence(&synth_divfree(&SynthSpec { grid: Grid::unit(32), ..s }).unwrap());
        assert!(fine.max_abs < coarse.max_abs);
        assert!(fine.max_abs <= coarse.constant * fine.h);
    }

    #[test]
    fn wall_adapted_vanishes_on_the_wall() {
        let s = spec(3, true);
        let m = synth_model(&s).unwrap();
        for i in 0..20 {
            let p = Vector3::new(i as f64 / 19.0, (i * 7 % 19) as f64 / 19.0, 0.0);
            assert_eq!(m.eval(-0.5, &p).norm(), 0.0);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        assert_eq!(synth_divfree(&spec(11, false)).unwrap(), synth_divfree(&spec(11, false)).unwrap());
        assert_ne!(synth_divfree(&spec(11, false)).unwrap(), synth_divfree(&spec(12, false)).unwrap());
    }
}
