use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FieldError;

/// Uniform cell-centred box grid. `extents = [x0, x1, y0, y1, z0, z1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub extents: [f64; 6],
}

impl Grid {
    pub fn new(n: [usize; 3], extents: [f64; 6]) -> Result<Self, FieldError> {
        let g = Grid { nx: n[0], ny: n[1], nz: n[2], extents };
        g.validate()?;
        Ok(g)
    }

    /// `[0, 1]³` with `n³` cells.
    pub fn unit(n: usize) -> Self {
        Grid { nx: n, ny: n, nz: n, extents: [0.0, 1.0, 0.0, 1.0, 0.0, 1.0] }
    }

    /// Cube of half-width `half` about `center`.
    pub fn cube(n: usize, center: Vector3<f64>, half: f64) -> Self {
        let c = center;
        Grid { nx: n, ny: n, nz: n, extents: [c.x - half, c.x + half, c.y - half, c.y + half, c.z - half, c.z + half] }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(FieldError::InvalidGrid(format!("zero cell count {:?}", self.dims())));
        }
        for a in 0..3 {
            let (lo, hi) = (self.extents[2 * a], self.extents[2 * a + 1]);
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(FieldError::InvalidGrid(format!("axis {a} extent [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> [f64; 3] {
        let d = self.dims();
        [0, 1, 2].map(|a| (self.extents[2 * a + 1] - self.extents[2 * a]) / d[a] as f64)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.cell_volume() * self.len() as f64
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        let h = self.spacing();
        Vector3::new(
            self.extents[0] + (i as f64 + 0.5) * h[0],
            self.extents[2] + (j as f64 + 0.5) * h[1],
            self.extents[4] + (k as f64 + 0.5) * h[2],
        )
    }

    /// Cell centres in storage order (`x` fastest).
    pub fn centers(&self) -> Vec<Vector3<f64>> {
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.nz {
            for j in 0..self.ny {
                for i in 0..self.nx {
                    out.push(self.center(i, j, k));
                }
            }
        }
        out
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|a| {
            let (lo, hi) = (self.extents[2 * a], self.extents[2 * a + 1]);
            let slack = 1e-12 * (hi - lo);
            p[a] >= lo - slack && p[a] <= hi + slack
        })
    }

    // Lower cell index and weight along one axis; linear extrapolation in the
    // half cell next to each face.
    fn locate(&self, axis: usize, x: f64) -> (usize, f64) {
        let n = self.dims()[axis];
        if n == 1 {
            return (0, 0.0);
        }
        let h = self.spacing()[axis];
        let f = (x - self.extents[2 * axis]) / h - 0.5;
        let i0 = (f.floor().max(0.0) as usize).min(n - 2);
        (i0, f - i0 as f64)
    }
}

/// Velocity samples `U(t_n, x_ijk)` at `nt` uniform times on `[-1, 0]`.
/// Storage order is `[t][z][y][x][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    nt: usize,
    data: Vec<f64>,
    provenance: String,
}

impl SpaceTimeField {
    pub fn new(grid: Grid, nt: usize, data: Vec<f64>, provenance: impl Into<String>) -> Result<Self, FieldError> {
        grid.validate()?;
        if nt < 2 {
            return Err(FieldError::InvalidGrid(format!("need at least 2 time samples, got {nt}")));
        }
        let expected = grid.len() * nt * 3;
        if data.len() != expected {
            return Err(FieldError::DimensionMismatch { expected, found: data.len() });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(i));
        }
        Ok(SpaceTimeField { grid, nt, data, provenance: provenance.into() })
    }

    pub fn zeros(grid: Grid, nt: usize) -> Result<Self, FieldError> {
        Self::new(grid, nt, vec![0.0; grid.len() * nt.max(2) * 3], "zero")
    }

    /// Samples `f(t, x)` at every node.
    pub fn from_fn<F>(grid: Grid, nt: usize, provenance: impl Into<String>, f: F) -> Result<Self, FieldError>
    where
        F: Fn(f64, &Vector3<f64>) -> Vector3<f64> + Sync,
    {
        grid.validate()?;
        if nt < 2 {
            return Err(FieldError::InvalidGrid(format!("need at least 2 time samples, got {nt}")));
        }
        let centers = grid.centers();
        let mut data = vec![0.0; grid.len() * nt * 3];
        data.par_chunks_mut(grid.len() * 3).enumerate().for_each(|(n, slab)| {
            let t = time_of(n, nt);
            for (c, out) in centers.iter().zip(slab.chunks_exact_mut(3)) {
                let u = f(t, c);
                out.copy_from_slice(u.as_slice());
            }
        });
        Self::new(grid, nt, data, provenance)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn dt(&self) -> f64 {
        1.0 / (self.nt - 1) as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        time_of(n, self.nt)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nt).map(|n| self.time(n)).collect()
    }

    /// Components of time slice `n`, cell-major.
    pub fn slice(&self, n: usize) -> &[f64] {
        let m = self.grid.len() * 3;
        &self.data[n * m..(n + 1) * m]
    }

    pub fn value(&self, n: usize, i: usize, j: usize, k: usize) -> Vector3<f64> {
        let s = self.slice(n);
        let o = 3 * self.grid.index(i, j, k);
        Vector3::new(s[o], s[o + 1], s[o + 2])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.chunks_exact(3).map(|u| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()).fold(0.0, f64::max)
    }

    /// Trilinear interpolation in time slice `n`.
    pub fn sample_slice(&self, n: usize, p: &Vector3<f64>) -> Result<Vector3<f64>, FieldError> {
        let g = &self.grid;
        if !g.contains(p) {
            return Err(FieldError::OutOfGrid((*p).into()));
        }
        let (i, wx) = g.locate(0, p.x);
        let (j, wy) = g.locate(1, p.y);
        let (k, wz) = g.locate(2, p.z);
        let di = usize::from(g.nx > 1);
        let dj = usize::from(g.ny > 1);
        let dk = usize::from(g.nz > 1);
        let mut u = Vector3::zeros();
        for (ck, fz) in [(0, 1.0 - wz), (dk, wz)] {
            for (cj, fy) in [(0, 1.0 - wy), (dj, wy)] {
                for (ci, fx) in [(0, 1.0 - wx), (di, wx)] {
                    let w = fx * fy * fz;
                    if w != 0.0 {
                        u += self.value(n, i + ci, j + cj, k + ck) * w;
                    }
                }
            }
        }
        Ok(u)
    }

    /// Trilinear in space, linear in time.
    pub fn sample(&self, t: f64, p: &Vector3<f64>) -> Result<Vector3<f64>, FieldError> {
        if !(-1.0..=0.0).contains(&t) {
            return Err(FieldError::OutOfGrid([p.x, p.y, p.z]));
        }
        let f = (t + 1.0) * (self.nt - 1) as f64;
        let n0 = (f.floor() as usize).min(self.nt - 2);
        let w = f - n0 as f64;
        let a = self.sample_slice(n0, p)?;
        if w == 0.0 {
            return Ok(a);
        }
        Ok(a * (1.0 - w) + self.sample_slice(n0 + 1, p)? * w)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, FieldError> {
        let data = self.data.iter().map(|v| v * factor).collect();
        Self::new(self.grid, self.nt, data, self.provenance.clone())
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }
}

fn time_of(n: usize, nt: usize) -> f64 {
    if n + 1 == nt {
        0.0
    } else {
        -1.0 + n as f64 / (nt - 1) as f64
    }
}
