use nalgebra::Vector3;
use rayon::prelude::*;

use crate::charts::BilipschitzChart;

use super::{FieldError, Grid, SpaceTimeField};

/// `Ũ(t, y) = U(t, Φ⁻¹(y))` sampled at the cell centres of `target`, which is
/// given in chart coordinates.
pub fn pushforward(field: &SpaceTimeField, chart: &BilipschitzChart, target: &Grid) -> Result<SpaceTimeField, FieldError> {
    target.validate()?;
    let preimages = target
        .centers()
        .par_iter()
        .map(|y| {
            let miss = || FieldError::OutOfChart((*y).into());
            if y.norm() > chart.radius {
                return Err(miss());
            }
            let x = chart.inverse(y).map_err(|_| miss())?;
            if !field.grid().contains(&x) {
                return Err(miss());
            }
            Ok(x)
        })
        .collect::<Result<Vec<Vector3<f64>>, _>>()?;
    let cells = target.len();
    let mut data = vec![0.0; cells * field.nt() * 3];
    data.par_chunks_mut(cells * 3).enumerate().try_for_each(|(n, slab)| {
        for (x, out) in preimages.iter().zip(slab.chunks_exact_mut(3)) {
            out.copy_from_slice(field.sample_slice(n, x)?.as_slice());
        }
        Ok::<_, FieldError>(())
    })?;
    let b = chart.base_point;
    let tag = format!("pushforward[{}] at ({}, {}, {})", field.provenance(), b[0], b[1], b[2]);
    SpaceTimeField::new(*target, field.nt(), data, tag)
}

/// Pointwise bound on the trilinear interpolation error,
/// `(3/8) Σ_a h_a² max|∂_a² U|`, estimated by undivided second differences.
/// The factor 3/8 covers extrapolation in the outer half cells.
pub fn interpolation_error_bound(field: &SpaceTimeField) -> f64 {
    let g = field.grid();
    let dims = g.dims();
    let mut bound = 0.0f64;
    for n in 0..field.nt() {
        let mut per_axis = [0.0f64; 3];
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let idx = [i, j, k];
                    for a in 0..3 {
                        if dims[a] < 3 || idx[a] == 0 || idx[a] + 1 == dims[a] {
                            continue;
                        }
                        let (mut lo, mut hi) = (idx, idx);
                        lo[a] -= 1;
                        hi[a] += 1;
                        let d2 = field.value(n, lo[0], lo[1], lo[2]) - field.value(n, i, j, k) * 2.0
                            + field.value(n, hi[0], hi[1], hi[2]);
                        per_axis[a] = per_axis[a].max(d2.norm());
                    }
                }
            }
        }
        bound = bound.max(0.375 * per_axis.iter().sum::<f64>());
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{build_chart, ChartOptions, SmoothDomain};
    use crate::fields::{lp_lq_norm, whole_space, FULL_WINDOW};

    fn half_space_chart(r0: f64) -> BilipschitzChart {
        let d = SmoothDomain::HalfSpace { half_width: 1.0 };
        build_chart(&d, &Vector3::zeros(), r0, &ChartOptions { pairs: 200, ..Default::default() }).unwrap()
    }

    #[test]
    fn zero_field_pushes_to_zero() {
        let chart = half_space_chart(1.0 / 32.0);
        let f = SpaceTimeField::zeros(Grid::cube(8, Vector3::zeros(), 1.0), 3).unwrap();
        let target = Grid::cube(6, Vector3::zeros(), 0.5);
        let p = pushforward(&f, &chart, &target).unwrap();
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn isometric_chart_preserves_norms() {
        let chart = half_space_chart(1.0 / 32.0);
        let u = |t: f64, p: &Vector3<f64>| Vector3::new((3.0 * p.x).sin() + t, p.y * p.z, (2.0 * p.z).cos());
        let f = SpaceTimeField::from_fn(Grid::cube(40, Vector3::zeros(), 1.0), 3, "smooth", u).unwrap();
        let target = Grid::new([16, 16, 8], [-0.5, 0.5, -0.5, 0.5, 0.0, 0.5]).unwrap();
        let pushed = pushforward(&f, &chart, &target).unwrap();
        // the half-space chart is a rigid motion onto {x·ν ≥ 0}
        let frame = |y: &Vector3<f64>| chart.inverse(y).unwrap();
        let direct = SpaceTimeField::from_fn(target, 3, "direct", |t, y| u(t, &frame(y))).unwrap();
        let err = interpolation_error_bound(&f);
        let a = lp_lq_norm(&pushed, 4.0, 4.0, whole_space, FULL_WINDOW).unwrap();
        let b = lp_lq_norm(&direct, 4.0, 4.0, whole_space, FULL_WINDOW).unwrap();
        assert!((a - b).abs() <= err * target.volume().powf(0.25), "{a} {b} {err}");
        // closed-form (3/8) h² (9 + 4) for h = 1/20
        assert!(err > 0.0 && err <= 0.375 * 0.0025 * 13.0);
    }

    #[test]
    fn outside_the_chart_ball_is_rejected() {
        let chart = half_space_chart(1.0 / 64.0);
        let f = SpaceTimeField::zeros(Grid::cube(4, Vector3::zeros(), 1.0), 2).unwrap();
        let target = Grid::cube(4, Vector3::zeros(), 1.0);
        assert!(matches!(pushforward(&f, &chart, &target), Err(FieldError::OutOfChart(_))));
    }
}
