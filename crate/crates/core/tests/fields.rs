use clamslice::charts::{build_chart, estimate_r0, ChartOptions, SmoothDomain};
use clamslice::fields::{
    load_field, lp_lq_norm, pushforward, save_field, synth_divfree, whole_space, Grid, SpaceTimeField, SynthSpec,
    FULL_WINDOW,
};
use nalgebra::Vector3;
use proptest::prelude::*;

// |U|⁴ = e^{4x} (1+y²)⁴ cos⁴z (2+t)⁴ factorizes, so the exact norm is a product
// of one-dimensional integrals.
fn separable(t: f64, p: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(p.x.exp() * (1.0 + p.y * p.y) * p.z.cos() * (2.0 + t), 0.0, 0.0)
}

fn separable_exact() -> f64 {
    let ix = (4f64.exp() - 1.0) / 4.0;
    let iy = 1.0 + 4.0 / 3.0 + 6.0 / 5.0 + 4.0 / 7.0 + 1.0 / 9.0;
    let iz = 3.0 / 8.0 + 2f64.sin() / 4.0 + 4f64.sin() / 32.0;
    let it = 31.0 / 5.0;
    (ix * iy * iz * it).powf(0.25)
}

#[test]
fn l4l4_quadrature_converges_at_second_order() {
    let exact = separable_exact();
    let errs: Vec<f64> = [8usize, 16, 32]
        .iter()
        .map(|&n| {
            let f = SpaceTimeField::from_fn(Grid::unit(n), n + 1, "separable", separable).unwrap();
            (lp_lq_norm(&f, 4.0, 4.0, whole_space, FULL_WINDOW).unwrap() - exact).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate >= 1.9, "rate {rate}, errors {errs:?}");
    }
}

#[test]
fn subregion_norm_is_smaller() {
    let f = synth_divfree(&SynthSpec { seed: 5, grid: Grid::unit(12), nt: 5, ..Default::default() }).unwrap();
    let regions: [fn(&Vector3<f64>) -> bool; 3] =
        [|p| p.z < 0.5, |p| (p - Vector3::repeat(0.5)).norm() < 0.3, |p| p.x + p.y > 1.2];
    for (p, q) in [(4.0, 4.0), (f64::INFINITY, 2.0), (2.0, f64::INFINITY), (1.0, 3.0)] {
        let full = lp_lq_norm(&f, p, q, whole_space, FULL_WINDOW).unwrap();
        for r in regions {
            assert!(lp_lq_norm(&f, p, q, r, FULL_WINDOW).unwrap() <= full);
        }
    }
}

#[test]
fn stf_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.stf");
    let f = synth_divfree(&SynthSpec { seed: 9, wall_adapted: true, grid: Grid::unit(6), nt: 4, ..Default::default() })
        .unwrap();
    save_field(&f, &path).unwrap();
    let g = load_field(&path).unwrap();
    assert!(f.data().iter().zip(g.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(f.provenance(), g.provenance());
}

#[test]
fn unit_ball_pushforward_inflates_l4_by_at_most_two() {
    let ball = SmoothDomain::unit_ball();
    let r0 = estimate_r0(&ball, 2000, 1e6).unwrap().r0;
    let base = Vector3::new(0.0, 0.0, 1.0);
    let chart = build_chart(&ball, &base, r0, &ChartOptions { pairs: 2000, ..Default::default() }).unwrap();
    let rad = chart.radius;
    let field_grid = Grid::cube(48, base, 2.2 * rad);
    let u = |t: f64, p: &Vector3<f64>| {
        let d = (p - base) / rad;
        Vector3::new((3.0 * d.x).sin(), d.y * d.z, (1.0 + t) * (2.0 * d.z).cos())
    };
    let f = SpaceTimeField::from_fn(field_grid, 5, "smooth", u).unwrap();
    let h = rad / 3f64.sqrt();
    let target = Grid::new([16, 16, 16], [-h, h, -h, h, -h, h]).unwrap();
    let pushed = pushforward(&f, &chart, &target).unwrap();
    let lhs = lp_lq_norm(&pushed, 4.0, 4.0, whole_space, FULL_WINDOW).unwrap();
    let in_target = |p: &Vector3<f64>| chart.forward(p).map(|y| y.amax() <= h).unwrap_or(false);
    let source = lp_lq_norm(&f, 4.0, 4.0, in_target, FULL_WINDOW).unwrap();
    assert!(lhs <= 2.0 * source + 1e-3, "{lhs} vs {source}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn scaling_is_linear(c in 0.01f64..10.0, seed in 0u64..1000) {
        let f = synth_divfree(&SynthSpec { seed, modes: 3, grid: Grid::unit(6), nt: 3, ..Default::default() }).unwrap();
        let a = lp_lq_norm(&f, 4.0, 4.0, whole_space, FULL_WINDOW).unwrap();
        let b = lp_lq_norm(&f.scaled(c).unwrap(), 4.0, 4.0, whole_space, FULL_WINDOW).unwrap();
        prop_assert!((b - c * a).abs() <= 1e-12 * c * a);
    }
}
