//! Flattens the unit sphere and an ellipsoid near a few boundary points.

use clamslice::charts::{build_chart, estimate_r0, pull_back_region, ChartOptions, SmoothDomain};
use clamslice::geometry::{build_clam, DEFAULT_MOLLIFIER_WIDTH};
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domains = [
        ("unit ball", SmoothDomain::unit_ball(), Vector3::new(0.0, 0.6, 0.8)),
        ("ellipsoid", SmoothDomain::Ellipsoid { center: [0.0; 3], semi_axes: [1.0, 0.8, 0.5] }, Vector3::new(1.0, 0.0, 0.0)),
    ];
    for (name, domain, base) in domains {
        let est = estimate_r0(&domain, 4000, 1e6)?;
        let chart = build_chart(&domain, &base, est.r0, &ChartOptions::default())?;
        println!(
            "{name}: kmax = {:.4}, r0 = {:.6}, distortion = {:.4} ({} pairs), round trip = {:.1e}",
            est.max_curvature,
            chart.r0,
            chart.verified_distortion,
            chart.pairs,
            chart.round_trip_residual(1000, 1)?
        );

        let y = Vector3::new(0.1, -0.05, 0.02) * chart.radius;
        let x = chart.inverse(&y)?;
        println!("  chart point {:?} <- physical {:?}", y.as_slice(), x.as_slice());

        let clam = build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 1024)?.with_scale(16.0 * chart.r0);
        let mesh = pull_back_region(&chart, &clam, 0.4, 16, 24)?;
        println!("  pulled-back folium s = 0.4: {} nodes, area {:.4e}", mesh.nodes.len(), mesh.area());
    }
    Ok(())
}
