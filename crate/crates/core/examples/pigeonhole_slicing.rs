//! Selects the spatial and temporal pigeonhole slices of a synthetic field and
//! checks the coarea identity on the same shell.

use clamslice::fields::{synth_divfree_with_model, Grid, SynthSpec};
use clamslice::geometry::{build_clam, DEFAULT_MOLLIFIER_WIDTH};
use clamslice::slicing::{
    fubini_identity_check, select_spatial_slice, select_temporal_slice, FubiniResolution, SliceReport, SpatialOptions,
    TEMPORAL_INTERVAL,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clam = build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 1024)?.with_scale(0.25);
    let spec = SynthSpec {
        seed: 3,
        grid: Grid::new([24, 24, 12], [-0.25, 0.25, -0.25, 0.25, 0.0, 0.25])?,
        nt: 41,
        ..Default::default()
    };
    let (u, model) = synth_divfree_with_model(&spec)?;

    let spatial = select_spatial_slice(&u, &clam, &SpatialOptions::default())?;
    println!(
        "s* = {:.4}: g = {:.4e} <= mean {:.4e}; shell bound {:.4e}",
        spatial.s_star, spatial.value, spatial.mean, spatial.shell_bound
    );
    let temporal = select_temporal_slice(&u, TEMPORAL_INTERVAL, |x| clam.contains(x))?;
    println!(
        "t0 = {:.4}: {:.4e} <= 8 x {:.4e} (margin {:.3})",
        temporal.t0, temporal.value, temporal.total_l4_4, temporal.margin
    );
    let report = SliceReport::new(spatial, temporal);
    println!("certificates pass: {}", report.pass());
    report.write_spatial_csv(std::io::stdout())?;

    let f = |x: &nalgebra::Vector3<f64>| model.eval(-0.5, x).norm_squared().powi(2);
    for (n_s, grid) in [(16, 32), (32, 64)] {
        let r = fubini_identity_check(f, &clam, (0.25, 0.5), &FubiniResolution::uniform(n_s, grid))?;
        println!("coarea ({n_s}, {grid}): volume {:.6e}, iterated {:.6e}, rel err {:.2e}", r.volume_integral, r.iterated_integral, r.relative_error);
    }
    Ok(())
}
