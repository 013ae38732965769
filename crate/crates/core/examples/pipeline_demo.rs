//! Runs the full pipeline described by `demo.toml` and prints one line per base point.
//!
//! `cargo run --release --example pipeline_demo [config] [output dir]`

use clamslice::pipeline::{run_pipeline, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/demo.toml").into());
    let mut config = PipelineConfig::load(&path)?;
    if let Some(out) = args.next() {
        config.output = Some(out.into());
    }

    let report = run_pipeline(&config)?;
    println!("r0 = {}, field L4L4 on the domain = {:.5}", report.r0, report.field.norms.l4l4);
    for b in &report.base_points {
        println!(
            "#{:2} {:>7.3?}  distortion {:.4}  s* {:.3}  t0 {:+.3}  |a|+|b| {:.4} <= {:.4}  ledger {}",
            b.index,
            b.base_point,
            b.distortion,
            b.slices.s_star,
            b.slices.t0,
            b.boundary.combined,
            b.boundary.bound,
            b.ledger.all_pass
        );
    }
    println!(
        "uniform over base points: {} (r0 spread {:.1e}, distortion spread {:.1e}); all pass: {}",
        report.uniformity.pass, report.uniformity.r0_spread, report.uniformity.distortion_spread, report.all_pass
    );
    if let Some(dir) = &config.output {
        report.write_outputs(dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
