//! Synthesizes a divergence-free field, stores it as STF1 and reports its norms.

use clamslice::fields::{
    discrete_divergence, load_field, lp_lq_norm, norm_report, save_field, synth_divfree, whole_space, Grid, SynthSpec,
    FULL_WINDOW,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SynthSpec {
        seed: 42,
        modes: 6,
        amplitude: 0.05,
        wall_adapted: true,
        grid: Grid::new([32, 32, 16], [-1.0, 1.0, -1.0, 1.0, 0.0, 1.0])?,
        nt: 41,
        ..Default::default()
    };
    let u = synth_divfree(&spec)?;

    let path = std::env::temp_dir().join("clamslice_field_norms.stf");
    save_field(&u, &path)?;
    let u = load_field(&path)?;
    println!("{} ({} bytes)", u.provenance(), std::fs::metadata(&path)?.len());

    let r = norm_report(&u, whole_space)?;
    println!("L4L4 = {:.6}, LinfL2 = {:.6}, L2H1 = {:.6}, M = {:.6}", r.l4l4, r.linf_l2, r.l2_h1dot, r.m);

    let lower = lp_lq_norm(&u, 4.0, 4.0, |x| x.z < 0.5, FULL_WINDOW)?;
    let late = lp_lq_norm(&u, 4.0, 4.0, whole_space, (-0.5, 0.0))?;
    println!("L4L4 on z < 1/2: {lower:.6}; on t > -1/2: {late:.6}");
    println!("L2L8 = {:.6}", lp_lq_norm(&u, 2.0, 8.0, whole_space, FULL_WINDOW)?);

    let div = discrete_divergence(&u);
    println!("max |div| = {:.2e} at h = {} (ratio {:.3})", div.max_abs, div.h, div.constant);
    std::fs::remove_file(path)?;
    Ok(())
}
