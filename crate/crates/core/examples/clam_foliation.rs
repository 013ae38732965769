//! Builds the clam body, runs its condition suite and prints a few folia.

use clamslice::geometry::{build_clam, check_clam, folium, z0, GeometryCheckConfig, RadialProfile, DEFAULT_MOLLIFIER_WIDTH};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clam = build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 4096)?;
    let [half_width, height] = clam.bounding_box();
    println!("clam: bottom z = {} |x'|^2, box {half_width:.5} x {height:.5}", clam.bottom_coef());

    for s in [0.0, 0.25, 0.5, 0.75] {
        let f = folium(&clam, s)?;
        println!(
            "  s = {s:4}: height {:.5}, max radius {:.5}, z0 = {}",
            f.height(),
            f.max_radius(),
            z0(&clam, s)?
        );
    }

    let report = check_clam(&clam, &GeometryCheckConfig { mc_samples: 1_000_000, ..Default::default() })?;
    println!("shell(1/4, 1/2) / V0 = {:.6} (19/64 = {:.6})", report.shell_ratio, 19.0 / 64.0);
    println!("c0 = {:.5}, John volume of V_1/4 = {:.5}", report.c0, report.john_volume_quarter);
    println!("all conditions pass: {}", report.all_pass);

    let mut profile = Vec::new();
    clam.profile.write_csv(&mut profile, 8)?;
    print!("{}", String::from_utf8(profile)?);
    Ok(())
}
