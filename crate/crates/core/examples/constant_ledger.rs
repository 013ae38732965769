//! Audits the constant chain for a few choices of constants.

use clamslice::ledger::{epsilon0_from, pigeonhole_constant, verify_chain, ConstantLedger};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("eps0(1, 1, 1) = {}", epsilon0_from(1.0, 1.0, 1.0)?);
    println!("eps0(1, 2, 1) = {}", epsilon0_from(1.0, 2.0, 1.0)?);
    println!("pigeonhole constant for ]-1, -7/8[ under a 2-bilipschitz map: {}", pigeonhole_constant(0.125, 2.0)?);

    let toml = "M = 1.0\nr0 = 0.015625\nkappa = 8.0\n[C]\n6 = 3.0\n8 = 0.5\n9 = 2.0\n";
    let mut ledger = ConstantLedger::from_toml(toml)?;
    for eps0 in [None, Some(1.0)] {
        ledger.eps0 = eps0;
        let report = verify_chain(&ledger)?;
        println!("\neps0 = {} ({}):", report.eps0, if report.eps0_derived { "derived" } else { "given" });
        for e in &report.entries {
            println!("  ({}) {:<40} lhs {:>10.4e} rhs {:>10.4e} headroom {:>8.3} {}", e.name, e.relation, e.lhs, e.rhs, e.headroom, if e.pass { "ok" } else { "FAIL" });
        }
        for note in &report.audit {
            println!("  note {}: stated {} vs generic {}", note.name, note.paper_factor, note.audit_factor);
        }
    }
    Ok(())
}
