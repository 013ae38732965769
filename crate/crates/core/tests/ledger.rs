use clamslice::ledger::{epsilon0_from, pigeonhole_constant, verify_chain, ConstantLedger};
use proptest::prelude::*;

fn ledger(c6: f64, c8: f64, c9: f64, eps0: Option<f64>) -> ConstantLedger {
    let mut l = ConstantLedger::default();
    l.set_constant(6, c6);
    l.set_constant(8, c8);
    l.set_constant(9, c9);
    l.eps0 = eps0;
    l
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn derived_eps0_closes_the_chain(a in -6.0f64..6.0, b in -6.0f64..6.0, c in -6.0f64..6.0) {
        let (c6, c8, c9) = (10f64.powf(a), 10f64.powf(b), 10f64.powf(c));
        let r = verify_chain(&ledger(c6, c8, c9, None)).unwrap();
        prop_assert!(r.all_pass, "{:?}", r.entries);
    }

    #[test]
    fn eps0_scales_inverse_square(c in -3.0f64..3.0, lambda in 0.01f64..100.0) {
        let base = 10f64.powf(c);
        let e1 = epsilon0_from(base, base, base).unwrap();
        let e2 = epsilon0_from(lambda * base, lambda * base, lambda * base).unwrap();
        prop_assert!((e2 * lambda * lambda - e1).abs() <= 1e-12 * e1);
    }

    #[test]
    fn headroom_shrinks_as_eps0_grows(eps in 1e-4f64..1.0) {
        let a = verify_chain(&ledger(1.0, 1.0, 1.0, Some(eps))).unwrap();
        let b = verify_chain(&ledger(1.0, 1.0, 1.0, Some(2.0 * eps))).unwrap();
        for (x, y) in a.entries.iter().zip(&b.entries) {
            prop_assert!(y.headroom <= x.headroom, "{} {} {}", x.name, x.headroom, y.headroom);
        }
    }
}

#[test]
fn reference_values() {
    assert_eq!(epsilon0_from(1.0, 1.0, 1.0).unwrap(), 1.0 / 32.0);
    assert_eq!(epsilon0_from(1.0, 2.0, 1.0).unwrap(), 1.0 / 64.0);
    assert_eq!(pigeonhole_constant(1.0 / 8.0, 1.0).unwrap(), 8.0);
    assert_eq!(pigeonhole_constant(1.0 / 8.0, 2.0).unwrap(), 64.0);
    let r = verify_chain(&ledger(1.0, 1.0, 1.0, None)).unwrap();
    let ii = r.entries.iter().find(|e| e.name == "ii").unwrap();
    assert_eq!((ii.lhs, ii.rhs), (0.25, 2.0));
}
