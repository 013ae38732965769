//! The constant chain from the boundary data to the smallness of the
//! correction term, evaluated over user-supplied constants.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("constant {name} must be positive, got {value}")]
    NonPositiveConstant { name: String, value: f64 },
    #[error("missing constant {0}")]
    MissingConstant(String),
    #[error("unknown constant index {0:?}, expected 0..=13")]
    UnknownConstant(String),
    #[error("kappa = {0} outside ]0, 8]")]
    KappaOutOfRange(f64),
    #[error("invalid pigeonhole input: {0}")]
    NonPositive(String),
    #[error("cannot parse ledger: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Comparisons `lhs ≤ rhs` pass within this many ulps, so that relations
/// which are equalities at the derived `ε₀` are not lost to rounding.
pub const ULP_SLACK: f64 = 8.0 * f64::EPSILON;

/// Constants of the chain. `C` is keyed by index `"0"`..`"13"`; `eps0`
/// defaults to [`epsilon0_from`] of `C6, C8, C9`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantLedger {
    #[serde(rename = "M")]
    pub m: f64,
    pub r0: f64,
    #[serde(default)]
    pub eps0: Option<f64>,
    #[serde(rename = "C")]
    pub c: BTreeMap<String, f64>,
    pub kappa: f64,
    /// Relative widening of every input in interval mode; 0 disables it.
    #[serde(default)]
    pub interval_radius: f64,
}

impl Default for ConstantLedger {
    fn default() -> Self {
        ConstantLedger {
            m: 1.0,
            r0: 1.0 / 64.0,
            eps0: None,
            c: [("6", 1.0), ("8", 1.0), ("9", 1.0)].iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            kappa: 8.0,
            interval_radius: 0.0,
        }
    }
}

impl ConstantLedger {
    pub fn from_json(text: &str) -> Result<Self, LedgerError> {
        serde_json::from_str(text).map_err(|e| LedgerError::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self, LedgerError> {
        toml::from_str(text).map_err(|e| LedgerError::Parse(e.to_string()))
    }

    /// Reads JSON or TOML, chosen by extension (`.json` or anything else).
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LedgerError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let ledger = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        ledger.validate()?;
        Ok(ledger)
    }

    pub fn constant(&self, i: u8) -> Result<f64, LedgerError> {
        self.c.get(&i.to_string()).copied().ok_or_else(|| LedgerError::MissingConstant(format!("C{i}")))
    }

    pub fn set_constant(&mut self, i: u8, value: f64) {
        self.c.insert(i.to_string(), value);
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LedgerError::NonPositiveConstant { name: name.into(), value: v })
            }
        };
        positive("M", self.m)?;
        positive("r0", self.r0)?;
        if let Some(e) = self.eps0 {
            positive("eps0", e)?;
        }
        for (k, v) in &self.c {
            match k.parse::<u8>() {
                Ok(i) if i <= 13 => positive(&format!("C{i}"), *v)?,
                _ => return Err(LedgerError::UnknownConstant(k.clone())),
            }
        }
        for i in [6, 8, 9] {
            self.constant(i)?;
        }
        if !(self.kappa > 0.0 && self.kappa <= 8.0) {
            return Err(LedgerError::KappaOutOfRange(self.kappa));
        }
        if !(self.interval_radius >= 0.0 && self.interval_radius < 1.0) {
            return Err(LedgerError::NonPositiveConstant { name: "interval_radius".into(), value: self.interval_radius });
        }
        Ok(())
    }

    /// Given `ε₀`, or the largest value allowed by the smallness condition.
    pub fn effective_eps0(&self) -> Result<f64, LedgerError> {
        match self.eps0 {
            Some(e) => Ok(e),
            None => epsilon0_from(self.constant(6)?, self.constant(8)?, self.constant(9)?),
        }
    }
}

/// `min(1/C8, 1/C9) / (32 C6)`.
pub fn epsilon0_from(c6: f64, c8: f64, c9: f64) -> Result<f64, LedgerError> {
    for (name, v) in [("C6", c6), ("C8", c8), ("C9", c9)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(LedgerError::NonPositiveConstant { name: name.into(), value: v });
        }
    }
    Ok((1.0 / c8).min(1.0 / c9) / (32.0 * c6))
}

/// `distortion³ / interval_length`: volume inflation of a bilipschitz map
/// times the averaging factor of a pigeonhole over an interval.
pub fn pigeonhole_constant(interval_length: f64, distortion: f64) -> Result<f64, LedgerError> {
    if !(interval_length > 0.0) {
        return Err(LedgerError::NonPositive(format!("interval length {interval_length}")));
    }
    if !(distortion >= 1.0) {
        return Err(LedgerError::NonPositive(format!("distortion {distortion} < 1")));
    }
    Ok(distortion.powi(3) / interval_length)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Inequality,
    Identity,
}

/// One named relation. `margin = lhs / rhs` (≤ 1 passes for inequalities),
/// `headroom = rhs / lhs`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub relation: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub headroom: f64,
    pub pass: bool,
}

/// Comparison of a factor used in the argument with the generic
/// `distortion³ / interval` value.
#[derive(Debug, Clone, Serialize)]
pub struct AuditNote {
    pub name: String,
    pub paper_factor: f64,
    pub audit_factor: f64,
    pub agrees: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub eps0: f64,
    pub eps0_derived: bool,
    pub interval_radius: f64,
    pub entries: Vec<CheckEntry>,
    pub audit: Vec<AuditNote>,
    /// Name of the polynomial bound on `U` in the final region; it has no
    /// explicit form and is carried only as a label.
    pub wp_bound: String,
    pub all_pass: bool,
}

struct Vals {
    c6: f64,
    c8: f64,
    c9: f64,
    eps: f64,
}

type Side = fn(&Vals) -> f64;

const INEQUALITIES: [(&str, &str, Side, Side); 3] = [
    ("i", "8 C6 eps0 <= min(1/C8, 1/C9) / 4", |v| 8.0 * v.c6 * v.eps, |v| (1.0 / v.c8).min(1.0 / v.c9) / 4.0),
    ("ii", "256 C6^2 C8 eps0^2 <= 64 C6 eps0", |v| 256.0 * v.c6 * v.c6 * v.c8 * v.eps * v.eps, |v| 64.0 * v.c6 * v.eps),
    ("v", "4 C8 (8 C6 eps0)^2 <= 64 C6 eps0", |v| 4.0 * v.c8 * (8.0 * v.c6 * v.eps).powi(2), |v| 64.0 * v.c6 * v.eps),
];

const IDENTITIES: [(&str, &str, Side, Side); 2] = [
    ("iii", "2^(7/4) (2 eps0) = 2^(11/4) eps0", |v| 2f64.powf(1.75) * (2.0 * v.eps), |v| 2f64.powf(2.75) * v.eps),
    ("iv", "8 (2 eps0)^4 = 128 eps0^4", |v| 8.0 * (2.0 * v.eps).powi(4), |v| 128.0 * v.eps.powi(4)),
];

/// Evaluates relations (i)–(v). In interval mode every input is widened by
/// `interval_radius` and each inequality is checked at its worst corner.
pub fn verify_chain(ledger: &ConstantLedger) -> Result<CheckReport, LedgerError> {
    ledger.validate()?;
    let eps = ledger.effective_eps0()?;
    let nominal = Vals { c6: ledger.constant(6)?, c8: ledger.constant(8)?, c9: ledger.constant(9)?, eps };
    let rho = ledger.interval_radius;

    let order = ["i", "ii", "iii", "iv", "v"];
    let mut entries = Vec::new();
    for name in order {
        if let Some((_, rel, l, r)) = INEQUALITIES.iter().find(|e| e.0 == name) {
            let (mut lhs, mut rhs) = (f64::NEG_INFINITY, f64::INFINITY);
            for corner in 0..16u32 {
                let w = |bit: u32, x: f64| if corner >> bit & 1 == 1 { x * (1.0 + rho) } else { x * (1.0 - rho) };
                let v = Vals { c6: w(0, nominal.c6), c8: w(1, nominal.c8), c9: w(2, nominal.c9), eps: w(3, nominal.eps) };
                lhs = lhs.max(l(&v));
                rhs = rhs.min(r(&v));
            }
            entries.push(entry(name, rel, CheckKind::Inequality, lhs, rhs, lhs <= rhs * (1.0 + ULP_SLACK)));
        } else if let Some((_, rel, l, r)) = IDENTITIES.iter().find(|e| e.0 == name) {
            let (lhs, rhs) = (l(&nominal), r(&nominal));
            let pass = (lhs - rhs).abs() <= ULP_SLACK * rhs.abs();
            entries.push(entry(name, rel, CheckKind::Identity, lhs, rhs, pass));
        }
    }
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(CheckReport {
        eps0: eps,
        eps0_derived: ledger.eps0.is_none(),
        interval_radius: rho,
        entries,
        audit: audit_notes()?,
        wp_bound: "wp(M, eps)".into(),
        all_pass,
    })
}

fn entry(name: &str, relation: &str, kind: CheckKind, lhs: f64, rhs: f64, pass: bool) -> CheckEntry {
    CheckEntry {
        name: name.into(),
        relation: relation.into(),
        kind,
        lhs,
        rhs,
        margin: lhs / rhs,
        headroom: rhs / lhs,
        pass,
    }
}

fn audit_notes() -> Result<Vec<AuditNote>, LedgerError> {
    let temporal = pigeonhole_constant(0.125, 1.0)?;
    let spatial = pigeonhole_constant(0.125, 2.0)?;
    Ok(vec![
        AuditNote {
            name: "temporal slice".into(),
            paper_factor: 8.0,
            audit_factor: temporal,
            agrees: temporal == 8.0,
            note: "initial time interval ]-1, -7/8[ has length 1/8".into(),
        },
        AuditNote {
            name: "boundary data under a 2-bilipschitz chart".into(),
            paper_factor: 8.0,
            audit_factor: spatial,
            agrees: spatial == 8.0,
            note: "factor 8 is stated without the Jacobian of the chart; distortion^3 / (1/8) = 64".into(),
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(eps0: Option<f64>) -> ConstantLedger {
        ConstantLedger { eps0, ..Default::default() }
    }

    #[test]
    fn epsilon0_examples() {
        assert_eq!(epsilon0_from(1.0, 1.0, 1.0).unwrap(), 1.0 / 32.0);
        assert_eq!(epsilon0_from(1.0, 2.0, 1.0).unwrap(), 1.0 / 64.0);
        assert!(matches!(epsilon0_from(0.0, 1.0, 1.0), Err(LedgerError::NonPositiveConstant { .. })));
        assert!(epsilon0_from(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn derived_eps0_passes() {
        let r = verify_chain(&unit(None)).unwrap();
        assert_eq!(r.eps0, 1.0 / 32.0);
        assert!(r.all_pass);
        let ii = &r.entries[1];
        assert_eq!((ii.name.as_str(), ii.lhs, ii.rhs), ("ii", 0.25, 2.0));
        assert_eq!(r.entries.iter().map(|e| e.name.as_str()).collect::<Vec<_>>(), ["i", "ii", "iii", "iv", "v"]);
    }

    #[test]
    fn eps0_one_fails_check_i_by_32() {
        let r = verify_chain(&unit(Some(1.0))).unwrap();
        let i = &r.entries[0];
        assert!(!i.pass);
        assert_eq!(i.margin, 32.0);
        assert!(!r.all_pass);
        assert!(r.entries[2].pass && r.entries[3].pass);
    }

    #[test]
    fn identities_are_bitwise() {
        assert_eq!(2f64.powf(1.75) * 2.0, 2f64.powf(2.75));
        for e in [1e-3, 1.0 / 32.0, 0.7, 3.0] {
            let r = verify_chain(&unit(Some(e))).unwrap();
            assert_eq!(r.entries[2].lhs, r.entries[2].rhs);
            assert_eq!(r.entries[3].lhs, r.entries[3].rhs);
        }
    }

    #[test]
    fn pigeonhole_examples() {
        assert_eq!(pigeonhole_constant(0.125, 1.0).unwrap(), 8.0);
        assert_eq!(pigeonhole_constant(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(pigeonhole_constant(0.125, 2.0).unwrap(), 64.0);
        assert!(pigeonhole_constant(0.0, 1.0).is_err());
        assert!(pigeonhole_constant(1.0, 0.5).is_err());
    }

    #[test]
    fn interval_mode_is_more_conservative() {
        let mut l = unit(Some(1.0 / 40.0));
        let plain = verify_chain(&l).unwrap();
        l.interval_radius = 0.1;
        let wide = verify_chain(&l).unwrap();
        for (a, b) in plain.entries.iter().zip(&wide.entries) {
            assert!(b.margin >= a.margin);
        }
        l.eps0 = None;
        l.interval_radius = 1e-3;
        assert!(!verify_chain(&l).unwrap().entries[0].pass);
    }

    #[test]
    fn config_formats_and_validation() {
        let j = r#"{"M": 2.0, "r0": 0.015625, "C": {"6": 1.0, "8": 2.0, "9": 1.0, "13": 5.0}, "kappa": 4.0}"#;
        let a = ConstantLedger::from_json(j).unwrap();
        let t = "M = 2.0\nr0 = 0.015625\nkappa = 4.0\n[C]\n6 = 1.0\n8 = 2.0\n9 = 1.0\n13 = 5.0\n";
        let b = ConstantLedger::from_toml(t).unwrap();
        assert_eq!(a.c, b.c);
        assert_eq!(a.effective_eps0().unwrap(), 1.0 / 64.0);
        let mut bad = a.clone();
        bad.kappa = 9.0;
        assert!(matches!(bad.validate(), Err(LedgerError::KappaOutOfRange(_))));
        let mut bad = a.clone();
        bad.set_constant(3, -1.0);
        assert!(matches!(bad.validate(), Err(LedgerError::NonPositiveConstant { .. })));
        let mut bad = a;
        bad.c.insert("14".into(), 1.0);
        assert!(matches!(bad.validate(), Err(LedgerError::UnknownConstant(_))));
    }
}
