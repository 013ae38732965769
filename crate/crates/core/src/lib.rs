//! Clam-body foliations, boundary-flattening charts and `L⁴` pigeonhole
//! slicing of discretized space-time vector fields.

pub mod charts;
pub mod fields;
pub mod geometry;
pub mod ledger;
pub mod numerics;
pub mod pipeline;
pub mod slicing;
