//! Discretized space-time vector fields on `[-1, 0] × box`, their mixed
//! Lebesgue norms, synthetic divergence-free data and the STF1 file format.

mod field;
mod norms;
mod push;
mod stf;
mod synth;

use thiserror::Error;

pub use field::{Grid, SpaceTimeField};
pub use norms::{lp_lq_norm, norm_report, slice_integrals, time_integral, whole_space, NormReport, FULL_WINDOW};
pub use push::{interpolation_error_bound, pushforward};
pub use stf::{decode_field, encode_field, load_field, read_field, save_field, write_field, STF_MAGIC};
pub use synth::{discrete_divergence, synth_divfree, synth_divfree_with_model, synth_model, DivFreeModel, DivergenceReport, SynthSpec};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("region contains no grid cells")]
    EmptyRegion,
    #[error("point {0:?} lies outside the grid")]
    OutOfGrid([f64; 3]),
    #[error("target point {0:?} is not covered by the chart")]
    OutOfChart([f64; 3]),
    #[error("malformed STF1 data at byte {offset}: {reason}")]
    FormatError { offset: usize, reason: String },
    #[error("payload holds {found} values, header implies {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid norm parameters: {0}")]
    InvalidNorm(String),
    #[error("invalid synthesis parameters: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
