use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::charts::SmoothDomain;
use crate::fields::{Grid, SynthSpec};
use crate::geometry::DEFAULT_MOLLIFIER_WIDTH;
use crate::ledger::ConstantLedger;
use crate::slicing::{BoundaryOptions, SpatialOptions};

use super::PipelineError;

/// Full description of one pipeline run. Accepted as TOML or JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    /// Directory for `report.json`, `timings.json` and the CSV curves; not echoed.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    pub domain: SmoothDomain,
    pub field: FieldSource,
    #[serde(default)]
    pub base_points: BasePoints,
    #[serde(default)]
    pub clam: ClamConfig,
    #[serde(default)]
    pub chart: ChartConfig,
    #[serde(default)]
    pub slicing: SpatialOptions,
    #[serde(default)]
    pub boundary: BoundaryOptions,
    #[serde(default)]
    pub ledger: ConstantLedger,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    /// An STF1 file in physical coordinates.
    File { path: PathBuf },
    /// A synthetic divergence-free field on the domain's bounding box.
    Synth(FieldSynth),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSynth {
    pub modes: usize,
    /// `‖U‖_{L⁴L⁴}` over the grid.
    pub amplitude: f64,
    pub wall_adapted: bool,
    /// Cells per axis.
    pub n: usize,
    pub nt: usize,
    pub max_wavenumber: u32,
    /// Defaults to the run seed.
    pub seed: Option<u64>,
}

impl Default for FieldSynth {
    fn default() -> Self {
        FieldSynth { modes: 8, amplitude: 1.0 / 64.0, wall_adapted: false, n: 32, nt: 41, max_wavenumber: 2, seed: None }
    }
}

impl FieldSynth {
    pub fn spec(&self, domain: &SmoothDomain, seed: u64) -> Result<SynthSpec, PipelineError> {
        let (lo, hi) = domain.bounding_box();
        let grid = Grid::new([self.n; 3], [lo[0], hi[0], lo[1], hi[1], lo[2], hi[2]])
            .map_err(|e| PipelineError::Config(format!("field grid: {e}")))?;
        Ok(SynthSpec {
            seed: self.seed.unwrap_or(seed),
            modes: self.modes,
            amplitude: self.amplitude,
            wall_adapted: self.wall_adapted,
            grid,
            nt: self.nt,
            max_wavenumber: self.max_wavenumber,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasePoints {
    /// Deterministic boundary sample of `count` points.
    Count { count: usize },
    List { points: Vec<[f64; 3]> },
}

impl Default for BasePoints {
    fn default() -> Self {
        BasePoints::Count { count: 16 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClamConfig {
    pub order: u32,
    pub width: f64,
    pub samples: usize,
    /// Cells of the chart-side grid carrying the pushed-forward field.
    pub target_grid: [usize; 3],
}

impl Default for ClamConfig {
    fn default() -> Self {
        ClamConfig { order: 1, width: DEFAULT_MOLLIFIER_WIDTH, samples: 1024, target_grid: [32, 32, 16] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartConfig {
    /// Fixed `r₀`; estimated from curvature when absent.
    pub r0: Option<f64>,
    pub curvature_samples: usize,
    pub curvature_cap: f64,
    pub pairs: usize,
    pub shrink_budget: u32,
}

impl Default for ChartConfig {
    fn default() -> Self {
        ChartConfig { r0: None, curvature_samples: 2000, curvature_cap: 1e6, pairs: 10_000, shrink_budget: 8 }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads a `.json` or TOML file. A relative field path is taken relative
    /// to the config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        if let FieldSource::File { path: p } = &mut cfg.field {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        match &self.base_points {
            BasePoints::Count { count: 0 } => return bad("base_points.count must be positive".into()),
            BasePoints::List { points } if points.is_empty() => return bad("base_points.points is empty".into()),
            _ => {}
        }
        match &self.field {
            FieldSource::File { path } if !path.is_file() => {
                return Err(PipelineError::MissingFile(path.clone()));
            }
            FieldSource::Synth(s) if s.n == 0 || s.nt < 2 || s.modes == 0 || !(s.amplitude >= 0.0) => {
                return bad(format!("field synthesis parameters {s:?}"));
            }
            _ => {}
        }
        if self.clam.order == 0 || self.clam.target_grid.contains(&0) {
            return bad(format!("clam parameters {:?}", self.clam));
        }
        if let Some(r0) = self.chart.r0 {
            if !(r0 > 0.0 && r0.is_finite()) {
                return bad(format!("chart.r0 = {r0}"));
            }
        }
        self.ledger.validate().map_err(|e| PipelineError::Config(format!("ledger: {e}")))
    }

    /// Base points on the boundary, in order.
    pub fn base_point_list(&self) -> Vec<[f64; 3]> {
        match &self.base_points {
            BasePoints::Count { count } => {
                self.domain.sample_boundary(*count).into_iter().take(*count).map(Into::into).collect()
            }
            BasePoints::List { points } => points.clone(),
        }
    }
}
