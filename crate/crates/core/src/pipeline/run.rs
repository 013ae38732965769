use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::charts::{build_chart, estimate_r0, BilipschitzChart, ChartOptions, R0Estimate, MAX_DISTORTION};
use crate::fields::{load_field, norm_report, pushforward, synth_divfree, Grid, NormReport, SpaceTimeField};
use crate::geometry::{build_clam, check_clam, ClamBody, GeometryCheckConfig, GeometryReport};
use crate::ledger::{verify_chain, CheckReport};
use crate::slicing::{
    assemble_boundary_data, select_spatial_slice, select_temporal_slice, BoundaryData, SliceReport, TEMPORAL_INTERVAL,
};

use super::{FieldSource, PipelineConfig, PipelineError, REPORT_FORMAT};

/// Largest spread of `r₀` or distortion across base points still counted as uniform.
pub const UNIFORMITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ChartSummary {
    pub radius: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub gradient_bound: f64,
    pub pairs: usize,
    pub shrunk: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasePointReport {
    pub index: usize,
    pub base_point: [f64; 3],
    pub r0: f64,
    pub distortion: f64,
    pub chart: ChartSummary,
    pub slices: SliceReport,
    pub boundary: BoundaryData,
    pub ledger: CheckReport,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldSummary {
    pub provenance: String,
    pub grid: Grid,
    pub nt: usize,
    /// Norms over the domain.
    pub norms: NormReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct Uniformity {
    pub r0_spread: f64,
    pub distortion_spread: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub geometry: f64,
    pub field: f64,
    pub base_points: Vec<f64>,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub format: &'static str,
    pub seed: u64,
    pub config: PipelineConfig,
    pub geometry: GeometryReport,
    pub field: FieldSummary,
    pub r0: f64,
    pub r0_estimate: Option<R0Estimate>,
    pub base_points: Vec<BasePointReport>,
    pub uniformity: Uniformity,
    pub all_pass: bool,
    /// Wall-clock seconds; kept out of `report.json` so that it stays byte-stable.
    #[serde(skip)]
    pub timings: Timings,
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    config.validate()?;
    let start = Instant::now();
    let mut timings = Timings::default();

    let clam = build_clam(config.clam.order, config.clam.width, config.clam.samples).map_err(global("clam"))?;
    let geometry = check_clam(&clam, &GeometryCheckConfig { seed: config.seed, ..Default::default() })
        .map_err(global("geometry"))?;
    timings.geometry = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let field = load_source(config)?;
    let domain = &config.domain;
    let norms = norm_report(&field, |x| domain.contains(x)).map_err(global("field norms"))?;
    timings.field = t.elapsed().as_secs_f64();

    let (r0, r0_estimate) = match config.chart.r0 {
        Some(r0) => (r0, None),
        None => {
            let e = estimate_r0(domain, config.chart.curvature_samples, config.chart.curvature_cap)
                .map_err(global("r0"))?;
            (e.r0, Some(e))
        }
    };
    let opts = ChartOptions {
        pairs: config.chart.pairs,
        seed: config.seed,
        shrink_budget: config.chart.shrink_budget,
        ..Default::default()
    };

    let bases = config.base_point_list();
    let results = bases
        .par_iter()
        .enumerate()
        .map(|(i, &b)| {
            let t = Instant::now();
            run_base_point(config, &clam, &field, r0, &opts, i, b).map(|r| (r, t.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (base_points, secs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    timings.base_points = secs;

    let spread = |f: fn(&BasePointReport) -> f64| {
        let lo = base_points.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = base_points.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let r0_spread = spread(|b| b.r0);
    let distortion_spread = spread(|b| b.distortion);
    let uniformity = Uniformity {
        r0_spread,
        distortion_spread,
        tolerance: UNIFORMITY_TOL,
        pass: r0_spread <= UNIFORMITY_TOL && distortion_spread <= UNIFORMITY_TOL,
    };
    let all_pass = geometry.all_pass && base_points.iter().all(|b| b.pass);
    timings.total = start.elapsed().as_secs_f64();

    Ok(PipelineReport {
        format: REPORT_FORMAT,
        seed: config.seed,
        config: config.clone(),
        geometry,
        field: FieldSummary { provenance: field.provenance().to_string(), grid: *field.grid(), nt: field.nt(), norms },
        r0,
        r0_estimate,
        base_points,
        uniformity,
        all_pass,
        timings,
    })
}

fn load_source(config: &PipelineConfig) -> Result<SpaceTimeField, PipelineError> {
    match &config.field {
        FieldSource::File { path } => {
            if !path.is_file() {
                return Err(PipelineError::MissingFile(path.clone()));
            }
            load_field(path).map_err(|e| PipelineError::Global { step: "field", source: Box::new(e) })
        }
        FieldSource::Synth(s) => synth_divfree(&s.spec(&config.domain, config.seed)?).map_err(global("field")),
    }
}

fn global<E>(step: &'static str) -> impl Fn(E) -> PipelineError
where
    E: std::error::Error + Send + Sync + 'static,
{
    move |e| PipelineError::Global { step, source: Box::new(e) }
}

fn run_base_point(
    config: &PipelineConfig,
    clam: &ClamBody,
    field: &SpaceTimeField,
    r0: f64,
    opts: &ChartOptions,
    index: usize,
    base: [f64; 3],
) -> Result<BasePointReport, PipelineError> {
    fn at<E>(index: usize, base: [f64; 3], step: &'static str) -> impl Fn(E) -> PipelineError
    where
        E: std::error::Error + Send + Sync + 'static,
    {
        move |e| PipelineError::Step { index, base_point: base, step, source: Box::new(e) }
    }

    let chart = build_chart(&config.domain, &Vector3::from(base), r0, opts).map_err(at(index, base, "chart"))?;
    let local = clam.with_scale(16.0 * chart.r0);
    let target = chart_grid(&local, config.clam.target_grid).map_err(at(index, base, "pushforward"))?;
    let tilde = pushforward(field, &chart, &target).map_err(at(index, base, "pushforward"))?;
    let spatial = select_spatial_slice(&tilde, &local, &config.slicing).map_err(at(index, base, "spatial slice"))?;
    let temporal = select_temporal_slice(&tilde, TEMPORAL_INTERVAL, |y| local.contains(y))
        .map_err(at(index, base, "temporal slice"))?;
    let slices = SliceReport::new(spatial, temporal);
    let boundary = assemble_boundary_data(field, &chart, &local, slices.s_star, slices.t0, &config.boundary)
        .map_err(at(index, base, "boundary data"))?;
    let ledger = verify_chain(&config.ledger).map_err(at(index, base, "ledger"))?;
    let pass = chart.verified_distortion <= MAX_DISTORTION && slices.pass() && boundary.pass && ledger.all_pass;
    Ok(BasePointReport {
        index,
        base_point: base,
        r0: chart.r0,
        distortion: chart.verified_distortion,
        chart: summary(&chart),
        slices,
        boundary,
        ledger,
        pass,
    })
}

/// `[-a, a]² × [0, h]` around the scaled clam.
fn chart_grid(clam: &ClamBody, cells: [usize; 3]) -> Result<Grid, crate::fields::FieldError> {
    let [a, h] = clam.bounding_box();
    Grid::new(cells, [-a, a, -a, a, 0.0, h])
}

fn summary(c: &BilipschitzChart) -> ChartSummary {
    ChartSummary {
        radius: c.radius,
        max_ratio: c.max_ratio,
        min_ratio: c.min_ratio,
        gradient_bound: c.gradient_bound,
        pairs: c.pairs,
        shrunk: c.shrunk,
    }
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per base point.
    pub fn write_summary_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "index", "x", "y", "z", "r0", "distortion", "s_star", "t0", "spatial", "temporal", "a", "b", "bound",
            "ledger", "pass",
        ])?;
        for b in &self.base_points {
            out.serialize((
                b.index,
                b.base_point[0],
                b.base_point[1],
                b.base_point[2],
                b.r0,
                b.distortion,
                b.slices.s_star,
                b.slices.t0,
                b.slices.spatial_value,
                b.slices.temporal_value,
                b.boundary.a_norm,
                b.boundary.b_norm,
                b.boundary.bound,
                b.ledger.all_pass,
                b.pass,
            ))?;
        }
        out.flush()?;
        Ok(())
    }

    /// `report.json`, `timings.json`, `summary.csv` and per-base-point slice curves.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), PipelineError> {
        let curves = dir.join("curves");
        std::fs::create_dir_all(&curves).map_err(|e| PipelineError::io(&curves, e))?;
        let write = |name: &Path, bytes: &[u8]| std::fs::write(name, bytes).map_err(|e| PipelineError::io(name, e));
        write(&dir.join("report.json"), self.to_json().as_bytes())?;
        let timings = serde_json::to_string_pretty(&self.timings).expect("timings serialize");
        write(&dir.join("timings.json"), timings.as_bytes())?;
        let mut buf = Vec::new();
        self.write_summary_csv(&mut buf).map_err(|e| PipelineError::Config(e.to_string()))?;
        write(&dir.join("summary.csv"), &buf)?;
        for b in &self.base_points {
            let mut s = Vec::new();
            b.slices.write_spatial_csv(&mut s).map_err(|e| PipelineError::Config(e.to_string()))?;
            write(&curves.join(format!("spatial_{:03}.csv", b.index)), &s)?;
            let mut t = Vec::new();
            b.slices.write_temporal_csv(&mut t).map_err(|e| PipelineError::Config(e.to_string()))?;
            write(&curves.join(format!("temporal_{:03}.csv", b.index)), &t)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::SmoothDomain;
    use crate::fields::save_field;
    use crate::pipeline::{BasePoints, FieldSynth};

    fn config(domain: SmoothDomain, field: FieldSource, count: usize) -> PipelineConfig {
        let text = r#"
            [domain]
            fixture = "ball"
            radius = 1.0
            [field]
            source = "synth"
        "#;
        let mut cfg = PipelineConfig::from_toml(text).unwrap();
        cfg.domain = domain;
        cfg.field = field;
        cfg.base_points = BasePoints::Count { count };
        cfg.chart.pairs = 1000;
        cfg.slicing.n_s = 16;
        cfg
    }

    #[test]
    fn flat_zero_field_gives_zero_slices() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.stf");
        save_field(&SpaceTimeField::zeros(Grid::cube(16, Vector3::zeros(), 1.0), 41).unwrap(), &path).unwrap();
        let cfg = config(SmoothDomain::HalfSpace { half_width: 1.0 }, FieldSource::File { path }, 3);
        let r = run_pipeline(&cfg).unwrap();
        assert_eq!(r.base_points.len(), 3);
        for b in &r.base_points {
            assert_eq!((b.slices.spatial_value, b.slices.temporal_value), (0.0, 0.0));
            assert_eq!(b.boundary.combined, 0.0);
            assert!(b.ledger.entries.iter().filter(|e| e.name == "iii" || e.name == "iv").all(|e| e.pass));
            assert!(b.pass);
        }
        assert!(r.all_pass && r.uniformity.pass);
    }

    #[test]
    fn missing_field_file_is_named() {
        let path = std::path::PathBuf::from("/definitely/not/here.stf");
        let cfg = config(SmoothDomain::unit_ball(), FieldSource::File { path }, 1);
        let e = run_pipeline(&cfg).unwrap_err();
        assert!(e.to_string().contains("/definitely/not/here.stf"), "{e}");
    }

    #[test]
    fn small_synthetic_field_passes_the_chain() {
        let synth = FieldSynth { n: 24, ..Default::default() };
        let cfg = config(SmoothDomain::unit_ball(), FieldSource::Synth(synth), 2);
        let r = run_pipeline(&cfg).unwrap();
        let eps = 1.0 / 64.0;
        for b in &r.base_points {
            assert!(b.boundary.combined <= 8.0 * eps * 1.05, "{:?}", b.boundary);
            assert!(b.ledger.all_pass);
        }
        assert!(r.all_pass);
        assert_eq!(r.format, "CSR-1");
    }
}
