//! `clamslice <group> <command>`; every subcommand prints a JSON document (or
//! CSV with `--format csv`) and returns 0, 2 when a checked inequality fails,
//! or 1 on usage and I/O errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use serde::Serialize;
use serde_json::{json, Value};

use crate::charts::{build_chart, estimate_r0, ChartOptions, SmoothDomain, MAX_DISTORTION};
use crate::fields::{
    discrete_divergence, interpolation_error_bound, load_field, norm_report, save_field, synth_divfree, whole_space,
    SynthSpec,
};
use crate::geometry::{build_clam, check_clam, z0, GeometryCheckConfig, DEFAULT_MOLLIFIER_WIDTH};
use crate::ledger::{verify_chain, ConstantLedger};
use crate::slicing::{select_spatial_slice, select_temporal_slice, SpatialOptions, TEMPORAL_INTERVAL};

use super::{run_pipeline, FieldSynth, PipelineConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

const ROUND_TRIP_TOL: f64 = 1e-10;

const CONFIG_HELP: &str = "\
pipeline config (TOML or JSON):
  seed = 7                      # optional, overridden by --seed
  output = \"out\"                # optional, overridden by --out
  [domain]                      # fixture = ball | ellipsoid | half_space | perturbed_half_space
  fixture = \"ball\"
  radius = 1.0
  [field]                       # source = synth | file
  source = \"synth\"               # synth: modes, amplitude, wall_adapted, n, nt, max_wavenumber, seed
  amplitude = 0.015625          # file: path = \"field.stf\"
  [base_points]                 # count = 16  or  points = [[x, y, z], ...]
  count = 16
  [clam]                        # order, width, samples, target_grid
  [chart]                       # r0, curvature_samples, curvature_cap, pairs, shrink_budget
  [slicing]                     # s_range, n_s, window, surface_panels, surface_azimuth, delta_factor
  [boundary]                    # mesh_height, mesh_azimuth
  [ledger]                      # M, r0, eps0, kappa, interval_radius, [ledger.C] 6 = 1.0 ...";

#[derive(Debug, Parser)]
#[command(name = "clamslice", version, about = "Clam foliations, boundary charts and L4 slicing", after_help = CONFIG_HELP)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML or JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving the written reports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random choice; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clam body construction and its condition suite.
    #[command(subcommand)]
    Clam(ClamCmd),
    /// Boundary-flattening charts.
    #[command(subcommand)]
    Chart(ChartCmd),
    /// Synthetic fields and STF1 files.
    #[command(subcommand)]
    Field(FieldCmd),
    /// Pigeonhole slices of a field given in chart coordinates.
    #[command(subcommand)]
    Slice(SliceCmd),
    /// Constant-chain audit.
    #[command(subcommand)]
    Ledger(LedgerCmd),
    /// Full run over boundary base points.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(Debug, Args)]
struct ClamArgs {
    #[arg(long, default_value_t = 1)]
    order: u32,
    #[arg(long, default_value_t = DEFAULT_MOLLIFIER_WIDTH)]
    width: f64,
    #[arg(long, default_value_t = 4096)]
    samples: usize,
}

#[derive(Debug, Subcommand)]
enum ClamCmd {
    /// Profile curve and basic dimensions.
    Build {
        #[command(flatten)]
        clam: ClamArgs,
        /// Profile points in the output curve.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Convexity, tangency, foliation and volume conditions.
    Check {
        #[command(flatten)]
        clam: ClamArgs,
        /// Monte-Carlo cross-check of the volume; 0 skips it.
        #[arg(long, default_value_t = 0)]
        mc_samples: u64,
    },
}

#[derive(Debug, Args)]
struct ChartArgs {
    /// Base point `x,y,z` on the boundary.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0, 1.0])]
    base: Vec<f64>,
    /// Fixed r0; estimated from curvature when absent.
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pairs: usize,
}

#[derive(Debug, Subcommand)]
enum ChartCmd {
    /// Frame, r0 and sampled distortion.
    Build(ChartArgs),
    /// Distortion in [1, 2] and round-trip residual.
    Verify(ChartArgs),
}

#[derive(Debug, Subcommand)]
enum FieldCmd {
    /// Writes a divergence-free field as STF1.
    Synth {
        #[arg(long, default_value_t = 8)]
        modes: usize,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 41)]
        nt: usize,
        #[arg(long)]
        wall_adapted: bool,
        /// File name inside `--out` (or the working directory).
        #[arg(long, default_value = "field.stf")]
        name: String,
    },
    /// Grid, norms and divergence of an STF1 file.
    Info { path: PathBuf },
}

#[derive(Debug, Args)]
struct SliceArgs {
    path: PathBuf,
    /// Clam scale `16 r0` in the field's coordinates.
    #[arg(long, default_value_t = 0.25)]
    scale: f64,
}

#[derive(Debug, Subcommand)]
enum SliceCmd {
    /// Folium with below-average trace.
    Spatial {
        #[command(flatten)]
        args: SliceArgs,
        #[arg(long, default_value_t = 64)]
        n_s: usize,
    },
    /// Time in ]-1, -7/8[ with below-average slice integral.
    Temporal {
        #[command(flatten)]
        args: SliceArgs,
    },
}

#[derive(Debug, Subcommand)]
enum LedgerCmd {
    /// Evaluates every relation of the chain.
    Check {
        /// Overrides the derived epsilon0.
        #[arg(long)]
        eps0: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum PipelineCmd {
    /// Writes report.json, timings.json, summary.csv and curves/ to the output directory.
    Run,
}

/// A document to print plus an optional CSV table view of it.
struct Output {
    name: String,
    doc: Value,
    table: Option<Vec<Vec<String>>>,
    pass: bool,
}

impl Output {
    fn new(name: &str, doc: &impl Serialize) -> Result<Self, String> {
        let doc = serde_json::to_value(doc).map_err(|e| e.to_string())?;
        Ok(Output { name: name.into(), doc, table: None, pass: true })
    }

    fn table(mut self, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Self {
        let mut t = vec![header.iter().map(|h| h.to_string()).collect()];
        t.extend(rows);
        self.table = Some(t);
        self
    }

    fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_FAILURE,
            };
        }
    };
    match execute(&cli) {
        Ok(out) => match emit(&cli.global, &out) {
            Ok(()) if out.pass => EXIT_OK,
            Ok(()) => EXIT_ASSERTION,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_FAILURE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn execute(cli: &Cli) -> Result<Output, String> {
    let g = &cli.global;
    let seed = g.seed.unwrap_or(0);
    match &cli.command {
        Command::Clam(ClamCmd::Build { clam, points }) => {
            let c = build_clam(clam.order, clam.width, clam.samples).map_err(|e| e.to_string())?;
            let p = &c.profile;
            let curve = p.samples((*points).max(1));
            let z0s = [0.0, 0.25, 0.5].iter().map(|&s| z0(&c, s)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
            let doc = json!({
                "vanishing_order": c.vanishing_order,
                "bottom_coef": c.bottom_coef(),
                "bounding_box": c.bounding_box(),
                "z0": z0s,
                "profile": curve,
            });
            let rows = curve.iter().map(|(z, r)| vec![z.to_string(), r.to_string()]);
            Ok(Output::new("clam_build", &doc)?.table(&["z", "r"], rows))
        }
        Command::Clam(ClamCmd::Check { clam, mc_samples }) => {
            let c = build_clam(clam.order, clam.width, clam.samples).map_err(|e| e.to_string())?;
            let cfg = GeometryCheckConfig { mc_samples: *mc_samples, seed, ..Default::default() };
            let r = check_clam(&c, &cfg).map_err(|e| e.to_string())?;
            Ok(Output::new("clam_check", &r)?.pass(r.all_pass))
        }
        Command::Chart(cmd) => {
            let (args, verify) = match cmd {
                ChartCmd::Build(a) => (a, false),
                ChartCmd::Verify(a) => (a, true),
            };
            let domain = load_domain(g.config.as_deref())?;
            let r0 = match args.r0 {
                Some(r) => r,
                None => estimate_r0(&domain, 2000, 1e6).map_err(|e| e.to_string())?.r0,
            };
            let [x, y, z] = args.base[..] else {
                return Err(format!("--base expects x,y,z, got {:?}", args.base));
            };
            let base = Vector3::new(x, y, z);
            let opts = ChartOptions { pairs: args.pairs, seed, ..Default::default() };
            let chart = build_chart(&domain, &base, r0, &opts).map_err(|e| e.to_string())?;
            if !verify {
                return Output::new("chart_build", &chart);
            }
            let residual = chart.round_trip_residual(args.pairs, seed ^ 0x5eed).map_err(|e| e.to_string())?;
            let flatness = chart.boundary_flatness(400).map_err(|e| e.to_string())?;
            let pass = (1.0..=MAX_DISTORTION).contains(&chart.verified_distortion) && residual <= ROUND_TRIP_TOL;
            let doc = json!({ "chart": chart, "round_trip_residual": residual, "boundary_flatness": flatness, "pass": pass });
            Ok(Output::new("chart_verify", &doc)?.pass(pass))
        }
        Command::Field(FieldCmd::Synth { modes, amplitude, n, nt, wall_adapted, name }) => {
            let spec = match &g.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                    let mut s: SynthSpec = parse_config(p, &text)?;
                    if let Some(sd) = g.seed {
                        s.seed = sd;
                    }
                    s
                }
                None => {
                    let fs = FieldSynth {
                        modes: *modes,
                        amplitude: *amplitude,
                        wall_adapted: *wall_adapted,
                        n: *n,
                        nt: *nt,
                        ..Default::default()
                    };
                    fs.spec(&SmoothDomain::unit_ball(), seed).map_err(|e| e.to_string())?
                }
            };
            let field = synth_divfree(&spec).map_err(|e| e.to_string())?;
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let path = dir.join(name);
            save_field(&field, &path).map_err(|e| e.to_string())?;
            let doc = json!({
                "path": path,
                "spec": spec,
                "norms": norm_report(&field, whole_space).map_err(|e| e.to_string())?,
                "divergence": discrete_divergence(&field),
            });
            Ok(Output::new("field_synth", &doc)?)
        }
        Command::Field(FieldCmd::Info { path }) => {
            let field = load_field(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let doc = json!({
                "provenance": field.provenance(),
                "grid": field.grid(),
                "nt": field.nt(),
                "max_abs": field.max_abs(),
                "norms": norm_report(&field, whole_space).map_err(|e| e.to_string())?,
                "divergence": discrete_divergence(&field),
                "interpolation_error_bound": interpolation_error_bound(&field),
            });
            Ok(Output::new("field_info", &doc)?)
        }
        Command::Slice(cmd) => {
            let args = match cmd {
                SliceCmd::Spatial { args, .. } | SliceCmd::Temporal { args } => args,
            };
            let field = load_field(&args.path).map_err(|e| format!("{}: {e}", args.path.display()))?;
            let clam = build_clam(1, DEFAULT_MOLLIFIER_WIDTH, 1024).map_err(|e| e.to_string())?.with_scale(args.scale);
            match cmd {
                SliceCmd::Spatial { n_s, .. } => {
                    let opts = SpatialOptions { n_s: *n_s, ..Default::default() };
                    let s = select_spatial_slice(&field, &clam, &opts).map_err(|e| e.to_string())?;
                    let rows = s.samples.iter().map(|r| vec![r[0].to_string(), r[1].to_string()]);
                    Ok(Output::new("slice_spatial", &s)?.table(&["s", "g"], rows))
                }
                SliceCmd::Temporal { .. } => {
                    let t = select_temporal_slice(&field, TEMPORAL_INTERVAL, |y| clam.contains(y))
                        .map_err(|e| e.to_string())?;
                    let rows = t.samples.iter().map(|r| vec![r[0].to_string(), r[1].to_string()]);
                    let pass = t.pass;
                    Ok(Output::new("slice_temporal", &t)?.table(&["t", "integral"], rows).pass(pass))
                }
            }
        }
        Command::Ledger(LedgerCmd::Check { eps0 }) => {
            let mut ledger = match &g.config {
                Some(p) => ConstantLedger::load(p).map_err(|e| format!("{}: {e}", p.display()))?,
                None => ConstantLedger::default(),
            };
            if eps0.is_some() {
                ledger.eps0 = *eps0;
            }
            let r = verify_chain(&ledger).map_err(|e| e.to_string())?;
            let rows = r.entries.iter().map(|e| {
                vec![
                    e.name.clone(),
                    e.relation.clone(),
                    e.lhs.to_string(),
                    e.rhs.to_string(),
                    e.margin.to_string(),
                    e.headroom.to_string(),
                    e.pass.to_string(),
                ]
            });
            let pass = r.all_pass;
            Ok(Output::new("ledger_check", &r)?
                .table(&["name", "relation", "lhs", "rhs", "margin", "headroom", "pass"], rows)
                .pass(pass))
        }
        Command::Pipeline(PipelineCmd::Run) => {
            let path = g.config.as_ref().ok_or_else(|| format!("pipeline run needs --config\n\n{CONFIG_HELP}"))?;
            let mut cfg = PipelineConfig::load(path).map_err(|e| format!("{e}\n\n{CONFIG_HELP}"))?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            if let Some(o) = &g.out {
                cfg.output = Some(o.clone());
            }
            let report = run_pipeline(&cfg).map_err(|e| e.to_string())?;
            if let Some(dir) = &cfg.output {
                report.write_outputs(dir).map_err(|e| e.to_string())?;
            }
            let mut buf = Vec::new();
            report.write_summary_csv(&mut buf).map_err(|e| e.to_string())?;
            let rows = csv::Reader::from_reader(buf.as_slice())
                .records()
                .filter_map(Result::ok)
                .map(|r| r.iter().map(String::from).collect())
                .collect::<Vec<_>>();
            let header = [
                "index", "x", "y", "z", "r0", "distortion", "s_star", "t0", "spatial", "temporal", "a", "b", "bound",
                "ledger", "pass",
            ];
            let pass = report.all_pass;
            let mut out = Output::new("pipeline", &report)?.table(&header, rows).pass(pass);
            out.name.clear();
            Ok(out)
        }
    }
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, String> {
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(text).map_err(|e| format!("{}: {e}", path.display()))
    } else {
        toml::from_str(text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// A bare domain file, the domain of a pipeline config, or the unit ball.
fn load_domain(path: Option<&Path>) -> Result<SmoothDomain, String> {
    let Some(p) = path else { return Ok(SmoothDomain::unit_ball()) };
    let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
    if let Ok(d) = parse_config::<SmoothDomain>(p, &text) {
        return Ok(d);
    }
    parse_config::<PipelineConfig>(p, &text).map(|c| c.domain).map_err(|e| format!("{e}\n\n{CONFIG_HELP}"))
}

fn emit(g: &Global, out: &Output) -> Result<(), String> {
    let text = match (g.format, &out.table) {
        (Format::Csv, Some(t)) => table_csv(t)?,
        (Format::Csv, None) => {
            let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
            flatten("", &out.doc, &mut rows);
            table_csv(&rows)?
        }
        (Format::Json, _) => {
            let mut s = serde_json::to_string_pretty(&out.doc).map_err(|e| e.to_string())?;
            s.push('\n');
            s
        }
    };
    if let (Some(dir), false) = (&g.out, out.name.is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let ext = if g.format == Format::Csv { "csv" } else { "json" };
        let path = dir.join(format!("{}.{ext}", out.name));
        std::fs::write(&path, &text).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    print!("{text}");
    Ok(())
}

fn table_csv(rows: &[Vec<String>]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r).map_err(|e| e.to_string())?;
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

// Dotted keys for nested objects, indices for arrays.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::String(s) => rows.push(vec![prefix.to_string(), s.clone()]),
        other => rows.push(vec![prefix.to_string(), other.to_string()]),
    }
}
