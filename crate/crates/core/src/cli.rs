//! Command layer behind the `beamfactory` binary.
//!
//! Subcommands: `simulate`, `analyze`, `fit`, `optimize`, `compare`. Every
//! command writes into one output directory (`--out`, else
//! `BEAMFACTORY_OUT`, else the scenario's `out`, else `beamfactory-out`)
//! and finishes with a `manifest.json` that checksums each file.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analysis::{
    coverage_probability, delta_stats, dominance_map, gamma_map, local_average, route_smoothing,
    AveragingDomain, DOMINANCE_CELL,
};
use crate::beams::{make_config, SsbId, TxConfig};
use crate::export::{self, ReportBundle, SolverRow};
use crate::layout::{FactoryLayout, GridSpec, Visibility};
use crate::link::{extract_path_gain, fixed, LinkBudget, MeasurementTrace, RouteSpan, TraceMetadata};
use crate::propagation::{fit_slope_intercept, model_rmse, ModelPreset, PathGainModel};
use crate::scenario::ScenarioConfig;
use crate::switchoff::{build_problem, solve_dbscan, solve_exhaustive, solve_ga, DbscanParams, GaParams};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const ANALYSES: [&str; 6] = ["average", "gamma", "coverage", "delta", "dominance", "smoothing"];
pub const SOLVERS: [&str; 3] = ["ga", "dbscan", "exhaustive"];

#[derive(Debug, Parser)]
#[command(
    name = "beamfactory",
    version,
    about = "FR2 indoor-factory coverage and beam management toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a measurement campaign and write the trace CSV.
    Simulate(SimulateArgs),
    /// Run analyses on a trace CSV.
    Analyze(AnalyzeArgs),
    /// Fit a slope-intercept model and score the presets.
    Fit(FitArgs),
    /// Solve the beam switch-off problem.
    Optimize(OptimizeArgs),
    /// Run configurations A and B with a shared seed and map the difference.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario TOML; the bundled two-hall factory if omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "BEAMFACTORY_OUT")]
    pub out: Option<PathBuf>,
    /// Record wall-clock times (makes bundles non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the scenario's TX configuration.
    #[arg(long)]
    pub config: Option<TxConfig>,
    /// Worker threads for synthesis (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Db,
    Linear,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub trace: PathBuf,
    /// Comma-separated analyses: average, gamma, coverage, delta, dominance, smoothing.
    #[arg(long, value_delimiter = ',')]
    pub analysis: Vec<String>,
    /// Coverage threshold, dBm.
    #[arg(long, default_value_t = -100.0, allow_hyphen_values = true)]
    pub threshold: f64,
    /// Grid cell size `dx,dy` in meters.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(f64, f64)>,
    /// Second trace for the gamma map (`trace - against`).
    #[arg(long)]
    pub against: Option<PathBuf>,
    /// Range bin edges for coverage, meters.
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,15,20,25,30,35,40,45")]
    pub bins: Vec<f64>,
    #[arg(long, value_enum, default_value_t = DomainArg::Db)]
    pub domain: DomainArg,
    /// Highest beam order for the gap analysis.
    #[arg(long, default_value_t = 4)]
    pub max_order: usize,
    /// Beam subset for dominance (default: one map per beam row).
    #[arg(long, value_delimiter = ',')]
    pub subset: Vec<SsbId>,
    /// Smoothing window in wavelengths.
    #[arg(long, default_value_t = 40.0)]
    pub window: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    /// Trace CSV; path gain is recovered from each burst's strongest beam.
    #[arg(long, conflicts_with = "pairs")]
    pub trace: Option<PathBuf>,
    /// CSV of `d_m,pg_db` pairs.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Fit LoS and NLoS bursts separately (trace input only).
    #[arg(long)]
    pub split: bool,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "3,5,10")]
    pub xi: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "ga,dbscan,exhaustive")]
    pub solver: Vec<String>,
    /// First GA seed; runs use `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// GA runs per cardinality bound.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(f64, f64)>,
    #[arg(long, default_value_t = GaParams::default().pop_size)]
    pub pop_size: usize,
    #[arg(long, default_value_t = GaParams::default().generations)]
    pub generations: usize,
    #[arg(long, default_value_t = DbscanParams::default().eps)]
    pub eps: f64,
    #[arg(long, default_value_t = DbscanParams::default().min_pts)]
    pub min_pts: usize,
    /// Also write the per-cell, per-beam problem table.
    #[arg(long)]
    pub export_problem: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(f64, f64)>,
}

fn parse_grid(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect::<std::result::Result<_, _>>()?;
    match nums.as_slice() {
        [d] if *d > 0.0 => Ok((*d, *d)),
        [dx, dy] if *dx > 0.0 && *dy > 0.0 => Ok((*dx, *dy)),
        _ => Err("expected dx,dy with positive sizes".into()),
    }
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Scenario(m) => CliError::Usage(format!("scenario error: {m}")),
            other => CliError::Runtime(other),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(dir) => {
            eprintln!("wrote {}", dir.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(command: Command) -> CliResult<PathBuf> {
    match command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Compare(a) => cmd_compare(&a),
    }
}

fn load_scenario(common: &Common) -> CliResult<(ScenarioConfig, Option<(String, String)>)> {
    match &common.scenario {
        None => Ok((ScenarioConfig::bundled(), None)),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read scenario {}: {e}", p.display())))?;
            let cfg = ScenarioConfig::from_toml(&text)?;
            Ok((cfg, Some((file_name(p), export::sha256_hex(text.as_bytes())))))
        }
    }
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn out_dir(common: &Common, scenario: &ScenarioConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| scenario.out.clone())
        .unwrap_or_else(|| PathBuf::from("beamfactory-out"))
}

fn input_record(path: &Path) -> CliResult<serde_json::Value> {
    let bytes = std::fs::read(path).map_err(|e| {
        CliError::Runtime(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })?;
    Ok(json!({ "name": file_name(path), "sha256": export::sha256_hex(&bytes) }))
}

fn read_trace(path: &Path) -> CliResult<MeasurementTrace> {
    let f = File::open(path).map_err(|e| {
        CliError::Runtime(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })?;
    let mut trace = MeasurementTrace::read_csv(BufReader::new(f)).map_err(|e| {
        CliError::Runtime(match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    })?;
    // Route spans and model names from the sidecar written by `simulate`.
    let sidecar = path.with_extension("json");
    if let Ok(text) = std::fs::read_to_string(&sidecar) {
        if let Ok(meta) = serde_json::from_str::<TraceMetadata>(&text) {
            if meta.routes.last().is_none_or(|r| r.end == trace.len()) {
                trace.metadata = meta;
            }
        }
    }
    Ok(trace)
}

/// Metadata as seen after a CSV round trip: bursts without any detected
/// beam are not written, so route spans shift accordingly.
fn written_metadata(trace: &MeasurementTrace) -> TraceMetadata {
    let kept: Vec<usize> = trace
        .samples
        .iter()
        .scan(0usize, |n, s| {
            let before = *n;
            if !s.entries.is_empty() {
                *n += 1;
            }
            Some(before)
        })
        .collect();
    let total = trace.samples.iter().filter(|s| !s.entries.is_empty()).count();
    let at = |k: usize| if k < kept.len() { kept[k] } else { total };
    TraceMetadata {
        routes: trace
            .metadata
            .routes
            .iter()
            .map(|r| RouteSpan {
                name: r.name.clone(),
                start: at(r.start),
                end: at(r.end),
            })
            .collect(),
        ..trace.metadata.clone()
    }
}

fn write_trace(bundle: &mut ReportBundle, name: &str, trace: &MeasurementTrace) -> CliResult<()> {
    bundle.write(&format!("{name}.csv"), trace.to_csv_string().as_bytes())?;
    let meta = serde_json::to_string_pretty(&written_metadata(trace)).expect("metadata serializes") + "\n";
    bundle.write(&format!("{name}.json"), meta.as_bytes())?;
    Ok(())
}

fn write_grid(
    bundle: &mut ReportBundle,
    stem: &str,
    grid: &GridSpec,
    values: &[Option<f64>],
    quantity: &str,
    unit: &str,
) -> CliResult<()> {
    bundle.write(
        &format!("{stem}.csv"),
        export::grid_csv(grid, values, 3)?.as_bytes(),
    )?;
    bundle.write(
        &format!("{stem}.json"),
        export::grid_sidecar(grid, quantity, unit).as_bytes(),
    )?;
    Ok(())
}

fn scenario_info(record: &Option<(String, String)>) -> serde_json::Value {
    match record {
        Some((name, sha)) => json!({ "name": name, "sha256": sha }),
        None => {
            json!({ "name": "bundled:default.toml", "sha256": export::sha256_hex(crate::scenario::DEFAULT_SCENARIO.as_bytes()) })
        }
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> CliResult<PathBuf> {
    let (mut scenario, record) = load_scenario(&a.common)?;
    if let Some(c) = a.config {
        scenario = scenario.with_config(c);
    }
    let seed = a.seed.unwrap_or(scenario.seed);
    let started = Instant::now();
    let campaign = scenario.campaign(seed)?;
    let routes = scenario.routes()?;
    let trace = match a.threads {
        Some(t) => campaign.run_with_threads(&routes, seed, t)?,
        None => campaign.run(&routes, seed)?,
    };
    let mut bundle = ReportBundle::create(out_dir(&a.common, &scenario))?;
    write_trace(&mut bundle, "trace", &trace)?;
    let mut info = json!({
        "command": "simulate",
        "seed": seed,
        "config": scenario.config.to_string(),
        "scenario": scenario_info(&record),
        "bursts": trace.len(),
    });
    if a.common.timing {
        info["wall_time_s"] = json!(started.elapsed().as_secs_f64());
    }
    let dir = bundle.root().to_path_buf();
    bundle.finish(info)?;
    println!(
        "simulated {} bursts (config {}, seed {seed})",
        trace.len(),
        scenario.config
    );
    Ok(dir)
}

fn analysis_grid(
    layout: &FactoryLayout,
    cell: Option<(f64, f64)>,
    default: (f64, f64),
) -> CliResult<GridSpec> {
    let (dx, dy) = cell.unwrap_or(default);
    Ok(GridSpec::covering(layout.bounds(), dx, dy)?)
}

fn route_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> CliResult<PathBuf> {
    let requested: Vec<String> = a
        .analysis
        .iter()
        .map(|s| s.trim().to_ascii_lowercase())
        .filter(|s| !s.is_empty())
        .collect();
    if let Some(bad) = requested.iter().find(|s| !ANALYSES.contains(&s.as_str())) {
        return Err(CliError::Usage(format!(
            "unknown analysis '{bad}'; available: {}",
            ANALYSES.join(", ")
        )));
    }
    let (scenario, record) = load_scenario(&a.common)?;
    let layout = scenario.layout()?;
    let trace = read_trace(&a.trace)?;
    let domain = match a.domain {
        DomainArg::Db => AveragingDomain::Db,
        DomainArg::Linear => AveragingDomain::Linear,
    };
    let mut bundle = ReportBundle::create(out_dir(&a.common, &scenario))?;
    let mut inputs = vec![input_record(&a.trace)?];
    let scenario_grid = (scenario.grid.dx, scenario.grid.dy);

    for name in &requested {
        match name.as_str() {
            "average" => {
                let grid = analysis_grid(&layout, a.grid, scenario_grid)?;
                let avg = local_average(&trace, &grid, domain)?;
                write_grid(
                    &mut bundle,
                    "average",
                    &grid,
                    &avg.means(),
                    "mean strongest RSRP",
                    "dBm",
                )?;
                let counts: Vec<Option<f64>> = avg.cells.iter().map(|c| c.map(|c| c.count as f64)).collect();
                write_grid(
                    &mut bundle,
                    "average_counts",
                    &grid,
                    &counts,
                    "bursts per cell",
                    "count",
                )?;
            }
            "gamma" => {
                let other_path = a
                    .against
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("gamma analysis needs --against <trace.csv>".into()))?;
                let other = read_trace(other_path)?;
                inputs.push(input_record(other_path)?);
                let grid = analysis_grid(&layout, a.grid, scenario_grid)?;
                let ga = local_average(&trace, &grid, domain)?;
                let gb = local_average(&other, &grid, domain)?;
                let gamma = gamma_map(&ga, &gb)?;
                write_grid(
                    &mut bundle,
                    "gamma",
                    &grid,
                    &gamma.cells,
                    "gamma (trace - against)",
                    "dB",
                )?;
            }
            "coverage" => {
                if a.bins.len() < 2 || a.bins.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(CliError::Usage(
                        "--bins needs at least two increasing edges".into(),
                    ));
                }
                let bins: Vec<(f64, f64)> = a.bins.windows(2).map(|w| (w[0], w[1])).collect();
                let cov = coverage_probability(&trace, a.threshold, &bins, &layout)?;
                bundle.write("coverage.csv", export::coverage_csv(&cov, a.threshold).as_bytes())?;
                bundle.write("coverage_cdf.csv", export::coverage_cdf_csv(&cov).as_bytes())?;
            }
            "delta" => {
                let stats = delta_stats(&trace, a.max_order)?;
                bundle.write(
                    "delta_table.csv",
                    export::delta_table_csv(&stats, &[0.25, 0.5, 0.75]).as_bytes(),
                )?;
                bundle.write("delta_cdf.csv", export::delta_cdf_csv(&stats).as_bytes())?;
            }
            "dominance" => {
                let grid = analysis_grid(&layout, a.grid, DOMINANCE_CELL)?;
                if a.subset.is_empty() {
                    let beams = make_config(trace.config);
                    for row in 1..=beams.rows.len() {
                        let subset: Vec<SsbId> = beams.ids().filter(|id| id.row as usize == row).collect();
                        let map = dominance_map(&trace, &subset, &grid)?;
                        write_grid(
                            &mut bundle,
                            &format!("dominance_row{row}"),
                            &grid,
                            &map.fractions,
                            &format!("fraction of bursts served by row {row}"),
                            "fraction",
                        )?;
                    }
                } else {
                    let map = dominance_map(&trace, &a.subset, &grid)?;
                    let names: Vec<String> = a.subset.iter().map(ToString::to_string).collect();
                    write_grid(
                        &mut bundle,
                        "dominance_subset",
                        &grid,
                        &map.fractions,
                        &format!("fraction of bursts served by {}", names.join(" ")),
                        "fraction",
                    )?;
                }
            }
            "smoothing" => {
                let carrier = scenario.link.carrier_hz;
                for span in &trace.metadata.routes {
                    let samples = &trace.samples[span.start..span.end];
                    if samples.is_empty() {
                        continue;
                    }
                    let sm = route_smoothing(samples, &layout, a.window, carrier)?;
                    let mut csv = String::from("traveled_m,azimuth_deg,dominant,rsrp_dbm\n");
                    for (p, dom) in sm.points.iter().zip(sm.dominant()) {
                        let r = dom.and_then(|d| p.beams.iter().find(|b| b.0 == d)).map(|b| b.1);
                        csv.push_str(&format!(
                            "{},{},{},{}\n",
                            fixed(p.traveled, 3),
                            fixed(p.azimuth_deg, 3),
                            dom.map(|d| d.to_string()).unwrap_or_default(),
                            r.map(|v| fixed(v, 2)).unwrap_or_default()
                        ));
                    }
                    bundle.write(
                        &format!("smoothing_{}.csv", route_stem(&span.name)),
                        csv.as_bytes(),
                    )?;
                }
            }
            _ => unreachable!("checked above"),
        }
    }
    let dir = bundle.root().to_path_buf();
    bundle.finish(json!({
        "command": "analyze",
        "analyses": requested,
        "inputs": inputs,
        "scenario": scenario_info(&record),
        "threshold_dbm": a.threshold,
    }))?;
    Ok(dir)
}

fn read_pairs(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = (cols.len() == 2)
            .then(|| Some((cols[0].parse::<f64>().ok()?, cols[1].parse::<f64>().ok()?)))
            .flatten();
        match parsed {
            Some(p) => out.push(p),
            None if k == 0 => continue, // header
            None => {
                return Err(CliError::Runtime(Error::Parse {
                    line: k + 1,
                    message: format!("{}: expected 'd_m,pg_db'", path.display()),
                }))
            }
        }
    }
    Ok(out)
}

/// `(distance, path gain)` per burst from its strongest beam, split by
/// visibility class. Bursts closer than 1 m are dropped.
pub fn trace_path_gains(
    trace: &MeasurementTrace,
    layout: &FactoryLayout,
    budget: &LinkBudget,
) -> crate::Result<Vec<(Visibility, f64, f64)>> {
    let beams = make_config(trace.config);
    let mut out = Vec::new();
    for s in &trace.samples {
        let Some(entry) = s.strongest() else { continue };
        let d = layout.range_3d(s.position);
        if d < 1.0 {
            continue;
        }
        let pg = extract_path_gain(entry, s.position, budget, &beams, layout)?;
        out.push((layout.classify_visibility(s.position)?, d, pg));
    }
    Ok(out)
}

fn fit_block(
    label: &str,
    samples: &[(f64, f64)],
    presets: &[ModelPreset],
    vis: Option<Visibility>,
) -> CliResult<(PathGainModel, String)> {
    let fitted = fit_slope_intercept(samples)?;
    let rows: Vec<(String, PathGainModel, f64, Option<f64>)> = presets
        .iter()
        .map(|p| {
            let rmse = model_rmse(&p.model(), samples)?;
            Ok((
                p.name().to_string(),
                p.model(),
                rmse,
                vis.and_then(|v| p.published_rmse(v)),
            ))
        })
        .collect::<crate::Result<_>>()?;
    println!("[{label}] {} samples", samples.len());
    println!(
        "  fit: PG_1m = {:.2} dB, n = {:.3}, sigma = {:.2} dB",
        fitted.pg_1m, fitted.n, fitted.sigma
    );
    println!(
        "  {:<14} {:>8} {:>6} {:>7} {:>8} {:>10}",
        "model", "PG_1m", "n", "sigma", "RMSE", "published"
    );
    for (name, m, rmse, published) in &rows {
        println!(
            "  {:<14} {:>8.1} {:>6.2} {:>7.1} {:>8.2} {:>10}",
            name,
            m.pg_1m,
            m.n,
            m.sigma,
            rmse,
            published.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into())
        );
    }
    Ok((fitted, export::fit_csv(label, &fitted, samples.len(), &rows)))
}

pub fn cmd_fit(a: &FitArgs) -> CliResult<PathBuf> {
    let (scenario, record) = load_scenario(&a.common)?;
    let (blocks, input): (
        Vec<(String, Vec<(f64, f64)>, Vec<ModelPreset>, Option<Visibility>)>,
        &Path,
    ) = match (&a.trace, &a.pairs) {
        (Some(t), None) => {
            let trace = read_trace(t)?;
            let layout = scenario.layout()?;
            let pgs = trace_path_gains(&trace, &layout, &scenario.link)?;
            let blocks = if a.split {
                [Visibility::Los, Visibility::Nlos]
                    .into_iter()
                    .map(|v| {
                        let s: Vec<(f64, f64)> =
                            pgs.iter().filter(|p| p.0 == v).map(|p| (p.1, p.2)).collect();
                        (v.to_string(), s, ModelPreset::block(v), Some(v))
                    })
                    .collect()
            } else {
                let s = pgs.iter().map(|p| (p.1, p.2)).collect();
                vec![("all".to_string(), s, ModelPreset::ALL.to_vec(), None)]
            };
            (blocks, t.as_path())
        }
        (None, Some(p)) => {
            if a.split {
                return Err(CliError::Usage("--split needs --trace input".into()));
            }
            (
                vec![("all".to_string(), read_pairs(p)?, ModelPreset::ALL.to_vec(), None)],
                p.as_path(),
            )
        }
        _ => {
            return Err(CliError::Usage(
                "fit needs exactly one of --trace or --pairs".into(),
            ))
        }
    };
    let mut csv = String::new();
    let mut fits = Vec::new();
    for (label, samples, presets, vis) in &blocks {
        let (fitted, part) = fit_block(label, samples, presets, *vis)?;
        if csv.is_empty() {
            csv = part;
        } else {
            csv.extend(part.lines().skip(1).map(|l| format!("{l}\n")));
        }
        fits.push(json!({ "block": label, "pg_1m": fitted.pg_1m, "n": fitted.n, "sigma": fitted.sigma }));
    }
    let mut bundle = ReportBundle::create(out_dir(&a.common, &scenario))?;
    bundle.write("fit.csv", csv.as_bytes())?;
    let dir = bundle.root().to_path_buf();
    bundle.finish(json!({
        "command": "fit",
        "inputs": [input_record(input)?],
        "scenario": scenario_info(&record),
        "fits": fits,
    }))?;
    Ok(dir)
}

pub fn cmd_optimize(a: &OptimizeArgs) -> CliResult<PathBuf> {
    let solvers: Vec<String> = a.solver.iter().map(|s| s.trim().to_ascii_lowercase()).collect();
    if let Some(bad) = solvers.iter().find(|s| !SOLVERS.contains(&s.as_str())) {
        return Err(CliError::Usage(format!(
            "unknown solver '{bad}'; available: {}",
            SOLVERS.join(", ")
        )));
    }
    if a.xi.is_empty() || a.xi.contains(&0) {
        return Err(CliError::Usage("--xi needs values >= 1".into()));
    }
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be >= 1".into()));
    }
    let (scenario, record) = load_scenario(&a.common)?;
    let layout = scenario.layout()?;
    let trace = read_trace(&a.trace)?;
    let grid = analysis_grid(&layout, a.grid, (scenario.grid.dx, scenario.grid.dy))?;
    let ga_params = GaParams {
        pop_size: a.pop_size,
        generations: a.generations,
        ..GaParams::default()
    };
    ga_params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let db_params = DbscanParams {
        eps: a.eps,
        min_pts: a.min_pts,
        ..DbscanParams::default()
    };
    db_params.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let base = build_problem(&trace, &grid, 1)?;
    let mut rows = Vec::new();
    for &xi in &a.xi {
        let mut problem = base.clone();
        problem.xi = xi;
        for solver in &solvers {
            let seeds: Vec<Option<u64>> = if solver == "ga" {
                (0..a.runs).map(|k| Some(a.seed.wrapping_add(k))).collect()
            } else {
                vec![None]
            };
            for seed in seeds {
                let started = Instant::now();
                let outcome = match solver.as_str() {
                    "ga" => solve_ga(&problem, &ga_params, seed.expect("ga has a seed")),
                    "dbscan" => solve_dbscan(&problem, &db_params),
                    _ => solve_exhaustive(&problem),
                };
                let wall = a.common.timing.then(|| started.elapsed().as_secs_f64());
                let row = match outcome {
                    Ok(r) => SolverRow {
                        xi,
                        solver: solver.clone(),
                        seed,
                        result: Some(r),
                        wall_time_s: wall,
                        error: None,
                    },
                    Err(e) => SolverRow {
                        xi,
                        solver: solver.clone(),
                        seed,
                        result: None,
                        wall_time_s: wall,
                        error: Some(e.to_string()),
                    },
                };
                match &row.result {
                    Some(r) => println!(
                        "xi={xi:<3} {solver:<10} objective {:.3} dB  mask {}",
                        r.objective, r.mask
                    ),
                    None => println!(
                        "xi={xi:<3} {solver:<10} skipped: {}",
                        row.error.as_deref().unwrap_or("")
                    ),
                }
                rows.push(row);
            }
        }
    }
    let mut bundle = ReportBundle::create(out_dir(&a.common, &scenario))?;
    bundle.write("solvers.csv", export::solver_csv(&rows, &base).as_bytes())?;
    if a.export_problem {
        bundle.write("problem.csv", export::problem_csv(&base).as_bytes())?;
    }
    let dir = bundle.root().to_path_buf();
    bundle.finish(json!({
        "command": "optimize",
        "inputs": [input_record(&a.trace)?],
        "scenario": scenario_info(&record),
        "xi": a.xi,
        "solvers": solvers,
        "seed": a.seed,
        "runs": a.runs,
        "populated_cells": base.n_cells(),
    }))?;
    Ok(dir)
}

pub fn cmd_compare(a: &CompareArgs) -> CliResult<PathBuf> {
    let (scenario, record) = load_scenario(&a.common)?;
    let seed = a.seed.unwrap_or(scenario.seed);
    let grid = analysis_grid(&scenario.layout()?, a.grid, (scenario.grid.dx, scenario.grid.dy))?;
    let ta = scenario.with_config(TxConfig::A).run(Some(seed))?;
    let tb = scenario.with_config(TxConfig::B).run(Some(seed))?;
    let ga = local_average(&ta, &grid, AveragingDomain::Db)?;
    let gb = local_average(&tb, &grid, AveragingDomain::Db)?;
    let gamma = gamma_map(&ga, &gb)?;
    let mut bundle = ReportBundle::create(out_dir(&a.common, &scenario))?;
    write_trace(&mut bundle, "trace_A", &ta)?;
    write_trace(&mut bundle, "trace_B", &tb)?;
    write_grid(
        &mut bundle,
        "average_A",
        &grid,
        &ga.means(),
        "mean strongest RSRP, config A",
        "dBm",
    )?;
    write_grid(
        &mut bundle,
        "average_B",
        &grid,
        &gb.means(),
        "mean strongest RSRP, config B",
        "dBm",
    )?;
    write_grid(&mut bundle, "gamma", &grid, &gamma.cells, "gamma (A - B)", "dB")?;
    let vals: Vec<f64> = gamma.cells.iter().flatten().copied().collect();
    let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
    println!("gamma over {} shared cells: mean {mean:.2} dB", vals.len());
    let dir = bundle.root().to_path_buf();
    bundle.finish(json!({
        "command": "compare",
        "seed": seed,
        "scenario": scenario_info(&record),
        "shared_cells": vals.len(),
    }))?;
    Ok(dir)
}
