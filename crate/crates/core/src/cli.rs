//! The `palm` command-line tool.
//!
//! Every failure prints one JSON line `{"error": kind, "message": text}` to
//! standard error. Exit codes: 0 success, 2 usage or input error, 3 internal
//! error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::eval::{evaluate, DEFAULT_PIXEL};
use crate::format::{read_points, truth_from_json, truth_to_json, write_points, Meta, PartitionFile};
use crate::geometry::{snap_to_grid, Axis, Dataset2D, GridSpec};
use crate::palm::{palm_fit, PalmConfig, SampleSpace};
use crate::svg::{render, SvgOptions};
use crate::synth;

#[derive(Debug, Parser)]
#[command(name = "palm", version, about = "MDL histograms for 2-D point data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a histogram to a CSV of points.
    Fit(FitArgs),
    /// Generate synthetic points and their ground truth.
    Synth(SynthArgs),
    /// Compare a learned partition with a ground truth.
    Eval(EvalArgs),
    /// Render a partition as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Direction {
    V,
    H,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = synth::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 300)]
    kmax: usize,
    #[arg(long, value_enum, default_value = "v")]
    direction: Direction,
    /// `auto` or `x0,y0,x1,y1`.
    #[arg(long, default_value = "auto")]
    space: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Partition,
    Sine,
    Gaussian,
    Quadrant,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Columns of the random partition.
    #[arg(long)]
    k1: Option<usize>,
    /// Rows per column of the random partition.
    #[arg(long)]
    k2: Option<usize>,
    /// Merge probability for neighboring cells of the random partition.
    #[arg(long)]
    pmerge: Option<f64>,
    /// Frequency of the sine boundary.
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    correlation: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    learned: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PIXEL)]
    pixel: f64,
    /// Report path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shade {
    None,
    Density,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    shade: Shade,
    #[arg(long, default_value_t = 800.0)]
    width: f64,
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, kind: "usage", message: message.into() }
    }

    /// Errors caused by the user's files or flags.
    fn input(e: Error) -> Self {
        let kind = match &e {
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::OutOfBounds { .. } => "out_of_bounds",
            Error::InvalidPartition(_) => "invalid_partition",
            Error::InvalidArgument(_) => "invalid_argument",
        };
        Self { code: 2, kind, message: e.to_string() }
    }

    fn internal(e: Error) -> Self {
        Self { code: 3, kind: "internal", message: e.to_string() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self { code: 2, kind: "io", message: format!("{}: {e}", path.display()) }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, contents: &[u8]) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn warn(message: &str) {
    eprintln!("{}", serde_json::json!({ "warning": message }));
}

fn configure_threads() {
    let Ok(v) = std::env::var("PALM_THREADS") else { return };
    if let Ok(n) = v.trim().parse::<usize>() {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", serde_json::json!({ "error": "usage", "message": first }));
            return 2;
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", serde_json::json!({ "error": f.kind, "message": f.message }));
            f.code
        }
    }
}

fn parse_space(spec: &str, epsilon: f64) -> Result<Option<GridSpec>, Failure> {
    if spec == "auto" {
        return Ok(None);
    }
    let v: Vec<f64> = spec
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::usage(format!("--space must be 'auto' or 'x0,y0,x1,y1', got '{spec}'")))?;
    if v.len() != 4 {
        return Err(Failure::usage(format!("--space needs 4 numbers, got {}", v.len())));
    }
    GridSpec::new(epsilon, [v[0], v[1]], [v[2] - v[0], v[3] - v[1]])
        .map(Some)
        .map_err(Failure::input)
}

fn auto_space(raw: &[[f64; 2]], epsilon: f64) -> Result<Dataset2D, Failure> {
    let grid = GridSpec::covering(raw, epsilon).map_err(Failure::input)?;
    snap_to_grid(raw, &grid).map_err(Failure::input)
}

#[derive(Serialize)]
struct FitSummary {
    total_bits: f64,
    regions: usize,
}

fn cmd_fit(a: FitArgs) -> CmdResult {
    if !(a.epsilon > 0.0 && a.epsilon.is_finite()) {
        return Err(Failure::usage("--epsilon must be positive"));
    }
    let raw = read_points(read(&a.input)?.as_bytes()).map_err(Failure::input)?;
    let explicit = parse_space(&a.space, a.epsilon)?;
    let data = match &explicit {
        Some(grid) => snap_to_grid(&raw, grid).map_err(Failure::input)?,
        None => auto_space(&raw, a.epsilon)?,
    };
    if data.is_empty() {
        warn("input has no points; the fit is the whole sample space");
    }
    let direction = match a.direction {
        Direction::V => Axis::Vertical,
        Direction::H => Axis::Horizontal,
    };
    let config = PalmConfig::new(a.kmax)
        .map_err(Failure::input)?
        .with_direction(direction)
        .with_sample_space(SampleSpace::Grid);
    let fit = palm_fit(&data, &config).map_err(Failure::internal)?;
    let meta = Meta {
        n: data.len(),
        total_bits: Some(fit.code_length.total_bits),
        k_max: Some(a.kmax),
        direction: Some(match a.direction {
            Direction::V => "v".into(),
            Direction::H => "h".into(),
        }),
        seed: None,
    };
    let file = PartitionFile::from_partition(&fit.partition, &fit.densities, meta);
    write(&a.out, file.to_json().map_err(Failure::internal)?.as_bytes())?;
    let summary = FitSummary { total_bits: fit.code_length.total_bits, regions: fit.partition.len() };
    println!("{}", serde_json::to_string(&summary).expect("serializable"));
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> CmdResult {
    let reject = |flag: &str, set: bool| {
        if set {
            Err(Failure::usage(format!("--{flag} does not apply to this family")))
        } else {
            Ok(())
        }
    };
    let partition_flags = a.k1.is_some() || a.k2.is_some() || a.pmerge.is_some();
    let (data, truth) = match a.family {
        Family::Partition => {
            reject("m", a.m.is_some())?;
            reject("correlation", a.correlation.is_some())?;
            synth::gen_partition_data(a.seed, a.k1.unwrap_or(5), a.k2.unwrap_or(5), a.pmerge.unwrap_or(0.4), a.n)
        }
        Family::Sine => {
            reject("k1/k2/pmerge", partition_flags)?;
            reject("correlation", a.correlation.is_some())?;
            synth::gen_sine(a.m.unwrap_or(2), a.n, a.seed)
        }
        Family::Gaussian => {
            reject("k1/k2/pmerge", partition_flags)?;
            reject("m", a.m.is_some())?;
            synth::gen_gaussian(a.correlation.unwrap_or(0.5), a.n, a.seed)
        }
        Family::Quadrant => {
            reject("k1/k2/pmerge", partition_flags)?;
            reject("m", a.m.is_some())?;
            reject("correlation", a.correlation.is_some())?;
            synth::gen_quadrant(a.seed, a.n)
        }
    }
    .map_err(Failure::input)?;
    let mut buf = Vec::new();
    write_points(&data, &mut buf).map_err(Failure::internal)?;
    write(&a.out, &buf)?;
    if let Some(path) = &a.truth {
        let json = truth_to_json(&truth, Some(a.seed)).map_err(Failure::internal)?;
        write(path, json.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportFile {
    mise: f64,
    /// Σ squared nearest-pixel distance, learned to truth; null if infinite
    /// or the truth has no boundary.
    l_learn: Option<f64>,
    l_true: Option<f64>,
    /// Per-pixel means of the two sums.
    mean_l_learn: Option<f64>,
    mean_l_true: Option<f64>,
    learned_boundary_empty: bool,
    true_boundary_empty: bool,
    region_count_learned: usize,
    region_count_true: Option<usize>,
    runtime_seconds: f64,
}

fn cmd_eval(a: EvalArgs) -> CmdResult {
    let start = Instant::now();
    let learned = PartitionFile::from_json(&read(&a.learned)?).map_err(Failure::input)?;
    let (partition, densities) = learned.to_partition().map_err(Failure::input)?;
    let truth = truth_from_json(&read(&a.truth)?).map_err(Failure::input)?;
    let report = evaluate(&truth, &partition, &densities, a.pixel).map_err(Failure::input)?;
    let finite = |v: f64| v.is_finite().then_some(v);
    let l = report.losses;
    let file = ReportFile {
        mise: report.mise,
        l_learn: l.and_then(|l| finite(l.l_learn)),
        l_true: l.and_then(|l| finite(l.l_true)),
        mean_l_learn: l.and_then(|l| finite(l.mean_learn)),
        mean_l_true: l.and_then(|l| finite(l.mean_true)),
        learned_boundary_empty: l.is_some_and(|l| l.learned_empty),
        true_boundary_empty: l.is_some_and(|l| l.truth_empty),
        region_count_learned: report.region_count_learned,
        region_count_true: report.region_count_true,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string(&file).expect("serializable") + "\n";
    match &a.out {
        Some(path) => write(path, json.as_bytes()),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn cmd_plot(a: PlotArgs) -> CmdResult {
    if !(a.width > 0.0 && a.width.is_finite()) {
        return Err(Failure::usage("--width must be positive"));
    }
    let file = PartitionFile::from_json(&read(&a.partition)?).map_err(Failure::input)?;
    let (partition, densities) = file.to_partition().map_err(Failure::input)?;
    let points = match &a.points {
        Some(path) => {
            let raw = read_points(read(path)?.as_bytes()).map_err(Failure::input)?;
            let grid = partition.grid().clone();
            // Points outside the partition's sample space are not drawn.
            let lattice = raw.iter().filter_map(|&p| grid.snap(p)).collect();
            Some(Dataset2D::new(grid, lattice).map_err(Failure::internal)?)
        }
        None => None,
    };
    let options = SvgOptions { width: a.width, shade: matches!(a.shade, Shade::Density), ..SvgOptions::default() };
    write(&a.out, render(&partition, &densities, points.as_ref(), &options).as_bytes())
}
