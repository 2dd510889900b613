use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use softphoc::evaluation::{bbox_counts, line_counts, EvalReport, Protocol};
use softphoc::io::{self, FormatError, FoundLine, SpotRecord};
use softphoc::synth::{random_scene, SceneParams};
use softphoc::{embed_scene, line_to_bbox, simulate, spot, NoiseConfig, SpottingConfig};

/// Soft-PHOC encoding, simulation, word spotting and evaluation.
#[derive(Parser)]
#[command(name = "softphoc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed word annotations into a scene-level tensor file.
    Encode(EncodeArgs),
    /// Like `encode`, followed by simulated prediction noise.
    Simulate(SimulateArgs),
    /// Find the best text line for each query in a probability tensor.
    Spot(SpotArgs),
    /// Score spotting records against ground-truth annotations.
    Eval(EvalArgs),
    /// Write a random synthetic annotation file and its query list.
    Synth(SynthArgs),
}

#[derive(Args)]
struct EncodeArgs {
    annotation: PathBuf,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    encode: EncodeArgs,
    #[arg(long, default_value_t = 0.0)]
    blur_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    confusion_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    background_leak: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SpotArgs {
    tensor: PathBuf,
    /// One query per line.
    queries: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    rho_res: f64,
    #[arg(long, default_value_t = 1.0)]
    theta_res: f64,
    #[arg(long, default_value_t = 20)]
    min_votes: u32,
    #[arg(long, default_value_t = 5.0)]
    nms_rho: f64,
    #[arg(long, default_value_t = 5.0)]
    nms_theta: f64,
    #[arg(long, default_value_t = 20)]
    max_candidates: usize,
    #[arg(long, default_value_t = 5)]
    gap_bridge: usize,
    #[arg(long, default_value_t = 2.0)]
    band_halfwidth: f64,
    #[arg(long, default_value_t = 10)]
    samples_per_char: usize,
    /// Worker threads for per-query processing; output order is unaffected.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Line,
    Bbox,
}

#[derive(Args)]
struct EvalArgs {
    detections: PathBuf,
    ground_truth: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Line)]
    mode: Mode,
    /// Line-overlap threshold (line mode) or IoU threshold (bbox mode).
    #[arg(long, default_value_t = 0.5, value_parser = parse_threshold)]
    threshold: f64,
    /// Image size used to clamp ground-truth vertices; unclamped if omitted.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Structured report path; defaults to `<detections>.eval.json`.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 480)]
    width: usize,
    #[arg(long, default_value_t = 360)]
    height: usize,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write every transcription as a query list.
    #[arg(long)]
    queries: Option<PathBuf>,
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t <= 1.0 {
        Ok(t)
    } else {
        Err(format!("threshold must be in (0, 1], got {t}"))
    }
}

enum CliError {
    Input(String),
    Io(String),
    NoQueries,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Io(_) => 3,
            CliError::NoQueries => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Io(m) => f.write_str(m),
            CliError::NoQueries => f.write_str("query list is empty"),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<softphoc::Error> for CliError {
    fn from(e: softphoc::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run_encode(args: &EncodeArgs, noise: Option<NoiseConfig>) -> Result<(), CliError> {
    let scene = io::read_annotations(&args.annotation, args.width, args.height)?;
    log::info!("{} words from {}", scene.words.len(), args.annotation.display());
    let tensor = match noise {
        Some(cfg) => simulate(&scene, &cfg)?,
        None => embed_scene(&scene)?,
    };
    io::write_tensor(&args.output, &tensor)?;
    Ok(())
}

fn run_spot(args: &SpotArgs) -> Result<(), CliError> {
    let cfg = SpottingConfig {
        heatmap_threshold: args.threshold,
        hough_rho_res: args.rho_res,
        hough_theta_res: args.theta_res,
        hough_min_votes: args.min_votes,
        nms_rho: args.nms_rho,
        nms_theta: args.nms_theta,
        max_candidates: args.max_candidates,
        gap_bridge: args.gap_bridge,
        band_halfwidth: args.band_halfwidth,
        query_samples_per_char: args.samples_per_char,
    };
    cfg.validate()?;
    let tensor = io::read_tensor(&args.tensor)?;
    let queries = io::parse_queries(&read_text(&args.queries)?)?;
    if queries.is_empty() {
        return Err(CliError::NoQueries);
    }
    let dims = (tensor.width(), tensor.height());

    let spot_one = |q: &String| -> Result<SpotRecord, softphoc::Error> {
        let found = match spot(&tensor, q, &cfg)? {
            Some(det) => Some(FoundLine {
                bbox: line_to_bbox(&det.segment, q.chars().count(), dims)?,
                segment: det.segment,
                dtw_distance: det.dtw_distance,
            }),
            None => None,
        };
        log::info!("{q}: {}", if found.is_some() { "found" } else { "not found" });
        Ok(SpotRecord {
            query: q.clone(),
            found,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let records = pool.install(|| queries.par_iter().map(spot_one).collect::<Result<Vec<_>, _>>())?;
    write_file(&args.output, io::format_records(&records).as_bytes())
}

fn run_eval(args: &EvalArgs) -> Result<(), CliError> {
    let records = io::parse_records(&read_text(&args.detections)?)?;
    let width = args.width.unwrap_or(1 << 30);
    let height = args.height.unwrap_or(1 << 30);
    let gt = io::read_annotations(&args.ground_truth, width, height)?;
    let counts = match args.mode {
        Mode::Line => {
            let results: Vec<_> = records.iter().map(SpotRecord::line_result).collect();
            line_counts(&results, &gt, args.threshold)?
        }
        Mode::Bbox => {
            let results: Vec<_> = records.iter().map(SpotRecord::box_result).collect();
            bbox_counts(&results, &gt, args.threshold)?
        }
    };
    let protocol = match args.mode {
        Mode::Line => Protocol::Line,
        Mode::Bbox => Protocol::Bbox,
    };
    let report = EvalReport::from_counts(protocol, args.threshold, counts);
    print!("{}", report.to_key_value());

    let report_path = args.report.clone().unwrap_or_else(|| {
        let mut p = args.detections.clone().into_os_string();
        p.push(".eval.json");
        PathBuf::from(p)
    });
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&report_path, format!("{json}\n").as_bytes())
}

fn run_synth(args: &SynthArgs) -> Result<(), CliError> {
    let params = SceneParams {
        image_width: args.width,
        image_height: args.height,
        ..SceneParams::default()
    };
    let scene = random_scene(args.seed, &params);
    write_file(&args.output, io::format_annotations(&scene).as_bytes())?;
    if let Some(q) = &args.queries {
        let list: String = scene.words.iter().map(|w| format!("{}\n", w.transcription)).collect();
        write_file(q, list.as_bytes())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPHOC_LOG", "error")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Encode(a) => run_encode(a, None),
        Command::Simulate(a) => run_encode(
            &a.encode,
            Some(NoiseConfig {
                blur_sigma: a.blur_sigma,
                confusion_rate: a.confusion_rate,
                background_leak: a.background_leak,
                seed: a.seed,
            }),
        ),
        Command::Spot(a) => run_spot(a),
        Command::Eval(a) => run_eval(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
