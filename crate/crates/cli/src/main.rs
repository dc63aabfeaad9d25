//! `bsc` command-line front end.
//!
//! Exit status: 0 on success, 1 for usage errors (bad flags, bad config,
//! invalid parameters), 2 for data errors (unreadable or malformed input,
//! degenerate shapes, singular fits).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use bsc::correspondence::CorrespondenceJson;
use bsc::format::round_significant;
use bsc::pipeline::correspondence_pass;
use bsc::shapes::DEFAULT_FG_THRESHOLD;
use bsc::svg::{bench_plot_svg, correspondence_svg};
use bsc::{
    bench_scaling, classify_knn, extract_contours, generate_shape, leave_one_out_accuracy, load_pgm, load_points,
    match_shapes, save_points, synthetic_gallery, Algorithm, MatchResultJson, PipelineConfig64, Shape64,
    ShapeContextParams64, ShapeFamily,
};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

const SCORE_DIGITS: usize = 12;

#[derive(Parser)]
#[command(name = "bsc", version, about = "Bidirectional shape correspondence and matching")]
struct Cli {
    /// TOML file with [pipeline] and [shape_context] sections.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the boundary pixels of a PGM image into a point CSV.
    Extract {
        image: PathBuf,
        /// Gray levels at or above this are foreground.
        #[arg(long, default_value_t = DEFAULT_FG_THRESHOLD)]
        threshold: u8,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// One correspondence pass and the bidirectional score.
    Correspond {
        #[command(flatten)]
        pair: PairArgs,
        /// Split each direction into good and bad matches before choosing one.
        #[arg(long)]
        prune: bool,
        /// Write the chosen direction's correspondences here.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
    },
    /// Iterated correspondence and thin-plate-spline warping, then the final score.
    Match {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        tuning: MatchArgs,
        /// Write the full match result here.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        svg: Option<PathBuf>,
    },
    /// Run the matcher and write the first shape as it stands after the last warp.
    Warp {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        tuning: MatchArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// k-nearest-neighbour label of a query shape against a labelled gallery.
    Classify {
        /// Directory of .csv/.pgm shapes; the label is the subdirectory name, or
        /// the file stem up to the first '_'.
        #[arg(long, required_unless_present = "synthetic")]
        gallery: Option<PathBuf>,
        #[arg(long, required_unless_present = "synthetic")]
        query: Option<PathBuf>,
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        /// Leave-one-out accuracy on a generated circle/square/star gallery instead.
        #[arg(long, conflicts_with_all = ["gallery", "query"])]
        synthetic: bool,
        /// Shapes per family for --synthetic.
        #[arg(long, default_value_t = 10)]
        per_family: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_FG_THRESHOLD)]
        threshold: u8,
    },
    /// Time correspondence against the Hungarian baseline and fit log-log slopes.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "200,400,800,1600")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "bsc,hungarian")]
        algos: Vec<String>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also draw a log-log SVG plot.
        #[arg(long, value_name = "FILE")]
        plot: Option<PathBuf>,
    },
    /// Write a synthetic shape as a point CSV.
    Generate {
        /// circle, square, star, blob or multi_contour_glyph.
        #[arg(long)]
        family: String,
        #[arg(short = 'n', long, default_value_t = 60)]
        points: usize,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct PairArgs {
    /// First shape (.csv points or .pgm image).
    a: PathBuf,
    /// Second shape (.csv points or .pgm image).
    b: PathBuf,
    /// Foreground threshold for .pgm inputs.
    #[arg(long, default_value_t = DEFAULT_FG_THRESHOLD)]
    threshold: u8,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    iterations: Option<usize>,
    /// Spline regularization, as a multiple of the squared mean control-point distance.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    pipeline: PipelineConfig64,
    shape_context: Option<ShapeContextParams64>,
}

enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        // invalid parameters are the caller's mistake, not the data's
        match e.downcast_ref::<bsc::Error>() {
            Some(bsc::Error::BadParams(msg)) => Failure::Usage(msg.clone()),
            _ => Failure::Data(e),
        }
    }
}

impl From<bsc::Error> for Failure {
    fn from(e: bsc::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn load_config(path: Option<&Path>) -> CliResult<PipelineConfig64> {
    let Some(path) = path else {
        return Ok(PipelineConfig64::default());
    };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let file: FileConfig =
        toml::from_str(&text).map_err(|e| usage(format!("bad config {}: {}", path.display(), e.message())))?;
    let mut cfg = file.pipeline;
    if let Some(sc) = file.shape_context {
        cfg.sc_params = sc;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_shape(path: &Path, threshold: u8) -> CliResult<Shape64> {
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let shape = match ext.as_deref() {
        Some("csv") => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            load_points(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        Some("pgm") => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let img = load_pgm(&bytes).with_context(|| format!("parsing {}", path.display()))?;
            extract_contours(&img, threshold).with_context(|| format!("tracing {}", path.display()))?
        }
        _ => return Err(usage(format!("{}: expected a .csv or .pgm file", path.display()))),
    };
    Ok(shape)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(anyhow::Error::from)?;
    write(path, text + "\n")
}

/// Writes a line to stdout; a closed pipe (`bsc ... | head`) is not an error.
fn emit(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn print_json(value: &serde_json::Value) {
    emit(&serde_json::to_string_pretty(value).expect("json values serialize"));
}

fn score(v: f64) -> f64 {
    round_significant(v, SCORE_DIGITS)
}

fn apply(tuning: &MatchArgs, mut cfg: PipelineConfig64) -> CliResult<PipelineConfig64> {
    if let Some(n) = tuning.iterations {
        cfg.iterations = n;
    }
    if let Some(l) = tuning.lambda {
        cfg.lambda_scale = l;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn gallery_label(root: &Path, path: &Path) -> String {
    match path.parent() {
        Some(dir) if dir != root => dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        _ => {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            stem.split('_').next().unwrap_or_default().to_string()
        }
    }
}

fn shape_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).with_context(|| format!("reading gallery {}", dir.display()))?;
    for entry in entries {
        let path = entry.map_err(anyhow::Error::from)?.path();
        if path.is_dir() {
            out.extend(shape_files(&path)?);
        } else if matches!(path.extension().and_then(|e| e.to_str()), Some("csv" | "pgm")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Extract { image, threshold, output } => {
            if image.extension().and_then(|e| e.to_str()) != Some("pgm") {
                return Err(usage(format!("{}: extract expects a .pgm image", image.display())));
            }
            let shape = load_shape(&image, threshold)?;
            write(&output, save_points(&shape))?;
            print_json(&json!({ "contours": shape.contours.len(), "points": shape.len() }));
        }
        Command::Correspond { pair, prune, json: json_out, svg } => {
            let p = load_shape(&pair.a, pair.threshold)?;
            let q = load_shape(&pair.b, pair.threshold)?;
            let cfg = PipelineConfig64 { prune, ..cfg };
            let pass = correspondence_pass(&p, &q, &cfg)?;
            let (set, pruned) = pass.chosen();
            print_json(&json!({
                "score": score(pass.score),
                "direction": pass.direction,
                "forward_average_cost": pass.forward.average_cost,
                "backward_average_cost": pass.backward.average_cost,
                "kept": pruned.kept_count,
                "total": pruned.total_count(),
            }));
            if let Some(path) = json_out {
                write_json(&path, &CorrespondenceJson::new(set, prune.then_some(pruned)))?;
            }
            if let Some(path) = svg {
                write(&path, correspondence_svg(&p, &q, pruned))?;
            }
        }
        Command::Match { pair, tuning, json: json_out, svg } => {
            let cfg = apply(&tuning, cfg)?;
            let p = load_shape(&pair.a, pair.threshold)?;
            let q = load_shape(&pair.b, pair.threshold)?;
            let r = match_shapes(&p, &q, &cfg)?;
            print_json(&json!({
                "score": score(r.score),
                "iterations": r.per_iteration.len(),
                "direction": r.final_pass.direction,
                "kept": r.final_correspondences.kept_count,
                "per_iteration": r.per_iteration,
            }));
            if let Some(path) = json_out {
                write_json(&path, &MatchResultJson::from(&r))?;
            }
            if let Some(path) = svg {
                write(&path, correspondence_svg(&r.warped_p, &r.warped_q, &r.final_correspondences))?;
            }
        }
        Command::Warp { pair, tuning, output } => {
            let cfg = apply(&tuning, cfg)?;
            let p = load_shape(&pair.a, pair.threshold)?;
            let q = load_shape(&pair.b, pair.threshold)?;
            let r = match_shapes(&p, &q, &cfg)?;
            write(&output, save_points(&r.warped_p))?;
            print_json(&json!({ "score": score(r.score), "points": r.warped_p.len() }));
        }
        Command::Classify { gallery, query, k, synthetic, per_family, seed, threshold } => {
            if k == 0 {
                return Err(usage("k must be >= 1"));
            }
            if synthetic {
                let shapes: Vec<Shape64> = synthetic_gallery(per_family, seed)?;
                let accuracy = leave_one_out_accuracy(&shapes, k, &cfg)?;
                print_json(&json!({ "shapes": shapes.len(), "k": k, "seed": seed, "accuracy": accuracy }));
                return Ok(());
            }
            let (dir, query) = (gallery.expect("clap enforces"), query.expect("clap enforces"));
            let files = shape_files(&dir)?;
            let shapes = files
                .iter()
                .map(|f| Ok(load_shape(f, threshold)?.with_label(gallery_label(&dir, f))))
                .collect::<CliResult<Vec<_>>>()?;
            if shapes.is_empty() {
                return Err(Failure::Data(anyhow!("gallery {} has no .csv or .pgm shapes", dir.display())));
            }
            let c = classify_knn(&load_shape(&query, threshold)?, &shapes, k, &cfg)?;
            emit(&c.label);
        }
        Command::Bench { sizes, algos, reps, output, seed, plot } => {
            let algos = algos.iter().map(|a| Algorithm::parse(a)).collect::<bsc::Result<Vec<_>>>()?;
            let report = bench_scaling(&sizes, &algos, reps, seed)?;
            write(&output, report.to_csv())?;
            if let Some(path) = plot {
                write(&path, bench_plot_svg(&report))?;
            }
            print_json(&report.summary_json());
        }
        Command::Generate { family, points, jitter, seed, output } => {
            let family: ShapeFamily = family.parse().map_err(|e: bsc::Error| usage(e.to_string()))?;
            let shape: Shape64 = generate_shape(family, points, jitter, seed)?;
            write(&output, save_points(&shape))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            eprintln!("bsc: {}", text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("bsc: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("bsc: {e:#}");
            ExitCode::from(2)
        }
    }
}
