//! `toposeg` command-line driver.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 invalid arguments.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "toposeg",
    version,
    about = "Diffusion restoration and topological-derivative segmentation"
)]
#[command(args_override_self = true)]
struct Cli {
    /// Plain `key = value` file supplying default flags (flags override it)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Suppress progress lines on standard error
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic two-level test image
    Synth(SynthArgs),
    /// Denoise an image with isotropic or anisotropic diffusion
    Denoise(DenoiseArgs),
    /// Segment an image with the discrete or continuum topological derivative
    Segment(SegmentArgs),
    /// Noise, optional prefilter and segmentation, with an optional baseline comparison
    Pipeline(PipelineArgs),
    /// Compare two images
    Evaluate(EvaluateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum KindArg {
    Step,
    Disk,
    Blob,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FilterArg {
    Isotropic,
    Anisotropic,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PrefilterArg {
    None,
    Isotropic,
    Anisotropic,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Discrete,
    Continuum,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum GTypeArg {
    Pm1,
    Pm2,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long, default_value_t = 0.2)]
    pub low: f64,
    #[arg(long, default_value_t = 0.8)]
    pub high: f64,
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
}

#[derive(Args, Clone)]
pub struct DiffusionArgs {
    /// Explicit time step, 0 < tau <= 0.25
    #[arg(long, default_value_t = 0.2)]
    pub tau: f64,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    /// Conductance scale for anisotropic diffusion [default: 0.05]
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, value_enum, default_value = "pm1")]
    pub g_type: GTypeArg,
}

#[derive(Args, Clone)]
pub struct TopoArgs {
    /// Fraction of all edges crackable per outer iteration
    #[arg(long, default_value_t = 0.01)]
    pub crack_fraction: f64,
    /// Maximum fraction of all edges cracked in total
    #[arg(long, default_value_t = 0.05)]
    pub crack_budget: f64,
    /// Only edges with derivative below minus this value are cracked
    #[arg(long, default_value_t = toposeg::topo::DEFAULT_MIN_DERIVATIVE)]
    pub min_derivative: f64,
    #[arg(long, default_value_t = 20)]
    pub outer_iters: usize,
    #[arg(long, default_value_t = 5)]
    pub inner_iters: usize,
    /// Time step of the crack-aware diffusion
    #[arg(long, default_value_t = 0.2)]
    pub td_tau: f64,
    #[arg(long, default_value_t = 9)]
    pub min_region_size: usize,
    /// Continuum indicator cutoff (negative)
    #[arg(long, default_value_t = toposeg::topo::DEFAULT_THRESHOLD, allow_hyphen_values = true)]
    pub threshold: f64,
}

#[derive(Args)]
pub struct DenoiseArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub filter: FilterArg,
    #[command(flatten)]
    pub diffusion: DiffusionArgs,
    /// Clean image to score against (defaults to the input)
    #[arg(long, value_name = "FILE")]
    pub reference: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Args)]
pub struct SegmentArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[command(flatten)]
    pub topo: TopoArgs,
    /// Label grid output (text, one row per line)
    #[arg(long, value_name = "FILE")]
    pub labels: PathBuf,
    /// Viewable label image [default: labels path with .pgm extension]
    #[arg(long, value_name = "FILE")]
    pub view: Option<PathBuf>,
    /// Crack list output (discrete method)
    #[arg(long, value_name = "FILE")]
    pub cracks: Option<PathBuf>,
    /// Restored image output (discrete method)
    #[arg(long, value_name = "FILE")]
    pub restored: Option<PathBuf>,
    /// Iteration trace CSV output (discrete method)
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    /// Ground truth: a label grid (.txt) or a piecewise-constant image
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
    /// Clean image to score the restored image against
    #[arg(long, value_name = "FILE")]
    pub reference: Option<PathBuf>,
    /// Boundary F1 tolerance in pixels
    #[arg(long, default_value_t = 1)]
    pub tol: usize,
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Args)]
pub struct PipelineArgs {
    /// Clean source image (alternative to --synth)
    #[arg(long, value_name = "FILE", conflicts_with = "synth")]
    pub input: Option<PathBuf>,
    /// Synthetic clean source
    #[arg(long, value_enum)]
    pub synth: Option<KindArg>,
    #[arg(long, default_value_t = 128)]
    pub width: usize,
    #[arg(long, default_value_t = 128)]
    pub height: usize,
    #[arg(long, default_value_t = 0.2)]
    pub low: f64,
    #[arg(long, default_value_t = 0.8)]
    pub high: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "isotropic")]
    pub prefilter: PrefilterArg,
    #[arg(long, value_enum, default_value = "discrete")]
    pub method: MethodArg,
    #[command(flatten)]
    pub diffusion: DiffusionArgs,
    #[command(flatten)]
    pub topo: TopoArgs,
    /// Also run segment-only on the same noisy image
    #[arg(long)]
    pub compare: bool,
    /// Boundary F1 tolerance in pixels
    #[arg(long, default_value_t = 1)]
    pub tol: usize,
    #[arg(long, value_name = "DIR")]
    pub output_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    pub a: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub b: PathBuf,
    /// Comma-separated subset of: mse, psnr
    #[arg(long, default_value = "mse,psnr")]
    pub metrics: String,
    /// Peak intensity for PSNR (images are normalized to [0, 1])
    #[arg(long, default_value_t = 1.0)]
    pub max_val: f64,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("TOPOSEG_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| toposeg::Error::InvalidParameter(format!("TOPOSEG_THREADS={v:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(anyhow::Error::msg)?;
    }
    Ok(())
}

/// Joins the error chain, skipping causes already spelled out by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg
}

fn main() -> ExitCode {
    let args = match config::expand_config_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let ctx = commands::Context { quiet: cli.quiet };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Synth(a) => commands::synth(&ctx, a),
        Command::Denoise(a) => commands::denoise(&ctx, a),
        Command::Segment(a) => commands::segment(&ctx, a),
        Command::Pipeline(a) => commands::pipeline(&ctx, a),
        Command::Evaluate(a) => commands::evaluate(&ctx, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
