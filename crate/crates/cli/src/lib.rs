//! `semline` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod overlay;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use semline_core::extraction::CentroidMode;
use semline_core::geometry::HoughGridSpec;
use semline_core::hough::Kernel;

pub use config::{Rescale, RunConfig, Size};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "semline", version, about = "Semantic line detection and FOV auditing for store-aisle imagery")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Hough grid as THETAxR bins [default: 150x150].
    #[arg(long, global = true)]
    pub grid: Option<Size>,

    /// Threshold for Hough-space activation inputs [default: 0.01].
    #[arg(long, global = true)]
    pub threshold: Option<f64>,

    /// Threshold for Hough maps voted from image or feature inputs [default: 0.2].
    #[arg(long, global = true)]
    pub feature_threshold: Option<f64>,

    /// Feature values at or below this are ignored when voting [default: 0.15].
    #[arg(long, global = true)]
    pub feature_floor: Option<f32>,

    /// Comma-separated EA thresholds for dataset F1 [default: 0,0.95].
    #[arg(long, global = true, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,

    /// Rescale images to WIDTHxHEIGHT before detection, or "none" [default: 1200x1200].
    #[arg(long, global = true)]
    pub rescale: Option<Rescale>,

    /// Voting kernel: reference or optimized [default: optimized].
    #[arg(long, global = true)]
    pub kernel: Option<Kernel>,

    /// Region centroid: unweighted or weighted [default: unweighted].
    #[arg(long, global = true, value_parser = parse_centroid)]
    pub centroid: Option<CentroidMode>,

    /// RNG seed for synthetic data [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_centroid(s: &str) -> Result<CentroidMode, String> {
    match s {
        "unweighted" => Ok(CentroidMode::Unweighted),
        "weighted" => Ok(CentroidMode::Weighted),
        _ => Err(format!("unknown centroid mode {s:?}, expected unweighted or weighted")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect semantic lines in images, feature grids or activation grids.
    Detect(commands::detect::DetectArgs),
    /// Score predictions against annotations.
    Eval(commands::eval::EvalArgs),
    /// Label field-of-view quality from predictions.
    Fov(commands::fov::FovArgs),
    /// Generate a synthetic store-aisle dataset.
    Synth(commands::synth::SynthArgs),
    /// Time and cross-check the voting kernels.
    Bench(commands::bench::BenchArgs),
}

impl Cli {
    /// Loads the config file, if any, and applies flag overrides.
    pub fn resolve_config(&self) -> CliResult<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(g) = self.grid {
            c.grid = HoughGridSpec {
                n_theta: g.width as usize,
                n_r: g.height as usize,
            };
        }
        if let Some(t) = self.threshold {
            c.threshold = t;
        }
        if let Some(t) = self.feature_threshold {
            c.feature_threshold = t;
        }
        if let Some(f) = self.feature_floor {
            c.feature_floor = f;
        }
        if let Some(t) = &self.taus {
            c.taus = t.clone();
        }
        if let Some(r) = self.rescale {
            c.rescale = r;
        }
        if let Some(k) = self.kernel {
            c.kernel = k;
        }
        if let Some(m) = self.centroid {
            c.centroid = m;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let mut config = cli.resolve_config()?;
    match cli.command {
        Command::Detect(args) => {
            config.validate()?;
            commands::detect::run(&config, &args)
        }
        Command::Eval(args) => {
            config.validate()?;
            commands::eval::run(&config, &args)
        }
        Command::Fov(args) => {
            config.validate()?;
            commands::fov::run(&config, &args)
        }
        Command::Synth(args) => {
            args.apply(&mut config);
            config.validate()?;
            commands::synth::run(&config, &args)
        }
        Command::Bench(args) => {
            config.validate()?;
            commands::bench::run(&config, &args)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
