use std::path::PathBuf;

use clap::{Args, ValueEnum};

use semline_core::frontend::IntensityMap;
use semline_core::hough::{compare_kernels, KernelComparison};
use semline_core::io::write_atomic;
use semline_core::synth::{render_scene, SceneSpec};

use crate::config::{RunConfig, Size};
use crate::error::{CliError, CliResult};

/// Smallest run count that gives a meaningful median.
pub const MIN_RUNS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchInput {
    /// Rendered aisle scene with clutter and noise, noise floor applied.
    Scene,
    /// Every pixel nonzero: the worst case for both kernels.
    Dense,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Input sizes as WIDTHxHEIGHT, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1200x1200")]
    pub sizes: Vec<Size>,

    /// Timed runs per kernel; the median is reported.
    #[arg(long, default_value_t = MIN_RUNS)]
    pub runs: usize,

    #[arg(long, value_enum, default_value_t = BenchInput::Scene)]
    pub input: BenchInput,

    /// Write the comparisons as JSON.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

pub fn bench_input(size: Size, kind: BenchInput, config: &RunConfig) -> CliResult<IntensityMap> {
    let (w, h) = (size.width as usize, size.height as usize);
    match kind {
        BenchInput::Dense => Ok(IntensityMap::from_fn(w, h, |x, y| 0.25 + ((x * 7 + y * 13) % 17) as f32 / 32.0)?),
        BenchInput::Scene => {
            let spec = SceneSpec {
                width: size.width,
                height: size.height,
                focal_length: 0.7 * size.width as f64,
                clutter_lines: 10,
                noise_sigma: 0.05,
                rng_seed: config.seed,
                ..SceneSpec::default()
            };
            Ok(render_scene(&spec)?.suppress_below(config.feature_floor))
        }
    }
}

pub fn run(config: &RunConfig, args: &BenchArgs) -> CliResult<()> {
    if args.runs < MIN_RUNS {
        return Err(CliError::validation(format!("--runs must be at least {MIN_RUNS}")));
    }
    if args.sizes.is_empty() {
        return Err(CliError::validation("--sizes needs at least one size"));
    }
    let mut results: Vec<KernelComparison> = Vec::new();
    println!(
        "{:>11} {:>9} {:>14} {:>14} {:>7} {:>10} {:>6}",
        "input", "grid", "reference ms", "optimized ms", "ratio", "max rel", "equiv"
    );
    for &size in &args.sizes {
        let map = bench_input(size, args.input, config)?;
        let c = compare_kernels(&map, &config.grid, args.runs)?;
        println!(
            "{:>11} {:>9} {:>14.2} {:>14.2} {:>7.3} {:>10.2e} {:>6}",
            size.to_string(),
            format!("{}x{}", c.n_theta, c.n_r),
            c.reference_median_ms,
            c.optimized_median_ms,
            c.time_ratio,
            c.max_relative_error,
            if c.equivalent { "yes" } else { "NO" }
        );
        results.push(c);
    }
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&results).map_err(|e| CliError::Internal(e.to_string()))? + "\n";
        write_atomic(out, json.as_bytes()).map_err(|e| CliError::data_at(out.display(), e))?;
    }
    if let Some(bad) = results.iter().find(|c| !c.equivalent) {
        return Err(CliError::Internal(format!(
            "optimized kernel diverges from the reference at {}x{} (max relative error {:e})",
            bad.width, bad.height, bad.max_relative_error
        )));
    }
    Ok(())
}
