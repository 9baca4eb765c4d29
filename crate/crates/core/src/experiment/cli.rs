//! Command-line front end.
//!
//! ```text
//! emergent-comm simulate --config exp.toml [--out DIR] [--seed N] [--replicates R] [--jobs J] [--snapshot]
//! emergent-comm sweep --config exp.toml --grid alpha=0.5,1,2 --grid N=20,40 [...]
//! emergent-comm theory --meanings 24 --signals 12 --lambda 0.01 --alpha 0.5,1,4 --feedback
//! emergent-comm reproduce fig8 [--duration T] [...]
//! ```

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{load_config, ExperimentConfig, GridSpec};
use super::presets::Preset;
use super::runner::{run_experiment, ExperimentResult};
use crate::error::{Error, Result};
use crate::society::SocietyConfig;
use crate::theory::{dominant_count_pmf, regime_for};

#[derive(Debug, Parser)]
#[command(name = "emergent-comm", version, about = "Simulate and analyse signalling conventions in a society of learners")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the experiment described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Run a config file over a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Axis as `key=v1,v2,...`; keys are alpha, C, A, M, S, N. Repeatable.
        #[arg(long = "grid", value_name = "AXIS", required = true)]
        grid: Vec<String>,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Print closed-form predictions as CSV.
    Theory(TheoryArgs),
    /// Run a figure preset.
    Reproduce {
        preset: String,
        #[command(flatten)]
        run: RunFlags,
    },
}

#[derive(Debug, Args, Default)]
pub struct RunFlags {
    /// Master seed for every point.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Worker threads.
    #[arg(long, default_value_t = default_jobs())]
    pub jobs: usize,
    /// Save final count tables.
    #[arg(long)]
    pub snapshot: bool,
    /// Override the run length in time units.
    #[arg(long)]
    pub duration: Option<f64>,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long, short = 'M')]
    pub meanings: usize,
    #[arg(long, short = 'S')]
    pub signals: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    /// One or more comma-separated values; one row each.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<f64>,
    #[arg(long, short = 'C', default_value_t = 0.0)]
    pub certainty: f64,
    #[arg(long, short = 'A', default_value_t = 1.0)]
    pub alignment: f64,
    #[arg(long)]
    pub feedback: bool,
    /// Also print the dominant-count distribution.
    #[arg(long)]
    pub pmf: bool,
}

impl RunFlags {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(r) = self.replicates {
            cfg.replicates = r;
        }
        if let Some(d) = self.duration {
            cfg.cadence *= d / cfg.duration;
            cfg.duration = d;
        }
        cfg.snapshot |= self.snapshot;
    }
}

/// Parses one `--grid` axis into `grid`.
pub fn parse_axis(spec: &str, grid: &mut GridSpec) -> Result<()> {
    let bad = |msg: String| Error::InvalidConfig(vec![msg]);
    let (key, values) = spec.split_once('=').ok_or_else(|| bad(format!("grid axis `{spec}` must look like key=v1,v2")))?;
    let floats = || -> Result<Vec<f64>> {
        values.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad(format!("`{v}` is not a number in `{spec}`")))).collect()
    };
    let ints = || -> Result<Vec<usize>> {
        values.split(',').map(|v| v.trim().parse::<usize>().map_err(|_| bad(format!("`{v}` is not a count in `{spec}`")))).collect()
    };
    match key.trim() {
        "alpha" => grid.alpha = floats()?,
        "C" => grid.certainty = floats()?,
        "A" => grid.alignment = floats()?,
        "M" => grid.meanings = ints()?,
        "S" => grid.signals = ints()?,
        "N" => grid.agents = ints()?,
        other => return Err(bad(format!("unknown grid axis `{other}` (expected alpha, C, A, M, S or N)"))),
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidConfig(vec![e.to_string()]))?;
    execute(cli.command, out)
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate { config, run } => {
            let mut cfg = load_config(&config)?;
            run.apply(&mut cfg);
            report(&run_experiment(&cfg, run.jobs)?, out)
        }
        Command::Sweep { config, grid, run } => {
            let mut cfg = load_config(&config)?;
            let mut spec = GridSpec::default();
            for axis in &grid {
                parse_axis(axis, &mut spec)?;
            }
            cfg = cfg.with_grid(&spec);
            run.apply(&mut cfg);
            report(&run_experiment(&cfg, run.jobs)?, out)
        }
        Command::Reproduce { preset, run } => {
            let mut cfg = Preset::parse(&preset)?.experiment();
            run.apply(&mut cfg);
            report(&run_experiment(&cfg, run.jobs)?, out)
        }
        Command::Theory(args) => theory(&args, out),
    }
}

fn write_err(e: std::io::Error) -> Error {
    Error::io("<output>", e)
}

fn report(result: &ExperimentResult, out: &mut dyn Write) -> Result<()> {
    let dir = result.config.output_dir.display();
    writeln!(out, "point,gain_window,predicted_gain,regime").map_err(write_err)?;
    for s in &result.summaries {
        let g = s.gain_window.map(|e| format!("{:.4}", e.mean)).unwrap_or_default();
        let p = s.theory.predicted_gain.map(|v| format!("{v:.4}")).unwrap_or_default();
        writeln!(out, "{},{g},{p},{}", s.point, s.theory.label()).map_err(write_err)?;
    }
    let failed = result.failures().count();
    writeln!(out, "# wrote {dir} ({} points, {failed} failed replicates)", result.summaries.len()).map_err(write_err)
}

/// Columns printed by `theory`.
pub const THEORY_COLUMNS: &str =
    "M,S,lambda,alpha,C,A,feedback,gamma,lambda_alpha,lambda_alpha_over_gamma,x_c,predicted_gain,noncomm_unstable,comm_exists,bistable,regime";

fn theory(args: &TheoryArgs, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{THEORY_COLUMNS}").map_err(write_err)?;
    for &alpha in &args.alpha {
        let cfg = SocietyConfig::new(2, args.meanings, args.signals, alpha, args.lambda, args.certainty, args.alignment)
            .with_feedback(args.feedback);
        cfg.validate()?;
        let r = regime_for(&cfg);
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let ratio = (r.gamma > 0.0).then(|| r.lambda_alpha / r.gamma);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            args.meanings,
            args.signals,
            args.lambda,
            alpha,
            args.certainty,
            args.alignment,
            args.feedback,
            r.gamma,
            r.lambda_alpha,
            opt(ratio),
            opt(r.x_c),
            opt(r.predicted_gain),
            r.noncomm_unstable,
            r.comm_exists,
            r.bistable,
            r.label()
        )
        .map_err(write_err)?;
    }
    if args.pmf {
        writeln!(out).map_err(write_err)?;
        writeln!(out, "D,probability").map_err(write_err)?;
        for (d, p) in dominant_count_pmf(args.signals, args.meanings).iter().enumerate() {
            writeln!(out, "{d},{p}").map_err(write_err)?;
        }
    }
    Ok(())
}
