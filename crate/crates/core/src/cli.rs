//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
//! 4 simulation error, and for `trial` 10 timeout, 11 fell off, 12 toppled.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{self, Overrides, Resolved};
use crate::controller::Variant;
use crate::error::Error;
use crate::evaluation::{diff_grids, run_grid, write_diff, write_grid, Experiment, SuccessGrid};
use crate::trial::{run_trial, write_record, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SIMULATION: i32 = 4;

pub fn outcome_exit_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Success => EXIT_OK,
        Outcome::Timeout => 10,
        Outcome::FellOff => 11,
        Outcome::Toppled => 12,
    }
}

pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidArgument(_) => EXIT_CONFIG,
        Error::Io { .. } | Error::Format { .. } => EXIT_IO,
        Error::Diverged { .. } | Error::DegeneratePlane { .. } => EXIT_SIMULATION,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tiltsurf",
    version,
    about = "Tilt-controlled object manipulation on a soft fabric surface"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one closed-loop trial and write its trajectory.
    Trial(CommonArgs),
    /// Run a success-rate grid for the configured controller.
    Heatmap(CommonArgs),
    /// Run the grid for both controllers with shared seeds and diff them.
    Compare(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Trial noise seed or grid master seed (overrides seed).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads for grid runs; defaults to all cores.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Override a config value by dotted key, e.g. --set fabric.k_struct=900.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Use the full 20 x 20 grid with 10 trials per cell and 10 s episodes.
    #[arg(long)]
    pub full: bool,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Trial(a) | Command::Heatmap(a) | Command::Compare(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Trial(_) => "trial",
            Command::Heatmap(_) => "heatmap",
            Command::Compare(_) => "compare",
        }
    }
}

/// Parses arguments, runs the command, and returns the exit code.
pub fn main_with<I, T>(
    args: I,
    env: Vec<(String, String)>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match run(&cli.command, env, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_exit_code(&e)
        }
    }
}

fn resolve(args: &CommonArgs, env: Vec<(String, String)>) -> Result<Resolved, Error> {
    let mut set = args.set.clone();
    if let Some(seed) = args.seed {
        set.push(format!("seed={seed}"));
    }
    let overrides = Overrides {
        env,
        full_grid: args.full,
        set,
    };
    let mut resolved = config::load(args.config.as_deref(), &overrides)
        .and_then(|c| c.resolve())
        .map_err(|e| match e {
            // A file that does not parse is a configuration problem, not an I/O one.
            Error::Format { path, message } => Error::config(path.display().to_string(), message),
            other => other,
        })?;
    if let Some(dir) = &args.out {
        resolved.output_dir = dir.clone();
    }
    Ok(resolved)
}

fn run(
    command: &Command,
    env: Vec<(String, String)>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let args = command.args();
    let cfg = resolve(args, env)?;
    for w in &cfg.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let dir = cfg
        .output_dir
        .join(cfg.run_id.as_deref().unwrap_or(command.name()));
    let print = |out: &mut dyn Write, line: String| {
        writeln!(out, "{line}").map_err(|e| Error::io("<stdout>", e))
    };

    match command {
        Command::Trial(_) => {
            let record = run_trial(&cfg.trial, &cfg.geometry, &cfg.fabric)?;
            write_record(&record, &dir, 0)?;
            print(
                out,
                format!(
                    "outcome={} final_error={:.4} samples={} dir={}",
                    record.outcome,
                    record.final_error,
                    record.samples.len(),
                    dir.display()
                ),
            )?;
            Ok(outcome_exit_code(record.outcome))
        }
        Command::Heatmap(_) => {
            let grid = grid_for(&cfg, cfg.controller.variant, args.jobs)?;
            write_grid(&grid, &dir, &cfg.controller.variant.to_string(), &cfg)?;
            print(
                out,
                format!(
                    "{}={:.2} cells={} dir={}",
                    cfg.controller.variant,
                    grid.aggregate,
                    grid.rates.len(),
                    dir.display()
                ),
            )?;
            Ok(EXIT_OK)
        }
        Command::Compare(_) => {
            let m = grid_for(&cfg, Variant::Manhattan, args.jobs)?;
            let e = grid_for(&cfg, Variant::Euclidean, args.jobs)?;
            let diff = diff_grids(&m, &e)?;
            write_grid(&m, &dir, "manhattan", &cfg)?;
            write_grid(&e, &dir, "euclidean", &cfg)?;
            write_diff(&diff, &dir, "diff", &cfg)?;
            print(
                out,
                format!(
                    "manhattan={:.2} euclidean={:.2} diff={:.2}",
                    m.aggregate, e.aggregate, diff.aggregate_diff
                ),
            )?;
            let pct =
                |r: Option<f64>| r.map_or("n/a".to_string(), |r| format!("{:.1}%", 100.0 * r));
            print(
                out,
                format!(
                    "improvement_over_euclidean={} share_of_manhattan={} corners: manhattan={:.3} euclidean={:.3}",
                    pct(diff.improvement_over_b),
                    pct(diff.share_of_a),
                    m.corner_mean(),
                    e.corner_mean()
                ),
            )?;
            Ok(EXIT_OK)
        }
    }
}

fn grid_for(cfg: &Resolved, variant: Variant, jobs: Option<usize>) -> Result<SuccessGrid, Error> {
    let exp = Experiment {
        controller: cfg.controller_for(variant),
        object: &cfg.object,
        geo: &cfg.geometry,
        fabric: &cfg.fabric,
        sensor: cfg.sensor,
    };
    run_grid(&cfg.grid, &exp, jobs)
}
