//! Command-line front end, configuration, file output, and the worked example.
//!
//! Exit codes: `0` success, `1` failed check or runtime error, `2` configuration error.

mod commands;
mod config;
mod example51;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

pub use commands::{constrained_minimize_cmd, envelope, example51_cmd, figure1_cmd, identities, minimize_cmd, Outcome};
pub use config::{
    BoundaryKind, BoundarySpec, ConfigMap, DensityKind, DensitySpec, EnvelopeSpec, Example51Spec, LockingKind,
    LockingSpec, MeshSpec, RunConfig,
};
pub use example51::{
    deltas_from_levels, example51_cofactor_check, example51_det_interpolation, example51_divergence, example51_eval,
    figure1_export, reference_path, DivergenceReport, Example51Fields, Example51Point, Figure1Summary,
    InterpolationReport,
};
pub use output::{
    fmt_f64, read_vtk_summary, write_csv, write_deformation_vtk, write_vtk, VtkData, VtkSummary, VTK_MAGIC,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "lockstrain",
    version,
    about = "Relaxation and finite-element experiments for locking materials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CommandKind {
    Identities,
    Envelope,
    Minimize,
    ConstrainedMinimize,
    Example51,
    Figure1,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cofactor and determinant identities on random matrices.
    Identities(Overrides),
    /// Tabulate W, W^inf, laminate values and lower bounds along a matrix slice.
    Envelope(Overrides),
    /// Minimize the discrete energy.
    Minimize(Overrides),
    /// Minimize with |∇y| ≤ rho and det ∇y ≥ eps.
    ConstrainedMinimize(Overrides),
    /// Checks on the closed-form deformation with integrable minors but non-integrable second gradient.
    Example51(Overrides),
    /// Export the deformed cube as legacy VTK.
    Figure1(Overrides),
}

#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// Config file in sectioned key = value format.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// quadratic, double-well, stvk or stvk-gradpoly.
    #[arg(long)]
    density: Option<String>,
    /// Locking radius for the envelope region and the ball constraint.
    #[arg(long)]
    rho: Option<f64>,
    /// Number of envelope grid points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Arbitrary `section.key=value` override; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn split(self) -> (CommandKind, Overrides) {
        match self {
            Command::Identities(o) => (CommandKind::Identities, o),
            Command::Envelope(o) => (CommandKind::Envelope, o),
            Command::Minimize(o) => (CommandKind::Minimize, o),
            Command::ConstrainedMinimize(o) => (CommandKind::ConstrainedMinimize, o),
            Command::Example51(o) => (CommandKind::Example51, o),
            Command::Figure1(o) => (CommandKind::Figure1, o),
        }
    }
}

fn build_config(o: &Overrides) -> Result<RunConfig> {
    let mut map = match &o.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::config(0, p.display().to_string(), format!("cannot read config: {e}")))?;
            ConfigMap::parse(&text)?
        }
        None => ConfigMap::default(),
    };
    if let Some(v) = o.seed {
        map.set("run.seed", &v.to_string())?;
    }
    if let Some(v) = o.samples {
        map.set("run.samples", &v.to_string())?;
    }
    if let Some(v) = &o.density {
        map.set("density.kind", v)?;
    }
    if let Some(v) = o.rho {
        map.set("envelope.rho", &v.to_string())?;
        map.set("locking.rho", &v.to_string())?;
    }
    if let Some(v) = o.grid {
        map.set("envelope.grid", &v.to_string())?;
    }
    if let Some(v) = &o.output {
        map.set("run.output", &v.display().to_string())?;
    }
    for kv in &o.set {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(Error::config(0, kv.as_str(), "expected --set section.key=value"));
        };
        map.set(k.trim(), v)?;
    }
    RunConfig::from_map(&map)
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config { .. }
            | Error::InvalidParameter(_)
            | Error::IncompatibleParameters(_)
            | Error::EmptyAdmissibleSet(_)
    )
}

fn dispatch(kind: CommandKind, cfg: &RunConfig) -> Result<Outcome> {
    match kind {
        CommandKind::Identities => identities(cfg),
        CommandKind::Envelope => envelope(cfg),
        CommandKind::Minimize => minimize_cmd(cfg),
        CommandKind::ConstrainedMinimize => constrained_minimize_cmd(cfg),
        CommandKind::Example51 => example51_cmd(cfg),
        CommandKind::Figure1 => figure1_cmd(cfg),
    }
}

/// Parses `args` (including the program name), runs the subcommand, prints a summary,
/// and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (kind, overrides) = cli.command.split();
    let cfg = match build_config(&overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match dispatch(kind, &cfg) {
        Ok(out) => {
            for m in &out.messages {
                println!("{m}");
            }
            for p in &out.outputs {
                println!("wrote {}", p.display());
            }
            if out.passed {
                EXIT_OK
            } else {
                eprintln!("FAILED");
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if is_config_error(&e) {
                EXIT_CONFIG
            } else {
                EXIT_FAILED
            }
        }
    }
}

pub fn main_exit_code() -> i32 {
    run(std::env::args_os())
}
