mod args;
mod commands;
mod manifest;
mod theta;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;

use args::{Command, ReplayArgs};
use commands::Run;
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "siegel",
    version,
    about = "Numerical laboratory for quadratic Siegel disks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PRECISION: u8 = 3;
const EXIT_DOMAIN: u8 = 4;

fn exit_code(err: &anyhow::Error) -> (u8, &'static str) {
    use siegel_core::Error;
    match err.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(e @ Error::PrecisionExhausted(_)) => (EXIT_PRECISION, e.name()),
        Some(e @ Error::RationalAngle(_)) => (EXIT_DOMAIN, e.name()),
        Some(
            e @ (Error::Parse(_)
            | Error::InvalidArgument(_)
            | Error::NoCandidates
            | Error::InsufficientScales(_)
            | Error::InsufficientDepth { .. }
            | Error::DegenerateCurve(_)),
        ) => (EXIT_USAGE, e.name()),
        Some(e) => (EXIT_OTHER, e.name()),
        None => (EXIT_OTHER, "Error"),
    }
}

fn execute(command: &Command) -> Result<Run> {
    let mut run = Run::default();
    match command {
        Command::Radius(a) => commands::radius(a, &mut run)?,
        Command::Boundary(a) => commands::boundary(a, &mut run)?,
        Command::Series(a) => commands::series(a, &mut run)?,
        Command::Residual(a) => commands::residual_cmd(a, &mut run)?,
        Command::Cf(a) => commands::cf(a, &mut run)?,
        Command::PinchProfile(a) => commands::pinch_profile_cmd(a, &mut run)?,
        Command::Distance(a) => commands::distance(a, &mut run)?,
        Command::Holder(a) => commands::holder(a, &mut run)?,
        Command::Stability(a) => commands::stability(a, &mut run)?,
        Command::Synth(a) => commands::synth(a, &mut run)?,
        Command::Target(a) => commands::target(a, &mut run)?,
        Command::Experiment(a) => commands::experiment(a, &mut run)?,
        Command::Replay(_) => bail!("replay cannot be nested"),
    }
    Ok(run)
}

/// Runs a command and writes its manifest next to the primary output.
fn run_recorded(command: &Command) -> Result<u8> {
    let start = Instant::now();
    let run = execute(command)?;
    let manifest = RunManifest {
        command: command.name(),
        config: command.config(),
        precision_bits: run.precision_bits,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: run.inputs,
        outputs: run.outputs.clone(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    if let Some(primary) = run.outputs.first() {
        manifest.write(primary)?;
    }
    Ok(run.exit)
}

fn replay(a: &ReplayArgs) -> Result<u8> {
    let manifest = RunManifest::read(&a.manifest)?;
    let mut command = Command::from_manifest(&manifest.command, &manifest.config).map_err(|e| {
        siegel_core::Error::Parse(format!("manifest {}: {e}", a.manifest.display()))
    })?;
    if !a.verify {
        return run_recorded(&command);
    }
    let scratch = tempfile::tempdir()?;
    let relocate = |p: &Path| -> Result<PathBuf> {
        let name = p
            .file_name()
            .with_context(|| format!("output {} has no file name", p.display()))?;
        Ok(scratch.path().join(name))
    };
    let primary = manifest
        .outputs
        .first()
        .context("manifest lists no outputs")?;
    command.set_out(relocate(primary)?);
    let run = execute(&command)?;
    let mut mismatches = 0;
    for original in &manifest.outputs {
        let fresh = relocate(original)?;
        let same = match (std::fs::read(original), std::fs::read(&fresh)) {
            (Ok(x), Ok(y)) => x == y,
            _ => false,
        };
        say!(
            "{} {}",
            if same { "identical" } else { "DIFFERS" },
            original.display()
        );
        if !same {
            mismatches += 1;
        }
    }
    if run.outputs.len() != manifest.outputs.len() {
        say!(
            "output count differs: manifest lists {}, replay wrote {}",
            manifest.outputs.len(),
            run.outputs.len()
        );
        mismatches += 1;
    }
    if mismatches > 0 {
        bail!("{mismatches} output(s) not reproduced");
    }
    // the verdict is about reproduction, not about the command's own outcome
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut command = cli.command;
    let result = std::env::current_dir()
        .context("resolving the working directory")
        .and_then(|cwd| {
            command.make_paths_absolute(&cwd);
            match &command {
                Command::Replay(a) => replay(a),
                other => run_recorded(other),
            }
        });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let (code, name) = exit_code(&err);
            eprintln!("error[{name}]: {err:#}");
            ExitCode::from(code)
        }
    }
}
