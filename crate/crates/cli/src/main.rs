use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_ops::{execute, load, render::render, to_json, Command, InputError, Loaded, Options, Report, VerifyTarget};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Causality checks for quantum operations on worldlines in 1+1 Minkowski spacetime.
///
/// Exit status: 0 when every assertion holds, 1 on a verification failure (the report is still
/// written), 2 on an input error.
#[derive(Parser)]
#[command(name = "causal-ops", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON, schema "causal-ops/1").
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render the scenario as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Causal relations, orders and the separating constructions declared in the scenario.
    CheckGeometry(Common),
    /// No-signalling verdicts with replayable witnesses.
    ClassifyChannel(Common),
    /// Charlie's state for each of Alice's alternatives.
    Sorkin(Common),
    /// Compose the scenario's probe measurements in causal order.
    SimulateFv(Common),
    /// Seeded randomised harnesses.
    Verify {
        target: Target,
        #[command(flatten)]
        common: Common,
    },
    /// Draw the scenario as an SVG spacetime diagram.
    Render(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Bfr,
    Hybrid,
    Axioms,
    Geometry,
    Fv,
    Factorisation,
    Soundness,
    Hierarchy,
}

impl From<Target> for VerifyTarget {
    fn from(t: Target) -> Self {
        match t {
            Target::Bfr => VerifyTarget::Bfr,
            Target::Hybrid => VerifyTarget::Hybrid,
            Target::Axioms => VerifyTarget::Axioms,
            Target::Geometry => VerifyTarget::Geometry,
            Target::Fv => VerifyTarget::Fv,
            Target::Factorisation => VerifyTarget::Factorisation,
            Target::Soundness => VerifyTarget::Soundness,
            Target::Hierarchy => VerifyTarget::Hierarchy,
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), InputError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| InputError::Io { file: p.display().to_string(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, InputError> {
    let (command, common) = match cli.command {
        Cmd::CheckGeometry(c) => (Some(Command::CheckGeometry), c),
        Cmd::ClassifyChannel(c) => (Some(Command::ClassifyChannel), c),
        Cmd::Sorkin(c) => (Some(Command::Sorkin), c),
        Cmd::SimulateFv(c) => (Some(Command::SimulateFv), c),
        Cmd::Verify { target, common } => (Some(Command::Verify(target.into())), common),
        Cmd::Render(c) => (None, c),
    };
    let loaded: Option<Loaded> = common.scenario.as_deref().map(load).transpose()?;
    let resolved = loaded.as_ref().map(|l| &l.resolved);

    let Some(command) = command else {
        write_output(common.svg.as_deref(), &render(resolved))?;
        return Ok(true);
    };
    if command.needs_scenario() && resolved.is_none() {
        return Err(InputError::Usage(format!("`{}` needs a scenario file", command.name())));
    }
    let options = Options { seed: common.seed, trials: common.trials };
    let outcome = execute(command, resolved, options)?;
    let passed = outcome.passed;
    let report = Report::new(command.name(), loaded.as_ref().map(|l| l.sha256.clone()), &options, outcome);
    write_output(common.out.as_deref(), &to_json(&report))?;
    if let Some(svg) = &common.svg {
        write_output(Some(svg), &render(resolved))?;
    }
    eprintln!("{}: {}", command.name(), if passed { "passed" } else { "FAILED" });
    Ok(passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
