//! `mfbwalk` command-line interface.

mod commands;
mod failure;
mod output;
mod specfile;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;
use failure::Failure;
use output::{Format, Rendered};

#[derive(Debug, Parser)]
#[command(name = "mfbwalk", version, about = "Arrivals, absorption and occupancy of pqrs random walks")]
struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expected arrivals per state, or the probability of reaching one state.
    Arrivals(ArrivalsArgs),
    /// Absorption probabilities per state and the mean absorption time.
    Absorb(AbsorbArgs),
    /// Mean absorption time by start state.
    Times(TimesArgs),
    /// Displacement distribution after n steps on the full line.
    Nstep(NstepArgs),
    /// Characteristic roots and their derivatives.
    Roots(RootsArgs),
    /// Absorption and escape to ±∞ on the modified full line.
    Escape(SpecStart),
    /// Monte Carlo estimates.
    Simulate(SimulateArgs),
    /// Compare closed forms against an oracle.
    Verify(VerifyArgs),
}

fn run(cli: &Cli) -> Result<Rendered, Failure> {
    match &cli.command {
        Command::Arrivals(a) => arrivals(a),
        Command::Absorb(a) => absorb(a),
        Command::Times(a) => times(a),
        Command::Nstep(a) => nstep(a),
        Command::Roots(a) => roots(a),
        Command::Escape(a) => escape(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => {
            let (rendered, passed) = verify(a)?;
            if !passed {
                emit(&rendered, cli.format)?;
                let failures = rendered.doc.values["failures"].as_array().map_or(0, |f| f.len());
                return Err(Failure::verification(format!("{failures} check(s) exceeded the tolerance")));
            }
            Ok(rendered)
        }
    }
}

fn emit(rendered: &Rendered, format: Format) -> Result<(), Failure> {
    let text = rendered.render(format).map_err(|e| Failure::usage(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::usage(format!("cannot write output: {e}")))
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("{}", f.to_json());
    ExitCode::from(f.code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Failure::usage(e.render().to_string().trim_end())),
    };
    match run(&cli).and_then(|r| emit(&r, cli.format)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(&f),
    }
}
