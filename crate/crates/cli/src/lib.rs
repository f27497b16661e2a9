//! Experiment driver behind the `iel` binary. Every report embeds the full
//! run specification, so `iel --replay REPORT` reproduces it byte for byte.

pub mod args;
pub mod commands;
pub mod report;

use std::io::Write;

use iel_core::{IelError, Result};

pub use args::{Cli, Command, Mode};
pub use report::{read_spec, write_atomic, Body, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_ASSERT: i32 = 4;

pub fn exit_code(e: &IelError) -> i32 {
    match e {
        IelError::Capacity(_) | IelError::Infeasible(_) => EXIT_CAPACITY,
        _ => EXIT_INPUT,
    }
}

/// Run the experiment a spec describes.
pub fn run(spec: &Cli) -> Result<Report> {
    match &spec.command {
        Some(Command::Entropy(a)) => commands::cmd_entropy(spec, a),
        Some(Command::Audit(a)) => commands::cmd_audit(spec, a),
        Some(Command::Pipeline(a)) => commands::cmd_pipeline(spec, a),
        Some(Command::Avgcase(a)) => commands::cmd_avgcase(spec, a),
        Some(Command::Params(a)) => commands::cmd_params(spec, a),
        None => Err(IelError::Config("no subcommand given".into())),
    }
}

/// Run, write the report and map the outcome to an exit status.
pub fn execute(cli: &Cli) -> i32 {
    match execute_inner(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute_inner(cli: &Cli) -> Result<i32> {
    let (spec, dest) = match &cli.replay {
        Some(path) => {
            let spec = read_spec(&std::fs::read(path)?)?;
            let dest = cli.out.clone().or_else(|| spec.out.clone());
            (spec, dest)
        }
        None => (cli.clone(), cli.out.clone()),
    };
    let report = run(&spec)?;
    let bytes = report.render(&spec)?;
    match dest {
        Some(path) => write_atomic(&path, &bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    if (spec.assert || cli.assert) && !report.failures.is_empty() {
        for f in &report.failures {
            eprintln!("assertion failed: {f}");
        }
        return Ok(EXIT_ASSERT);
    }
    Ok(EXIT_OK)
}
