mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use commands::Report;
use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "qjets", version, about = "Quiver moment maps: predicates, strata, bounds and jet counts")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads for point counting (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Append-only count cache.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Json)]
    pub emit: Emit,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a run manifest here.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emit {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Total negativity, property (P), fundamental domain, simplicity, bridges.
    Check(commands::CheckArgs),
    /// Semisimple types of dimension d.
    Types(commands::TypesArgs),
    /// Auxiliary quiver of a semisimple type.
    Aux(commands::AuxArgs),
    /// Dimension formulas and lemma checks.
    Bounds(commands::BoundsArgs),
    /// Normalized point counts of the moment-map fibre over F_q[t]/(t^n).
    Count(commands::CountArgs),
    /// Point counts for the multiplicative preprojective relation.
    MpaCount(commands::MpaCountArgs),
    /// Ext-quiver of a collection of Mukai vectors.
    Extquiver(commands::ExtquiverArgs),
    /// Runs the acceptance criteria.
    Suite(commands::SuiteArgs),
    /// Re-runs a manifest and compares output hashes.
    Replay(commands::ReplayArgs),
}

fn emit(report: &Report, global: &Global) -> anyhow::Result<Vec<u8>> {
    let text = match global.emit {
        Emit::Json => {
            let mut s = serde_json::to_string_pretty(&report.json())?;
            s.push('\n');
            s
        }
        Emit::Csv => match &report.csv {
            Some(csv) => csv.clone(),
            None => bail!("--emit csv is only available for sequence reports (count)"),
        },
    };
    Ok(text.into_bytes())
}

/// Runs one command and returns the rendered report plus its verdict.
pub fn run(argv: &[String]) -> anyhow::Result<(Vec<u8>, bool, Cli)> {
    let cli = Cli::try_parse_from(argv)?;
    let report = commands::execute(&cli.command, &cli.global)?;
    let bytes = emit(&report, &cli.global)?;
    Ok((bytes, report.passed(), cli))
}

fn fail(err: &anyhow::Error) -> ExitCode {
    if let Some(e) = err.downcast_ref::<clap::Error>() {
        let _ = e.print();
        return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
    }
    let code = err
        .chain()
        .find_map(|e| e.downcast_ref::<qjets::Error>())
        .map_or("cli", qjets::Error::code);
    let msg = json!({"error": {"code": code, "message": format!("{err:#}")}});
    eprintln!("{msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let start = Instant::now();
    let (bytes, passed, cli) = match run(&argv) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).context("writing stdout")
        }
    };
    if let Err(e) = written {
        return fail(&e);
    }
    if let Some(path) = &cli.global.manifest {
        let m = RunManifest::new(&argv, &cli, &bytes, start.elapsed());
        if let Err(e) = m.and_then(|m| m.write(path)) {
            return fail(&e);
        }
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
