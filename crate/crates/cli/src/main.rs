//! `nls-collapse`: ground state, diagnostics, criteria, simulation, threshold
//! scans and reference tables for radial focusing cubic NLS in 3D.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use commands::Failure;
use config::{parse_words, read_config_file, RunConfig, Subcommand, UsageError};

#[derive(Debug, Parser)]
#[command(name = "nls-collapse", version, about)]
struct Cli {
    /// Flat `key = value` file; command-line values override it. May name the
    /// subcommand with `subcommand = ...`.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Args)]
struct Common {
    /// Write the artifact here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// `key=value` settings: profile (family=gaussian p=2 ...) and solver
    /// overrides (t_max=10 dt0=5e-4 ...).
    #[arg(value_name = "KEY=VALUE")]
    pairs: Vec<String>,
}

#[derive(Debug, ClapSubcommand)]
enum Command {
    /// Ground-state norms as a key-value table.
    Ground {
        /// Also write `r,Q` samples as CSV.
        #[arg(long, value_name = "PATH")]
        samples: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Conserved quantities and norms of a profile or a sampled field.
    Diag {
        /// CSV field with columns `r,re[,im]` on a uniform grid from 0.
        #[arg(long, value_name = "PATH")]
        field: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Use quadrature of the sampled profile instead of closed forms.
        #[arg(long)]
        sampled: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Verdict of every blow-up and scattering criterion.
    Criteria {
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Evolve a profile; `--out PREFIX` writes PREFIX.json and PREFIX.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Bisect the blow-up threshold over a lattice of fixed parameters.
    Scan {
        #[arg(long)]
        family: Option<String>,
        /// Fixed parameter `k=v`; comma-separated values form a lattice.
        #[arg(long, value_name = "K=V")]
        fix: Vec<String>,
        /// Parameter to bisect in (default p).
        #[arg(long)]
        vary: Option<String>,
        /// `lo:hi`, or `auto` for a bracket from the analytic criteria.
        #[arg(long)]
        bracket: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate a reference table with computed values and differences.
    Table {
        /// Table id, e.g. T1:Lgauss; `list` prints the known ids.
        id: Option<String>,
        /// Run threshold simulations for simulated tables.
        #[arg(long)]
        simulate: bool,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

type Pairs = Vec<(String, String)>;

fn push(pairs: &mut Pairs, key: &str, value: Option<impl ToString>) {
    if let Some(v) = value {
        pairs.push((key.to_string(), v.to_string()));
    }
}

fn push_flag(pairs: &mut Pairs, key: &str, set: bool) {
    if set {
        pairs.push((key.to_string(), "true".into()));
    }
}

/// Command-line settings of `command` as config pairs.
fn command_pairs(command: Command) -> Result<(Subcommand, Pairs), UsageError> {
    let mut pairs = Pairs::new();
    let (sub, common) = match command {
        Command::Ground { samples, common } => {
            push(
                &mut pairs,
                "samples",
                samples.map(|p| p.display().to_string()),
            );
            (Subcommand::Ground, common)
        }
        Command::Diag {
            field,
            json,
            sampled,
            common,
        } => {
            push(&mut pairs, "field", field.map(|p| p.display().to_string()));
            push_flag(&mut pairs, "json", json);
            push_flag(&mut pairs, "sampled", sampled);
            (Subcommand::Diag, common)
        }
        Command::Criteria { csv, common } => {
            push_flag(&mut pairs, "csv", csv);
            (Subcommand::Criteria, common)
        }
        Command::Simulate { common } => (Subcommand::Simulate, common),
        Command::Scan {
            family,
            fix,
            vary,
            bracket,
            tol,
            workers,
            common,
        } => {
            push(&mut pairs, "family", family);
            pairs.extend(parse_words(&fix)?);
            push(&mut pairs, "vary", vary);
            push(&mut pairs, "bracket", bracket);
            push(&mut pairs, "tol", tol);
            push(&mut pairs, "workers", workers);
            (Subcommand::Scan, common)
        }
        Command::Table {
            id,
            simulate,
            tol,
            workers,
            common,
        } => {
            push(&mut pairs, "id", id);
            push_flag(&mut pairs, "simulate", simulate);
            push(&mut pairs, "tol", tol);
            push(&mut pairs, "workers", workers);
            (Subcommand::Table, common)
        }
    };
    let mut all = parse_words(&common.pairs)?;
    all.extend(pairs);
    push(&mut all, "out", common.out.map(|p| p.display().to_string()));
    Ok((sub, all))
}

fn build_config(cli: Cli) -> Result<RunConfig, UsageError> {
    let mut file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => Vec::new(),
    };
    let named = file
        .iter()
        .rposition(|(k, _)| k == "subcommand")
        .map(|i| file.remove(i).1);
    let (sub, pairs) = match cli.command {
        Some(command) => command_pairs(command)?,
        None => match named {
            Some(name) => (Subcommand::from_name(&name)?, Vec::new()),
            None => {
                return Err(UsageError(
                    "no subcommand given; expected one of ground, diag, criteria, simulate, scan, table".into(),
                ))
            }
        },
    };
    RunConfig::build(sub, file, pairs)
}

fn table_list() -> String {
    nls_collapse::tables::TableId::all()
        .map(|id| format!("{id}\n"))
        .collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(Command::Table { id: Some(id), .. }) = &cli.command {
        if id == "list" {
            print!("{}", table_list());
            return ExitCode::SUCCESS;
        }
    }
    let config = match build_config(cli) {
        Ok(c) => c,
        Err(e) => return fail(Failure::Usage(e.0)),
    };
    let ground = match nls_collapse::groundstate::solve_default() {
        Ok(g) => g,
        Err(e) => return fail(Failure::Domain(e)),
    };
    match commands::run(&config, &ground) {
        Ok(report) => {
            print!("{}", report.stdout);
            match report.failure {
                Some(f) => fail(f),
                None => ExitCode::SUCCESS,
            }
        }
        Err(f) => fail(f),
    }
}

fn fail(failure: Failure) -> ExitCode {
    eprintln!("nls-collapse: {failure}");
    ExitCode::from(failure.exit_code() as u8)
}
