//! `dmupf`: run, verify and inspect multi-user point function schemes.
//!
//! Exit codes: 0 when every check passes, 1 on a verification or parameter
//! search failure, 2 on invalid input or an exceeded enumeration budget.

mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_access, parse_list, parse_range, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad config, bad flags, or budget exceeded.
    Invalid(String),
    /// A check ran and failed.
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Invalid(_) => 2,
        }
    }
}

impl From<dmupf::Error> for CliError {
    fn from(e: dmupf::Error) -> Self {
        match e {
            dmupf::Error::ParamSearchFailed { .. } => CliError::Failed(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dmupf",
    version,
    about = "Multi-user point function sharing over GF(q^m)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Place, demand, evaluate and retrieve once (or for every demand tuple).
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Run seeds A..B (end exclusive) in parallel and report a summary.
        #[arg(long, value_parser = parse_range)]
        sweep: Option<std::ops::Range<u64>>,
        /// Experimental truncated-matrix retrieval.
        #[arg(long)]
        peeling: bool,
        /// Debug: skip the privacy check and use leaking parameters.
        #[arg(long)]
        break_privacy: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Exhaustive privacy and correctness check.
    Verify {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Debug: skip the privacy check and use leaking parameters.
        #[arg(long)]
        break_privacy: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Capacity-region constraints and feasible block lengths.
    Region {
        #[command(flatten)]
        structure: Structure,
        #[command(flatten)]
        output: Output,
    },
    /// Sample and validate scheme parameters.
    Params {
        #[command(flatten)]
        structure: Structure,
        /// Block lengths, e.g. "2,2".
        #[arg(long)]
        rates: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = dmupf::dmuss::DEFAULT_MAX_RETRIES)]
        max_retries: usize,
        #[command(flatten)]
        output: Output,
    },
}

/// Access structure and field, from flags or a config file (flags win).
#[derive(Args)]
struct Structure {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Access sets, e.g. "1,2,3;3,4,5".
    #[arg(long)]
    access: Option<String>,
    /// Server count; defaults to the largest server id.
    #[arg(long)]
    servers: Option<usize>,
    #[arg(short = 'T', long = "domain")]
    domain: Option<usize>,
    #[arg(short, long)]
    q: Option<u64>,
    #[arg(short, long)]
    m: Option<usize>,
}

pub struct Resolved {
    pub field: dmupf::FieldCtx,
    pub access: dmupf::dmuss::AccessStructure,
    pub domain: Option<usize>,
    pub rates: Option<Vec<usize>>,
    pub seed: u64,
}

impl Structure {
    fn resolve(&self) -> Result<Resolved, CliError> {
        let file = self.config.as_deref().map(RunConfig::load).transpose()?;
        let sets = match (&self.access, &file) {
            (Some(text), _) => parse_access(text)?,
            (None, Some(cfg)) => cfg.access.clone(),
            (None, None) => {
                return Err(CliError::Invalid("--access or --config is required".into()))
            }
        };
        let servers = self
            .servers
            .or(file.as_ref().map(|c| c.servers))
            .unwrap_or_else(|| sets.iter().flatten().copied().max().unwrap_or(0));
        let domain = self.domain.or(file.as_ref().map(|c| c.domain));
        if domain == Some(0) {
            return Err(CliError::Invalid("domain size T must be >= 1".into()));
        }
        let q = self.q.or(file.as_ref().map(|c| c.field.q));
        let m = self.m.or(file.as_ref().map(|c| c.field.m));
        let field = match (q, m, &file) {
            (None, None, Some(cfg)) => cfg.field.build()?,
            (Some(q), m, _) => dmupf::FieldCtx::new(q, m.unwrap_or(1))?,
            _ => return Err(CliError::Invalid("-q or --config is required".into())),
        };
        Ok(Resolved {
            field,
            access: dmupf::dmuss::AccessStructure::new(servers, sets)?,
            domain,
            rates: file.as_ref().map(|c| c.rates.clone()),
            seed: file.as_ref().map_or(0, |c| c.seed),
        })
    }
}

fn emit(output: &Output, body: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Invalid(format!("cannot write report: {e}")))
        }
    }
}

fn json_only(output: &Output) -> Result<(), CliError> {
    if output.format == Format::Csv {
        return Err(CliError::Invalid(
            "CSV output is only available for `region`".into(),
        ));
    }
    Ok(())
}

/// Runs a command; a report is written even when its verdict is a failure.
fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            sweep,
            peeling,
            break_privacy,
            output,
        } => {
            json_only(&output)?;
            let cfg = RunConfig::load(&config)?;
            let opts = report::RunOptions {
                peeling,
                break_privacy,
            };
            let (body, ok) = match sweep {
                Some(range) => report::sweep(&cfg, range, opts)?,
                None => report::run(&cfg, seed.unwrap_or(cfg.seed), opts)?,
            };
            emit(&output, &body)?;
            verdict(ok, "retrieval produced a wrong output")
        }
        Command::Verify {
            config,
            seed,
            break_privacy,
            output,
        } => {
            json_only(&output)?;
            let cfg = RunConfig::load(&config)?;
            let (body, ok) = report::verify(&cfg, seed.unwrap_or(cfg.seed), break_privacy)?;
            emit(&output, &body)?;
            verdict(ok, "privacy or correctness check failed")
        }
        Command::Region { structure, output } => {
            let r = structure.resolve()?;
            let body = match output.format {
                Format::Json => report::region_json(&r)?,
                Format::Csv => report::region_csv(&r)?,
            };
            emit(&output, &body)
        }
        Command::Params {
            structure,
            rates,
            seed,
            max_retries,
            output,
        } => {
            json_only(&output)?;
            let mut r = structure.resolve()?;
            if let Some(text) = rates {
                r.rates = Some(
                    parse_list(&text).map_err(|e| CliError::Invalid(format!("--rates: {e}")))?,
                );
            }
            let seed = seed.unwrap_or(r.seed);
            let (body, ok) = report::params(&r, seed, max_retries)?;
            emit(&output, &body)?;
            verdict(ok, "parameter search failed")
        }
    }
}

fn verdict(ok: bool, what: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Failed(what.into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Invalid(msg) | CliError::Failed(msg)) = &e;
            eprintln!("dmupf: {msg}");
            ExitCode::from(e.code())
        }
    }
}
