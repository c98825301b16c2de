//! `gowers-lab` command-line front end.

mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gowers_lab::config::{Budgets, OutputFormat, RunConfig};
use gowers_lab::Error;

#[derive(Parser, Debug)]
#[command(name = "gowers-lab", version, about = "Gowers norms, structure decompositions and van der Waerden search on Z_N")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = gowers_lab::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long = "budget-driver-steps", global = true)]
    driver_steps: Option<u64>,
    #[arg(long = "budget-cert-nodes", global = true)]
    cert_nodes: Option<u64>,
    #[arg(long = "budget-poly-degree", global = true)]
    poly_degree: Option<u64>,
    #[arg(long = "budget-vdw-nodes", global = true)]
    vdw_nodes: Option<u64>,
    #[arg(long = "budget-digit-limit", global = true)]
    digit_limit: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl GlobalArgs {
    fn config(&self) -> RunConfig {
        let d = Budgets::default();
        RunConfig {
            seed: self.seed,
            tol: self.tol,
            budgets: Budgets {
                driver_steps: self.driver_steps.unwrap_or(d.driver_steps),
                cert_nodes: self.cert_nodes.unwrap_or(d.cert_nodes),
                poly_degree: self.poly_degree.unwrap_or(d.poly_degree),
                vdw_nodes: self.vdw_nodes.unwrap_or(d.vdw_nodes),
                digit_limit: self.digit_limit.unwrap_or(d.digit_limit),
            },
            format: match self.format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            },
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Uniformity norms, dual functions and the generalized von Neumann inequality.
    #[command(subcommand)]
    Gowers(commands::GowersCmd),
    /// Almost-periodicity certificates.
    #[command(subcommand)]
    Uap(commands::UapCmd),
    /// Partitions of Z_N.
    #[command(subcommand)]
    Partition(commands::PartitionCmd),
    /// Level-set σ-algebras of certified functions.
    #[command(subcommand)]
    Levelset(commands::LevelsetCmd),
    /// Energy-increment structure decomposition.
    #[command(subcommand)]
    Structure(commands::StructureCmd),
    /// Recurrence averages, progressions, nets and sampling.
    #[command(subcommand)]
    Recur(commands::RecurCmd),
    /// Van der Waerden numbers, bounds and colouring checks.
    #[command(subcommand)]
    Vdw(commands::VdwCmd),
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("GOWERS_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("GOWERS_LAB_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    let config = cli.global.config();
    let result = config.validate().and_then(|_| commands::run(cli.command, &config));
    match result {
        Ok(output) => {
            // A closed pipe (e.g. `| head`) is not an error for us.
            let _ = std::io::stdout().lock().write_all(output.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::json!({ "error": report_error(&e) });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}

fn report_error(e: &Error) -> serde_json::Value {
    serde_json::to_value(e.report()).expect("error reports serialize")
}
