//! Command-line front end: batch runs, parameter sweeps and the server.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error, 4 port in
//! use.

mod run;
mod sweep;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::SimError;

pub use run::{execute_run, run_seed, LayerBinding, RunConfig, RunFile};
pub use sweep::{execute_sweep, sweep, SweepRow, SweepSpec, SweepTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_PORT_IN_USE: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Runtime(String),
    PortInUse(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::PortInUse(_) => EXIT_PORT_IN_USE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
            CliError::PortInUse(m) => write!(f, "port in use: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "steppe", version, about = "Deterministic agent-based simulation runner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one model for a number of ticks per seed and write probe CSVs.
    Run(RunArgs),
    /// Run every combination of a parameter grid for every seed.
    Sweep(SweepArgs),
    /// Serve the session protocol over WebSocket.
    Serve(ServeArgs),
    /// List the available models.
    Models,
    /// Print a model's parameter file with all defaults.
    Params { model: String },
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// JSON run file; command-line flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub steps: Option<u64>,
    /// Repeat for several replicates. Defaults to a single seed 0.
    #[arg(long = "seed")]
    pub seeds: Vec<u64>,
    /// Parameter override as name=value. Repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Output prefix; each seed writes `<prefix>_seed<k>.csv`.
    #[arg(long)]
    pub out: Option<String>,
    /// Raster binding `attr=path[,scale=S][,offset=O][,clamp]`. Repeatable.
    #[arg(long = "layer", value_name = "BINDING")]
    pub layers: Vec<String>,
    /// Export each seed's timeline to `<dir>/seed<k>/`.
    #[arg(long)]
    pub timeline: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SweepArgs {
    /// JSON sweep file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Summary CSV path; overrides the file's `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8765)]
    pub port: u16,
    /// Directory holding `<model>/params.json` default overrides.
    #[arg(long)]
    pub models: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run(args) => {
            let cfg = RunConfig::from_args(&args)?;
            for path in execute_run(&cfg)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Sweep(args) => {
            let path = execute_sweep(&args.spec, args.out.as_deref())?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Serve(args) => serve(&args),
        Command::Models => {
            for name in crate::models::names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Params { model } => {
            let m = crate::models::lookup(&model)?;
            print!("{}", crate::models::default_params_json(m.as_ref()));
            Ok(())
        }
    }
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    use crate::server::{Catalog, Server};
    let catalog = match &args.models {
        Some(dir) => Catalog::from_dir(dir)?,
        None => Catalog::builtin(),
    };
    let server = Server::bind((args.host.as_str(), args.port), catalog).map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            CliError::PortInUse(format!("{}:{}", args.host, args.port))
        } else {
            CliError::Runtime(format!("cannot listen on {}:{}: {e}", args.host, args.port))
        }
    })?;
    let stop = server.stop_flag();
    if let Err(e) = ctrlc::set_handler(move || stop.store(true, std::sync::atomic::Ordering::Relaxed)) {
        log::warn!("cannot install the shutdown handler: {e}");
    }
    eprintln!("listening on ws://{}", server.local_addr().map_err(|e| CliError::Runtime(e.to_string()))?);
    server.run().map_err(|e| CliError::Runtime(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Runtime(String::new()).exit_code(), 3);
        assert_eq!(CliError::PortInUse(String::new()).exit_code(), 4);
        assert_eq!(main_with_args(["steppe", "frobnicate"]), 2);
        assert_eq!(main_with_args(["steppe", "models"]), 0);
    }

    #[test]
    fn unknown_model_is_a_config_error() {
        assert_eq!(main_with_args(["steppe", "run", "--model", "chess", "--steps", "1"]), 2);
        assert_eq!(main_with_args(["steppe", "params", "chess"]), 2);
    }

    #[test]
    fn serve_rejects_missing_models_dir() {
        let code = main_with_args(["steppe", "serve", "--port", "0", "--models", "/nonexistent/steppe-models"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn serve_reports_port_in_use() {
        let held = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let port = held.local_addr().unwrap().port().to_string();
        assert_eq!(main_with_args(["steppe", "serve", "--port", port.as_str()]), 4);
    }
}
