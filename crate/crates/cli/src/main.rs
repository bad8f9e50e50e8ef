mod cli;
mod commands;
mod grid;
mod inputs;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use cli::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Cert(#[from] certifier::CertError),
    #[error(transparent)]
    Pomdp(#[from] pomdp_core::PomdpError),
    #[error(transparent)]
    CaseStudy(#[from] case_studies::CaseStudyError),
    #[error(transparent)]
    Lp(#[from] lp_core::LpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Cert(certifier::CertError::NotFound { .. }) => 2,
            _ => 1,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("POMDP_CERT_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Input(format!("POMDP_CERT_THREADS=`{v}` is not a thread count")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Input(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Reach(a) => commands::reach(a),
        Command::VerifySafety(a) => commands::verify_safety_cmd(a),
        Command::VerifyOpt(a) => commands::verify_opt_cmd(a),
        Command::BuildModel(a) => commands::build_model(a),
        Command::ExportLp(a) => commands::export_lp(a),
        Command::CheckCert(a) => commands::check_cert(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
