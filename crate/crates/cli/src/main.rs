mod args;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use toepspec::Error;

use args::Cli;
use run::Outcome;

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    seed: u64,
    status: &'static str,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    config: &'a Cli,
    outputs: &'a [PathBuf],
    results: &'a serde_json::Value,
}

/// 2 for bad input, 3 for numerical failures, 1 for i/o.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Dsl(_) | Error::Format(_) => 2,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn manifest_path(cli: &Cli) -> PathBuf {
    if let Some(p) = &cli.manifest {
        return p.clone();
    }
    match cli.command.out() {
        Some((dir, true)) => dir.join("manifest.json"),
        Some((file, false)) => file.with_extension("manifest.json"),
        None => PathBuf::from("toepspec-manifest.json"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let mut outcome = Outcome::default();
    let result = run::run(&cli, &mut outcome);
    let (code, error) = match &result {
        Ok(()) => (0, None),
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code(e), Some(e.to_string()))
        }
    };
    let manifest = Manifest {
        tool: "toepspec",
        version: toepspec::VERSION,
        subcommand: cli.command.name(),
        seed: cli.seed,
        status: if code == 0 { "ok" } else { "error" },
        exit_code: code,
        error,
        config: &cli,
        outputs: &outcome.outputs,
        results: &outcome.results,
    };
    let path = manifest_path(&cli);
    let written = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .map_or(Ok(()), std::fs::create_dir_all)
        .and_then(|_| {
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            std::fs::write(&path, text + "\n")
        });
    if let Err(e) = written {
        eprintln!("error: cannot write manifest {}: {e}", path.display());
        return ExitCode::from(if code == 0 { 1 } else { code });
    }
    ExitCode::from(code)
}
