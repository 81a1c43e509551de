mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;
use commands::CliError;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Precondition(msg)) | Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    if let Some(t) = cli.params.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads {t}: {e}")))?;
    }
    let start = Instant::now();
    let out = commands::run(cli.group, &cli.params)?;
    let runtime_ms = start.elapsed().as_millis() as u64;

    let data = out.encode(cli.params.format)?;
    let manifest = serde_json::json!({
        "config": {
            "command": commands::command_name(&cli.group),
            "params": cli.params,
            "argv": argv.get(1..).unwrap_or_default(),
        },
        "version": env!("CARGO_PKG_VERSION"),
        "runtime_ms": runtime_ms,
        "notes": out.notes,
        "summary": out.summary,
    });
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::from)?;
    manifest_bytes.push(b'\n');

    match &cli.params.out {
        Some(path) => {
            std::fs::write(path, &data)?;
            std::fs::write(output::manifest_path(path), &manifest_bytes)?;
        }
        None => {
            std::io::stdout().lock().write_all(&data)?;
            std::io::stderr().lock().write_all(&manifest_bytes)?;
        }
    }
    Ok(())
}
