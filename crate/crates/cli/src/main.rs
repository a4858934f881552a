//! `snets`: command-line front end.
//!
//! Exit codes: 0 success, 1 unreadable or unwritable file, 2 usage,
//! 3 validation, 4 resource guard, 5 numerical non-convergence. Failures
//! print a JSON object `{"error": {code, class, message}}` on stderr.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use output::{manifest_path, read_file, write_atomic, CliResult, Failure, RunManifest};

fn main() -> ExitCode {
    let status = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = e.print();
                Ok(())
            }
            _ => Err(Failure::usage(e.render().to_string().trim_end())),
        },
    };
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code as u8)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis());
    let clock = Instant::now();

    let (command, threads) = match cli.command {
        Command::Rerun(r) => {
            let manifest: RunManifest = output::from_json(&read_file(&r.manifest)?, &r.manifest)?;
            let mut command = manifest.command;
            if let Some(out) = r.out {
                command.set_output(out);
            }
            (command, cli.threads.or(Some(manifest.threads)))
        }
        command => (command, cli.threads),
    };
    if threads == Some(0) {
        return Err(Failure::validation("--threads must be positive"));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    pool.build_global().map_err(|e| Failure::validation(format!("cannot start thread pool: {e}")))?;

    let artifacts = commands::execute(&command)?;

    let mut outputs = Vec::new();
    for (path, bytes) in &artifacts.extra {
        write_atomic(path, bytes)?;
        outputs.push(path.clone());
    }
    match command.output() {
        Some(path) => {
            write_atomic(path, &artifacts.primary)?;
            outputs.insert(0, path.clone());
            let manifest = RunManifest {
                subcommand: command.name().to_string(),
                command: command.clone(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                library_version: scrambled_nets::VERSION.to_string(),
                seed: command.seed(),
                threads: rayon::current_num_threads(),
                inputs: command.input().into_iter().cloned().chain(artifacts.inputs).collect(),
                outputs,
                started_unix_ms: started,
                wall_time_s: clock.elapsed().as_secs_f64(),
            };
            write_atomic(&manifest_path(path), &output::to_json(&manifest))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&artifacts.primary)
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::io(format!("cannot write to stdout: {e}")))?;
        }
    }
    artifacts.status.map_or(Ok(()), Err)
}
