mod args;
mod report;
mod run;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command, ExperimentConfig};

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).context("parsing JSON config")
    } else {
        toml::from_str(&text).context("parsing TOML config")
    }
}

fn main_inner(cli: Cli) -> Result<bool> {
    let config = match cli.command {
        Command::Run(r) => {
            let mut c = load_config(&r.config)?;
            if cli.out.is_some() {
                c.out = cli.out;
            }
            c
        }
        command => ExperimentConfig { command, out: cli.out },
    };
    let started = SystemTime::now();
    let clock = Instant::now();
    let outcome = run::execute(&config.command)?;
    let report = report::build(&config, &outcome, started, clock.elapsed())?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(path) = &config.out {
        report::write_atomic(path, text.as_bytes())?;
    }
    let product_on_stdout = match &config.command {
        Command::Generate(a) => a.to.is_none(),
        Command::Schreier(args::SchreierCommand::Encode(a)) => a.to.is_none(),
        Command::Schreier(args::SchreierCommand::Decode(a)) => a.to.is_none(),
        _ => false,
    };
    if cli.json && !product_on_stdout {
        print!("{text}");
    } else if config.out.is_none() && !product_on_stdout {
        println!("{}", outcome.summary);
    } else {
        eprintln!("{}", outcome.summary);
    }
    Ok(outcome.infeasible)
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
    match main_inner(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
