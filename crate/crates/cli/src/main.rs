use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conformal_sorter::output::IoError;
use conformal_sorter::report;
use conformal_sorter::{run, Scenario, ScenarioConfig, ScenarioError};
use serde_json::json;

/// Runs a figure reproduction or verification scenario.
#[derive(Parser, Debug)]
#[command(name = "conformal-sorter", version, about, after_help = key_help())]
struct Cli {
    scenario: Scenario,
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to `output.dir` from the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Extra `key=value` settings applied after the config file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn key_help() -> String {
    format!("Config keys:\n{}", ScenarioConfig::describe_keys())
}

fn fail(err: &ScenarioError) -> ExitCode {
    let record = json!({ "error": err.kind(), "message": err.to_string() });
    eprintln!("{record}");
    ExitCode::from(err.exit_code() as u8)
}

fn execute(cli: &Cli) -> Result<conformal_sorter::Outcome, ScenarioError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|source| IoError {
        path: cli.config.clone(),
        source,
    })?;
    let mut cfg = ScenarioConfig::parse(&text)?;
    cfg.apply_overrides(&cli.overrides)?;
    let out = match &cli.out {
        Some(p) => p.clone(),
        None if cfg.is_set("output.dir") => PathBuf::from(cfg.text_or("output.dir", "")),
        None => {
            return Err(conformal_sorter::ConfigError::InvalidValue {
                origin: "command line".into(),
                key: "output.dir".into(),
                msg: "pass --out or set output.dir".into(),
            }
            .into())
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    pool.install(|| run(cli.scenario, &cfg, &out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    for c in &outcome.checks {
        println!("{} {} = {:e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.measured);
    }
    let failed = report::failures(&outcome.checks);
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        let record = json!({ "error": "invariant", "failed": failed });
        eprintln!("{record}");
        ExitCode::from(1)
    }
}
