//! Front end for the `measure-audit` library: reads labelings and confusion
//! matrices, runs evaluations and audits, and renders reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod report;

use std::fs;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use input::parse_inputs;
pub use report::{render, Report};

/// Build the report for `cfg`, on a dedicated thread pool when a thread
/// count is given.
pub fn build_report(cfg: &RunConfig) -> CliResult<Report> {
    let ctx = commands::Context::from_config(cfg)?;
    let mut report = match cfg.threads {
        Some(0) => return Err(CliError::input("--threads must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?
            .install(|| commands::execute(cfg, &ctx))?,
        None => commands::execute(cfg, &ctx)?,
    };
    if !cfg.no_timestamp {
        report.generated_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    }
    Ok(report)
}

/// Run one command and write the rendered report to `--output` or stdout.
/// Returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let result = build_report(cfg).and_then(|report| {
        let text = render(&report, cfg.format);
        match &cfg.output {
            Some(path) => fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("measure-audit: {e}");
            e.exit_code()
        }
    }
}
