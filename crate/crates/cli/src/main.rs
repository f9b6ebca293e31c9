use clap::Parser;
use measure_audit_cli::{run, RunConfig};

fn main() {
    let cfg = RunConfig::parse();
    std::process::exit(run(&cfg));
}
