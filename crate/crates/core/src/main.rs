use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use dirac_lab::config::{Experiment, ExperimentConfig};
use dirac_lab::experiments;

/// Spectral experiments for magnetic Dirac operators on the plane.
#[derive(Parser, Debug)]
#[command(name = "dirac-lab", version)]
struct Cli {
    /// verify | spectrum2d | sectors | weyl | gauge
    experiment: String,
    /// TOML config, or a report.json whose embedded config is rerun.
    #[arg(long)]
    config: PathBuf,
    /// Override a config value, e.g. `--set solver.k=8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = dirac_lab::par::init_threads();
    let result = (|| {
        let exp: Experiment = cli.experiment.parse()?;
        let cfg = ExperimentConfig::load(&cli.config, &cli.set)?;
        let outcome = experiments::run(exp, &cfg)?;
        outcome.write(&cli.out)?;
        Ok::<_, dirac_lab::error::Error>(outcome)
    })();
    match result {
        Ok(o) => {
            for c in &o.report.checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            println!(
                "{} {} ({} threads), report in {}",
                o.report.experiment.name(),
                if o.passed() { "passed" } else { "FAILED" },
                threads,
                cli.out.display()
            );
            if o.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
