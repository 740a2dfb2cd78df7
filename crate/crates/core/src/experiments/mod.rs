//! Batch experiments driven by [`ExperimentConfig`].
//!
//! Each runner validates its configuration, computes everything, and only
//! then returns an [`Outcome`]; nothing is written on error.

mod gauge;
mod sectors;
mod spectrum2d;
mod verify;
mod weyl;

pub use gauge::run_gauge;
pub use sectors::run_sectors;
pub use spectrum2d::run_spectrum2d;
pub use verify::run_verify;
pub use weyl::{ball_center_radius, run_weyl};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::report::Outcome;

pub fn run(exp: Experiment, cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(exp)?;
    match exp {
        Experiment::Verify => run_verify(cfg),
        Experiment::Spectrum2d => run_spectrum2d(cfg),
        Experiment::Sectors => run_sectors(cfg),
        Experiment::Weyl => run_weyl(cfg),
        Experiment::Gauge => run_gauge(cfg),
    }
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}
