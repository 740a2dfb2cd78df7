use serde_json::json;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{invalid, Result};
use crate::lattice::GridSpec;
use crate::report::{Check, GapRow, Outcome, SpectrumRow, Tables};
use crate::sectors::{
    merge_sector_spectrum, sector_vs_lattice, ComparisonParams, RadialPotential, SweepParams,
    MIN_WINDOW_COUNT,
};

pub fn run_sectors(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(Experiment::Sectors)?;
    let c = &cfg.sectors;
    let gamma = cfg
        .potential
        .gamma()
        .ok_or_else(|| invalid("potential", "sector sweep needs a gamma exponent"))?;

    let mut checks = Vec::new();
    let mut tables = Tables::default();
    let mut sweeps = Vec::new();
    for &m_max in &c.m_sweep {
        let s = merge_sector_spectrum(&SweepParams {
            gamma,
            m_max,
            k: c.k,
            lambda: c.lambda,
            rho_max: c.rho_max,
            n: c.n,
        })?;
        tables.gaps.push(GapRow {
            series: "merged".into(),
            m_max,
            window_lo: 0.0,
            window_hi: c.lambda,
            count: s.gaps.count,
            max_gap: s.gaps.max_gap,
            mean_gap: s.gaps.mean_gap,
        });
        sweeps.push(s);
    }
    if let Some(last) = sweeps.last() {
        for (i, (v, r)) in last.merged.iter().zip(&last.merged_residuals).enumerate() {
            tables.spectrum.push(SpectrumRow {
                series: format!("merged/M={}", last.params.m_max),
                index: i,
                value: *v,
                residual: *r,
            });
        }
    }
    let insufficient: Vec<u32> = sweeps
        .iter()
        .filter(|s| s.params.m_max == 0 || s.gaps.count < MIN_WINDOW_COUNT)
        .map(|s| s.params.m_max)
        .collect();

    let gaps: Vec<f64> = sweeps.iter().map(|s| s.gaps.max_gap).collect();
    if sweeps.len() >= 2 {
        let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::new(
            "max-gap-decreasing",
            decreasing,
            format!("max gap along M = {:?}: {:?}", c.m_sweep, gaps),
        ));
    }
    if let (Some(bound), Some(last)) = (c.max_gap_bound, gaps.last()) {
        checks.push(Check::new(
            "max-gap-bound",
            *last <= bound,
            format!(
                "max gap {last:.6} at M = {} (bound {bound})",
                c.m_sweep.last().copied().unwrap_or(0)
            ),
        ));
    }

    let oracle = if c.oracle.enabled {
        let o = &c.oracle;
        let grid = GridSpec::new([0.0, 0.0], o.half_width, o.n_per_side)?;
        let cmp = sector_vs_lattice(
            RadialPotential::miller_simon(gamma)?,
            &grid,
            &ComparisonParams {
                count: o.count,
                m_max: o.m_max,
                k: o.k,
                tol: cfg.solver.tol,
            },
        )?;
        checks.push(Check::new(
            "oracle",
            cmp.pairs.len() == o.count && cmp.max_relative_deviation <= o.tolerance,
            format!(
                "{} pairs, max relative deviation {:.4e} (bound {})",
                cmp.pairs.len(),
                cmp.max_relative_deviation,
                o.tolerance
            ),
        ));
        for (i, pr) in cmp.pairs.iter().enumerate() {
            tables.spectrum.push(SpectrumRow {
                series: "oracle/lattice".into(),
                index: i,
                value: pr.lattice,
                residual: cmp.lattice_residual,
            });
            tables.spectrum.push(SpectrumRow {
                series: "oracle/sector".into(),
                index: i,
                value: pr.sector,
                residual: 0.0,
            });
        }
        Some(cmp)
    } else {
        None
    };

    let data = json!({
        "gamma": gamma,
        "sweeps": sweeps,
        "max_gaps": gaps,
        "insufficient_density": insufficient,
        "oracle": oracle,
    });
    Ok(Outcome::new(Experiment::Sectors, cfg, checks, data, tables))
}
