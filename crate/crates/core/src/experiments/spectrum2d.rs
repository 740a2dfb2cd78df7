use serde::Serialize;
use serde_json::json;

use super::fmt_list;
use crate::config::{Experiment, ExperimentConfig};
use crate::eig::{dense_eigs, fold_groups, lanczos_lowest_with, pairing_defect, EigenResult};
use crate::error::Result;
use crate::fields::{check_confinement_conditions, PotentialField, ScalarField, ScalarRole};
use crate::lattice::{assemble_dirac, chirality_anticommutator, GridSpec, Squared};
use crate::report::{Check, Outcome, SpectrumRow, Tables};

#[derive(Serialize)]
struct Truncation {
    half_width: f64,
    n_per_side: usize,
    h: f64,
    /// Lowest values after folding the four lattice copies.
    values: Vec<f64>,
    raw: EigenResult,
}

fn lowest_folded(
    cfg: &ExperimentConfig,
    p: &PotentialField,
    v: &ScalarField,
    a0: &ScalarField,
    half_width: f64,
    k: usize,
) -> Result<Truncation> {
    let grid = GridSpec::with_spacing([0.0, 0.0], half_width, cfg.spectrum2d.h)?;
    let d = assemble_dirac(&grid, p, v, a0)?;
    let opts = cfg.solver.lanczos_options(cfg.seed);
    let raw = lanczos_lowest_with(&Squared(&d), 4 * k, cfg.solver.tol, &opts)?;
    Ok(Truncation {
        half_width,
        n_per_side: grid.n_per_side,
        h: grid.h(),
        values: fold_groups(&raw.values, 4),
        raw,
    })
}

fn push_rows(rows: &mut Vec<SpectrumRow>, series: &str, r: &EigenResult) {
    for (i, (v, res)) in r.values.iter().zip(&r.residuals).enumerate() {
        rows.push(SpectrumRow {
            series: series.to_string(),
            index: i,
            value: *v,
            residual: *res,
        });
    }
}

pub fn run_spectrum2d(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(Experiment::Spectrum2d)?;
    let c = &cfg.spectrum2d;
    let k = cfg.solver.k;
    let p = cfg.potential.build()?;
    let v = cfg.mass.build(ScalarRole::Mass)?;
    let a0 = cfg.electric.build(ScalarRole::Electric)?;
    let no_mass = ScalarField::zero(ScalarRole::Mass);
    let no_a0 = ScalarField::zero(ScalarRole::Electric);
    let (l1, l2) = (c.half_width, 2.0 * c.half_width);

    let mut checks = Vec::new();
    let mut tables = Tables::default();

    // stabilization in L
    let t1 = lowest_folded(cfg, &p, &v, &a0, l1, k)?;
    let t2 = lowest_folded(cfg, &p, &v, &a0, l2, k)?;
    let changes: Vec<f64> = t1
        .values
        .iter()
        .zip(&t2.values)
        .map(|(a, b)| (b - a).abs() / a.abs().max(f64::MIN_POSITIVE))
        .collect();
    let max_change = changes.iter().copied().fold(0.0, f64::max);
    let conditions =
        check_confinement_conditions(&p, &v, &a0, &c.condition_radii, c.condition_epsilon)?;
    for t in [&t1, &t2] {
        checks.push(Check::new(
            format!("converged/L={}", t.half_width),
            t.raw.converged,
            format!(
                "unconverged indices {:?}, max residual {:.3e}",
                t.raw.unconverged,
                t.raw.max_residual()
            ),
        ));
        push_rows(&mut tables.spectrum, &format!("L={}", t.half_width), &t.raw);
    }
    if conditions.all_satisfied() {
        checks.push(Check::new(
            "stabilization",
            max_change <= c.stability,
            format!(
                "max relative change {max_change:.3e} (bound {}), per value {}",
                c.stability,
                fmt_list(&changes)
            ),
        ));
    }

    // same truncations without the mass term
    let f1 = lowest_folded(cfg, &p, &no_mass, &a0, l1, 1)?;
    let f2 = lowest_folded(cfg, &p, &no_mass, &a0, l2, 1)?;
    let (m1, m2) = (f1.values[0], f2.values[0]);
    let drop = 1.0 - m2 / m1;
    let slope = (m2 / m1).ln() / (l2 / l1).ln();
    checks.push(Check::new(
        "collapse-without-mass",
        drop >= c.collapse,
        format!(
            "lowest value {m1:.5e} -> {m2:.5e}, drop {drop:.3} (need {}), slope {slope:.3}",
            c.collapse
        ),
    ));
    for (t, name) in [(&f1, "no-mass/L"), (&f2, "no-mass/2L")] {
        checks.push(Check::new(
            format!("converged/{name}"),
            t.raw.converged,
            format!("max residual {:.3e}", t.raw.max_residual()),
        ));
        push_rows(&mut tables.spectrum, name, &t.raw);
    }

    // Sigma3 symmetry of the mass-free, A0-free operator and +- pairing
    let big = GridSpec::with_spacing([0.0, 0.0], l1, c.h)?;
    let full = assemble_dirac(&big, &p, &v, &a0)?;
    let chir_full = chirality_anticommutator(&full)?;
    let bare = assemble_dirac(&big, &p, &no_mass, &no_a0)?;
    let chir_bare = chirality_anticommutator(&bare)?;
    checks.push(Check::new(
        "chirality-anticommutator",
        chir_bare == 0.0,
        format!("mass-free value {chir_bare:e}; with configured V, A0: {chir_full:e}"),
    ));
    let small = GridSpec::new([0.0, 0.0], c.symmetry_half_width, c.symmetry_n)?;
    let ds = assemble_dirac(&small, &p, &no_mass, &no_a0)?;
    let dense = dense_eigs(&ds.to_dense(), ds.dim())?;
    let defect = pairing_defect(&dense.values);
    let bound = 2.0 * dense.max_residual();
    checks.push(Check::new(
        "pairing",
        defect <= bound,
        format!("pairing defect {defect:.3e}, bound 2 x residual = {bound:.3e}"),
    ));
    push_rows(&mut tables.spectrum, "pairing-dense", &dense);

    let data = json!({
        "truncations": [t1, t2],
        "relative_changes": changes,
        "max_relative_change": max_change,
        "no_mass": {
            "truncations": [f1, f2],
            "drop": drop,
            "slope": slope,
        },
        "chirality": { "mass_free": chir_bare, "configured": chir_full },
        "pairing": { "defect": defect, "bound": bound, "dim": ds.dim() },
        "confinement": conditions,
        "confinement_satisfied": conditions.all_satisfied(),
    });
    Ok(Outcome::new(
        Experiment::Spectrum2d,
        cfg,
        checks,
        data,
        tables,
    ))
}
