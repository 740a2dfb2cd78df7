use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use super::weyl::{ball_center_radius, ball_sup};
use crate::config::{Experiment, ExperimentConfig};
use crate::eig::dense_eigs;
use crate::error::Result;
use crate::fields::{
    fd_curl, gauge_from_field_arc, gauge_shift, SampleBox, ScalarField, ScalarRole, VecFn,
};
use crate::identities::sample_points;
use crate::lattice::{assemble_dirac_with, gauge_conjugate, GridSpec, LinkRule};
use crate::report::{Check, Outcome, ResidualRow, SpectrumRow, Tables};
use crate::Point;

#[derive(Serialize)]
struct ReconstructionRow {
    center: Point,
    half_width: f64,
    step: f64,
    max_curl_error: f64,
    bound: f64,
}

#[derive(Serialize)]
struct BallRow {
    n: usize,
    center: Option<Point>,
    sup_b: f64,
    sup_a: f64,
    bound: f64,
    /// `sup|A| · n / 2`, the constant in `sup|A| <= c · 2/n`.
    c_estimate: f64,
    note: Option<String>,
}

/// Test gauge `f = 0.7 sin(0.9 x) cos(0.4 y) + 0.2 x y` with its gradient.
pub fn test_gauge_function() -> ScalarField {
    let grad: VecFn = Arc::new(|x: Point| {
        [
            0.63 * (0.9 * x[0]).cos() * (0.4 * x[1]).cos() + 0.2 * x[1],
            -0.28 * (0.9 * x[0]).sin() * (0.4 * x[1]).sin() + 0.2 * x[0],
        ]
    });
    ScalarField::new(
        "test-gauge",
        ScalarRole::Gauge,
        |x: Point| 0.7 * (0.9 * x[0]).sin() * (0.4 * x[1]).cos() + 0.2 * x[0] * x[1],
        Some(grad),
    )
}

pub fn run_gauge(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(Experiment::Gauge)?;
    let c = &cfg.gauge;
    let p = cfg.potential.build()?;
    let mut checks = Vec::new();
    let mut tables = Tables::default();

    // (a) curl of the reconstructed potential against B
    let mut recon = Vec::new();
    for (bi, b) in c.boxes.iter().enumerate() {
        let bx = SampleBox::new(b.center, b.half_width)?;
        let exclusion = if bx.contains([0.0, 0.0]) { 0.5 } else { 0.0 };
        let pts = sample_points(bx, c.samples, exclusion, cfg.seed.wrapping_add(bi as u64));
        let fd_h = 1e-3 * b.half_width.max(1.0);
        for &step in &c.steps {
            let rec = gauge_from_field_arc(p.b_fn(), bx, step)?;
            let err = crate::par::max_range(pts.len(), |i| {
                (fd_curl(&rec, pts[i], fd_h) - p.b(pts[i])).abs()
            });
            let bound = 10.0 * step * step;
            checks.push(Check::new(
                format!("reconstruction/box{bi}/step={step}"),
                err <= bound,
                format!("max |curl A - B| = {err:.3e} (bound {bound:.3e})"),
            ));
            tables.residuals.push(ResidualRow {
                table: "reconstruction".into(),
                label: format!("box{bi}"),
                parameter: step,
                residual: err,
            });
            recon.push(ReconstructionRow {
                center: b.center,
                half_width: b.half_width,
                step,
                max_curl_error: err,
                bound,
            });
        }
    }

    // (b) exact-difference covariance on a small grid
    let grid = GridSpec::new([0.0, 0.0], c.covariance_half_width, c.covariance_n)?;
    let f = test_gauge_function();
    let shifted = gauge_shift(&p, &f)?;
    let v = cfg.mass.build(ScalarRole::Mass)?;
    let a0 = cfg.electric.build(ScalarRole::Electric)?;
    let m1 = assemble_dirac_with(&grid, &p, &v, &a0, LinkRule::ExactDifference)?;
    let m2 = assemble_dirac_with(&grid, &shifted, &v, &a0, LinkRule::ExactDifference)?;
    let conj = gauge_conjugate(&m1, &f);
    let entry_defect = (0..m2.dim())
        .flat_map(|r| m2.row(r).map(move |(col, x)| (r, col, x)))
        .map(|(r, col, x)| (x - conj.get(r, col)).norm())
        .fold(0.0, f64::max);
    let e1 = dense_eigs(&m1.to_dense(), m1.dim())?;
    let e2 = dense_eigs(&m2.to_dense(), m2.dim())?;
    let rel: Vec<f64> = e1
        .values
        .iter()
        .zip(&e2.values)
        .map(|(a, b)| {
            let scale = a.abs().max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).abs() / scale
            }
        })
        .collect();
    let max_rel = rel.iter().copied().fold(0.0, f64::max);
    checks.push(Check::new(
        "covariance",
        max_rel <= c.covariance_tolerance,
        format!(
            "max relative eigenvalue deviation {max_rel:.3e} over {} values (bound {:.1e}); matrix entry defect {entry_defect:.3e}",
            rel.len(),
            c.covariance_tolerance
        ),
    ));
    for (i, (a, b)) in e1.values.iter().zip(&e2.values).enumerate() {
        tables.spectrum.push(SpectrumRow {
            series: "covariance/A".into(),
            index: i,
            value: *a,
            residual: e1.residuals[i],
        });
        tables.spectrum.push(SpectrumRow {
            series: "covariance/A+df".into(),
            index: i,
            value: *b,
            residual: e2.residuals[i],
        });
    }

    // (c) sup-norm of the reconstruction on weak-field balls
    let mut balls = Vec::new();
    for &n in &c.ns {
        let nf = n as f64;
        let Some(r) = ball_center_radius(&p, n) else {
            balls.push(BallRow {
                n,
                center: None,
                sup_b: f64::NAN,
                sup_a: f64::NAN,
                bound: f64::NAN,
                c_estimate: f64::NAN,
                note: Some("no ball with sup|B| <= 1/n^2".into()),
            });
            continue;
        };
        let center = [r, 0.0];
        let radius = 2.0 * nf;
        let rec = gauge_from_field_arc(
            p.b_fn(),
            SampleBox::new(center, radius)?,
            (radius / 8.0).min(0.25),
        )?;
        let sup_a = ball_sup(center, radius, |x| rec.a_norm(x));
        let sup_b = ball_sup(center, radius, |x| p.b(x).abs());
        let bound = 4.0 * nf * sup_b;
        checks.push(Check::new(
            format!("sup-a/n={n}"),
            sup_a <= bound,
            format!("sup|A| = {sup_a:.4e}, 4 n sup|B| = {bound:.4e}, center ({r}, 0)"),
        ));
        tables.residuals.push(ResidualRow {
            table: "sup-a".into(),
            label: "ball".into(),
            parameter: nf,
            residual: sup_a,
        });
        balls.push(BallRow {
            n,
            center: Some(center),
            sup_b,
            sup_a,
            bound,
            c_estimate: sup_a * nf / 2.0,
            note: None,
        });
    }

    let data = json!({
        "potential": p.name(),
        "reconstruction": recon,
        "covariance": {
            "n_per_side": c.covariance_n,
            "half_width": c.covariance_half_width,
            "gauge_function": f.name(),
            "max_relative_deviation": max_rel,
            "entry_defect": entry_defect,
        },
        "balls": balls,
    });
    Ok(Outcome::new(Experiment::Gauge, cfg, checks, data, tables))
}
