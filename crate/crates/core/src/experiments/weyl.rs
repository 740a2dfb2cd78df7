use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::json;

use super::fmt_list;
use crate::clifford::Spinor;
use crate::config::{Experiment, ExperimentConfig};
use crate::eig::{quasimode, weyl_residual, QuasimodeSpec, WeylResidual};
use crate::error::Result;
use crate::fields::{gauge_from_field_arc, PotentialField, SampleBox, ScalarField, ScalarRole};
use crate::lattice::{assemble_dirac, GridSpec, Squared};
use crate::report::{Check, Outcome, ResidualRow, Tables};
use crate::Point;

/// Smallest integer `R >= 6n + 10` with `sup |B| <= 1/n^2` on the ball of
/// radius `2n` around `(R, 0)`, judged by `B` on the ring samples used for
/// the sup-norm tables. `None` when no `R <= 2^40` qualifies.
pub fn ball_center_radius(p: &PotentialField, n: usize) -> Option<f64> {
    let nf = n as f64;
    let bound = 1.0 / (nf * nf);
    let ok = |r: f64| ball_sup([r, 0.0], 2.0 * nf, |x| p.b(x).abs()) <= bound;
    let lo0 = 6.0 * nf + 10.0;
    if ok(lo0) {
        return Some(lo0);
    }
    // grow, then bisect on integers
    let mut hi = lo0 * 2.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 2f64.powi(40) {
            return None;
        }
    }
    let mut lo = (hi / 2.0).max(lo0);
    while hi - lo > 1.0 {
        let mid = ((lo + hi) / 2.0).floor();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Rings per ball in [`ball_sup`].
const BALL_RINGS: usize = 16;
const BALL_ANGLES: usize = 64;

/// Max of `f` over the centre and `BALL_RINGS` circles of the closed ball.
pub(crate) fn ball_sup(center: Point, radius: f64, f: impl Fn(Point) -> f64) -> f64 {
    let mut m = f(center);
    for i in 1..=BALL_RINGS {
        let r = radius * i as f64 / BALL_RINGS as f64;
        for k in 0..BALL_ANGLES {
            let t = 2.0 * PI * k as f64 / BALL_ANGLES as f64;
            m = m.max(f([center[0] + r * t.cos(), center[1] + r * t.sin()]));
        }
    }
    m
}

#[derive(Serialize)]
struct WeylRow {
    lambda: f64,
    n: usize,
    center: Point,
    half_width: f64,
    h: f64,
    sup_b: f64,
    sup_a: f64,
    residual: WeylResidual,
}

pub fn run_weyl(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate(Experiment::Weyl)?;
    let c = &cfg.weyl;
    let p = cfg.potential.build()?;
    let free = p.is_zero_field();
    let s = c.spin;
    let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
    let phi = Spinor::new(C64::new(s[0], s[1]) / norm, C64::new(s[2], s[3]) / norm);
    let no_mass = ScalarField::zero(ScalarRole::Mass);
    let no_a0 = ScalarField::zero(ScalarRole::Electric);

    let mut rows = Vec::new();
    let mut tables = Tables::default();
    let mut checks = Vec::new();
    for &n in &c.ns {
        let nf = n as f64;
        let r = ball_center_radius(&p, n).ok_or_else(|| {
            crate::error::Error::Precondition(format!(
                "no ball of radius {} with sup|B| <= 1/n^2 found",
                2 * n
            ))
        })?;
        let center = [r, 0.0];
        let half_width = 2.0 * nf + 4.0 * c.h;
        let grid = GridSpec::with_spacing(center, half_width, c.h)?;
        // potential with the equivalent gauge on this ball; the zero field is
        // already in that gauge
        let local = if free {
            p.clone()
        } else {
            gauge_from_field_arc(
                p.b_fn(),
                SampleBox::new(center, half_width)?,
                grid.h().min(half_width / 8.0),
            )?
        };
        let sup_a = ball_sup(center, 2.0 * nf, |x| local.a_norm(x));
        let sup_b = ball_sup(center, 2.0 * nf, |x| local.b(x).abs());
        let d = assemble_dirac(&grid, &local, &no_mass, &no_a0)?;
        let op = Squared(&d);
        for &lambda in &c.lambdas {
            let spec = QuasimodeSpec {
                k: [lambda.sqrt(), 0.0],
                n,
                center,
                phi,
                f_tilde: None,
            };
            let psi = quasimode(&grid, &spec)?;
            let res = weyl_residual(&op, lambda, &psi)?;
            tables.residuals.push(ResidualRow {
                table: "weyl-plain".into(),
                label: format!("lambda={lambda}"),
                parameter: nf,
                residual: res.plain,
            });
            tables.residuals.push(ResidualRow {
                table: "weyl-preconditioned".into(),
                label: format!("lambda={lambda}"),
                parameter: nf,
                residual: res.preconditioned,
            });
            rows.push(WeylRow {
                lambda,
                n,
                center,
                half_width,
                h: grid.h(),
                sup_b,
                sup_a,
                residual: res,
            });
        }
    }

    for &lambda in &c.lambdas {
        let series: Vec<&WeylRow> = rows.iter().filter(|r| r.lambda == lambda).collect();
        let plain: Vec<f64> = series.iter().map(|r| r.residual.plain).collect();
        checks.push(Check::new(
            format!("decreasing/lambda={lambda}"),
            plain.windows(2).all(|w| w[1] < w[0]),
            format!("r(n) for n = {:?}: {}", c.ns, fmt_list(&plain)),
        ));
        checks.push(Check::new(
            format!("cg-converged/lambda={lambda}"),
            series.iter().all(|r| r.residual.cg_converged),
            "preconditioned residual solves".to_string(),
        ));
        if free {
            // least squares for log r = log c - log(n)/2
            let logc = series
                .iter()
                .map(|r| r.residual.plain.ln() + 0.5 * (r.n as f64).ln())
                .sum::<f64>()
                / series.len() as f64;
            let cfit = logc.exp();
            let ratios: Vec<f64> = series
                .iter()
                .map(|r| r.residual.plain * (r.n as f64).sqrt() / cfit)
                .collect();
            let worst = ratios.iter().map(|q| q.max(1.0 / q)).fold(1.0, f64::max);
            checks.push(Check::new(
                format!("free-fit/lambda={lambda}"),
                worst <= c.fit_factor,
                format!(
                    "c = {cfit:.4e}, r / (c / sqrt n) = {}, worst factor {worst:.3}",
                    fmt_list(&ratios)
                ),
            ));
        }
    }

    let data = json!({
        "free": free,
        "potential": p.name(),
        "rows": rows,
    });
    Ok(Outcome::new(Experiment::Weyl, cfg, checks, data, tables))
}
