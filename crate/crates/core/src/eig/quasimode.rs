//! Localized plane-wave quasimodes and their residuals.

use serde::{Deserialize, Serialize};

use super::vecops::{dot, norm};
use crate::clifford::Spinor;
use crate::error::{invalid, Error, Result};
use crate::fields::ScalarField;
use crate::lattice::{GridSpec, LinearOperator, Shifted};
use crate::{Point, C64};

/// Radial cutoff: 1 on `[0, n]`, 0 on `[2n, inf)`, and the quintic
/// smoothstep `1 - (10t^3 - 15t^4 + 6t^5)`, `t = (r - n)/n`, in between.
/// C² at both joins with `|g'| <= 1.875/n`.
pub fn cutoff(r: f64, n: f64) -> f64 {
    let t = (r - n) / n;
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// `d/dr` of [`cutoff`].
pub fn cutoff_derivative(r: f64, n: f64) -> f64 {
    let t = (r - n) / n;
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        -30.0 * t * t * (1.0 - t) * (1.0 - t) / n
    }
}

#[derive(Clone, Debug)]
pub struct QuasimodeSpec {
    pub k: [f64; 2],
    pub n: usize,
    pub center: Point,
    pub phi: Spinor,
    /// Gauge phase `e^{i f}`; `None` is the zero function.
    pub f_tilde: Option<ScalarField>,
}

impl QuasimodeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if (self.phi.norm() - 1.0).abs() > 1e-12 {
            return Err(invalid(
                "phi",
                format!("must be a unit spinor, |phi| = {}", self.phi.norm()),
            ));
        }
        if !(self.k[0].is_finite() && self.k[1].is_finite()) {
            return Err(invalid("k", "must be finite"));
        }
        Ok(())
    }

    /// `|k|^2`, the target spectral value.
    pub fn lambda(&self) -> f64 {
        self.k[0] * self.k[0] + self.k[1] * self.k[1]
    }
}

/// Grid samples of `e^{i f(x)} e^{i k·(x - q)} g_n(|x - q|) Phi`, normalized so
/// that `h^2 · sum |psi|^2 = 1`.
pub fn quasimode(grid: &GridSpec, spec: &QuasimodeSpec) -> Result<Vec<C64>> {
    spec.validate()?;
    let n = spec.n as f64;
    let h = grid.h();
    let q = spec.center;
    let reach = (q[0] - grid.center[0])
        .abs()
        .max((q[1] - grid.center[1]).abs())
        + 2.0 * n
        + 2.0 * h;
    if reach > grid.half_width {
        return Err(Error::BallOutsideBox {
            radius: 2.0 * n,
            cx: q[0],
            cy: q[1],
            required: reach,
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); 2 * grid.node_count()];
    crate::par::fill(&mut out, |idx| {
        let x = grid.node_at(idx / 2);
        let d = [x[0] - q[0], x[1] - q[1]];
        let g = cutoff(d[0].hypot(d[1]), n);
        if g == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let mut phase = spec.k[0] * d[0] + spec.k[1] * d[1];
        if let Some(f) = &spec.f_tilde {
            phase += f.value(x);
        }
        let c = if idx % 2 == 0 {
            spec.phi.c1
        } else {
            spec.phi.c2
        };
        C64::from_polar(g, phase) * c
    });
    let l2 = norm(&out) * h;
    if !(l2 > 0.0) {
        return Err(Error::Precondition(
            "quasimode vanishes on every grid node".into(),
        ));
    }
    for z in out.iter_mut() {
        *z /= l2;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylResidual {
    /// `|(H - lambda) psi| / |psi|`.
    pub plain: f64,
    /// `|(H + 1)^{-1} (H - lambda) psi| / |psi|`.
    pub preconditioned: f64,
    pub cg_converged: bool,
    pub cg_iterations: usize,
}

const CG_TOL: f64 = 1e-8;

/// Plain and resolvent-weighted residuals of `psi` at `lambda`. `h` must be
/// positive semidefinite so that `h + 1` is invertible.
pub fn weyl_residual(h: &dyn LinearOperator, lambda: f64, psi: &[C64]) -> Result<WeylResidual> {
    let n = h.dim();
    if psi.len() != n {
        return Err(invalid(
            "psi",
            format!("length {} does not match dimension {n}", psi.len()),
        ));
    }
    let psi_norm = norm(psi);
    if !(psi_norm > 0.0) {
        return Err(Error::Precondition("psi must be nonzero".into()));
    }
    let mut r = vec![C64::new(0.0, 0.0); n];
    h.apply(psi, &mut r);
    for (ri, pi) in r.iter_mut().zip(psi) {
        *ri -= *pi * lambda;
    }
    let plain = norm(&r) / psi_norm;
    let (x, converged, iterations) =
        conjugate_gradient(&Shifted(h, 1.0), &r, CG_TOL, 20 * n.max(50));
    Ok(WeylResidual {
        plain,
        preconditioned: norm(&x) / psi_norm,
        cg_converged: converged,
        cg_iterations: iterations,
    })
}

/// CG for a Hermitian positive definite system, stopping at relative
/// residual `tol`.
fn conjugate_gradient(
    a: &dyn LinearOperator,
    b: &[C64],
    tol: f64,
    max_iter: usize,
) -> (Vec<C64>, bool, usize) {
    let n = b.len();
    let mut x = vec![C64::new(0.0, 0.0); n];
    let bn = norm(b);
    if bn == 0.0 {
        return (x, true, 0);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![C64::new(0.0, 0.0); n];
    let mut rr = dot(&r, &r).re;
    for it in 1..=max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap).re;
        if !(pap > 0.0) {
            return (x, false, it);
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        let rr_new = dot(&r, &r).re;
        if rr_new.sqrt() <= tol * bn {
            return (x, true, it);
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + p[i] * beta;
        }
        rr = rr_new;
    }
    (x, false, max_iter)
}
