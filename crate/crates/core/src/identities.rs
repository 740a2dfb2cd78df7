//! Pointwise finite-difference verification of the squared-operator
//! identities on closed-form spinor fields.
//!
//! Conventions: `D_{A,V,A0} psi = sum_j gamma_j (d_j + i A_j) psi + i V nu psi
//! + A0 psi`, and the positive Laplacian `nabla* nabla = -(d1^2 + d2^2)`, so
//!
//! ```text
//! H_A psi = -Lap psi - 2i A.grad psi - i (div A) psi + |A|^2 psi
//! D_A^2 psi = H_A psi + i B gamma1 gamma2 psi
//! D_{A,V}^2 psi = D_A^2 psi + i (dV.) nu psi + V^2 psi
//! ```
//!
//! The left-hand sides nest first-derivative stencils; `H_A` uses the direct
//! second-derivative stencil of the same order, so the residual measures the
//! truncation error of both sides rather than vanishing identically.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{clifford_mul, gamma1_mul, gamma2_mul, nu_mul, omega_mul, Spinor};
use crate::error::{invalid, Error, Result};
use crate::fields::{PotentialField, SampleBox, ScalarField};
use crate::{Point, C64};

const I: C64 = C64::new(0.0, 1.0);

/// A smooth `C^2`-valued function given in closed form.
#[derive(Clone)]
pub struct SpinorField {
    name: String,
    value: Arc<dyn Fn(Point) -> Spinor + Send + Sync>,
}

impl fmt::Debug for SpinorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpinorField")
            .field("name", &self.name)
            .finish()
    }
}

impl SpinorField {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(Point) -> Spinor + Send + Sync + 'static,
    ) -> Self {
        SpinorField {
            name: name.into(),
            value: Arc::new(value),
        }
    }

    #[inline]
    pub fn value(&self, x: Point) -> Spinor {
        (self.value)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn zero() -> Self {
        SpinorField::new("zero", |_| Spinor::ZERO)
    }

    /// `exp(-|x - c|^2 / w^2) · spin`.
    pub fn gaussian(width: f64, center: Point, spin: Spinor) -> Self {
        let w2 = width * width;
        SpinorField::new(format!("gaussian{{w={width}}}"), move |x| {
            let dx = x[0] - center[0];
            let dy = x[1] - center[1];
            spin * (-(dx * dx + dy * dy) / w2).exp()
        })
    }

    /// `(e^{-rho^2}, e^{-rho^2}(x + iy))`.
    pub fn vortex() -> Self {
        SpinorField::new("vortex", |x| {
            let g = (-(x[0] * x[0] + x[1] * x[1])).exp();
            Spinor::new(C64::new(g, 0.0), C64::new(g * x[0], g * x[1]))
        })
    }

    /// `e^{i k.x} e^{-rho^2/w^2} · spin`.
    pub fn plane_wave(k: [f64; 2], width: f64, spin: Spinor) -> Self {
        let w2 = width * width;
        SpinorField::new(
            format!("plane-wave{{k=({},{}),w={width}}}", k[0], k[1]),
            move |x| {
                let g = (-(x[0] * x[0] + x[1] * x[1]) / w2).exp();
                spin * C64::from_polar(g, k[0] * x[0] + k[1] * x[1])
            },
        )
    }
}

/// Spinor families as written in corpus files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpinorSpec {
    Gaussian {
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        center: [f64; 2],
        /// Spin as `[re1, im1, re2, im2]`.
        spin: [f64; 4],
    },
    Vortex,
    PlaneWave {
        k: [f64; 2],
        #[serde(default = "one")]
        width: f64,
        spin: [f64; 4],
    },
}

fn one() -> f64 {
    1.0
}

impl SpinorSpec {
    pub fn build(&self) -> Result<SpinorField> {
        let spin = |s: &[f64; 4]| Spinor::new(C64::new(s[0], s[1]), C64::new(s[2], s[3]));
        match self {
            SpinorSpec::Gaussian {
                width,
                center,
                spin: s,
            } => {
                if !(*width > 0.0) {
                    return Err(invalid("spinor.width", "must be positive"));
                }
                Ok(SpinorField::gaussian(*width, *center, spin(s)))
            }
            SpinorSpec::Vortex => Ok(SpinorField::vortex()),
            SpinorSpec::PlaneWave { k, width, spin: s } => {
                if !(*width > 0.0) {
                    return Err(invalid("spinor.width", "must be positive"));
                }
                Ok(SpinorField::plane_wave(*k, *width, spin(s)))
            }
        }
    }
}

/// Finite-difference step and order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stencil {
    pub h: f64,
    pub order: u32,
}

impl Stencil {
    pub fn new(h: f64, order: u32) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid("h", format!("must be positive, got {h}")));
        }
        if order != 2 && order != 4 {
            return Err(invalid("order", format!("must be 2 or 4, got {order}")));
        }
        Ok(Stencil { h, order })
    }

    pub fn order4(h: f64) -> Self {
        Stencil { h, order: 4 }
    }

    pub fn order2(h: f64) -> Self {
        Stencil { h, order: 2 }
    }

    /// Antisymmetric weights `(k, c)`: `f' ~ sum c (f(x + kh) - f(x - kh)) / h`.
    fn first(&self) -> &'static [(f64, f64)] {
        if self.order == 2 {
            &[(1.0, 0.5)]
        } else {
            &[(1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)]
        }
    }

    fn second(&self) -> &'static [(f64, f64)] {
        if self.order == 2 {
            &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)]
        } else {
            &[
                (-2.0, -1.0 / 12.0),
                (-1.0, 16.0 / 12.0),
                (0.0, -30.0 / 12.0),
                (1.0, 16.0 / 12.0),
                (2.0, -1.0 / 12.0),
            ]
        }
    }
}

/// Values the stencils can act on.
pub trait FdValue: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl FdValue for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl FdValue for Spinor {
    fn zero() -> Self {
        Spinor::ZERO
    }
}

fn shifted(x: Point, axis: usize, d: f64) -> Point {
    let mut y = x;
    y[axis] += d;
    y
}

/// Central first derivative along `axis`.
pub fn partial<T: FdValue>(f: &dyn Fn(Point) -> T, x: Point, axis: usize, s: Stencil) -> T {
    let mut acc = T::zero();
    for &(k, c) in s.first() {
        acc = acc + (f(shifted(x, axis, k * s.h)) + f(shifted(x, axis, -k * s.h)) * -1.0) * c;
    }
    acc * (1.0 / s.h)
}

/// Direct central second derivative along `axis`.
pub fn partial2<T: FdValue>(f: &dyn Fn(Point) -> T, x: Point, axis: usize, s: Stencil) -> T {
    let mut acc = T::zero();
    for &(k, c) in s.second() {
        acc = acc + f(shifted(x, axis, k * s.h)) * c;
    }
    acc * (1.0 / (s.h * s.h))
}

fn dirac_at(
    p: &PotentialField,
    v: Option<&ScalarField>,
    a0: Option<&ScalarField>,
    psi: &dyn Fn(Point) -> Spinor,
    x: Point,
    s: Stencil,
) -> Spinor {
    let d1 = partial(psi, x, 0, s);
    let d2 = partial(psi, x, 1, s);
    let val = psi(x);
    let mut out = gamma1_mul(d1) + gamma2_mul(d2) + clifford_mul(p.a(x), val) * I;
    if let Some(v) = v {
        if !v.is_zero() {
            out += nu_mul(val) * (I * v.value(x));
        }
    }
    if let Some(a0) = a0 {
        if !a0.is_zero() {
            out += val * a0.value(x);
        }
    }
    out
}

/// `(D_{A,V,A0} psi)(x)` with stencil derivatives.
pub fn apply_dirac(
    p: &PotentialField,
    v: &ScalarField,
    a0: &ScalarField,
    psi: &SpinorField,
    x: Point,
    s: Stencil,
) -> Spinor {
    dirac_at(p, Some(v), Some(a0), &|y| psi.value(y), x, s)
}

/// `D(D psi)(x)` by nesting the first-derivative stencils.
fn dirac_squared_nested(
    p: &PotentialField,
    v: Option<&ScalarField>,
    psi: &SpinorField,
    x: Point,
    s: Stencil,
) -> Spinor {
    let inner = |y: Point| dirac_at(p, v, None, &|z| psi.value(z), y, s);
    dirac_at(p, v, None, &inner, x, s)
}

/// `H_A psi + i B gamma1 gamma2 psi` with the direct Laplacian stencil.
fn lichnerowicz_rhs(p: &PotentialField, psi: &SpinorField, x: Point, s: Stencil) -> Spinor {
    let f = |y: Point| psi.value(y);
    let val = psi.value(x);
    let lap = partial2(&f, x, 0, s) + partial2(&f, x, 1, s);
    let d1 = partial(&f, x, 0, s);
    let d2 = partial(&f, x, 1, s);
    let a = p.a(x);
    let a_grad = d1 * a[0] + d2 * a[1];
    let a2 = a[0] * a[0] + a[1] * a[1];
    -lap + a_grad * (-2.0 * I) + val * C64::new(a2, -p.div_a(x)) + omega_mul(val) * (I * p.b(x))
}

/// `|D_A(D_A psi) - (H_A psi + i B gamma1 gamma2 psi)|(x)`.
pub fn lichnerowicz_residual(p: &PotentialField, psi: &SpinorField, x: Point, s: Stencil) -> f64 {
    (dirac_squared_nested(p, None, psi, x, s) - lichnerowicz_rhs(p, psi, x, s)).norm()
}

/// `|D_{A,V}(D_{A,V} psi) - (H_A psi + i B gamma1 gamma2 psi + i dV.nu psi + V^2 psi)|(x)`.
///
/// With `V = 0` this is exactly [`lichnerowicz_residual`].
pub fn mass_identity_residual(
    p: &PotentialField,
    v: &ScalarField,
    psi: &SpinorField,
    x: Point,
    s: Stencil,
) -> Result<f64> {
    if !v.has_grad() {
        return Err(Error::Precondition(
            "mass identity needs a closed-form gradient of V".into(),
        ));
    }
    if v.is_zero() {
        return Ok(lichnerowicz_residual(p, psi, x, s));
    }
    let val = psi.value(x);
    let vv = v.value(x);
    let rhs =
        lichnerowicz_rhs(p, psi, x, s) + clifford_mul(v.grad(x), nu_mul(val)) * I + val * (vv * vv);
    Ok((dirac_squared_nested(p, Some(v), psi, x, s) - rhs).norm())
}

/// `J_z psi = -i (x d_y - y d_x) psi + 1/2 sigma3 psi` with stencil derivatives.
pub fn apply_jz(psi: &dyn Fn(Point) -> Spinor, x: Point, s: Stencil) -> Spinor {
    let dx = partial(psi, x, 0, s);
    let dy = partial(psi, x, 1, s);
    let val = psi(x);
    let spin = Spinor::new(val.c1 * 0.5, val.c2 * -0.5);
    (dy * x[0] + dx * -x[1]) * (-I) + spin
}

/// `|D_A(J_z psi) - J_z(D_A psi)|(x)`.
pub fn jz_commutator_residual(p: &PotentialField, psi: &SpinorField, x: Point, s: Stencil) -> f64 {
    let f = |y: Point| psi.value(y);
    let jz_psi = |y: Point| apply_jz(&f, y, s);
    let d_psi = |y: Point| dirac_at(p, None, None, &f, y, s);
    (dirac_at(p, None, None, &jz_psi, x, s) - apply_jz(&d_psi, x, s)).norm()
}

#[derive(Clone, Debug, Serialize)]
pub struct DiamagneticReport {
    pub checked: usize,
    pub violations: usize,
    /// Largest `|d|phi|| - |(grad + iA) phi|` seen (may be negative).
    pub max_excess: f64,
    pub tolerance: f64,
    /// Samples skipped because `|phi| <= 1e-8`.
    pub skipped: Vec<Point>,
    /// Largest slack `|(grad + iA) phi| - |d|phi||`.
    pub max_slack: f64,
}

/// Counts samples where `|d|phi|| > |(grad + iA) phi| + 100 h^order`.
pub fn diamagnetic_check(
    p: &PotentialField,
    phi: &SpinorField,
    samples: &[Point],
    s: Stencil,
) -> DiamagneticReport {
    let tol = 100.0 * s.h.powi(s.order as i32);
    let per: Vec<Option<(f64, f64)>> = crate::par::map_slice(samples, |&x| {
        if phi.value(x).norm() <= 1e-8 {
            return None;
        }
        let modulus = |y: Point| phi.value(y).norm();
        let dm = [partial(&modulus, x, 0, s), partial(&modulus, x, 1, s)];
        let lhs = dm[0].hypot(dm[1]);
        let f = |y: Point| phi.value(y);
        let val = phi.value(x);
        let a = p.a(x);
        let cov1 = partial(&f, x, 0, s) + val * (I * a[0]);
        let cov2 = partial(&f, x, 1, s) + val * (I * a[1]);
        let rhs = (cov1.norm_sqr() + cov2.norm_sqr()).sqrt();
        Some((lhs, rhs))
    });
    let mut report = DiamagneticReport {
        checked: 0,
        violations: 0,
        max_excess: f64::NEG_INFINITY,
        tolerance: tol,
        skipped: Vec::new(),
        max_slack: 0.0,
    };
    for (x, r) in samples.iter().zip(per) {
        match r {
            None => report.skipped.push(*x),
            Some((lhs, rhs)) => {
                report.checked += 1;
                report.max_excess = report.max_excess.max(lhs - rhs);
                report.max_slack = report.max_slack.max(rhs - lhs);
                if lhs > rhs + tol {
                    report.violations += 1;
                }
            }
        }
    }
    report
}

/// Discrete symmetry defect `|<D_A psi, phi> - <psi, D_A phi>|` by grid
/// quadrature of spacing `s.h` over the box.
pub fn symmetry_defect(
    p: &PotentialField,
    psi: &SpinorField,
    phi: &SpinorField,
    bx: SampleBox,
    s: Stencil,
) -> f64 {
    let n = (2.0 * bx.half_width / s.h).round() as usize + 1;
    let zero = ScalarField::zero(crate::fields::ScalarRole::Mass);
    let rows = crate::par::map_range(n, |i| {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            let x = [
                bx.center[0] - bx.half_width + i as f64 * s.h,
                bx.center[1] - bx.half_width + j as f64 * s.h,
            ];
            let dpsi = apply_dirac(p, &zero, &zero, psi, x, s);
            let dphi = apply_dirac(p, &zero, &zero, phi, x, s);
            acc += dpsi.inner(&phi.value(x)) - psi.value(x).inner(&dphi);
        }
        acc
    });
    (rows.into_iter().sum::<C64>() * (s.h * s.h)).norm()
}

/// Seeded uniform samples in the box, avoiding `|x| < exclusion_radius`.
pub fn sample_points(bx: SampleBox, count: usize, exclusion_radius: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count && tries < 1000 * count.max(1) {
        tries += 1;
        let x = [
            bx.center[0] + bx.half_width * (2.0 * rng.gen::<f64>() - 1.0),
            bx.center[1] + bx.half_width * (2.0 * rng.gen::<f64>() - 1.0),
        ];
        if x[0].hypot(x[1]) >= exclusion_radius {
            out.push(x);
        }
    }
    out
}

/// Points on `rings` circles of radii in `[r0, r1]`, `per_ring` each.
pub fn ring_points(r0: f64, r1: f64, rings: usize, per_ring: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(rings * per_ring);
    for i in 0..rings {
        let r = if rings == 1 {
            r0
        } else {
            r0 + (r1 - r0) * i as f64 / (rings - 1) as f64
        };
        for k in 0..per_ring {
            let t = 2.0 * PI * (k as f64 + 0.5 * (i % 2) as f64) / per_ring as f64;
            out.push([r * t.cos(), r * t.sin()]);
        }
    }
    out
}

/// Max of a pointwise residual over the samples.
pub fn max_residual<F>(points: &[Point], f: F) -> f64
where
    F: Fn(Point) -> f64 + Sync + Send,
{
    crate::par::max_range(points.len(), |i| f(points[i]))
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderEstimate {
    pub h: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log r` against `log h`; infinite when every
    /// residual is exactly zero.
    pub order: f64,
    pub converged: bool,
    pub note: Option<String>,
}

/// Runs `residual_fn` on each step and fits the convergence order.
pub fn convergence_order<F>(residual_fn: F, h_sequence: &[f64]) -> Result<OrderEstimate>
where
    F: Fn(f64) -> f64,
{
    check_h_sequence(h_sequence)?;
    let r: Vec<f64> = h_sequence.iter().map(|&h| residual_fn(h)).collect();
    order_from_residuals(h_sequence, &r)
}

fn check_h_sequence(h: &[f64]) -> Result<()> {
    if h.len() < 3 {
        return Err(invalid(
            "h_sequence",
            format!("need at least 3 steps, got {}", h.len()),
        ));
    }
    if h.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(invalid("h_sequence", "steps must be positive"));
    }
    for w in h.windows(2) {
        if w[1] > 0.5 * w[0] * 1.01 {
            return Err(invalid(
                "h_sequence",
                format!(
                    "each step must be at most half the previous, got {} after {}",
                    w[1], w[0]
                ),
            ));
        }
    }
    Ok(())
}

/// Fitted orders below this count as stagnation.
pub const MIN_CONVERGENT_ORDER: f64 = 0.5;

/// Fits the order to precomputed residuals.
///
/// Non-convergence is flagged when a residual grows by more than 10x as the
/// step shrinks, when there is no net decrease over the sequence, or when the
/// fitted order is below [`MIN_CONVERGENT_ORDER`].
pub fn order_from_residuals(h: &[f64], residuals: &[f64]) -> Result<OrderEstimate> {
    check_h_sequence(h)?;
    if residuals.len() != h.len() {
        return Err(invalid("residuals", "length must match the step sequence"));
    }
    if residuals.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Ok(OrderEstimate {
            h: h.to_vec(),
            residuals: residuals.to_vec(),
            order: f64::NAN,
            converged: false,
            note: Some("non-finite residual".into()),
        });
    }
    if residuals.iter().all(|&r| r == 0.0) {
        return Ok(OrderEstimate {
            h: h.to_vec(),
            residuals: residuals.to_vec(),
            order: f64::INFINITY,
            converged: true,
            note: Some("all residuals exactly zero".into()),
        });
    }
    // zero residuals after a positive one cannot enter a log fit; keep the
    // positive prefix and report an exact tail
    let positive: Vec<(f64, f64)> = h
        .iter()
        .zip(residuals)
        .take_while(|(_, &r)| r > 0.0)
        .map(|(&h, &r)| (h.ln(), r.ln()))
        .collect();
    let mut note = None;
    let order = if positive.len() >= 2 {
        let n = positive.len() as f64;
        let mx = positive.iter().map(|p| p.0).sum::<f64>() / n;
        let my = positive.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = positive.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = positive.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    } else {
        f64::INFINITY
    };
    if positive.len() < residuals.len() {
        note = Some("residual reached exactly zero".into());
    }
    let blowup = residuals
        .windows(2)
        .any(|w| w[1] > 10.0 * w[0] && w[1] > 0.0);
    let decreased = residuals[residuals.len() - 1] < residuals[0];
    let converged = !blowup && decreased && order >= MIN_CONVERGENT_ORDER;
    if !converged && note.is_none() {
        note = Some(if blowup {
            "residual increased by more than 10x as h decreased".into()
        } else {
            "no net decrease of the residual".into()
        });
    }
    Ok(OrderEstimate {
        h: h.to_vec(),
        residuals: residuals.to_vec(),
        order,
        converged,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{
        confining_mass, constant_field, miller_simon, uniform_potential, zero_potential, ScalarRole,
    };

    const HS: [f64; 3] = [0.1, 0.05, 0.025];

    fn gauss_1i() -> SpinorField {
        SpinorField::gaussian(
            1.0,
            [0.0, 0.0],
            Spinor::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0)),
        )
    }

    fn gauss_up() -> SpinorField {
        SpinorField::gaussian(1.0, [0.0, 0.0], Spinor::real(1.0, 0.0))
    }

    fn pts() -> Vec<Point> {
        sample_points(SampleBox::new([0.0, 0.0], 2.0).unwrap(), 12, 0.5, 17)
    }

    fn zeros() -> (ScalarField, ScalarField) {
        (
            ScalarField::zero(ScalarRole::Mass),
            ScalarField::zero(ScalarRole::Electric),
        )
    }

    #[test]
    fn stencil_validation() {
        assert!(Stencil::new(0.0, 4).is_err());
        assert!(Stencil::new(0.1, 3).is_err());
        assert!(Stencil::new(0.1, 2).is_ok());
    }

    #[test]
    fn stencils_are_exact_on_low_polynomials() {
        let f = |x: Point| x[0].powi(4) - 2.0 * x[0] * x[1] + x[1].powi(3);
        let s = Stencil::order4(0.1);
        let x = [0.3, -0.7];
        assert!((partial(&f, x, 0, s) - (4.0 * x[0].powi(3) - 2.0 * x[1])).abs() < 1e-12);
        assert!((partial2(&f, x, 0, s) - 12.0 * x[0] * x[0]).abs() < 1e-10);
        assert!((partial2(&f, x, 1, s) - 6.0 * x[1]).abs() < 1e-10);
    }

    #[test]
    fn dirac_kills_constants() {
        let (v, a0) = zeros();
        let psi = SpinorField::new("c", |_| {
            Spinor::new(C64::new(1.0, 2.0), C64::new(-0.5, 0.1))
        });
        let out = apply_dirac(
            &zero_potential(),
            &v,
            &a0,
            &psi,
            [0.4, 1.0],
            Stencil::order4(0.1),
        );
        assert_eq!(out, Spinor::ZERO);
    }

    #[test]
    fn dirac_on_plane_wave_has_norm_k() {
        let (v, a0) = zeros();
        let k = [1.3, -0.4];
        let psi = SpinorField::new("pw", move |x| {
            Spinor::new(
                C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1]),
                C64::new(0.0, 0.0),
            )
        });
        for x in pts() {
            let d = apply_dirac(&zero_potential(), &v, &a0, &psi, x, Stencil::order4(0.01));
            assert!((d.norm() - k[0].hypot(k[1])).abs() < 1e-8);
        }
    }

    #[test]
    fn dirac_with_constant_mass_only() {
        let v = ScalarField::constant(2.5, ScalarRole::Mass);
        let a0 = ScalarField::zero(ScalarRole::Electric);
        let c = Spinor::new(C64::new(0.3, 0.0), C64::new(0.0, -1.0));
        let psi = SpinorField::new("c", move |_| c);
        let out = apply_dirac(
            &zero_potential(),
            &v,
            &a0,
            &psi,
            [1.0, 1.0],
            Stencil::order4(0.1),
        );
        assert!(out.max_abs_diff(&(nu_mul(c) * C64::new(0.0, 2.5))) < 1e-15);
    }

    #[test]
    fn lichnerowicz_constant_field_analytic_oracle() {
        // psi = (g, 0), g = exp(-rho^2), A = (-y, 0), B = 1:
        // D_A^2 psi = ((4 - 4 rho^2 - 4i xy + y^2 + 1) g, 0)
        let p = constant_field(1.0);
        let psi = gauss_up();
        let s = Stencil::order4(0.01);
        for x in pts() {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let g = (-r2).exp();
            let exact = Spinor::new(
                C64::new((5.0 - 4.0 * r2 + x[1] * x[1]) * g, -4.0 * x[0] * x[1] * g),
                C64::new(0.0, 0.0),
            );
            assert!((dirac_squared_nested(&p, None, &psi, x, s) - exact).norm() < 1e-6);
            assert!((lichnerowicz_rhs(&p, &psi, x, s) - exact).norm() < 1e-6);
            assert!(lichnerowicz_residual(&p, &psi, x, s) <= 1e-6);
        }
    }

    #[test]
    fn lichnerowicz_miller_simon_ratio() {
        let p = miller_simon(0.5).unwrap();
        let psi = gauss_1i();
        let pts = pts();
        let r1 = max_residual(&pts, |x| {
            lichnerowicz_residual(&p, &psi, x, Stencil::order4(0.1))
        });
        let r2 = max_residual(&pts, |x| {
            lichnerowicz_residual(&p, &psi, x, Stencil::order4(0.05))
        });
        assert!(r2 / r1 <= 2f64.powf(-3.5), "{r1} {r2}");
    }

    #[test]
    fn lichnerowicz_orders_over_small_corpus() {
        let fields = [
            zero_potential(),
            constant_field(1.0),
            miller_simon(0.5).unwrap(),
        ];
        let spinors = [gauss_1i(), SpinorField::vortex()];
        let pts = pts();
        for p in &fields {
            for psi in &spinors {
                let est = convergence_order(
                    |h| {
                        max_residual(&pts, |x| {
                            lichnerowicz_residual(p, psi, x, Stencil::order4(h))
                        })
                    },
                    &HS,
                )
                .unwrap();
                assert!(
                    est.converged && est.order >= 3.5,
                    "{} / {}: {est:?}",
                    p.name(),
                    psi.name()
                );
            }
        }
    }

    #[test]
    fn lichnerowicz_order_two_stencil() {
        let p = miller_simon(0.5).unwrap();
        let psi = gauss_1i();
        let pts = pts();
        let est = convergence_order(
            |h| {
                max_residual(&pts, |x| {
                    lichnerowicz_residual(&p, &psi, x, Stencil::order2(h))
                })
            },
            &HS,
        )
        .unwrap();
        assert!(est.order >= 1.8 && est.order <= 2.2, "{est:?}");
    }

    #[test]
    fn mass_identity_special_cases() {
        let p = miller_simon(0.5).unwrap();
        let psi = gauss_1i();
        let s = Stencil::order4(0.05);
        let zero = ScalarField::zero(ScalarRole::Mass);
        let cst = ScalarField::constant(1.7, ScalarRole::Mass);
        for x in pts() {
            let base = lichnerowicz_residual(&p, &psi, x, s);
            assert_eq!(mass_identity_residual(&p, &zero, &psi, x, s).unwrap(), base);
            let with_const = mass_identity_residual(&p, &cst, &psi, x, s).unwrap();
            assert!(
                (with_const - base).abs() < 1e-10 * (1.0 + base),
                "{with_const} vs {base}"
            );
        }
        let no_grad = ScalarField::new("v", ScalarRole::Mass, |x| x[0], None);
        assert!(mass_identity_residual(&p, &no_grad, &psi, [1.0, 0.0], s).is_err());
    }

    #[test]
    fn mass_identity_confining_order() {
        let v = confining_mass(1.0, 1.0).unwrap();
        let psi = gauss_1i();
        let pts = pts();
        for p in [zero_potential(), miller_simon(0.5).unwrap()] {
            let est = convergence_order(
                |h| {
                    max_residual(&pts, |x| {
                        mass_identity_residual(&p, &v, &psi, x, Stencil::order4(h)).unwrap()
                    })
                },
                &HS,
            )
            .unwrap();
            assert!(est.converged && est.order >= 3.5, "{est:?}");
        }
    }

    #[test]
    fn jz_commutes_for_radial_gauge() {
        let p = miller_simon(0.5).unwrap();
        let psi = gauss_1i();
        let pts = pts();
        let est = convergence_order(
            |h| {
                max_residual(&pts, |x| {
                    jz_commutator_residual(&p, &psi, x, Stencil::order4(h))
                })
            },
            &HS,
        )
        .unwrap();
        assert!(est.converged && est.order >= 3.5, "{est:?}");
    }

    #[test]
    fn jz_fails_for_translation_invariant_potential() {
        let p = uniform_potential([1.0, 0.0]);
        let psi = gauss_1i();
        let pts = pts();
        let est = convergence_order(
            |h| {
                max_residual(&pts, |x| {
                    jz_commutator_residual(&p, &psi, x, Stencil::order4(h))
                })
            },
            &HS,
        )
        .unwrap();
        assert!(!est.converged, "{est:?}");
        assert!(est.residuals[2] > 0.1);
        let none = SpinorField::zero();
        assert_eq!(
            jz_commutator_residual(&p, &none, [1.0, 1.0], Stencil::order4(0.1)),
            0.0
        );
    }

    #[test]
    fn jz_eigenvalue_of_sector_function() {
        // e^{i l theta} f(rho) (1, 0) has J_z = l + 1/2
        let l = 2;
        let psi = move |x: Point| {
            let r = x[0].hypot(x[1]);
            let t = x[1].atan2(x[0]);
            Spinor::new(
                C64::from_polar(r.powi(l) * (-r * r).exp(), l as f64 * t),
                C64::new(0.0, 0.0),
            )
        };
        let s = Stencil::order4(1e-3);
        for x in pts() {
            let j = apply_jz(&psi, x, s);
            assert!((j - psi(x) * (l as f64 + 0.5)).norm() < 1e-9);
        }
    }

    #[test]
    fn diamagnetic_examples() {
        let samples = sample_points(SampleBox::new([0.0, 0.0], 3.0).unwrap(), 200, 0.0, 23);
        let s = Stencil::order4(0.01);

        let r = diamagnetic_check(&zero_potential(), &gauss_up(), &samples, s);
        assert_eq!(r.violations, 0);
        assert!(r.max_slack < 1e-6, "equality case: {}", r.max_slack);

        let r = diamagnetic_check(
            &miller_simon(0.5).unwrap(),
            &SpinorField::vortex(),
            &samples,
            s,
        );
        assert_eq!(r.violations, 0);
        assert_eq!(r.checked, 200);

        let pw = SpinorField::plane_wave([10.0, 0.0], 1.0, Spinor::real(1.0, 0.0));
        let r = diamagnetic_check(&zero_potential(), &pw, &samples, s);
        assert_eq!(r.violations, 0);
        assert!(r.max_slack > 1e-3);
    }

    #[test]
    fn diamagnetic_skips_zeros() {
        let r = diamagnetic_check(
            &zero_potential(),
            &SpinorField::zero(),
            &[[0.0, 0.0], [1.0, 1.0]],
            Stencil::order4(0.1),
        );
        assert_eq!(r.skipped.len(), 2);
        assert_eq!(r.checked, 0);
    }

    #[test]
    fn order_of_exact_sequence() {
        let est = order_from_residuals(&HS, &[1e-2, 6.25e-4, 3.9e-5]).unwrap();
        assert!((est.order - 4.0).abs() < 0.1 && est.converged);
    }

    #[test]
    fn order_of_constant_sequence() {
        let est = order_from_residuals(&HS, &[1e-3, 1e-3, 1e-3]).unwrap();
        assert!(est.order.abs() < 1e-12);
        assert!(!est.converged);
    }

    #[test]
    fn order_flags_blowup_and_validates_steps() {
        let est = order_from_residuals(&HS, &[1e-2, 1e-6, 1e-4]).unwrap();
        assert!(!est.converged);
        assert!(order_from_residuals(&[0.1, 0.05], &[1.0, 0.1]).is_err());
        assert!(order_from_residuals(&[0.1, 0.06, 0.03], &[1.0, 0.1, 0.01]).is_err());
        let exact = order_from_residuals(&HS, &[0.0, 0.0, 0.0]).unwrap();
        assert!(exact.converged && exact.order.is_infinite());
    }

    #[test]
    fn discrete_pairing_is_symmetric() {
        let p = miller_simon(0.5).unwrap();
        let bx = SampleBox::new([0.0, 0.0], 5.0).unwrap();
        let psi = SpinorField::gaussian(
            0.8,
            [0.3, -0.2],
            Spinor::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0)),
        );
        let phi = SpinorField::vortex();
        for h in [0.1, 0.05] {
            let d = symmetry_defect(&p, &psi, &phi, bx, Stencil::order4(h));
            assert!(d < 1e-9, "h = {h}: {d}");
        }
    }

    #[test]
    fn corpus_spinor_specs_parse() {
        let s: SpinorSpec =
            toml::from_str("family = \"gaussian\"\nspin = [1.0, 0.0, 0.0, 1.0]").unwrap();
        assert!(matches!(s, SpinorSpec::Gaussian { width, .. } if width == 1.0));
        let v: SpinorSpec = toml::from_str("family = \"vortex\"").unwrap();
        assert_eq!(v.build().unwrap().name(), "vortex");
    }
}
