//! Magnetic, electric and mass potentials on the plane.
//!
//! A [`PotentialField`] bundles the magnetic one-form `A = (A1, A2)` with
//! its field `B = d1 A2 - d2 A1` and divergence. A [`ScalarField`] carries an
//! electric potential `A0`, a mass potential `V`, or a gauge function `f`.
//! Both are immutable, cheaply cloneable function objects.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Point;

pub type VecFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Reconstructed,
}

/// The magnetic data `(A, B = dA, div A)`.
#[derive(Clone)]
pub struct PotentialField {
    name: String,
    a: VecFn,
    b: ScalarFn,
    div_a: ScalarFn,
    gamma_exponent: Option<f64>,
    provenance: Provenance,
    rotation_covariant: bool,
    shift: Option<Arc<GaugeShift>>,
}

/// Record of `A' = A + df`, kept so lattice links can use exact differences.
pub struct GaugeShift {
    pub base: PotentialField,
    pub function: ScalarField,
}

impl fmt::Debug for PotentialField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialField")
            .field("name", &self.name)
            .field("gamma_exponent", &self.gamma_exponent)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl PotentialField {
    pub fn new(
        name: impl Into<String>,
        a: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
        b: impl Fn(Point) -> f64 + Send + Sync + 'static,
        div_a: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PotentialField {
            name: name.into(),
            a: Arc::new(a),
            b: Arc::new(b),
            div_a: Arc::new(div_a),
            gamma_exponent: None,
            provenance: Provenance::ClosedForm,
            rotation_covariant: false,
            shift: None,
        }
    }

    /// Marks `A` as rotation covariant about the origin (`A = a(rho)(-y, x)`).
    pub fn with_rotation_covariance(mut self) -> Self {
        self.rotation_covariant = true;
        self
    }

    /// True when `A` has the radial-gauge form `a(rho)(-y, x)` about the
    /// origin, so that `J_z` commutes with `D_A`.
    pub fn is_rotation_covariant(&self) -> bool {
        self.rotation_covariant
    }

    #[inline]
    pub fn a(&self, x: Point) -> [f64; 2] {
        (self.a)(x)
    }

    #[inline]
    pub fn b(&self, x: Point) -> f64 {
        (self.b)(x)
    }

    #[inline]
    pub fn div_a(&self, x: Point) -> f64 {
        (self.div_a)(x)
    }

    pub fn a_norm(&self, x: Point) -> f64 {
        let a = self.a(x);
        a[0].hypot(a[1])
    }

    pub fn b_fn(&self) -> ScalarFn {
        self.b.clone()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gamma_exponent(&self) -> Option<f64> {
        self.gamma_exponent
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// The base potential and gauge function when this field came from
    /// [`gauge_shift`].
    pub fn gauge_shift_parts(&self) -> Option<&GaugeShift> {
        self.shift.as_deref()
    }

    pub fn is_zero_field(&self) -> bool {
        self.name == "zero"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarRole {
    Electric,
    Mass,
    Gauge,
}

/// A real scalar field with optional closed-form gradient.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    value: ScalarFn,
    grad: Option<VecFn>,
    role: ScalarRole,
    zero: bool,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("role", &self.role)
            .field("has_grad", &self.grad.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new(
        name: impl Into<String>,
        role: ScalarRole,
        value: impl Fn(Point) -> f64 + Send + Sync + 'static,
        grad: Option<VecFn>,
    ) -> Self {
        ScalarField {
            name: name.into(),
            value: Arc::new(value),
            grad,
            role,
            zero: false,
        }
    }

    pub fn zero(role: ScalarRole) -> Self {
        ScalarField {
            name: "zero".into(),
            value: Arc::new(|_| 0.0),
            grad: Some(Arc::new(|_| [0.0, 0.0])),
            role,
            zero: true,
        }
    }

    pub fn constant(value: f64, role: ScalarRole) -> Self {
        if value == 0.0 {
            return Self::zero(role);
        }
        ScalarField {
            name: format!("constant{{value={value}}}"),
            value: Arc::new(move |_| value),
            grad: Some(Arc::new(|_| [0.0, 0.0])),
            role,
            zero: false,
        }
    }

    /// `factor · self` under a new role.
    pub fn scaled(&self, factor: f64, role: ScalarRole) -> Self {
        let v = self.value.clone();
        let grad = self.grad.clone().map(|g| -> VecFn {
            Arc::new(move |x| {
                let d = g(x);
                [factor * d[0], factor * d[1]]
            })
        });
        ScalarField {
            name: format!("{factor}*{}", self.name),
            value: Arc::new(move |x| factor * v(x)),
            grad,
            role,
            zero: self.zero || factor == 0.0,
        }
    }

    #[inline]
    pub fn value(&self, x: Point) -> f64 {
        (self.value)(x)
    }

    /// Closed-form gradient if present, otherwise a 4th-order central
    /// difference with step `1e-3`.
    pub fn grad(&self, x: Point) -> [f64; 2] {
        match &self.grad {
            Some(g) => g(x),
            None => fd_gradient(&*self.value, x, 1e-3),
        }
    }

    pub fn has_grad(&self) -> bool {
        self.grad.is_some()
    }

    pub fn grad_fn(&self) -> Option<VecFn> {
        self.grad.clone()
    }

    pub fn role(&self) -> ScalarRole {
        self.role
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True for the identically-zero field, which lets callers skip terms.
    pub fn is_zero(&self) -> bool {
        self.zero
    }
}

/// Truncation square `center ± half_width`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub center: Point,
    pub half_width: f64,
}

impl SampleBox {
    pub fn new(center: Point, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(invalid(
                "half_width",
                format!("must be positive, got {half_width}"),
            ));
        }
        Ok(SampleBox { center, half_width })
    }

    pub fn contains(&self, x: Point) -> bool {
        (x[0] - self.center[0]).abs() <= self.half_width
            && (x[1] - self.center[1]).abs() <= self.half_width
    }
}

// ---------------------------------------------------------------------------
// finite differences and quadrature shared by the field checks

const D1_O4: [(f64, f64); 4] = [
    (-2.0, 1.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

/// 4th-order central difference of a scalar function along `axis`.
pub fn fd_partial(f: &dyn Fn(Point) -> f64, x: Point, axis: usize, h: f64) -> f64 {
    D1_O4
        .iter()
        .map(|&(k, c)| {
            let mut y = x;
            y[axis] += k * h;
            c * f(y)
        })
        .sum::<f64>()
        / h
}

pub fn fd_gradient(f: &dyn Fn(Point) -> f64, x: Point, h: f64) -> [f64; 2] {
    [fd_partial(f, x, 0, h), fd_partial(f, x, 1, h)]
}

/// 4th-order FD curl `d1 A2 - d2 A1` of the potential.
pub fn fd_curl(p: &PotentialField, x: Point, h: f64) -> f64 {
    fd_partial(&|y| p.a(y)[1], x, 0, h) - fd_partial(&|y| p.a(y)[0], x, 1, h)
}

/// 4th-order FD divergence `d1 A1 + d2 A2` of the potential.
pub fn fd_div(p: &PotentialField, x: Point, h: f64) -> f64 {
    fd_partial(&|y| p.a(y)[0], x, 0, h) + fd_partial(&|y| p.a(y)[1], x, 1, h)
}

/// Composite Simpson rule on `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

// ---------------------------------------------------------------------------
// potential families

/// The rotation-invariant family `A = (1+rho)^-gamma · (-y, x)`, `gamma in (0,1)`.
pub fn miller_simon(gamma_exponent: f64) -> Result<PotentialField> {
    let g = gamma_exponent;
    if !(g > 0.0 && g < 1.0) {
        return Err(invalid(
            "gamma",
            format!("dense point spectrum requires gamma in (0, 1), got {g}"),
        ));
    }
    let a = move |x: Point| {
        let rho = x[0].hypot(x[1]);
        let s = (1.0 + rho).powf(-g);
        [-x[1] * s, x[0] * s]
    };
    let b = move |x: Point| {
        let rho = x[0].hypot(x[1]);
        -g * rho / (1.0 + rho).powf(g + 1.0) + 2.0 / (1.0 + rho).powf(g)
    };
    let mut p = PotentialField::new(format!("miller-simon{{gamma={g}}}"), a, b, |_| 0.0)
        .with_rotation_covariance();
    p.gamma_exponent = Some(g);
    Ok(p)
}

/// Field strength of [`miller_simon`] as a function of the radius.
pub fn miller_simon_b(gamma_exponent: f64, rho: f64) -> f64 {
    let g = gamma_exponent;
    -g * rho / (1.0 + rho).powf(g + 1.0) + 2.0 / (1.0 + rho).powf(g)
}

/// Homogeneous field `B = b` in the Landau gauge `A = (-b·y, 0)`.
pub fn constant_field(b: f64) -> PotentialField {
    if b == 0.0 {
        return zero_potential();
    }
    PotentialField::new(
        format!("constant{{b={b}}}"),
        move |x| [-b * x[1], 0.0],
        move |_| b,
        |_| 0.0,
    )
}

/// Constant potential `A = a`, which carries no field.
pub fn uniform_potential(a: [f64; 2]) -> PotentialField {
    PotentialField::new(
        format!("uniform{{a1={},a2={}}}", a[0], a[1]),
        move |_| a,
        |_| 0.0,
        |_| 0.0,
    )
}

pub fn zero_potential() -> PotentialField {
    PotentialField::new("zero", |_| [0.0, 0.0], |_| 0.0, |_| 0.0).with_rotation_covariance()
}

/// Named potential families, as written in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    MillerSimon { gamma: f64 },
    Constant { b: f64 },
    Uniform { a1: f64, a2: f64 },
    Zero,
}

impl PotentialSpec {
    pub fn build(&self) -> Result<PotentialField> {
        match *self {
            PotentialSpec::MillerSimon { gamma } => miller_simon(gamma),
            PotentialSpec::Constant { b } => Ok(constant_field(b)),
            PotentialSpec::Uniform { a1, a2 } => Ok(uniform_potential([a1, a2])),
            PotentialSpec::Zero => Ok(zero_potential()),
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            PotentialSpec::MillerSimon { gamma } => Some(gamma),
            _ => None,
        }
    }
}

/// Named scalar families (mass or electric potentials).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarSpec {
    Confining { power: f64, scale: f64 },
    Constant { value: f64 },
    Zero,
}

impl ScalarSpec {
    pub fn build(&self, role: ScalarRole) -> Result<ScalarField> {
        match *self {
            ScalarSpec::Confining { power, scale } => {
                let v = confining_mass(power, scale)?;
                Ok(if role == ScalarRole::Mass {
                    v
                } else {
                    v.scaled(1.0, role)
                })
            }
            ScalarSpec::Constant { value } => Ok(ScalarField::constant(value, role)),
            ScalarSpec::Zero => Ok(ScalarField::zero(role)),
        }
    }
}

/// Gauge potential with `curl = B` built from the field alone:
/// `A1(x, y) = -∫_{cy}^{y} B(x, t) dt`, `A2 = 0`, in coordinates centred on
/// the box.
///
/// The integral is evaluated as `-(y - cy) ∫_0^1 B(x, cy + s (y - cy)) ds`
/// with a fixed panel count, so the reconstruction is a smooth function of
/// `y` and its effective step never exceeds `quadrature_step` inside the box.
pub fn gauge_from_field(
    b: impl Fn(Point) -> f64 + Send + Sync + 'static,
    bx: SampleBox,
    quadrature_step: f64,
) -> Result<PotentialField> {
    let b: ScalarFn = Arc::new(b);
    gauge_from_field_arc(b, bx, quadrature_step)
}

pub fn gauge_from_field_arc(
    b: ScalarFn,
    bx: SampleBox,
    quadrature_step: f64,
) -> Result<PotentialField> {
    if !(quadrature_step > 0.0) || quadrature_step > bx.half_width / 8.0 {
        return Err(Error::Precondition(format!(
            "quadrature_step must lie in (0, half_width/8 = {}], got {quadrature_step}",
            bx.half_width / 8.0
        )));
    }
    let panels = 2 * (bx.half_width / (2.0 * quadrature_step)).ceil() as usize;
    let cy = bx.center[1];
    let bq = b.clone();
    let a1 = Arc::new(move |x: Point| {
        let dy = x[1] - cy;
        if dy == 0.0 {
            return 0.0;
        }
        -dy * simpson(|s| bq([x[0], cy + s * dy]), 0.0, 1.0, panels)
    });
    let a1_div = a1.clone();
    let fd_h = 1e-3 * bx.half_width.max(1.0);
    let mut p = PotentialField::new(
        format!(
            "reconstructed{{center=({},{}),half_width={}}}",
            bx.center[0], bx.center[1], bx.half_width
        ),
        move |x| [a1(x), 0.0],
        move |x| b(x),
        move |x| fd_partial(&*a1_div, x, 0, fd_h),
    );
    p.provenance = Provenance::Reconstructed;
    Ok(p)
}

/// Gauge function `f` with `A + df = gauge_from_field(B)` on the box:
/// `f(x, y) = -∫_{cx}^{x} A1(s, cy) ds - ∫_{cy}^{y} A2(x, t) dt`.
///
/// The returned field carries `df = A^box - A` as its gradient.
pub fn gauge_function(
    p: &PotentialField,
    bx: SampleBox,
    quadrature_step: f64,
) -> Result<ScalarField> {
    let reconstructed = gauge_from_field_arc(p.b_fn(), bx, quadrature_step)?;
    let panels = 2 * (bx.half_width / (2.0 * quadrature_step)).ceil() as usize;
    let [cx, cy] = bx.center;
    let pv = p.clone();
    let value = move |x: Point| {
        let dx = x[0] - cx;
        let dy = x[1] - cy;
        let first = if dx == 0.0 {
            0.0
        } else {
            dx * simpson(|s| pv.a([cx + s * dx, cy])[0], 0.0, 1.0, panels)
        };
        let second = if dy == 0.0 {
            0.0
        } else {
            dy * simpson(|s| pv.a([x[0], cy + s * dy])[1], 0.0, 1.0, panels)
        };
        -first - second
    };
    let pg = p.clone();
    let grad: VecFn = Arc::new(move |x| {
        let target = reconstructed.a(x);
        let a = pg.a(x);
        [target[0] - a[0], target[1] - a[1]]
    });
    Ok(ScalarField::new(
        format!("gauge-to-box{{{}}}", p.name()),
        ScalarRole::Gauge,
        value,
        Some(grad),
    ))
}

/// `A' = A + grad f`. `B` is unchanged; `div A' = div A + Laplacian f` by
/// 4th-order differences of the closed-form gradient.
pub fn gauge_shift(p: &PotentialField, f: &ScalarField) -> Result<PotentialField> {
    let grad = f
        .grad_fn()
        .ok_or_else(|| Error::Precondition("gauge_shift needs a closed-form gradient".into()))?;
    let base = p.clone();
    let g_a = grad.clone();
    let base_div = p.clone();
    let g_div = grad;
    let mut out = PotentialField {
        name: format!("{}+d[{}]", p.name(), f.name()),
        a: Arc::new(move |x| {
            let a = base.a(x);
            let d = g_a(x);
            [a[0] + d[0], a[1] + d[1]]
        }),
        b: p.b.clone(),
        div_a: Arc::new(move |x| {
            let h = 1e-3;
            base_div.div_a(x)
                + fd_partial(&|y| g_div(y)[0], x, 0, h)
                + fd_partial(&|y| g_div(y)[1], x, 1, h)
        }),
        gamma_exponent: p.gamma_exponent,
        provenance: p.provenance,
        rotation_covariant: false,
        shift: None,
    };
    out.shift = Some(Arc::new(GaugeShift {
        base: p.clone(),
        function: f.clone(),
    }));
    Ok(out)
}

/// Mass potential `V = scale·(1 + rho^2)^(power/2)` with closed-form gradient.
pub fn confining_mass(power: f64, scale: f64) -> Result<ScalarField> {
    if !(power >= 1.0) {
        return Err(invalid("power", format!("must be >= 1, got {power}")));
    }
    if !(scale > 0.0) {
        return Err(invalid("scale", format!("must be positive, got {scale}")));
    }
    let value = move |x: Point| scale * (1.0 + x[0] * x[0] + x[1] * x[1]).powf(power / 2.0);
    let grad: VecFn = Arc::new(move |x: Point| {
        let c = scale * power * (1.0 + x[0] * x[0] + x[1] * x[1]).powf(power / 2.0 - 1.0);
        [c * x[0], c * x[1]]
    });
    Ok(ScalarField::new(
        format!("confining{{power={power},scale={scale}}}"),
        ScalarRole::Mass,
        value,
        Some(grad),
    ))
}

// ---------------------------------------------------------------------------
// hypothesis checks for discreteness of the spectrum

/// Angles sampled per circle.
pub const CONDITION_ANGLES: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct RadiusConditions {
    pub radius: f64,
    pub min_abs_v: f64,
    pub sup_abs_a: f64,
    /// `sup (|dV| + |dA| + |dA0| + |div A|) / |V|`; infinite when `min|V| = 0`.
    pub sup_derivative_ratio: f64,
    /// `sup |A0| / |V|`; infinite when `min|V| = 0`.
    pub sup_electric_ratio: f64,
    pub v_vanishes: bool,
    pub electric_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfinementReport {
    pub epsilon: f64,
    pub per_radius: Vec<RadiusConditions>,
    /// (i) `|V| -> infinity`: `min|V|` strictly increasing over the radii.
    pub v_unbounded: bool,
    /// (ii) `A` bounded: `sup|A|` does not grow by more than 5% between the
    /// innermost and outermost circle.
    pub a_bounded: bool,
    /// (iii) derivative ratio bounded: outermost ratio within 5% of the
    /// innermost and finite everywhere.
    pub derivatives_dominated: bool,
    /// (iv) `|A0| <= epsilon |V|` on every sampled circle.
    pub electric_dominated: bool,
}

impl ConfinementReport {
    pub fn all_satisfied(&self) -> bool {
        self.v_unbounded && self.a_bounded && self.derivatives_dominated && self.electric_dominated
    }
}

/// Samples the four confinement hypotheses on circles.
///
/// This is an empirical check on finitely many annuli, not a proof.
pub fn check_confinement_conditions(
    p: &PotentialField,
    v: &ScalarField,
    a0: &ScalarField,
    radii: &[f64],
    epsilon: f64,
) -> Result<ConfinementReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("radii", "need at least one positive radius"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(
            "epsilon",
            format!("must lie in (0,1), got {epsilon}"),
        ));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);

    let per_radius: Vec<RadiusConditions> = crate::par::map_slice(&radii, |&r| {
        let mut min_v = f64::INFINITY;
        let mut sup_a: f64 = 0.0;
        let mut sup_deriv: f64 = 0.0;
        let mut sup_elec: f64 = 0.0;
        for k in 0..CONDITION_ANGLES {
            let t = 2.0 * std::f64::consts::PI * k as f64 / CONDITION_ANGLES as f64;
            let x = [r * t.cos(), r * t.sin()];
            let vv = v.value(x).abs();
            let dv = v.grad(x);
            let da0 = a0.grad(x);
            min_v = min_v.min(vv);
            sup_a = sup_a.max(p.a_norm(x));
            let num = dv[0].hypot(dv[1]) + p.b(x).abs() + da0[0].hypot(da0[1]) + p.div_a(x).abs();
            sup_deriv = sup_deriv.max(num / vv);
            sup_elec = sup_elec.max(a0.value(x).abs() / vv);
        }
        let v_vanishes = min_v == 0.0;
        if v_vanishes {
            sup_deriv = f64::INFINITY;
            sup_elec = f64::INFINITY;
        }
        RadiusConditions {
            radius: r,
            min_abs_v: min_v,
            sup_abs_a: sup_a,
            sup_derivative_ratio: sup_deriv,
            sup_electric_ratio: sup_elec,
            v_vanishes,
            electric_ok: !v_vanishes && sup_elec <= epsilon,
        }
    });

    let first = &per_radius[0];
    let last = &per_radius[per_radius.len() - 1];
    let v_unbounded = per_radius.iter().all(|c| !c.v_vanishes)
        && per_radius
            .windows(2)
            .all(|w| w[1].min_abs_v > w[0].min_abs_v)
        && (per_radius.len() > 1 || first.min_abs_v.is_infinite());
    let a_bounded = last.sup_abs_a <= 1.05 * first.sup_abs_a + 1e-12;
    let derivatives_dominated = per_radius
        .iter()
        .all(|c| c.sup_derivative_ratio.is_finite())
        && last.sup_derivative_ratio <= 1.05 * first.sup_derivative_ratio + 1e-12;
    let electric_dominated = per_radius.iter().all(|c| c.electric_ok);

    Ok(ConfinementReport {
        epsilon,
        per_radius,
        v_unbounded,
        a_bounded,
        derivatives_dominated,
        electric_dominated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_points(n: usize, half: f64, seed: u64) -> Vec<Point> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| [rng.gen_range(-half..half), rng.gen_range(-half..half)])
            .collect()
    }

    fn max_curl_error(p: &PotentialField, pts: &[Point], h: f64) -> f64 {
        pts.iter()
            .map(|&x| (fd_curl(p, x, h) - p.b(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn miller_simon_point_values() {
        let p = miller_simon(0.5).unwrap();
        assert_abs_diff_eq!(p.b([0.0, 0.0]), 2.0, epsilon = 1e-15);
        let a = p.a([1.0, 0.0]);
        assert_abs_diff_eq!(a[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a[1], 2f64.powf(-0.5), epsilon = 1e-15);
        assert_eq!(p.div_a([0.3, 0.7]), 0.0);
    }

    #[test]
    fn miller_simon_rejects_outside_unit_interval() {
        for g in [0.0, 1.0, 1.5, -0.2, f64::NAN] {
            assert!(miller_simon(g).is_err(), "gamma = {g}");
        }
    }

    #[test]
    fn miller_simon_curl_and_div_on_sample_grid() {
        // 10x10 sample set, away from the kink of rho at the origin
        for g in [0.2, 0.5, 0.8] {
            let p = miller_simon(g).unwrap();
            for i in 0..10 {
                for j in 0..10 {
                    let x = [-4.5 + i as f64 + 0.05, -4.5 + j as f64 + 0.05];
                    assert!(
                        (fd_curl(&p, x, 1e-2) - p.b(x)).abs() < 1e-7,
                        "curl at {x:?}"
                    );
                    assert!(fd_div(&p, x, 1e-2).abs() < 1e-7, "div at {x:?}");
                }
            }
        }
    }

    #[test]
    fn fd_curl_converges_at_fourth_order() {
        let pts = sample_points(20, 3.0, 11);
        let p = miller_simon(0.5).unwrap();
        let pts: Vec<Point> = pts.into_iter().filter(|x| x[0].hypot(x[1]) > 0.5).collect();
        let hs = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = hs.iter().map(|&h| max_curl_error(&p, &pts, h)).collect();
        let est = crate::identities::order_from_residuals(&hs, &errs).unwrap();
        assert!(est.order >= 3.5, "{errs:?} -> {est:?}");
    }

    #[test]
    fn miller_simon_field_decays_with_bound() {
        for g in [0.3, 0.5, 0.9] {
            let mut prev = f64::INFINITY;
            for k in 0..200 {
                let rho = 0.5 * k as f64;
                let b = miller_simon_b(g, rho);
                assert!(b.abs() <= (2.0 + g) / (1.0 + rho).powf(g) + 1e-15);
                assert!(b <= prev, "B not monotone at rho = {rho}");
                prev = b;
            }
            assert!(miller_simon_b(g, 1e8).abs() < 1e-2 * (2.0 + g));
        }
    }

    #[test]
    fn constant_field_values() {
        let zero = constant_field(0.0);
        assert_eq!(zero.a([3.0, -2.0]), [0.0, 0.0]);
        assert_eq!(zero.b([3.0, -2.0]), 0.0);
        let p = constant_field(1.0);
        assert_eq!(p.a([0.0, 2.0]), [-2.0, 0.0]);
        let pts = sample_points(30, 5.0, 3);
        assert!(max_curl_error(&p, &pts, 0.1) < 1e-12);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|t| 1.0 + t - 3.0 * t * t + t * t * t, 0.0, 2.0, 4);
        assert_abs_diff_eq!(v, 2.0 + 2.0 - 8.0 + 4.0, epsilon = 1e-13);
    }

    #[test]
    fn reconstruct_constant_field() {
        let bx = SampleBox::new([0.0, 0.0], 4.0).unwrap();
        let p = gauge_from_field(|_| 1.0, bx, 0.25).unwrap();
        for x in sample_points(20, 4.0, 5) {
            assert_abs_diff_eq!(p.a(x)[0], -x[1], epsilon = 1e-13);
            assert_eq!(p.a(x)[1], 0.0);
        }
        assert_eq!(p.provenance(), Provenance::Reconstructed);
    }

    #[test]
    fn reconstruction_rejects_coarse_step() {
        let bx = SampleBox::new([0.0, 0.0], 4.0).unwrap();
        assert!(gauge_from_field(|_| 1.0, bx, 0.6).is_err());
    }

    #[test]
    fn reconstruct_miller_simon_off_centre() {
        let ms = miller_simon(0.5).unwrap();
        let bx = SampleBox::new([12.0, 0.0], 4.0).unwrap();
        let step = 0.25;
        let rec = gauge_from_field_arc(ms.b_fn(), bx, step).unwrap();

        // sup of the closed-form field over the box, on a fine lattice
        let mut sup_b: f64 = 0.0;
        let mut pts = Vec::new();
        for i in 0..=40 {
            for j in 0..=40 {
                let x = [8.0 + 0.2 * i as f64, -4.0 + 0.2 * j as f64];
                sup_b = sup_b.max(ms.b(x).abs());
                pts.push(x);
            }
        }
        let sup_a = pts.iter().map(|&x| rec.a_norm(x)).fold(0.0, f64::max);
        assert!(sup_a <= 4.0 * sup_b, "{sup_a} > 4 * {sup_b}");

        let interior: Vec<Point> = pts
            .into_iter()
            .filter(|x| (x[0] - 12.0).abs() < 3.5 && x[1].abs() < 3.5)
            .collect();
        let err = max_curl_error(&rec, &interior, 0.05);
        assert!(err <= 10.0 * step * step, "{err}");
    }

    #[test]
    fn gauge_function_moves_potential_to_box_gauge() {
        let ms = miller_simon(0.5).unwrap();
        let bx = SampleBox::new([5.0, 1.0], 2.0).unwrap();
        let f = gauge_function(&ms, bx, 0.1).unwrap();
        let shifted = gauge_shift(&ms, &f).unwrap();
        let rec = gauge_from_field_arc(ms.b_fn(), bx, 0.1).unwrap();
        for x in sample_points(10, 1.5, 9)
            .into_iter()
            .map(|x| [x[0] + 5.0, x[1] + 1.0])
        {
            // closed-form gradient vs FD of the quadrature value
            let fd = fd_gradient(&|y| f.value(y), x, 1e-2);
            let g = f.grad(x);
            assert!(
                (fd[0] - g[0]).abs() < 1e-6 && (fd[1] - g[1]).abs() < 1e-6,
                "{fd:?} vs {g:?}"
            );
            let (a, r) = (shifted.a(x), rec.a(x));
            assert!((a[0] - r[0]).abs() < 1e-12 && (a[1] - r[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn gauge_shift_examples() {
        let p = constant_field(1.0);
        let c = ScalarField::constant(3.0, ScalarRole::Gauge);
        let same = gauge_shift(&p, &c).unwrap();
        assert_eq!(same.a([1.0, 2.0]), p.a([1.0, 2.0]));

        let xy = ScalarField::new(
            "xy",
            ScalarRole::Gauge,
            |x| x[0] * x[1],
            Some(Arc::new(|x: Point| [x[1], x[0]])),
        );
        let shifted = gauge_shift(&p, &xy).unwrap();
        assert_eq!(shifted.a([0.7, -1.3]), [0.0, 0.7]);
        for x in sample_points(10, 3.0, 1) {
            assert_abs_diff_eq!(fd_curl(&shifted, x, 0.1), 1.0, epsilon = 1e-12);
            assert_eq!(shifted.b(x), 1.0);
        }
        assert!(shifted.gauge_shift_parts().is_some());

        let no_grad = ScalarField::new("f", ScalarRole::Gauge, |x| x[0], None);
        assert!(gauge_shift(&p, &no_grad).is_err());
    }

    #[test]
    fn gauge_shift_keeps_miller_simon_curl() {
        let ms = miller_simon(0.5).unwrap();
        let f = ScalarField::new(
            "sin(x)cos(y)",
            ScalarRole::Gauge,
            |x| x[0].sin() * x[1].cos(),
            Some(Arc::new(|x: Point| {
                [x[0].cos() * x[1].cos(), -x[0].sin() * x[1].sin()]
            })),
        );
        let shifted = gauge_shift(&ms, &f).unwrap();
        let pts: Vec<Point> = sample_points(20, 3.0, 2)
            .into_iter()
            .filter(|x| x[0].hypot(x[1]) > 0.5)
            .collect();
        assert!(max_curl_error(&shifted, &pts, 0.02) < 1e-7);
        // div shifts by the Laplacian of f = -2 sin x cos y
        for x in &pts {
            let expect = -2.0 * x[0].sin() * x[1].cos();
            assert_abs_diff_eq!(shifted.div_a(*x), expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn confining_mass_examples() {
        let v = confining_mass(1.0, 1.0).unwrap();
        assert_eq!(v.value([0.0, 0.0]), 1.0);
        for x in sample_points(100, 50.0, 4) {
            let g = v.grad(x);
            assert!(g[0].hypot(g[1]) / v.value(x) <= 1.0);
        }
        let v2 = confining_mass(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(v2.value([3.0, 4.0]), 26.0, epsilon = 1e-12);
        assert!(confining_mass(0.5, 1.0).is_err());
    }

    #[test]
    fn conditions_for_miller_simon_with_confining_mass() {
        let p = miller_simon(0.5).unwrap();
        let v = confining_mass(1.0, 1.0).unwrap();
        let a0 = ScalarField::zero(ScalarRole::Electric);
        let r = check_confinement_conditions(&p, &v, &a0, &[10.0, 20.0, 40.0], 0.5).unwrap();
        assert!(r.v_unbounded);
        assert!(!r.a_bounded, "Miller-Simon A grows like sqrt(rho)");
        assert!(r.derivatives_dominated);
        assert!(r.electric_dominated);
    }

    #[test]
    fn conditions_for_uniform_potential() {
        let p = uniform_potential([1.0, 0.0]);
        let v = confining_mass(1.0, 1.0).unwrap();
        let a0 = ScalarField::zero(ScalarRole::Electric);
        let r = check_confinement_conditions(&p, &v, &a0, &[10.0, 20.0, 40.0], 0.5).unwrap();
        assert!(r.all_satisfied(), "{r:?}");
    }

    #[test]
    fn conditions_flag_strong_electric_potential() {
        let p = zero_potential();
        let v = confining_mass(1.0, 1.0).unwrap();
        let a0 = v.scaled(2.0, ScalarRole::Electric);
        let r = check_confinement_conditions(&p, &v, &a0, &[10.0, 20.0, 40.0], 0.5).unwrap();
        assert!(!r.electric_dominated);
        assert!(r.per_radius.iter().all(|c| !c.electric_ok));
        assert!(r
            .per_radius
            .iter()
            .all(|c| (c.sup_electric_ratio - 2.0).abs() < 1e-12));
    }

    #[test]
    fn conditions_guard_vanishing_mass() {
        let p = zero_potential();
        let v = ScalarField::zero(ScalarRole::Mass);
        let a0 = ScalarField::zero(ScalarRole::Electric);
        let r = check_confinement_conditions(&p, &v, &a0, &[1.0, 2.0], 0.5).unwrap();
        assert!(r.per_radius.iter().all(|c| c.v_vanishes && !c.electric_ok));
        assert!(!r.v_unbounded && !r.derivatives_dominated);
    }
}
