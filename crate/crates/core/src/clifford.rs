//! The 2-dimensional Clifford module acting on ℂ².
//!
//! Tangent vectors act through `gamma_j = i·sigma_j` (`sigma_1`, `sigma_2`
//! the first two Pauli matrices). With this choice `i·gamma1·gamma2 =
//! diag(1, -1)`, the grading is `chirality = diag(1, -1)`, and the
//! mass-type operator is `nu = i·diag(1, -1)`.
//!
//! All entries are in {0, ±1, ±i}, so every relation below holds exactly
//! in floating point.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::Serialize;

use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A point value of a ℂ²-valued spinor field.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Spinor {
    pub c1: C64,
    pub c2: C64,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor { c1: ZERO, c2: ZERO };

    pub const fn new(c1: C64, c2: C64) -> Self {
        Spinor { c1, c2 }
    }

    pub fn real(a: f64, b: f64) -> Self {
        Spinor::new(C64::new(a, 0.0), C64::new(b, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian pairing, antilinear in `self`.
    pub fn inner(&self, other: &Spinor) -> C64 {
        self.c1.conj() * other.c1 + self.c2.conj() * other.c2
    }

    pub fn scale(&self, s: C64) -> Spinor {
        Spinor::new(self.c1 * s, self.c2 * s)
    }

    pub fn max_abs_diff(&self, other: &Spinor) -> f64 {
        (self.c1 - other.c1).norm().max((self.c2 - other.c2).norm())
    }
}

impl Add for Spinor {
    type Output = Spinor;
    fn add(self, o: Spinor) -> Spinor {
        Spinor::new(self.c1 + o.c1, self.c2 + o.c2)
    }
}

impl AddAssign for Spinor {
    fn add_assign(&mut self, o: Spinor) {
        self.c1 += o.c1;
        self.c2 += o.c2;
    }
}

impl Sub for Spinor {
    type Output = Spinor;
    fn sub(self, o: Spinor) -> Spinor {
        Spinor::new(self.c1 - o.c1, self.c2 - o.c2)
    }
}

impl Neg for Spinor {
    type Output = Spinor;
    fn neg(self) -> Spinor {
        Spinor::new(-self.c1, -self.c2)
    }
}

impl Mul<f64> for Spinor {
    type Output = Spinor;
    fn mul(self, s: f64) -> Spinor {
        Spinor::new(self.c1 * s, self.c2 * s)
    }
}

impl Mul<C64> for Spinor {
    type Output = Spinor;
    fn mul(self, s: C64) -> Spinor {
        self.scale(s)
    }
}

/// A 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn diag(a: C64, b: C64) -> Mat2 {
        Mat2([[a, ZERO], [ZERO, b]])
    }

    pub fn apply(&self, v: Spinor) -> Spinor {
        let m = &self.0;
        Spinor::new(
            m[0][0] * v.c1 + m[0][1] * v.c2,
            m[1][0] * v.c1 + m[1][1] * v.c2,
        )
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn anticommutator(&self, other: &Mat2) -> Mat2 {
        *self * *other + *other * *self
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(-ONE)
    }
}

/// The concrete representation of the Clifford module.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CliffordRep {
    pub gamma1: Mat2,
    pub gamma2: Mat2,
    pub nu: Mat2,
    pub omega: Mat2,
    pub chirality: Mat2,
}

impl CliffordRep {
    pub fn gammas(&self) -> [Mat2; 2] {
        [self.gamma1, self.gamma2]
    }

    /// Symbol `v1·gamma1 + v2·gamma2` of Clifford multiplication by `v`.
    pub fn symbol(&self, v: [f64; 2]) -> Mat2 {
        self.gamma1.scale(C64::new(v[0], 0.0)) + self.gamma2.scale(C64::new(v[1], 0.0))
    }
}

/// The fixed representation `gamma_j = i·sigma_j`, `nu = i·diag(1,-1)`.
pub fn make_rep() -> CliffordRep {
    let gamma1 = Mat2([[ZERO, I], [I, ZERO]]);
    let gamma2 = Mat2([[ZERO, ONE], [-ONE, ZERO]]);
    CliffordRep {
        gamma1,
        gamma2,
        nu: Mat2::diag(I, -I),
        omega: gamma1 * gamma2,
        chirality: Mat2::diag(ONE, -ONE),
    }
}

/// `gamma1·phi`, written out for hot loops.
#[inline]
pub fn gamma1_mul(phi: Spinor) -> Spinor {
    Spinor::new(I * phi.c2, I * phi.c1)
}

/// `gamma2·phi`, written out for hot loops.
#[inline]
pub fn gamma2_mul(phi: Spinor) -> Spinor {
    Spinor::new(phi.c2, -phi.c1)
}

/// Clifford multiplication `(v1·gamma1 + v2·gamma2)·phi`.
#[inline]
pub fn clifford_mul(v: [f64; 2], phi: Spinor) -> Spinor {
    gamma1_mul(phi) * v[0] + gamma2_mul(phi) * v[1]
}

/// `nu·(phi, psi) = i·(phi, -psi)`.
#[inline]
pub fn nu_mul(phi: Spinor) -> Spinor {
    Spinor::new(I * phi.c1, -I * phi.c2)
}

/// `omega·phi = gamma1·gamma2·phi`.
#[inline]
pub fn omega_mul(phi: Spinor) -> Spinor {
    gamma1_mul(gamma2_mul(phi))
}

/// `chirality·phi = diag(1,-1)·phi`.
#[inline]
pub fn chirality_mul(phi: Spinor) -> Spinor {
    Spinor::new(phi.c1, -phi.c2)
}

/// Max absolute violation of each representation invariant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct RelationReport {
    /// `{gamma_j, gamma_k} + 2·delta_jk·Id`
    pub anticommutator: f64,
    /// `M + M^dagger` for `M` in {gamma1, gamma2, nu}
    pub skew_adjoint: f64,
    /// `{nu, gamma_j}`
    pub nu_anticommutator: f64,
    /// `omega - gamma1·gamma2`
    pub omega_product: f64,
    /// `chirality - diag(1,-1)` together with `{chirality, gamma_j}`
    pub chirality: f64,
    /// `i·omega - diag(1,-1)`
    pub i_omega_diagonal: f64,
}

impl RelationReport {
    pub fn max_violation(&self) -> f64 {
        [
            self.anticommutator,
            self.skew_adjoint,
            self.nu_anticommutator,
            self.omega_product,
            self.chirality,
            self.i_omega_diagonal,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn check_relations(rep: &CliffordRep) -> RelationReport {
    let gammas = rep.gammas();
    let sigma3 = Mat2::diag(ONE, -ONE);

    let mut anticommutator: f64 = 0.0;
    for (j, gj) in gammas.iter().enumerate() {
        for (k, gk) in gammas.iter().enumerate() {
            let target = if j == k {
                Mat2::IDENTITY.scale(C64::new(-2.0, 0.0))
            } else {
                Mat2::ZERO
            };
            anticommutator = anticommutator.max((gj.anticommutator(gk) - target).max_abs());
        }
    }

    let skew_adjoint = [rep.gamma1, rep.gamma2, rep.nu]
        .iter()
        .map(|m| (*m + m.adjoint()).max_abs())
        .fold(0.0, f64::max);

    let nu_anticommutator = gammas
        .iter()
        .map(|g| rep.nu.anticommutator(g).max_abs())
        .fold(0.0, f64::max);

    let omega_product = (rep.omega - rep.gamma1 * rep.gamma2).max_abs();

    let chirality = gammas
        .iter()
        .map(|g| rep.chirality.anticommutator(g).max_abs())
        .fold((rep.chirality - sigma3).max_abs(), f64::max);

    let i_omega_diagonal = (rep.omega.scale(I) - sigma3).max_abs();

    RelationReport {
        anticommutator,
        skew_adjoint,
        nu_anticommutator,
        omega_product,
        chirality,
        i_omega_diagonal,
    }
}
