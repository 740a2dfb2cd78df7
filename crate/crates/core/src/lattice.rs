//! Gauge-covariant lattice operators on truncated square grids.
//!
//! Nodes `x_{ij} = c - L + (i, j) h` with `h = 2L / (N - 1)`; every node is
//! an unknown and the field vanishes outside the grid (Dirichlet). Spinor
//! unknowns are ordered `2 (i N + j) + s`.
//!
//! Each edge `x -> x + h e_k` carries a unitary link `U = exp(i theta)`; the
//! reverse edge uses `conj(U)`, which makes every assembly Hermitian entry by
//! entry rather than up to rounding.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{PotentialField, SampleBox, ScalarField};
use crate::{Point, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: Point,
    pub half_width: f64,
    pub n_per_side: usize,
}

impl GridSpec {
    pub fn new(center: Point, half_width: f64, n_per_side: usize) -> Result<Self> {
        SampleBox::new(center, half_width)?;
        if n_per_side < 8 {
            return Err(invalid(
                "n_per_side",
                format!("must be at least 8, got {n_per_side}"),
            ));
        }
        Ok(GridSpec {
            center,
            half_width,
            n_per_side,
        })
    }

    /// Grid with spacing as close to `h` as the box allows.
    pub fn with_spacing(center: Point, half_width: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(invalid("h", "must be positive"));
        }
        let n = (2.0 * half_width / h).round() as usize + 1;
        Self::new(center, half_width, n)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.n_per_side - 1) as f64
    }

    pub fn node_count(&self) -> usize {
        self.n_per_side * self.n_per_side
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        let h = self.h();
        [
            self.center[0] - self.half_width + i as f64 * h,
            self.center[1] - self.half_width + j as f64 * h,
        ]
    }

    /// Node coordinates of node index `k = i N + j`.
    pub fn node_at(&self, k: usize) -> Point {
        self.node(k / self.n_per_side, k % self.n_per_side)
    }

    pub fn sample_box(&self) -> SampleBox {
        SampleBox {
            center: self.center,
            half_width: self.half_width,
        }
    }

    /// True when `x` is at least `margin` inside the grid box.
    pub fn is_interior(&self, x: Point, margin: f64) -> bool {
        (x[0] - self.center[0]).abs() <= self.half_width - margin
            && (x[1] - self.center[1]).abs() <= self.half_width - margin
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Dirac,
    DiracMass,
    MagLaplacian,
}

/// Edge-integral rule for the link phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkRule {
    /// `theta = h A_k(x + h e_k / 2)`.
    #[default]
    Midpoint,
    /// Like `Midpoint`, except that a potential produced by
    /// [`crate::fields::gauge_shift`] gets `theta_base + f(y) - f(x)`.
    ExactDifference,
}

/// Sparse Hermitian matrix in CSR form with its provenance.
#[derive(Clone)]
pub struct SparseHermitian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    kind: OperatorKind,
    grid: GridSpec,
    fingerprint: String,
}

impl fmt::Debug for SparseHermitian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseHermitian")
            .field("dim", &self.dim)
            .field("nnz", &self.nnz())
            .field("kind", &self.kind)
            .field("grid", &self.grid)
            .field("fingerprint", &self.fingerprint)
            .finish()
    }
}

impl SparseHermitian {
    /// Builds from per-row `(col, value)` lists (each sorted by column).
    fn from_rows(
        rows: Vec<Vec<(usize, C64)>>,
        kind: OperatorKind,
        grid: GridSpec,
        fingerprint: String,
    ) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseHermitian {
            dim,
            row_ptr,
            cols,
            vals,
            kind,
            grid,
            fingerprint,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b]
            .iter()
            .copied()
            .zip(self.vals[a..b].iter().copied())
    }

    pub fn max_row_nnz(&self) -> usize {
        self.row_ptr
            .windows(2)
            .map(|w| w[1] - w[0])
            .max()
            .unwrap_or(0)
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        match self.cols[a..b].binary_search(&c) {
            Ok(k) => self.vals[a + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `max |M_ab - conj(M_ba)|` over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        crate::par::max_range(self.dim, |r| {
            self.row(r)
                .map(|(c, v)| (v - self.get(c, r).conj()).norm())
                .fold(0.0, f64::max)
        })
    }

    /// Gershgorin bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        crate::par::max_range(self.dim, |r| self.row(r).map(|(_, v)| v.norm()).sum())
    }

    /// `y = M x`.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        crate::par::fill(y, |r| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            acc
        });
    }

    /// Sequential `y = M x`, kept for benchmark comparison.
    pub fn matvec_serial(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// Row-major dense copy (for small oracle problems).
    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim * self.dim];
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                out[r * self.dim + c] = v;
            }
        }
        out
    }

    /// Writes `row col re im` lines (0-based) after a `#` header.
    pub fn write_coo<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# dim={} nnz={} kind={:?} n_per_side={} half_width={} center=({},{}) fingerprint={}",
            self.dim,
            self.nnz(),
            self.kind,
            self.grid.n_per_side,
            self.grid.half_width,
            self.grid.center[0],
            self.grid.center[1],
            self.fingerprint
        )?;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                writeln!(w, "{r} {c} {:e} {:e}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Reads back the text written by [`SparseHermitian::write_coo`] as triplets.
pub fn read_coo(text: &str) -> Result<Vec<(usize, usize, C64)>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let bad = || invalid("coo", format!("malformed line {}", ln + 1));
        if parts.len() != 4 {
            return Err(bad());
        }
        let r = parts[0].parse().map_err(|_| bad())?;
        let c = parts[1].parse().map_err(|_| bad())?;
        let re = parts[2].parse().map_err(|_| bad())?;
        let im = parts[3].parse().map_err(|_| bad())?;
        out.push((r, c, C64::new(re, im)));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// links

/// Link angles of the horizontal (`x -> x + h e1`) and vertical edges,
/// indexed by the start node; the last column/row is unused.
struct Links {
    x: Vec<f64>,
    y: Vec<f64>,
}

fn link_angle(p: &PotentialField, a: Point, b: Point, axis: usize, h: f64, rule: LinkRule) -> f64 {
    if rule == LinkRule::ExactDifference {
        if let Some(shift) = p.gauge_shift_parts() {
            return link_angle(&shift.base, a, b, axis, h, rule) + shift.function.value(b)
                - shift.function.value(a);
        }
    }
    let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    h * p.a(mid)[axis]
}

fn compute_links(grid: &GridSpec, p: &PotentialField, rule: LinkRule) -> Result<Links> {
    let n = grid.n_per_side;
    let h = grid.h();
    let zero_field = p.is_zero_field();
    let x = crate::par::map_range(n * n, |k| {
        let (i, j) = (k / n, k % n);
        if i + 1 >= n || zero_field {
            0.0
        } else {
            link_angle(p, grid.node(i, j), grid.node(i + 1, j), 0, h, rule)
        }
    });
    let y = crate::par::map_range(n * n, |k| {
        let (i, j) = (k / n, k % n);
        if j + 1 >= n || zero_field {
            0.0
        } else {
            link_angle(p, grid.node(i, j), grid.node(i, j + 1), 1, h, rule)
        }
    });
    let links = Links { x, y };
    let flux = crate::par::max_range((n - 1) * (n - 1), |k| {
        let (i, j) = (k / (n - 1), k % (n - 1));
        let phi = links.x[i * n + j] + links.y[(i + 1) * n + j]
            - links.x[i * n + j + 1]
            - links.y[i * n + j];
        phi.abs()
    });
    if flux > 1.0 {
        return Err(Error::UnderResolved {
            flux,
            max_spacing: h / flux.sqrt(),
        });
    }
    Ok(links)
}

/// Largest plaquette flux of the link field, `~ h^2 sup|B|`.
pub fn max_plaquette_flux(grid: &GridSpec, p: &PotentialField, rule: LinkRule) -> f64 {
    match compute_links(grid, p, rule) {
        Ok(links) => {
            let n = grid.n_per_side;
            crate::par::max_range((n - 1) * (n - 1), |k| {
                let (i, j) = (k / (n - 1), k % (n - 1));
                (links.x[i * n + j] + links.y[(i + 1) * n + j]
                    - links.x[i * n + j + 1]
                    - links.y[i * n + j])
                    .abs()
            })
        }
        Err(Error::UnderResolved { flux, .. }) => flux,
        Err(_) => f64::NAN,
    }
}

fn fingerprint(
    p: &PotentialField,
    v: Option<&ScalarField>,
    a0: Option<&ScalarField>,
    rule: LinkRule,
) -> String {
    let mut s = format!("A={}", p.name());
    if let Some(v) = v {
        s.push_str(&format!(";V={}", v.name()));
    }
    if let Some(a0) = a0 {
        s.push_str(&format!(";A0={}", a0.name()));
    }
    s.push_str(&format!(";links={rule:?}"));
    s
}

// ---------------------------------------------------------------------------
// assembly

/// `D_{A,V,A0}` with midpoint link integrals.
pub fn assemble_dirac(
    grid: &GridSpec,
    p: &PotentialField,
    v: &ScalarField,
    a0: &ScalarField,
) -> Result<SparseHermitian> {
    assemble_dirac_with(grid, p, v, a0, LinkRule::Midpoint)
}

/// `D_{A,V,A0} psi = sum_k gamma_k (U psi(x + h e_k) - U' psi(x - h e_k)) / 2h
/// + i V nu psi + A0 psi`.
pub fn assemble_dirac_with(
    grid: &GridSpec,
    p: &PotentialField,
    v: &ScalarField,
    a0: &ScalarField,
    rule: LinkRule,
) -> Result<SparseHermitian> {
    let links = compute_links(grid, p, rule)?;
    let n = grid.n_per_side;
    let inv2h = 0.5 / grid.h();
    let i_unit = C64::new(0.0, 1.0);
    // gamma1 = [[0, i], [i, 0]], gamma2 = [[0, 1], [-1, 0]]: row s couples to 1 - s
    let g1 = [i_unit, i_unit];
    let g2 = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
    let with_mass = !v.is_zero();
    let with_a0 = !a0.is_zero();

    let rows = crate::par::map_range(2 * n * n, |row| {
        let node = row / 2;
        let s = row % 2;
        let t = 1 - s;
        let (i, j) = (node / n, node % n);
        let mut out = Vec::with_capacity(5);
        if i > 0 {
            let u = C64::from_polar(1.0, links.x[(i - 1) * n + j]).conj();
            out.push((2 * (node - n) + t, -g1[s] * u * inv2h));
        }
        if j > 0 {
            let u = C64::from_polar(1.0, links.y[i * n + j - 1]).conj();
            out.push((2 * (node - 1) + t, -g2[s] * u * inv2h));
        }
        if with_mass || with_a0 {
            let x = grid.node(i, j);
            let mut d = 0.0;
            if with_mass {
                // i V nu = -V diag(1, -1)
                d += if s == 0 { -v.value(x) } else { v.value(x) };
            }
            if with_a0 {
                d += a0.value(x);
            }
            if d != 0.0 {
                out.push((row, C64::new(d, 0.0)));
            }
        }
        if j + 1 < n {
            let u = C64::from_polar(1.0, links.y[i * n + j]);
            out.push((2 * (node + 1) + t, g2[s] * u * inv2h));
        }
        if i + 1 < n {
            let u = C64::from_polar(1.0, links.x[i * n + j]);
            out.push((2 * (node + n) + t, g1[s] * u * inv2h));
        }
        out
    });
    let kind = if with_mass {
        OperatorKind::DiracMass
    } else {
        OperatorKind::Dirac
    };
    Ok(SparseHermitian::from_rows(
        rows,
        kind,
        *grid,
        fingerprint(p, Some(v), Some(a0), rule),
    ))
}

/// Scalar magnetic Laplacian (one spinor component), midpoint links.
pub fn assemble_mag_laplacian(grid: &GridSpec, p: &PotentialField) -> Result<SparseHermitian> {
    assemble_mag_laplacian_with(grid, p, LinkRule::Midpoint)
}

/// `H_A psi = sum_k (2 psi(x) - U psi(x + h e_k) - U' psi(x - h e_k)) / h^2`.
pub fn assemble_mag_laplacian_with(
    grid: &GridSpec,
    p: &PotentialField,
    rule: LinkRule,
) -> Result<SparseHermitian> {
    let links = compute_links(grid, p, rule)?;
    let n = grid.n_per_side;
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let rows = crate::par::map_range(n * n, |node| {
        let (i, j) = (node / n, node % n);
        let mut out = Vec::with_capacity(5);
        if i > 0 {
            out.push((
                node - n,
                -C64::from_polar(1.0, links.x[(i - 1) * n + j]).conj() * inv_h2,
            ));
        }
        if j > 0 {
            out.push((
                node - 1,
                -C64::from_polar(1.0, links.y[i * n + j - 1]).conj() * inv_h2,
            ));
        }
        out.push((node, C64::new(4.0 * inv_h2, 0.0)));
        if j + 1 < n {
            out.push((node + 1, -C64::from_polar(1.0, links.y[i * n + j]) * inv_h2));
        }
        if i + 1 < n {
            out.push((node + n, -C64::from_polar(1.0, links.x[i * n + j]) * inv_h2));
        }
        out
    });
    Ok(SparseHermitian::from_rows(
        rows,
        OperatorKind::MagLaplacian,
        *grid,
        fingerprint(p, None, None, rule),
    ))
}

/// `U^dagger M U` with `U = diag(exp(i f(node)))`.
///
/// `M_ab` becomes `exp(i (f(b) - f(a))) M_ab`, which turns every link of `A`
/// into the corresponding link of `A + df` under the exact-difference rule.
pub fn gauge_conjugate(m: &SparseHermitian, f: &ScalarField) -> SparseHermitian {
    let per_node = if m.kind == OperatorKind::MagLaplacian {
        1
    } else {
        2
    };
    let grid = m.grid;
    let phase: Vec<f64> = crate::par::map_range(grid.node_count(), |k| f.value(grid.node_at(k)));
    let rows = crate::par::map_range(m.dim, |r| {
        m.row(r)
            .map(|(c, v)| {
                let d = phase[c / per_node] - phase[r / per_node];
                (
                    c,
                    if d == 0.0 {
                        v
                    } else {
                        v * C64::from_polar(1.0, d)
                    },
                )
            })
            .collect()
    });
    SparseHermitian::from_rows(
        rows,
        m.kind,
        m.grid,
        format!("{}+d[{}]", m.fingerprint, f.name()),
    )
}

/// `max |(M Sigma3 + Sigma3 M)_ab|` with `Sigma3 = diag(1, -1)` per node.
pub fn chirality_anticommutator(m: &SparseHermitian) -> Result<f64> {
    if m.kind == OperatorKind::MagLaplacian {
        return Err(Error::Precondition(
            "chirality is defined for spinor operators only".into(),
        ));
    }
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok(crate::par::max_range(m.dim, |r| {
        m.row(r)
            .map(|(c, v)| (v * (sign(r) + sign(c))).norm())
            .fold(0.0, f64::max)
    }))
}

/// Samples a spinor field on the grid nodes.
pub fn sample_spinor(
    grid: &GridSpec,
    psi: impl Fn(Point) -> crate::clifford::Spinor + Sync + Send,
) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); 2 * grid.node_count()];
    crate::par::fill(&mut out, |k| {
        let s = psi(grid.node_at(k / 2));
        if k % 2 == 0 {
            s.c1
        } else {
            s.c2
        }
    });
    out
}

// ---------------------------------------------------------------------------
// operator abstraction used by the iterative solvers

/// A Hermitian linear map.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
    /// Upper bound on the spectral radius.
    fn norm_bound(&self) -> f64;
}

impl LinearOperator for SparseHermitian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec(x, y)
    }

    fn norm_bound(&self) -> f64 {
        SparseHermitian::norm_bound(self)
    }
}

/// `M^2` (equal to `M^dagger M` for Hermitian `M`).
pub struct Squared<'a, T: LinearOperator + ?Sized>(pub &'a T);

impl<T: LinearOperator + ?Sized> LinearOperator for Squared<'_, T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let mut tmp = vec![C64::new(0.0, 0.0); x.len()];
        self.0.apply(x, &mut tmp);
        self.0.apply(&tmp, y);
    }

    fn norm_bound(&self) -> f64 {
        let b = self.0.norm_bound();
        b * b
    }
}

/// A scalar operator acting identically on both spinor components.
pub struct Componentwise<'a>(pub &'a SparseHermitian);

impl LinearOperator for Componentwise<'_> {
    fn dim(&self) -> usize {
        2 * self.0.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let m = self.0;
        crate::par::fill(y, |r| {
            let (node, s) = (r / 2, r % 2);
            let mut acc = C64::new(0.0, 0.0);
            for k in m.row_ptr[node]..m.row_ptr[node + 1] {
                acc += m.vals[k] * x[2 * m.cols[k] + s];
            }
            acc
        });
    }

    fn norm_bound(&self) -> f64 {
        self.0.norm_bound()
    }
}

/// `M + shift·I`.
pub struct Shifted<'a, T: LinearOperator + ?Sized>(pub &'a T, pub f64);

impl<T: LinearOperator + ?Sized> LinearOperator for Shifted<'_, T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.0.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += *xi * self.1;
        }
    }

    fn norm_bound(&self) -> f64 {
        self.0.norm_bound() + self.1.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::Spinor;
    use crate::fields::{constant_field, gauge_shift, miller_simon, zero_potential, ScalarRole};
    use crate::identities::{apply_dirac, SpinorField, Stencil};

    fn g(n: usize, l: f64) -> GridSpec {
        GridSpec::new([0.0, 0.0], l, n).unwrap()
    }

    fn zeros() -> (ScalarField, ScalarField) {
        (
            ScalarField::zero(ScalarRole::Mass),
            ScalarField::zero(ScalarRole::Electric),
        )
    }

    fn dense_mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aik * b[k * n + j];
                }
            }
        }
        out
    }

    #[test]
    fn grid_validation_and_spacing() {
        assert!(GridSpec::new([0.0, 0.0], 1.0, 7).is_err());
        assert!(GridSpec::new([0.0, 0.0], 0.0, 16).is_err());
        let grid = g(17, 4.0);
        assert_eq!(grid.h(), 0.5);
        assert_eq!(grid.node(0, 16), [-4.0, 4.0]);
        assert_eq!(
            GridSpec::with_spacing([0.0, 0.0], 12.0, 0.25)
                .unwrap()
                .n_per_side,
            97
        );
    }

    #[test]
    fn assemblies_are_exactly_hermitian_and_sparse() {
        let grid = g(16, 3.0);
        let p = miller_simon(0.5).unwrap();
        let v = crate::fields::confining_mass(1.0, 1.0).unwrap();
        let a0 = ScalarField::constant(0.3, ScalarRole::Electric);
        let d = assemble_dirac(&grid, &p, &v, &a0).unwrap();
        assert_eq!(d.dim(), 2 * 256);
        assert_eq!(d.hermiticity_defect(), 0.0);
        assert!(d.max_row_nnz() <= 10);
        assert_eq!(d.kind(), OperatorKind::DiracMass);
        let h = assemble_mag_laplacian(&grid, &p).unwrap();
        assert_eq!(h.dim(), 256);
        assert_eq!(h.hermiticity_defect(), 0.0);
        assert!(h.max_row_nnz() <= 10);
    }

    #[test]
    fn free_laplacian_is_five_point_stencil() {
        let grid = g(9, 2.0);
        let h = assemble_mag_laplacian(&grid, &zero_potential()).unwrap();
        let inv = 1.0 / (grid.h() * grid.h());
        assert_eq!(h.get(40, 40), C64::new(4.0 * inv, 0.0));
        assert_eq!(h.get(40, 41), C64::new(-inv, 0.0));
        assert_eq!(h.get(40, 31), C64::new(-inv, 0.0));
        assert_eq!(h.get(40, 50), C64::new(0.0, 0.0));
    }

    #[test]
    fn chirality_values() {
        let grid = g(8, 2.0);
        let (v0, a00) = zeros();
        let d = assemble_dirac(&grid, &miller_simon(0.5).unwrap(), &v0, &a00).unwrap();
        assert_eq!(chirality_anticommutator(&d).unwrap(), 0.0);
        let v1 = ScalarField::constant(1.0, ScalarRole::Mass);
        let dm = assemble_dirac(&grid, &zero_potential(), &v1, &a00).unwrap();
        assert_eq!(chirality_anticommutator(&dm).unwrap(), 2.0);
        let a1 = ScalarField::constant(1.0, ScalarRole::Electric);
        let de = assemble_dirac(&grid, &zero_potential(), &v0, &a1).unwrap();
        assert_eq!(chirality_anticommutator(&de).unwrap(), 2.0);
        let h = assemble_mag_laplacian(&grid, &zero_potential()).unwrap();
        assert!(chirality_anticommutator(&h).is_err());
    }

    #[test]
    fn constant_mass_squares_to_shift() {
        let grid = g(8, 2.0);
        let (v0, a0) = zeros();
        let m = 0.7;
        let vm = ScalarField::constant(m, ScalarRole::Mass);
        let p = miller_simon(0.5).unwrap();
        let d = assemble_dirac(&grid, &p, &v0, &a0).unwrap().to_dense();
        let dm = assemble_dirac(&grid, &p, &vm, &a0).unwrap().to_dense();
        let n = 2 * grid.node_count();
        let d2 = dense_mul(&d, &d, n);
        let dm2 = dense_mul(&dm, &dm, n);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expect = d2[i * n + j]
                    + if i == j {
                        C64::new(m * m, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    };
                worst = worst.max((dm2[i * n + j] - expect).norm());
            }
        }
        assert!(worst < 1e-13, "{worst}");
    }

    #[test]
    fn electric_constant_adds_identity() {
        let grid = g(8, 2.0);
        let (v0, a0) = zeros();
        let c = ScalarField::constant(0.25, ScalarRole::Electric);
        let p = constant_field(1.0);
        let d = assemble_dirac(&grid, &p, &v0, &a0).unwrap();
        let dc = assemble_dirac(&grid, &p, &v0, &c).unwrap();
        for r in 0..d.dim() {
            for cidx in 0..d.dim() {
                let expect = d.get(r, cidx)
                    + if r == cidx {
                        C64::new(0.25, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    };
                assert_eq!(dc.get(r, cidx), expect);
            }
        }
    }

    #[test]
    fn gauge_conjugate_trivial_functions() {
        let grid = g(10, 2.0);
        let h = assemble_mag_laplacian(&grid, &constant_field(1.0)).unwrap();
        for f in [
            ScalarField::zero(ScalarRole::Gauge),
            ScalarField::constant(2.3, ScalarRole::Gauge),
        ] {
            let c = gauge_conjugate(&h, &f);
            assert_eq!(c.vals, h.vals);
            assert_eq!(c.cols, h.cols);
        }
    }

    #[test]
    fn gauge_conjugate_matches_exact_difference_assembly() {
        let grid = g(16, 3.0);
        let p = constant_field(1.0);
        let f = ScalarField::new(
            "xy",
            ScalarRole::Gauge,
            |x| x[0] * x[1],
            Some(std::sync::Arc::new(|x: Point| [x[1], x[0]])),
        );
        let shifted = gauge_shift(&p, &f).unwrap();
        let (v0, a0) = zeros();
        let d = assemble_dirac(&grid, &p, &v0, &a0).unwrap();
        let conj = gauge_conjugate(&d, &f);
        let direct =
            assemble_dirac_with(&grid, &shifted, &v0, &a0, LinkRule::ExactDifference).unwrap();
        assert_eq!(conj.cols, direct.cols);
        let worst = conj
            .vals
            .iter()
            .zip(&direct.vals)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-13, "{worst}");
        assert_eq!(conj.hermiticity_defect(), 0.0);

        let h = assemble_mag_laplacian(&grid, &p).unwrap();
        let hc = gauge_conjugate(&h, &f);
        let hd = assemble_mag_laplacian_with(&grid, &shifted, LinkRule::ExactDifference).unwrap();
        let worst = hc
            .vals
            .iter()
            .zip(&hd.vals)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn midpoint_rule_gauge_error_is_second_order() {
        let p = constant_field(1.0);
        let f = ScalarField::new(
            "sin",
            ScalarRole::Gauge,
            |x| (0.5 * x[0]).sin() * x[1],
            Some(std::sync::Arc::new(|x: Point| {
                [0.5 * (0.5 * x[0]).cos() * x[1], (0.5 * x[0]).sin()]
            })),
        );
        let shifted = gauge_shift(&p, &f).unwrap();
        let errs: Vec<f64> = [16usize, 31, 61]
            .iter()
            .map(|&n| {
                let grid = g(n, 3.0);
                let h = assemble_mag_laplacian(&grid, &p).unwrap();
                let hc = gauge_conjugate(&h, &f);
                let hm = assemble_mag_laplacian(&grid, &shifted).unwrap();
                let scale = grid.h() * grid.h();
                hc.vals
                    .iter()
                    .zip(&hm.vals)
                    .map(|(a, b)| (a - b).norm() * scale)
                    .fold(0.0, f64::max)
            })
            .collect();
        // link-angle error is O(h^3) per edge
        assert!(
            errs[1] < errs[0] / 6.0 && errs[2] < errs[1] / 6.0,
            "{errs:?}"
        );
    }

    #[test]
    fn under_resolved_links_are_rejected() {
        let grid = g(16, 8.0);
        let err = assemble_mag_laplacian(&grid, &constant_field(10.0)).unwrap_err();
        assert!(matches!(err, Error::UnderResolved { .. }), "{err}");
        // large |A| with small B is fine
        assert!(assemble_mag_laplacian(&g(97, 12.0), &constant_field(1.0)).is_ok());
    }

    #[test]
    fn lattice_dirac_matches_continuum_to_second_order() {
        let psi = SpinorField::gaussian(
            1.0,
            [0.2, -0.1],
            Spinor::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0)),
        );
        let p = miller_simon(0.5).unwrap();
        let (v0, a0) = zeros();
        let errs: Vec<f64> = [33usize, 65, 129]
            .iter()
            .map(|&n| {
                let grid = g(n, 4.0);
                let d = assemble_dirac(&grid, &p, &v0, &a0).unwrap();
                let x = sample_spinor(&grid, |y| psi.value(y));
                let mut y = vec![C64::new(0.0, 0.0); x.len()];
                d.matvec(&x, &mut y);
                let mut worst: f64 = 0.0;
                for k in 0..grid.node_count() {
                    let pt = grid.node_at(k);
                    if !grid.is_interior(pt, 2.0 * grid.h()) || pt[0].hypot(pt[1]) < 0.5 {
                        continue;
                    }
                    let c = apply_dirac(&p, &v0, &a0, &psi, pt, Stencil::order4(1e-3));
                    worst = worst
                        .max((y[2 * k] - c.c1).norm())
                        .max((y[2 * k + 1] - c.c2).norm());
                }
                worst
            })
            .collect();
        assert!(
            errs[1] / errs[0] < 0.3 && errs[2] / errs[1] < 0.3,
            "{errs:?}"
        );
    }

    #[test]
    fn coo_round_trip() {
        let grid = g(8, 1.0);
        let d = assemble_dirac(&grid, &constant_field(1.0), &zeros().0, &zeros().1).unwrap();
        let mut buf = Vec::new();
        d.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# dim=128"));
        let trip = read_coo(&text).unwrap();
        assert_eq!(trip.len(), d.nnz());
        for (r, c, v) in trip {
            assert!((d.get(r, c) - v).norm() < 1e-15 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn wrappers_agree_with_dense_products() {
        let grid = g(8, 2.0);
        let d = assemble_dirac(&grid, &miller_simon(0.5).unwrap(), &zeros().0, &zeros().1).unwrap();
        let n = d.dim();
        let x: Vec<C64> = (0..n)
            .map(|k| C64::new((k as f64).sin(), (k as f64 * 0.3).cos()))
            .collect();
        let mut y = vec![C64::new(0.0, 0.0); n];
        Squared(&d).apply(&x, &mut y);
        let dd = d.to_dense();
        let d2 = dense_mul(&dd, &dd, n);
        for i in 0..n {
            let e: C64 = (0..n).map(|j| d2[i * n + j] * x[j]).sum();
            assert!((e - y[i]).norm() < 1e-12);
        }
        let mut ys = vec![C64::new(0.0, 0.0); n];
        d.matvec_serial(&x, &mut ys);
        let mut yp = vec![C64::new(0.0, 0.0); n];
        d.matvec(&x, &mut yp);
        assert_eq!(ys, yp);

        let h = assemble_mag_laplacian(&grid, &constant_field(1.0)).unwrap();
        let mut yc = vec![C64::new(0.0, 0.0); 2 * h.dim()];
        Componentwise(&h).apply(&x, &mut yc);
        let up: Vec<C64> = x.iter().step_by(2).copied().collect();
        let mut yu = vec![C64::new(0.0, 0.0); h.dim()];
        h.matvec(&up, &mut yu);
        for k in 0..h.dim() {
            assert_eq!(yc[2 * k], yu[k]);
        }
    }
}
