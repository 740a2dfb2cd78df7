//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection.

use serde::{Deserialize, Serialize};

use super::{EigenResult, SolverKind};
use crate::error::{invalid, Result};
use crate::C64;

/// Real symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(invalid("diag", "empty matrix"));
        }
        if off.len() + 1 != diag.len() {
            return Err(invalid(
                "off",
                format!("expected {} entries, got {}", diag.len() - 1, off.len()),
            ));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(invalid("entries", "non-finite entry"));
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    fn pivmin(&self) -> f64 {
        let m = self.off.iter().map(|b| b * b).fold(1.0_f64, f64::max);
        f64::MIN_POSITIVE / f64::EPSILON * m
    }
}

/// Number of eigenvalues strictly below `x` (count of negative pivots of
/// `T - x I = L D L^T`).
pub fn sturm_count(t: &SymTridiag, x: f64) -> usize {
    let pivmin = t.pivmin();
    let mut count = 0;
    let mut d = t.diag[0] - x;
    if d.abs() < pivmin {
        d = -pivmin;
    }
    if d < 0.0 {
        count += 1;
    }
    for i in 1..t.dim() {
        d = t.diag[i] - x - t.off[i - 1] * t.off[i - 1] / d;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Selection {
    /// The lowest `K` eigenvalues.
    Lowest(usize),
    /// All eigenvalues in `[a, b)`.
    Interval(f64, f64),
}

/// Eigenvalues and optional eigenvectors of a symmetric tridiagonal matrix.
///
/// Bisection runs to machine precision, well inside the absolute tolerance
/// `1e-10 max(1, |spectral bound|)`. Vectors come from inverse iteration,
/// reorthogonalized within clusters.
pub fn tridiag_eigs(t: &SymTridiag, sel: Selection, vectors: bool) -> Result<EigenResult> {
    let n = t.dim();
    let (glo, ghi) = t.gershgorin();
    let bound = glo.abs().max(ghi.abs()).max(1.0);
    let pad = 2.0 * f64::EPSILON * bound + t.pivmin();
    let (lo, hi) = (glo - pad, ghi + pad);
    let (first, last) = match sel {
        Selection::Lowest(k) => (0, k.min(n)),
        Selection::Interval(a, b) => {
            if !(a < b) {
                return Err(invalid("interval", format!("need a < b, got [{a}, {b}]")));
            }
            (sturm_count(t, a), sturm_count(t, b))
        }
    };
    let mut iterations = 0;
    let mut values = Vec::with_capacity(last - first);
    let mut widths = Vec::with_capacity(last - first);
    let mut prev_lo = lo;
    for k in first..last {
        // k-th eigenvalue (0-based): count(a) <= k < count(b)
        let (mut a, mut b) = (prev_lo, hi);
        loop {
            let mid = 0.5 * (a + b);
            if mid <= a
                || mid >= b
                || b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) + t.pivmin()
            {
                break;
            }
            iterations += 1;
            if sturm_count(t, mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        values.push(0.5 * (a + b));
        // counts are exact for a matrix within a few ulps of T
        widths.push(0.5 * (b - a) + 4.0 * f64::EPSILON * bound);
        prev_lo = a;
    }

    let mut result = EigenResult {
        values,
        vectors: None,
        residuals: widths,
        solver: SolverKind::SturmBisection,
        iterations,
        seed: None,
        converged: true,
        unconverged: Vec::new(),
    };
    if vectors {
        let vecs = inverse_iteration(t, &result.values, bound);
        result.residuals = vecs
            .iter()
            .zip(&result.values)
            .map(|(v, &l)| {
                let tv = t.matvec(v);
                tv.iter()
                    .zip(v)
                    .map(|(a, b)| (a - l * b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        result.vectors = Some(
            vecs.into_iter()
                .map(|v| v.into_iter().map(|x| C64::new(x, 0.0)).collect())
                .collect(),
        );
    }
    Ok(result)
}

/// Solves `(T - s I) x = r` by LU with partial pivoting (overwrites `r`).
fn shifted_solve(t: &SymTridiag, s: f64, r: &mut [f64], tiny: f64) {
    let n = t.dim();
    if n == 1 {
        let d = t.diag[0] - s;
        r[0] /= if d.abs() < tiny { tiny } else { d };
        return;
    }
    let mut dl: Vec<f64> = t.off.clone();
    let mut d: Vec<f64> = t.diag.iter().map(|v| v - s).collect();
    let mut du: Vec<f64> = t.off.clone();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swap = vec![false; n - 1];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            swap[i] = true;
        }
    }
    if d[n - 1].abs() < tiny {
        d[n - 1] = if d[n - 1] < 0.0 { -tiny } else { tiny };
    }
    for i in 0..n - 1 {
        if swap[i] {
            let temp = r[i];
            r[i] = r[i + 1];
            r[i + 1] = temp - dl[i] * r[i];
        } else {
            r[i + 1] -= dl[i] * r[i];
        }
    }
    r[n - 1] /= d[n - 1];
    r[n - 2] = (r[n - 2] - du[n - 2] * r[n - 1]) / d[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        r[i] = (r[i] - du[i] * r[i + 1] - du2[i] * r[i + 2]) / d[i];
    }
}

fn inverse_iteration(t: &SymTridiag, values: &[f64], bound: f64) -> Vec<Vec<f64>> {
    let n = t.dim();
    let tiny = f64::EPSILON * bound;
    let cluster = 1e-7 * bound;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    let mut cluster_start = 0;
    for (idx, &lambda) in values.iter().enumerate() {
        if idx > 0 && (lambda - values[idx - 1]).abs() > cluster {
            cluster_start = idx;
        }
        // deterministic, non-degenerate start vector
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (0.618_033_988_75 + idx as f64 * 0.1)).sin())
            .collect();
        for _ in 0..3 {
            shifted_solve(t, lambda, &mut x, tiny);
            for prev in &out[cluster_start..idx] {
                let c: f64 = prev.iter().zip(&x).map(|(a, b)| a * b).sum();
                for (xi, pi) in x.iter_mut().zip(prev) {
                    *xi -= c * pi;
                }
            }
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in x.iter_mut() {
                *v /= nrm;
            }
        }
        // fix the sign so that the largest component is positive
        let (imax, _) = x.iter().enumerate().fold((0, 0.0_f64), |acc, (i, v)| {
            if v.abs() > acc.1 {
                (i, v.abs())
            } else {
                acc
            }
        });
        if x[imax] < 0.0 {
            for v in x.iter_mut() {
                *v = -*v;
            }
        }
        out.push(x);
    }
    out
}
