//! Cyclic Jacobi for small dense Hermitian matrices.

use super::{EigenResult, SolverKind};
use crate::error::{invalid, Error, Result};
use crate::C64;

pub const DENSE_DIM_CAP: usize = 5000;

const MAX_SWEEPS: usize = 100;

/// Full spectrum and eigenvectors of a Hermitian matrix (row-major `n x n`)
/// by cyclic Jacobi rotations, iterated until the off-diagonal Frobenius norm
/// is at most `1e-12 · max(1, |A|_F)`.
pub fn dense_eigs(a: &[C64], n: usize) -> Result<EigenResult> {
    if n > DENSE_DIM_CAP {
        return Err(Error::DimensionCap {
            dim: n,
            cap: DENSE_DIM_CAP,
        });
    }
    if a.len() != n * n {
        return Err(invalid(
            "matrix",
            format!("expected {} entries, got {}", n * n, a.len()),
        ));
    }
    let zero = C64::new(0.0, 0.0);
    let mut m = a.to_vec();
    // symmetrize against rounding in the input
    for i in 0..n {
        m[i * n + i] = C64::new(m[i * n + i].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i].conj());
            m[i * n + j] = avg;
            m[j * n + i] = avg.conj();
        }
    }
    let frob = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = 1e-12 * frob.max(1.0);
    let mut v = vec![zero; n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }
    let off_norm = |m: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * m[i * n + j].norm_sqr();
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off_norm(&m) > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NotConverged(format!(
                "Jacobi after {MAX_SWEEPS} sweeps"
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                if sweeps > 3 && mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    m[p * n + q] = zero;
                    m[q * n + p] = zero;
                    continue;
                }
                let ph = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // V restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                let vqp = -s * ph.conj();
                let vqq = c * ph.conj();
                for r in 0..n {
                    let x = m[r * n + p];
                    let y = m[r * n + q];
                    m[r * n + p] = x * c + y * vqp;
                    m[r * n + q] = x * s + y * vqq;
                }
                for col in 0..n {
                    let x = m[p * n + col];
                    let y = m[q * n + col];
                    m[p * n + col] = x * c + y * vqp.conj();
                    m[q * n + col] = x * s + y * vqq.conj();
                }
                m[p * n + p] = C64::new(app - t * mag, 0.0);
                m[q * n + q] = C64::new(aqq + t * mag, 0.0);
                m[p * n + q] = zero;
                m[q * n + p] = zero;
                for r in 0..n {
                    let x = v[r * n + p];
                    let y = v[r * n + q];
                    v[r * n + p] = x * c + y * vqp;
                    v[r * n + q] = x * s + y * vqq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.total_cmp(&m[j * n + j].re));
    let values: Vec<f64> = order.iter().map(|&i| m[i * n + i].re).collect();
    let vectors: Vec<Vec<C64>> = order
        .iter()
        .map(|&i| (0..n).map(|r| v[r * n + i]).collect())
        .collect();
    let residuals = vectors
        .iter()
        .zip(&values)
        .map(|(x, &l)| {
            (0..n)
                .map(|r| {
                    let ax: C64 = (0..n).map(|c| a[r * n + c] * x[c]).sum();
                    (ax - x[r] * l).norm_sqr()
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok(EigenResult {
        values,
        vectors: Some(vectors),
        residuals,
        solver: SolverKind::Jacobi,
        iterations: sweeps,
        seed: None,
        converged: true,
        unconverged: Vec::new(),
    })
}
