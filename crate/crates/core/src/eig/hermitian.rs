//! Dense Hermitian eigenproblems by Householder reduction and implicit QL.
//!
//! Used for the small projected (Ritz) problems inside Lanczos.

use crate::error::{Error, Result};
use crate::C64;

/// Eigen-decomposition of a real symmetric tridiagonal matrix by implicit QL
/// with Wilkinson-type shifts.
///
/// `d` (length n) holds the diagonal, `e` (length n - 1) the off-diagonal.
/// When `z` is given (row-major n x n, usually the identity), the rotations
/// are accumulated into it so that column `i` becomes the eigenvector of
/// eigenvalue `d[i]`. Output is unsorted.
pub fn tridiagonal_ql(d: &mut [f64], e_in: &[f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&e_in[..n - 1]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::NotConverged("tridiagonal QL iteration".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors of a dense Hermitian matrix
/// (row-major, `n x n`). Column `i` of the returned row-major matrix is the
/// eigenvector of eigenvalue `i`.
pub fn hermitian_eig(a: &[C64], n: usize) -> Result<(Vec<f64>, Vec<C64>)> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let zero = C64::new(0.0, 0.0);
    let mut a = a.to_vec();
    let mut q = vec![zero; n * n];
    for i in 0..n {
        q[i * n + i] = C64::new(1.0, 0.0);
    }
    let mut sub = vec![zero; n.saturating_sub(1)];
    let mut u = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let m = k + 1;
        let alpha = (m..n).map(|r| a[r * n + k].norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            sub[k] = zero;
            continue;
        }
        let x0 = a[m * n + k];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        for r in m..n {
            u[r] = a[r * n + k];
        }
        u[m] += phase * alpha;
        let un = (m..n).map(|r| u[r].norm_sqr()).sum::<f64>().sqrt();
        for r in m..n {
            u[r] /= un;
        }
        // p = A u on the trailing block, K = u^H p, w = p - K u
        for r in m..n {
            let mut acc = zero;
            for c in m..n {
                acc += a[r * n + c] * u[c];
            }
            p[r] = acc;
        }
        let kk: C64 = (m..n).map(|r| u[r].conj() * p[r]).sum();
        for r in m..n {
            p[r] -= kk.re * u[r];
        }
        for r in m..n {
            for c in m..n {
                a[r * n + c] -= 2.0 * (u[r] * p[c].conj() + p[r] * u[c].conj());
            }
        }
        sub[k] = -phase * alpha;
        for r in m..n {
            a[r * n + k] = zero;
            a[k * n + r] = zero;
        }
        // Q <- Q (I - 2 u u^H)
        for r in 0..n {
            let mut acc = zero;
            for c in m..n {
                acc += q[r * n + c] * u[c];
            }
            for c in m..n {
                q[r * n + c] -= 2.0 * acc * u[c].conj();
            }
        }
    }
    if n >= 2 {
        sub[n - 2] = a[(n - 1) * n + n - 2];
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    // make the off-diagonal real with a diagonal phase similarity
    let mut phases = vec![C64::new(1.0, 0.0); n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let ek = sub[k];
        let mag = ek.norm();
        e[k] = mag;
        phases[k + 1] = if mag == 0.0 {
            phases[k]
        } else {
            phases[k] * ek / mag
        };
    }
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut d, &e, Some(&mut z))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    // eigenvectors: Q D Z
    let mut vecs = vec![zero; n * n];
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            let mut acc = zero;
            for k in 0..n {
                let zk = z[k * n + src];
                if zk != 0.0 {
                    acc += q[r * n + k] * phases[k] * zk;
                }
            }
            vecs[r * n + col] = acc;
        }
    }
    Ok((vals, vecs))
}
