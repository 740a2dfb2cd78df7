//! Deterministic complex vector kernels.
//!
//! Reductions are split into fixed-size chunks whose partial sums are added
//! in chunk order, so results do not depend on the number of workers.

use crate::C64;

const CHUNK: usize = 4096;

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let chunks = a.len().div_ceil(CHUNK);
    let partial = crate::par::map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(a.len());
        let mut acc = C64::new(0.0, 0.0);
        for i in lo..hi {
            acc += a[i].conj() * b[i];
        }
        acc
    });
    partial.into_iter().fold(C64::new(0.0, 0.0), |s, v| s + v)
}

pub fn norm(a: &[C64]) -> f64 {
    let chunks = a.len().div_ceil(CHUNK);
    let partial = crate::par::map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(a.len());
        a[lo..hi].iter().map(|z| z.norm_sqr()).sum::<f64>()
    });
    partial.into_iter().sum::<f64>().sqrt()
}

pub fn scale(a: &mut [C64], s: f64) {
    for z in a.iter_mut() {
        *z *= s;
    }
}

/// `y -= sum_i c_i basis_i`.
pub fn subtract_combination(y: &mut [C64], basis: &[Vec<C64>], coeffs: &[C64]) {
    if basis.is_empty() {
        return;
    }
    crate::par::fill_with(y, |r, yr| {
        let mut acc = C64::new(0.0, 0.0);
        for (b, c) in basis.iter().zip(coeffs) {
            acc += *c * b[r];
        }
        *yr -= acc;
    });
}

/// `sum_i c_i basis_i`.
pub fn combination(basis: &[Vec<C64>], coeffs: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n];
    crate::par::fill(&mut out, |r| {
        let mut acc = C64::new(0.0, 0.0);
        for (b, c) in basis.iter().zip(coeffs) {
            acc += *c * b[r];
        }
        acc
    });
    out
}

/// Two passes of classical Gram-Schmidt of `y` against `basis`; returns the
/// coefficients of the first pass plus corrections.
pub fn orthogonalize(y: &mut [C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut total = vec![C64::new(0.0, 0.0); basis.len()];
    for _ in 0..2 {
        let c: Vec<C64> = crate::par::map_slice(basis, |b| dot(b, y));
        subtract_combination(y, basis, &c);
        for (t, ci) in total.iter_mut().zip(c) {
            *t += ci;
        }
    }
    total
}
