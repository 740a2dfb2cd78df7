//! Block Lanczos for the lowest eigenpairs of a Hermitian operator.
//!
//! Full reorthogonalization against the active basis and all locked vectors,
//! thick restart onto the lowest Ritz vectors, and locking of converged pairs
//! from the bottom of the spectrum. The basis is grown by a block built from
//! the lowest unconverged Ritz vectors. With `filter_degree = 1` that block is
//! their residuals, which spans the same space as a block Krylov step; with a
//! higher degree the Ritz vectors are passed through a Chebyshev polynomial
//! that damps the spectrum above the current Ritz cut, so each outer step
//! costs `degree` operator applications but far fewer reorthogonalizations.
//! Once `K` pairs are locked, a fresh random block is run against the
//! deflated operator; any eigenvalue it finds below the current `K`-th value
//! (a missed multiplicity) is added and the check repeats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hermitian::hermitian_eig;
use super::vecops::{combination, dot, norm, orthogonalize, scale};
use super::{EigenResult, SolverKind};
use crate::error::{invalid, Result};
use crate::lattice::LinearOperator;
use crate::C64;

pub const DEFAULT_SEED: u64 = 0x5eed_d1ac;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosOptions {
    /// Block size; captures multiplicities up to this size per cycle.
    pub block: usize,
    /// Maximum active basis size (0 = automatic).
    pub max_basis: usize,
    /// Maximum number of operator applications (0 = automatic).
    pub max_matvecs: usize,
    /// Degree of the Chebyshev expansion filter (0 = automatic).
    pub filter_degree: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            block: 4,
            max_basis: 0,
            max_matvecs: 0,
            filter_degree: 0,
            seed: DEFAULT_SEED,
        }
    }
}

/// Lowest `k` eigenpairs with `|H v - lambda v| <= tol · |H|_est`.
pub fn lanczos_lowest(h: &dyn LinearOperator, k: usize, tol: f64) -> Result<EigenResult> {
    lanczos_lowest_with(h, k, tol, &LanczosOptions::default())
}

struct Basis {
    v: Vec<Vec<C64>>,
    w: Vec<Vec<C64>>,
    /// `V^H H V` (row-major, `j x j`).
    g: Vec<C64>,
}

impl Basis {
    fn len(&self) -> usize {
        self.v.len()
    }

    fn clear(&mut self) {
        self.v.clear();
        self.w.clear();
        self.g.clear();
    }

    fn push(&mut self, x: Vec<C64>, hx: Vec<C64>) {
        let j = self.len();
        let gcol: Vec<C64> = self.v.iter().map(|vi| dot(vi, &hx)).collect();
        let n1 = j + 1;
        let mut g = vec![C64::new(0.0, 0.0); n1 * n1];
        for r in 0..j {
            g[r * n1..r * n1 + j].copy_from_slice(&self.g[r * j..(r + 1) * j]);
            g[r * n1 + j] = gcol[r];
            g[j * n1 + r] = gcol[r].conj();
        }
        g[j * n1 + j] = C64::new(dot(&x, &hx).re, 0.0);
        self.g = g;
        self.v.push(x);
        self.w.push(hx);
    }

    /// Replaces the basis by the Ritz vectors `V S[:, cols]` (and `W` alike).
    fn rotate(&mut self, s: &[C64], cols: &[usize], thetas: &[f64]) {
        let j = self.len();
        let n = self.v.first().map_or(0, Vec::len);
        let coeffs: Vec<Vec<C64>> = cols.iter().map(|&c| column(s, j, c)).collect();
        let new_v: Vec<Vec<C64>> = coeffs
            .iter()
            .map(|cf| combination(&self.v, cf, n))
            .collect();
        let new_w: Vec<Vec<C64>> = coeffs
            .iter()
            .map(|cf| combination(&self.w, cf, n))
            .collect();
        let r = cols.len();
        let mut g = vec![C64::new(0.0, 0.0); r * r];
        for (a, &t) in thetas.iter().enumerate() {
            g[a * r + a] = C64::new(t, 0.0);
        }
        self.v = new_v;
        self.w = new_w;
        self.g = g;
    }
}

const MAX_AUTO_DEGREE: f64 = 200.0;

/// `p(H) x` for the degree-`d` Chebyshev polynomial of `[cut, upper]`,
/// normalized so that `p(lo) = 1`. Components below `cut` are amplified
/// relative to those in `[cut, upper]`, which stay bounded.
fn chebyshev_filter(
    h: &dyn LinearOperator,
    x: &[C64],
    d: usize,
    lo: f64,
    cut: f64,
    upper: f64,
) -> Vec<C64> {
    let n = x.len();
    let e = 0.5 * (upper - cut);
    let c = 0.5 * (upper + cut);
    let sigma1 = e / (lo - c);
    let mut sigma = sigma1;
    let mut prev = x.to_vec();
    let mut cur = vec![C64::new(0.0, 0.0); n];
    h.apply(x, &mut cur);
    for (yi, xi) in cur.iter_mut().zip(x) {
        *yi = (*yi - *xi * c) * (sigma1 / e);
    }
    let mut hy = vec![C64::new(0.0, 0.0); n];
    for _ in 1..d {
        let sigma_new = 1.0 / (2.0 / sigma1 - sigma);
        h.apply(&cur, &mut hy);
        for i in 0..n {
            let next = (hy[i] - cur[i] * c) * (2.0 * sigma_new / e) - prev[i] * (sigma * sigma_new);
            prev[i] = cur[i];
            cur[i] = next;
        }
        sigma = sigma_new;
    }
    cur
}

fn kth_value(vals: &[f64], k: usize) -> f64 {
    let mut s = vals.to_vec();
    s.sort_by(f64::total_cmp);
    s[k - 1]
}

fn column(s: &[C64], j: usize, c: usize) -> Vec<C64> {
    (0..j).map(|r| s[r * j + c]).collect()
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Like [`lanczos_lowest`] with explicit options.
pub fn lanczos_lowest_with(
    h: &dyn LinearOperator,
    k: usize,
    tol: f64,
    opts: &LanczosOptions,
) -> Result<EigenResult> {
    let n = h.dim();
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    if 4 * k > n {
        return Err(invalid(
            "k",
            format!("K = {k} exceeds dimension/4 = {}", n / 4),
        ));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let p = opts.block.max(1);
    let max_basis = if opts.max_basis == 0 {
        (2 * k + 8 * p).max(64)
    } else {
        opts.max_basis
    }
    .max(3 * p)
    .min(n);
    let fixed_degree = (opts.filter_degree > 0).then_some(opts.filter_degree);
    let max_matvecs = if opts.max_matvecs == 0 {
        (20_000 * (k + p)).max(500_000)
    } else {
        opts.max_matvecs
    };
    let hnorm = h.norm_bound().max(f64::MIN_POSITIVE);
    let abs_tol = tol * hnorm;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked_vecs: Vec<Vec<C64>> = Vec::new();
    let mut basis = Basis {
        v: Vec::new(),
        w: Vec::new(),
        g: Vec::new(),
    };
    let mut block: Vec<Vec<C64>> = (0..p).map(|_| random_vector(&mut rng, n)).collect();
    let mut matvecs = 0usize;
    let mut steps = 0usize;
    let mut verifying = false;
    let mut hx = vec![C64::new(0.0, 0.0); n];

    let converged = loop {
        if matvecs >= max_matvecs {
            break false;
        }
        steps += 1;
        // expand with the orthonormalized block
        for mut x in block.drain(..) {
            let before = norm(&x);
            orthogonalize(&mut x, &locked_vecs);
            orthogonalize(&mut x, &basis.v);
            let after = norm(&x);
            if !(after > 1e-10 * before) {
                continue;
            }
            scale(&mut x, 1.0 / after);
            h.apply(&x, &mut hx);
            matvecs += 1;
            basis.push(x, hx.clone());
        }
        if basis.len() == 0 {
            block = (0..p).map(|_| random_vector(&mut rng, n)).collect();
            continue;
        }

        // Rayleigh-Ritz with explicit residuals from the bottom up
        let j = basis.len();
        let (theta, s) = hermitian_eig(&basis.g, j)?;
        let mut nlock = 0;
        let mut next = Vec::with_capacity(p);
        let mut ritz = Vec::with_capacity(p);
        let mut locking = true;
        for c in 0..j {
            if next.len() == p {
                break;
            }
            let cf = column(&s, j, c);
            let y = combination(&basis.v, &cf, n);
            let mut r = combination(&basis.w, &cf, n);
            for (a, b) in r.iter_mut().zip(&y) {
                *a -= *b * theta[c];
            }
            let rn = norm(&r);
            if locking && rn <= abs_tol {
                let mut y = y;
                let ny = norm(&y);
                scale(&mut y, 1.0 / ny);
                locked_vals.push(theta[c]);
                locked_vecs.push(y);
                nlock += 1;
            } else {
                locking = false;
                next.push(r);
                ritz.push(y);
            }
        }
        if nlock > 0 {
            let rest: Vec<usize> = (nlock..j).collect();
            basis.rotate(&s, &rest, &theta[nlock..]);
        }
        if verifying && nlock > 0 {
            // The verification run starts from fresh random vectors. Locks
            // below the K-th value are eigenvalues the first pass missed;
            // the run ends at its first lock at or above the K-th value.
            let kth = kth_value(&locked_vals, k);
            let new_max = locked_vals[locked_vals.len() - nlock..]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            if new_max >= kth - abs_tol {
                break true;
            }
        }
        if !verifying && locked_vals.len() >= k {
            verifying = true;
            basis.clear();
            block = (0..p).map(|_| random_vector(&mut rng, n)).collect();
            continue;
        }

        if next.is_empty() {
            next.push(random_vector(&mut rng, n));
        } else if fixed_degree != Some(1) {
            // cut at a Ritz value well above the unconverged bottom; the
            // basis Ritz values are ascending after rotation
            let (theta, _) = hermitian_eig(&basis.g, basis.len())?;
            let jj = theta.len();
            let cut = theta[(jj / 2).max(p).min(jj - 1)];
            let lo = theta[0];
            let upper = hnorm;
            if cut > lo && upper > cut {
                // amplification of the bottom over [cut, upper] grows like
                // exp(2 d sqrt((cut - lo) / upper))
                let degree = fixed_degree.unwrap_or_else(|| {
                    (2.0 * (upper / (cut - lo)).sqrt())
                        .ceil()
                        .clamp(2.0, MAX_AUTO_DEGREE) as usize
                });
                next = ritz
                    .iter()
                    .map(|y| chebyshev_filter(h, y, degree, lo, cut, upper))
                    .collect();
                matvecs += degree * next.len();
            }
        }
        // thick restart onto the lowest Ritz vectors
        let j = basis.len();
        if j + next.len() > max_basis {
            let keep = (max_basis / 2).max(p).min(j);
            let (theta, s) = hermitian_eig(&basis.g, j)?;
            let cols: Vec<usize> = (0..keep).collect();
            basis.rotate(&s, &cols, &theta[..keep]);
        }
        block = next;
    };

    // lowest K with true residuals
    let mut idx: Vec<usize> = (0..locked_vals.len()).collect();
    idx.sort_by(|&a, &b| locked_vals[a].total_cmp(&locked_vals[b]));
    idx.truncate(k);
    let mut pairs: Vec<(f64, f64, Vec<C64>)> = idx
        .into_iter()
        .map(|i| {
            let v = std::mem::take(&mut locked_vecs[i]);
            h.apply(&v, &mut hx);
            let lam = dot(&v, &hx).re;
            let r = hx
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * lam).norm_sqr())
                .sum::<f64>()
                .sqrt();
            (lam, r, v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let got = pairs.len();
    let mut unconverged: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| p.1 > abs_tol)
        .map(|(i, _)| i)
        .collect();
    unconverged.extend(got..k);
    let (mut values, mut residuals, mut vectors) = (Vec::new(), Vec::new(), Vec::new());
    for (l, r, v) in pairs {
        values.push(l);
        residuals.push(r);
        vectors.push(v);
    }
    Ok(EigenResult {
        values,
        vectors: Some(vectors),
        residuals,
        solver: SolverKind::Lanczos,
        iterations: steps,
        seed: Some(opts.seed),
        converged: converged && unconverged.is_empty(),
        unconverged,
    })
}
