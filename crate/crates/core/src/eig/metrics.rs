//! Gap statistics and spectral pairing diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingMetrics {
    pub max_gap: f64,
    /// `(b - a) / (count + 1)`: the gap of an evenly spread set of the same size.
    pub mean_gap: f64,
    pub count: usize,
}

/// Gaps between consecutive values in `[a, b]`, with `a` and `b` themselves
/// acting as boundary points. Input need not be sorted.
pub fn spacing_metrics(values: &[f64], a: f64, b: f64) -> Result<SpacingMetrics> {
    if !(a < b) {
        return Err(invalid("window", format!("need a < b, got [{a}, {b}]")));
    }
    let mut inside: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| *v >= a && *v <= b)
        .collect();
    inside.sort_by(f64::total_cmp);
    let mut prev = a;
    let mut max_gap: f64 = 0.0;
    for &v in inside.iter().chain(std::iter::once(&b)) {
        max_gap = max_gap.max(v - prev);
        prev = v;
    }
    Ok(SpacingMetrics {
        max_gap,
        mean_gap: (b - a) / (inside.len() + 1) as f64,
        count: inside.len(),
    })
}

/// `max_i |lambda_i + lambda_{n-1-i}|` over the sorted values; zero for a
/// multiset symmetric under negation.
pub fn pairing_defect(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    (0..n)
        .map(|i| (s[i] + s[n - 1 - i]).abs())
        .fold(0.0, f64::max)
}

/// Collapses consecutive runs of `group` sorted values to their mean.
/// A trailing incomplete group is dropped.
pub fn fold_groups(values: &[f64], group: usize) -> Vec<f64> {
    let g = group.max(1);
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    s.chunks_exact(g)
        .map(|c| c.iter().sum::<f64>() / g as f64)
        .collect()
}
