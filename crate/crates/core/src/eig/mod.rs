//! Eigensolvers and spectral diagnostics.
//!
//! * [`tridiag_eigs`]: Sturm-sequence bisection with inverse iteration,
//! * [`dense_eigs`]: cyclic complex Jacobi for small Hermitian matrices,
//! * [`lanczos_lowest`]: block Lanczos with full reorthogonalization, thick
//!   restarts and locking for the low end of sparse Hermitian operators,
//! * [`quasimode`] / [`weyl_residual`]: approximate eigenfunctions,
//! * [`spacing_metrics`]: gap statistics of a point set in a window.

mod dense;
mod hermitian;
mod lanczos;
mod metrics;
mod quasimode;
mod tridiag;
pub(crate) mod vecops;

pub use dense::{dense_eigs, DENSE_DIM_CAP};
pub use hermitian::{hermitian_eig, tridiagonal_ql};
pub use lanczos::{lanczos_lowest, lanczos_lowest_with, LanczosOptions, DEFAULT_SEED};
pub use metrics::{fold_groups, pairing_defect, spacing_metrics, SpacingMetrics};
pub use quasimode::{
    cutoff, cutoff_derivative, quasimode, weyl_residual, QuasimodeSpec, WeylResidual,
};
pub use tridiag::{sturm_count, tridiag_eigs, Selection, SymTridiag};

use serde::{Deserialize, Serialize};

use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    SturmBisection,
    Jacobi,
    Lanczos,
}

/// Eigenvalues in ascending order with per-pair residuals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenResult {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub vectors: Option<Vec<Vec<C64>>>,
    /// `|H v - lambda v|` when vectors were computed, otherwise the
    /// bisection half-width.
    pub residuals: Vec<f64>,
    pub solver: SolverKind,
    pub iterations: usize,
    pub seed: Option<u64>,
    pub converged: bool,
    /// Indices (into `values`) whose residual exceeds the requested tolerance.
    pub unconverged: Vec<usize>,
}

impl EigenResult {
    /// `[lambda - r, lambda + r]`, each containing a point of the spectrum.
    pub fn certified_intervals(&self) -> Vec<[f64; 2]> {
        self.values
            .iter()
            .zip(&self.residuals)
            .map(|(&l, &r)| [l - r, l + r])
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
