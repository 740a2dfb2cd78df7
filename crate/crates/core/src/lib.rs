//! Spectral laboratory for magnetic Dirac operators on the flat plane.
//!
//! The crate is organised bottom-up:
//!
//! * [`clifford`] fixes the 2×2 representation of the Clifford module,
//! * [`fields`] provides magnetic, electric and mass potentials,
//! * [`identities`] checks the squared-operator identities pointwise with
//!   finite-difference stencils on closed-form spinor fields,
//! * [`lattice`] assembles gauge-covariant sparse Hermitian operators,
//! * [`eig`] holds the eigensolvers and the quasimode machinery,
//! * [`sectors`] implements the angular-momentum reduction of the
//!   rotation-invariant field,
//! * [`experiments`] and [`config`] drive batch runs from TOML files.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clifford;
pub mod config;
pub mod eig;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod identities;
pub mod lattice;
pub mod par;
pub mod report;
pub mod sectors;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// A point of the plane.
pub type Point = [f64; 2];
