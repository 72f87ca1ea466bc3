//! Spectral solver and verification toolkit for the rotating compressible
//! Navier-Stokes-Korteweg system on a periodic box.
//!
//! The crate is split by role:
//!
//! * [`spectral`]: lattice, transforms, fields, dyadic partition, snapshots.
//! * [`besov`]: homogeneous (Fourier-)Besov norms, time-space norms, Bony
//!   decomposition and numerical checks of the product and composition bounds.
//! * [`linear`]: the per-mode linearised operator, its exponential, the
//!   Lyapunov functional and dispersive measurements.
//! * [`solver`]: nonlinear terms, exponential time stepping, Picard iteration,
//!   a-priori functionals and global runs.
//! * [`harness`]: configuration, experiments and result files.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is on and plain iterators otherwise.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod error;
pub mod harness;
pub mod linear;
pub mod par;
pub mod params;
pub mod solver;
pub mod spectral;

pub use error::{NskError, Result};
pub use params::PhysParams;

/// Complex scalar used for all spectral coefficients.
pub type C64 = num_complex::Complex64;
