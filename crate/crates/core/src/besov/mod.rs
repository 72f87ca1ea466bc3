//! Homogeneous Besov and Fourier-Besov norms on the lattice, their
//! time-space variants, the Bony decomposition and numerical probes of the
//! product, composition and Bernstein bounds.

mod bony;
mod lemmas;
mod norms;
mod report;
mod trace;

pub use bony::{bony_residual, paraproduct, remainder};
pub use lemmas::{
    bernstein_ratio, composition_ratio, interpolation_gap, ProductBound, ProductSample,
};
pub use norms::{
    besov_norm, block_norms, conjugate, fourier_besov_norm, fourier_lebesgue_norm,
    physical_lebesgue_norm, Band, BesovNorm, BlockNorms, Flavor,
};
pub use report::NormReportRow;
pub use trace::TimeTrace;
