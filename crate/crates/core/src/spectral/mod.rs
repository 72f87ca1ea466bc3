//! Periodic box discretisation: lattice, transforms, spectral fields, the
//! dyadic partition of frequency space and field snapshots.

mod dyadic;
mod fft;
mod field;
mod grid;
mod snapshot;

pub use dyadic::{chi, phi0, Block, DyadicDecomposition, DEFAULT_J_MIN};
pub use fft::Fft3;
pub use field::{dealias_product, FlowState, SpectralField, VectorField, HERMITIAN_TOL};
pub(crate) use field::{
    dealiased_indices, forward_many_truncated, inverse_many, inverse_many_truncated,
};
pub use grid::{GridSpec, DEFAULT_PERIOD};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, SnapshotFormat};
