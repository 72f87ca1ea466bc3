//! Nonlinear forcing, exponential time stepping, the local fixed-point
//! construction, a priori functional tracking and run monitoring.

mod etd;
mod nonlinear;
mod picard;
mod pressure;
mod run;
mod tracker;

pub use etd::Etd2;
pub use nonlinear::{
    eval_forcing_modes, eval_nonlinearity, eval_terms, NonlinearOptions, NonlinearTerms,
    Nonlinearity, NskForcing, ZeroForcing,
};
pub use picard::{picard_local_solve, trajectory_norm, PicardConfig, PicardReport, PicardStatus};
pub use pressure::{PressureHelpers, SERIES_CUTOFF};
pub use run::{
    block_data, global_run, global_run_with, DataSpec, RunOutcome, RunStatus, SolverConfig,
};
pub use tracker::{track_apriori, AprioriTracker, TrackerConfig, TrackerRow};
