//! Exact per-mode solution of the linearised rotating system: the 4x4
//! generator, its exponential and phi-functions, the Lyapunov functional,
//! decay-rate verification, smoothing exponents and dispersive estimates.

mod decay;
mod dispersion;
mod energy;
mod expm;
mod lyapunov;
mod mode;
mod propagate;
mod quad;

pub use decay::{
    integrated_rate, integrated_rate_slope, polar_directions, slowest_rate, verify_mode_decay,
    DecaySample,
};
pub use dispersion::{
    inviscid_params, inviscid_propagate, measure_strichartz, strichartz_datum, InviscidPropagator,
    StrichartzReport, StrichartzSetup,
};
pub use energy::{
    block_time_gain, energy_estimate_ratio, verify_energy_estimate, EnergyEstimate,
    EnergyExponentReport, EnergyExponentSetup,
};
pub use expm::{exp_phi, expm, PhiTriple};
pub use lyapunov::{
    decay_rate_bound, lyapunov_ratio, lyapunov_reference, lyapunov_sq, theta, LyapunovReport,
};
pub use mode::{assemble_mode_matrix, mode_energy, mode_exponential, ModeMatrix};
pub use propagate::{propagate_linear, Forcing, LinearRun, StepCache};
pub use quad::{fit_slope, gauss_legendre, graded_segments, segment_times, time_lr};

/// One row of a decay, smoothing or Strichartz report. `coord` is `|xi|` or
/// the block index `j`; `r` is `NaN` where no time exponent applies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportRow {
    pub coord: f64,
    pub omega: f64,
    pub eps: f64,
    pub r: f64,
    pub measured: f64,
    pub bound: f64,
    pub margin: f64,
}

impl ReportRow {
    pub const CSV_HEADER: &'static str = "coord,omega,eps,r,measured,bound,margin";

    pub fn csv(&self) -> String {
        let f = |x: f64| {
            if x.is_nan() {
                String::new()
            } else {
                format!("{x:.12e}")
            }
        };
        format!(
            "{},{},{},{},{},{},{}",
            f(self.coord),
            f(self.omega),
            f(self.eps),
            f(self.r),
            f(self.measured),
            f(self.bound),
            f(self.margin)
        )
    }
}
