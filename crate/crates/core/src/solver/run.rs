use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::besov::{block_norms, Flavor};
use crate::error::{NskError, Result};
use crate::params::PhysParams;
use crate::spectral::{DyadicDecomposition, FlowState, SpectralField};
use crate::C64;

use super::etd::Etd2;
use super::nonlinear::{NonlinearOptions, NskForcing};
use super::tracker::{AprioriTracker, TrackerConfig, TrackerRow};

/// Settings of a time-marching run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub h: f64,
    pub t_end: f64,
    /// Tracker sample stride in steps.
    pub track_every: usize,
    pub tracker: TrackerConfig,
    /// Growth threshold: the run is bounded while `E_p <= g_bound E_{p,0}`.
    pub g_bound: f64,
    pub options: NonlinearOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            t_end: 1.0,
            track_every: 10,
            tracker: TrackerConfig::default(),
            g_bound: 4.0,
            options: NonlinearOptions::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.t_end > 0.0 && self.h <= self.t_end) {
            return Err(NskError::InvalidParams(format!(
                "need 0 < h <= t_end, got h = {}, t_end = {}",
                self.h, self.t_end
            )));
        }
        if self.track_every == 0 {
            return Err(NskError::InvalidParams(
                "track_every must be positive".into(),
            ));
        }
        if !(self.g_bound > 1.0) {
            return Err(NskError::InvalidParams(format!(
                "g_bound = {} must exceed 1",
                self.g_bound
            )));
        }
        self.tracker.validate()
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.h).round().max(1.0) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Bounded,
    NormGrowth,
    InadmissibleDensity,
    PicardDivergence,
}

impl RunStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RunStatus::Bounded => "bounded",
            RunStatus::NormGrowth => "norm_growth",
            RunStatus::InadmissibleDensity => "inadmissible_density",
            RunStatus::PicardDivergence => "picard_divergence",
        }
    }

    /// Small integer code used in phase-diagram tables.
    pub fn code(&self) -> u8 {
        match self {
            RunStatus::Bounded => 0,
            RunStatus::NormGrowth => 1,
            RunStatus::InadmissibleDensity => 2,
            RunStatus::PicardDivergence => 3,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::Bounded,
            Self::NormGrowth,
            Self::InadmissibleDensity,
            Self::PicardDivergence,
        ]
        .into_iter()
        .find(|v| v.name() == s)
    }
}

/// Result of a run. Monitor trips end the run with a status; they are not
/// errors.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub t_final: f64,
    pub steps: usize,
    pub e_p0: f64,
    pub history: Vec<TrackerRow>,
    pub mid_band_max: f64,
    pub eps_a_sup: f64,
    pub window_violation: Option<f64>,
    /// Detail of the monitor that stopped the run.
    pub note: Option<String>,
    pub final_state: FlowState,
}

/// Marches `data` with ETD2 until `t_end` or until a monitor trips.
/// `observer` sees every state after each step.
pub fn global_run_with(
    data: &FlowState,
    params: &PhysParams,
    dyadic: &DyadicDecomposition,
    config: &SolverConfig,
    observer: &mut dyn FnMut(usize, f64, &FlowState),
) -> Result<RunOutcome> {
    params.validate()?;
    config.validate()?;
    let grid = *data.grid();
    let stepper = Etd2::new(grid, params, config.h)?;
    let forcing = NskForcing {
        params: *params,
        options: config.options,
    };
    let mut tracker = AprioriTracker::new(config.tracker, *params, dyadic.clone())?;
    let mut u = data.to_modes();
    stepper.cache().truncate(&mut u);
    let mut state = FlowState::from_modes(grid, &u);
    tracker.push(0.0, &state)?;
    observer(0, 0.0, &state);
    let e_p0 = tracker.e_p0().unwrap_or(0.0);
    let total = config.steps();
    let mut status = RunStatus::Bounded;
    let mut note = None;
    let mut t = 0.0;
    let mut done = 0;
    for n in 1..=total {
        let t_next = n as f64 * config.h;
        match stepper.step_modes(&mut u, &forcing, None) {
            Ok(()) => {}
            Err(NskError::InadmissibleDensity { min_density, .. }) => {
                status = RunStatus::InadmissibleDensity;
                note = Some(format!("density {min_density:.3e} at t = {t:.6}"));
                break;
            }
            Err(NskError::NonFinite(what)) => {
                status = RunStatus::NormGrowth;
                note = Some(format!("non-finite {what} at t = {t:.6}"));
                break;
            }
            Err(e) => return Err(e),
        }
        t = t_next;
        done = n;
        state = FlowState::from_modes(grid, &u);
        observer(n, t, &state);
        if n % config.track_every == 0 || n == total {
            let row = tracker.push(t, &state)?;
            if !(row.min_density > config.options.density_floor) {
                status = RunStatus::InadmissibleDensity;
                note = Some(format!("density {:.3e} at t = {t:.6}", row.min_density));
                break;
            }
            if !(row.e_p <= config.g_bound * e_p0) {
                status = RunStatus::NormGrowth;
                note = Some(format!(
                    "E_p = {:.4e} > {} E_p0 at t = {t:.6}",
                    row.e_p, config.g_bound
                ));
                break;
            }
        }
    }
    Ok(RunOutcome {
        status,
        t_final: t,
        steps: done,
        e_p0,
        mid_band_max: tracker.mid_band_max(),
        eps_a_sup: tracker.eps_a_sup(),
        window_violation: tracker.first_window_violation(),
        history: tracker.rows().to_vec(),
        note,
        final_state: state,
    })
}

pub fn global_run(
    data: &FlowState,
    params: &PhysParams,
    dyadic: &DyadicDecomposition,
    config: &SolverConfig,
) -> Result<RunOutcome> {
    global_run_with(data, params, dyadic, config, &mut |_, _, _| {})
}

/// Band-limited random data with prescribed Fourier block norms.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSpec {
    /// `(j, norm)` of the density blocks.
    pub a_blocks: Vec<(i32, f64)>,
    /// `(j, norm)` of each momentum component's blocks.
    pub m_blocks: Vec<(i32, f64)>,
    /// Lebesgue exponent of the block norm.
    pub p: f64,
    pub seed: u64,
}

fn random_field(dyadic: &DyadicDecomposition, rng: &mut ChaCha8Rng) -> SpectralField {
    let grid = *dyadic.grid();
    let mut f = SpectralField::zeros(grid);
    for (i, c) in f.coeffs_mut().iter_mut().enumerate() {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if grid.is_dealiased(i) {
            *c = z;
        }
    }
    f.symmetrize();
    f
}

fn shaped(
    dyadic: &DyadicDecomposition,
    blocks: &[(i32, f64)],
    p: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SpectralField> {
    let mut out = SpectralField::zeros(*dyadic.grid());
    for &(j, amp) in blocks {
        if dyadic.block(j).is_none() {
            return Err(NskError::Resolution(format!(
                "block {j} outside the resolved range {}..={}",
                dyadic.j_min(),
                dyadic.j_max()
            )));
        }
        let piece = dyadic.project(&random_field(dyadic, rng), j)?;
        let norms = block_norms(&piece, dyadic, Flavor::Fourier, p)?;
        let own = norms.values[(j - dyadic.j_min()) as usize];
        if own > 0.0 {
            out.axpy(amp / own, &piece);
        }
    }
    Ok(out)
}

/// Draws data from `spec`; deterministic in the seed.
pub fn block_data(dyadic: &DyadicDecomposition, spec: &DataSpec) -> Result<FlowState> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut state = FlowState::zeros(*dyadic.grid());
    state.a = shaped(dyadic, &spec.a_blocks, spec.p, &mut rng)?;
    for c in 0..3 {
        state.m.comps[c] = shaped(dyadic, &spec.m_blocks, spec.p, &mut rng)?;
    }
    Ok(state)
}
