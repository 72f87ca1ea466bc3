use crate::besov::{block_norms, Band, BlockNorms, Flavor, TimeTrace};
use crate::error::{NskError, Result};
use crate::linear::StepCache;
use crate::params::PhysParams;
use crate::spectral::{DyadicDecomposition, FlowState, GridSpec};
use crate::C64;

use super::nonlinear::Nonlinearity;

/// Settings of the fixed-point iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardConfig {
    pub t_end: f64,
    /// Quadrature steps of the Duhamel integral.
    pub steps: usize,
    /// Stop when the iterate distance falls below `tol` times the iterate norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Radius of the ball the data norm is compared against.
    pub ball_radius: f64,
    /// Lebesgue exponent of the trajectory norm.
    pub p: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            t_end: 0.1,
            steps: 100,
            tol: 1e-12,
            max_iter: 40,
            ball_radius: 1.0,
            p: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PicardStatus {
    Converged,
    /// Ratio at least one for three consecutive iterations, or an iterate
    /// left the admissible set.
    Diverged,
    MaxIterations,
}

impl PicardStatus {
    pub fn name(&self) -> &'static str {
        match self {
            PicardStatus::Converged => "converged",
            PicardStatus::Diverged => "picard_divergence",
            PicardStatus::MaxIterations => "max_iterations",
        }
    }
}

/// Outcome of the iteration together with the last iterate.
#[derive(Clone, Debug)]
pub struct PicardReport {
    pub status: PicardStatus,
    pub iterations: usize,
    /// Trajectory-norm distance between successive iterates.
    pub distances: Vec<f64>,
    /// `distances[k] / distances[k - 1]`.
    pub ratios: Vec<f64>,
    pub data_norm: f64,
    pub within_ball: bool,
    /// Why the iteration stopped early, if it did.
    pub failure: Option<String>,
    pub times: Vec<f64>,
    pub states: Vec<FlowState>,
}

/// Trajectory norm of the iteration space: `L~^inf` in time at regularities
/// `3/p - 1` and `3/p - 3` plus `L^1` at `3/p + 1`, of `(a, eps grad a, m)`.
pub fn trajectory_norm(
    times: &[f64],
    states: &[FlowState],
    dyadic: &DyadicDecomposition,
    eps: f64,
    p: f64,
) -> Result<f64> {
    let mut trace = TimeTrace::new(dyadic.j_min());
    for (t, s) in times.iter().zip(states) {
        let mut acc = BlockNorms {
            j_min: dyadic.j_min(),
            values: vec![0.0; dyadic.len()],
        };
        for f in s.augmented(eps) {
            acc.add(&block_norms(&f, dyadic, Flavor::Fourier, p)?);
        }
        trace.push(*t, acc)?;
    }
    Ok(
        trace.chemin_lerner(3.0 / p - 1.0, f64::INFINITY, 1.0, Band::Full)
            + trace.chemin_lerner(3.0 / p - 3.0, f64::INFINITY, 1.0, Band::Full)
            + trace.chemin_lerner(3.0 / p + 1.0, 1.0, 1.0, Band::Full),
    )
}

fn to_states(grid: GridSpec, traj: &[Vec<[C64; 4]>]) -> Vec<FlowState> {
    traj.iter()
        .map(|u| FlowState::from_modes(grid, u))
        .collect()
}

/// Iterates `U^{k+1} = G(t) u0 + int_0^t G(t - s) F(U^k(s)) ds` from the
/// linear solution. The integral uses the exponential trapezoidal rule on a
/// uniform grid, exact for forcing linear across each step.
pub fn picard_local_solve(
    state0: &FlowState,
    params: &PhysParams,
    forcing: &dyn Nonlinearity,
    dyadic: &DyadicDecomposition,
    config: &PicardConfig,
) -> Result<PicardReport> {
    params.validate()?;
    if config.steps == 0 || !(config.t_end > 0.0) {
        return Err(NskError::InvalidParams(
            "Picard horizon and steps must be positive".into(),
        ));
    }
    let grid = *state0.grid();
    if grid != *dyadic.grid() {
        return Err(NskError::GridMismatch);
    }
    let h = config.t_end / config.steps as f64;
    let cache = StepCache::new(grid, params, h, true);
    let times: Vec<f64> = (0..=config.steps).map(|n| n as f64 * h).collect();
    let eps = params.eps;

    let mut u0 = state0.to_modes();
    // The iteration lives on the cached (2/3-truncated) modes.
    cache.truncate(&mut u0);
    let mut traj = Vec::with_capacity(times.len());
    traj.push(u0.clone());
    for n in 0..config.steps {
        let mut next = traj[n].clone();
        cache.propagate(&mut next);
        traj.push(next);
    }
    let data_norm = trajectory_norm(
        &times[..1],
        &to_states(grid, &traj[..1]),
        dyadic,
        eps,
        config.p,
    )?;

    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut status = PicardStatus::MaxIterations;
    let mut failure = None;
    let mut streak = 0;
    for _ in 0..config.max_iter {
        let forcing_values: Result<Vec<Vec<[C64; 4]>>> =
            traj.iter().map(|u| forcing.eval(grid, u)).collect();
        let f = match forcing_values {
            Ok(f) => f,
            Err(e) => {
                status = PicardStatus::Diverged;
                failure = Some(e.to_string());
                break;
            }
        };
        let mut next = Vec::with_capacity(traj.len());
        next.push(u0.clone());
        for n in 0..config.steps {
            let mut v = next[n].clone();
            cache.exp_trapezoid(&mut v, &f[n], &f[n + 1]);
            next.push(v);
        }
        let diff: Vec<Vec<[C64; 4]>> = next
            .iter()
            .zip(&traj)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| [0, 1, 2, 3].map(|k| x[k] - y[k]))
                    .collect()
            })
            .collect();
        let d = trajectory_norm(&times, &to_states(grid, &diff), dyadic, eps, config.p)?;
        let size = trajectory_norm(&times, &to_states(grid, &next), dyadic, eps, config.p)?;
        traj = next;
        if !d.is_finite() {
            status = PicardStatus::Diverged;
            failure = Some("non-finite iterate distance".into());
            break;
        }
        if let Some(&prev) = distances.last() {
            let ratio = if prev > 0.0 { d / prev } else { 0.0 };
            ratios.push(ratio);
            streak = if ratio >= 1.0 { streak + 1 } else { 0 };
        }
        distances.push(d);
        if d <= config.tol * size {
            status = PicardStatus::Converged;
            break;
        }
        if streak >= 3 {
            status = PicardStatus::Diverged;
            failure = Some("contraction ratio >= 1 for three iterations".into());
            break;
        }
    }
    Ok(PicardReport {
        status,
        iterations: distances.len(),
        distances,
        ratios,
        data_norm,
        within_ball: data_norm <= config.ball_radius,
        failure,
        states: to_states(grid, &traj),
        times,
    })
}
