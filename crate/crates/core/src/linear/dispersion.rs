use nalgebra::{Matrix4, Vector4};

use crate::besov::physical_lebesgue_norm;
use crate::error::{NskError, Result};
use crate::par;
use crate::params::PhysParams;
use crate::spectral::{inverse_many, FlowState, GridSpec, SpectralField};
use crate::C64;

use super::mode::assemble_mode_matrix;
use super::quad::{fit_slope, graded_segments, segment_times, time_lr};
use super::ReportRow;

/// Parameters of the rotating acoustic system: no viscosity, no capillarity.
pub fn inviscid_params(omega: f64, eps: f64) -> PhysParams {
    PhysParams {
        mu: 0.0,
        lambda: 0.0,
        kappa: 0.0,
        eps,
        omega,
        ..PhysParams::default()
    }
}

/// Exact evolution of the inviscid system by unitary diagonalisation of
/// each occupied mode.
#[derive(Clone, Debug)]
pub struct InviscidPropagator {
    grid: GridSpec,
    modes: Vec<u32>,
    freqs: Vec<[f64; 4]>,
    vecs: Vec<Matrix4<C64>>,
    coeffs: Vec<Vector4<C64>>,
}

impl InviscidPropagator {
    pub fn new(state0: &FlowState, params: &PhysParams) -> Self {
        let grid = *state0.grid();
        let u0 = state0.to_modes();
        let modes: Vec<u32> = (0..grid.len())
            .filter(|&i| u0[i].iter().any(|z| z.norm_sqr() > 0.0))
            .map(|i| i as u32)
            .collect();
        let parts = par::map_slice(&modes, |&i| {
            let m = assemble_mode_matrix(grid.xi(i as usize), params, false);
            let (w, v) = m.inviscid_modes();
            let s = m.energy_weight();
            let u = u0[i as usize];
            let su = Vector4::new(u[0] * s, u[1], u[2], u[3]);
            (w, v, v.adjoint() * su, s)
        });
        let mut freqs = Vec::with_capacity(parts.len());
        let mut vecs = Vec::with_capacity(parts.len());
        let mut coeffs = Vec::with_capacity(parts.len());
        for (w, v, c, s) in parts {
            freqs.push(w);
            // Fold `S^{-1}` into the eigenvectors.
            let mut v = v;
            for col in 0..4 {
                v[(0, col)] /= s;
            }
            vecs.push(v);
            coeffs.push(c);
        }
        Self {
            grid,
            modes,
            freqs,
            vecs,
            coeffs,
        }
    }

    /// Number of occupied modes.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// State at time `t` (any sign).
    pub fn at(&self, t: f64) -> FlowState {
        let vals = par::map_range(self.modes.len(), |k| {
            let w = self.freqs[k];
            let c = self.coeffs[k];
            let phased = Vector4::from_fn(|r, _| c[r] * C64::from_polar(1.0, -w[r] * t));
            self.vecs[k] * phased
        });
        let mut out = vec![[C64::default(); 4]; self.grid.len()];
        for (&i, v) in self.modes.iter().zip(vals) {
            out[i as usize] = [v[0], v[1], v[2], v[3]];
        }
        FlowState::from_modes(self.grid, &out)
    }
}

/// States of the inviscid system at the given times.
pub fn inviscid_propagate(
    state0: &FlowState,
    params: &PhysParams,
    times: &[f64],
) -> Vec<FlowState> {
    let prop = InviscidPropagator::new(state0, params);
    times.iter().map(|&t| prop.at(t)).collect()
}

/// Divergence-free velocity packet centred at the origin with zero density:
/// `v^ = i (xi x e) A(|k|) / |xi|`, `A` a `sin^2` bump on the integer shell
/// `lo <= |k| <= hi`, and `e` a fixed oblique unit vector.
pub fn strichartz_datum(grid: GridSpec, lo: f64, hi: f64) -> FlowState {
    let e = [1.0, 2.0, 3.0].map(|x: f64| x / 14f64.sqrt());
    let bump = |r: f64| {
        if r < lo || r > hi {
            0.0
        } else {
            (std::f64::consts::PI * (r - lo) / (hi - lo)).sin().powi(2)
        }
    };
    let l3 = grid.period().powi(3);
    let comp = |c: usize| {
        SpectralField::from_modes(grid, |k| {
            if k.iter().any(|&x| x.unsigned_abs() as usize == grid.n() / 2) {
                return C64::default();
            }
            let kn = k.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
            let amp = bump(kn);
            if amp == 0.0 {
                return C64::default();
            }
            let xi = k.map(|x| x as f64 * grid.dk());
            let cross = [
                xi[1] * e[2] - xi[2] * e[1],
                xi[2] * e[0] - xi[0] * e[2],
                xi[0] * e[1] - xi[1] * e[0],
            ];
            C64::new(0.0, cross[c] * amp * l3 / (kn * grid.dk()))
        })
    };
    let mut state = FlowState::zeros(grid);
    state.m.comps = [comp(0), comp(1), comp(2)];
    state
}

/// Sweep of the dispersive estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct StrichartzSetup {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub eps: f64,
    pub omegas: Vec<f64>,
    pub horizon: f64,
    pub steps_per_segment: usize,
    /// First step in units of `1/|Omega|`.
    pub first_step: f64,
}

impl Default for StrichartzSetup {
    fn default() -> Self {
        Self {
            p: 2.0,
            q: 6.0,
            r: 3.0,
            eps: 1.0 / 256.0,
            omegas: (4..=9).map(|k| 2f64.powi(k)).collect(),
            horizon: 8.0,
            steps_per_segment: 64,
            first_step: 0.125,
        }
    }
}

impl StrichartzSetup {
    /// Exponent constraints `2 <= p <= q < inf`, `0 <= 1/r <= 1/p - 1/q`.
    pub fn validate(&self) -> Result<()> {
        let (p, q, r) = (self.p, self.q, self.r);
        if !(2.0 <= p) {
            return Err(NskError::Hypothesis(format!("need p >= 2, got p = {p}")));
        }
        if !(p <= q) || !q.is_finite() {
            return Err(NskError::Hypothesis(format!(
                "need p <= q < inf, got p = {p}, q = {q}"
            )));
        }
        if !(r >= 1.0) || 1.0 / r > 1.0 / p - 1.0 / q + 1e-15 {
            return Err(NskError::Hypothesis(format!(
                "need 1/r <= 1/p - 1/q, got 1/r = {}, 1/p - 1/q = {}",
                1.0 / r,
                1.0 / p - 1.0 / q
            )));
        }
        if self.omegas.len() < 2 || self.omegas.iter().any(|w| !(w.abs() > 0.0)) {
            return Err(NskError::Hypothesis(
                "need at least two nonzero rotation rates".into(),
            ));
        }
        if !(self.eps > 0.0 && self.horizon > 0.0 && self.first_step > 0.0) {
            return Err(NskError::InvalidParams(
                "eps, horizon and first step must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-rate norms and the fitted slope of `log norm` against `log |Omega|`.
#[derive(Clone, Debug, PartialEq)]
pub struct StrichartzReport {
    pub rows: Vec<ReportRow>,
    pub slope: f64,
    pub target: f64,
    /// Lowest occupied `|xi|` of the datum.
    pub datum_min_xi: f64,
}

/// `|| U(t) u0 ||_{L^r(0,T; L^q)}` for each rate in the sweep, with the
/// spatial norm summed over the four components and the time integral taken
/// by trapezoid on a graded grid. Rows carry the norm as `measured`, the
/// `|Omega|^{-1/r}` law through the first point as `bound`, and
/// `bound / measured - 1` as `margin`.
pub fn measure_strichartz(setup: &StrichartzSetup, datum: &FlowState) -> Result<StrichartzReport> {
    setup.validate()?;
    let grid = *datum.grid();
    let u0 = datum.to_modes();
    let min_xi = (0..grid.len())
        .filter(|&i| u0[i].iter().any(|z| z.norm_sqr() > 0.0))
        .map(|i| grid.xi_norm(i))
        .fold(f64::INFINITY, f64::min);
    if !min_xi.is_finite() {
        return Err(NskError::Hypothesis("datum is zero".into()));
    }
    for &w in &setup.omegas {
        // Every block meeting the support must satisfy 2^j > |Omega| eps.
        if 3.0 / 8.0 * min_xi <= w.abs() * setup.eps {
            return Err(NskError::Hypothesis(format!(
                "datum reaches |xi| = {min_xi}, below the high band for |Omega| eps = {}",
                w.abs() * setup.eps
            )));
        }
    }
    let mut norms = Vec::with_capacity(setup.omegas.len());
    for &w in &setup.omegas {
        let params = inviscid_params(w, setup.eps);
        let prop = InviscidPropagator::new(datum, &params);
        let times = segment_times(&graded_segments(
            setup.first_step / w.abs(),
            setup.steps_per_segment,
            setup.horizon,
        ));
        let series: Vec<f64> = times
            .iter()
            .map(|&t| {
                let s = prop.at(t);
                let comps = s.components();
                inverse_many(&comps)
                    .iter()
                    .map(|v| physical_lebesgue_norm(v, &grid, setup.q))
                    .sum()
            })
            .collect();
        norms.push(time_lr(&times, &series, setup.r));
    }
    let (w0, n0) = (setup.omegas[0].abs(), norms[0]);
    let rows = setup
        .omegas
        .iter()
        .zip(&norms)
        .map(|(&w, &n)| {
            let bound = n0 * (w.abs() / w0).powf(-1.0 / setup.r);
            ReportRow {
                coord: min_xi,
                omega: w,
                eps: setup.eps,
                r: setup.r,
                measured: n,
                bound,
                margin: bound / n - 1.0,
            }
        })
        .collect();
    let lx: Vec<f64> = setup.omegas.iter().map(|w| w.abs().ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    Ok(StrichartzReport {
        rows,
        slope: fit_slope(&lx, &ly),
        target: -1.0 / setup.r,
        datum_min_xi: min_xi,
    })
}
