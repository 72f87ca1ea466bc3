use nalgebra::{Matrix4, Vector4};

use crate::error::{NskError, Result};
use crate::par;
use crate::params::PhysParams;
use crate::spectral::{FlowState, GridSpec};
use crate::C64;

use super::expm::exp_phi;
use super::mode::assemble_mode_matrix;

/// Per-mode `e^{hA}`, `h phi_1(hA)` and `h phi_2(hA)` for every mode inside
/// the 2/3-rule cube. Modes outside the cube are kept at zero.
#[derive(Clone, Debug)]
pub struct StepCache {
    grid: GridSpec,
    h: f64,
    active: Vec<u32>,
    slot: Vec<u32>,
    exp: Vec<Matrix4<C64>>,
    phi1: Vec<Matrix4<C64>>,
    phi2: Vec<Matrix4<C64>>,
}

const INACTIVE: u32 = u32::MAX;

impl StepCache {
    pub fn new(grid: GridSpec, params: &PhysParams, h: f64, viscous: bool) -> Self {
        let active: Vec<u32> = (0..grid.len())
            .filter(|&i| grid.is_dealiased(i))
            .map(|i| i as u32)
            .collect();
        let mut slot = vec![INACTIVE; grid.len()];
        for (s, &i) in active.iter().enumerate() {
            slot[i as usize] = s as u32;
        }
        let triples = par::map_slice(&active, |&i| {
            let a = assemble_mode_matrix(grid.xi(i as usize), params, viscous);
            let t = exp_phi(&(a.matrix() * C64::from(h)));
            (t.exp, t.phi1 * C64::from(h), t.phi2 * C64::from(h))
        });
        let mut exp = Vec::with_capacity(triples.len());
        let mut phi1 = Vec::with_capacity(triples.len());
        let mut phi2 = Vec::with_capacity(triples.len());
        for (e, p1, p2) in triples {
            exp.push(e);
            phi1.push(p1);
            phi2.push(p2);
        }
        Self {
            grid,
            h,
            active,
            slot,
            exp,
            phi1,
            phi2,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// Flat lattice indices of the cached modes.
    pub fn active(&self) -> &[u32] {
        &self.active
    }

    fn apply<F>(&self, u: &mut [[C64; 4]], f: F)
    where
        F: Fn(usize, usize, Vector4<C64>) -> Vector4<C64> + Sync + Send,
    {
        par::for_each_indexed(u, |i, v| {
            let s = self.slot[i];
            if s == INACTIVE {
                *v = [C64::default(); 4];
            } else {
                let out = f(i, s as usize, Vector4::from(*v));
                *v = [out[0], out[1], out[2], out[3]];
            }
        });
    }

    /// Zeroes the modes outside the cache.
    pub fn truncate(&self, u: &mut [[C64; 4]]) {
        self.apply(u, |_, _, v| v);
    }

    /// `u <- e^{hA} u`.
    pub fn propagate(&self, u: &mut [[C64; 4]]) {
        self.apply(u, |_, s, v| self.exp[s] * v);
    }

    /// `u <- e^{hA} u + h phi_1 f0 + h phi_2 (f1 - f0)`: exact for forcing
    /// linear in time across the step.
    pub fn exp_trapezoid(&self, u: &mut [[C64; 4]], f0: &[[C64; 4]], f1: &[[C64; 4]]) {
        self.apply(u, |i, s, v| {
            let a = Vector4::from(f0[i]);
            let b = Vector4::from(f1[i]);
            self.exp[s] * v + self.phi1[s] * a + self.phi2[s] * (b - a)
        });
    }

    /// `u <- e^{hA} u + h phi_1 f0`: exact for constant forcing.
    pub fn exp_euler(&self, u: &mut [[C64; 4]], f0: &[[C64; 4]]) {
        self.apply(u, |i, s, v| {
            self.exp[s] * v + self.phi1[s] * Vector4::from(f0[i])
        });
    }

    /// `u <- u + h phi_2 (f1 - f0)`.
    pub fn add_phi2(&self, u: &mut [[C64; 4]], f0: &[[C64; 4]], f1: &[[C64; 4]]) {
        self.apply(u, |i, s, v| {
            v + self.phi2[s] * (Vector4::from(f1[i]) - Vector4::from(f0[i]))
        });
    }
}

/// Samples of a linear trajectory.
#[derive(Clone, Debug)]
pub struct LinearRun {
    pub times: Vec<f64>,
    pub states: Vec<FlowState>,
}

/// Forcing of the linear system, per mode `(f_a, f_m1, f_m2, f_m3)` at time `t`.
pub type Forcing<'a> = &'a (dyn Fn(f64) -> Vec<[C64; 4]> + Sync);

/// Integrates the linear system from `u0` over `[0, t_end]` with `steps`
/// uniform steps of the exponential trapezoidal rule, storing every
/// `sample_every`-th state.
pub fn propagate_linear(
    u0: &FlowState,
    params: &PhysParams,
    viscous: bool,
    t_end: f64,
    steps: usize,
    sample_every: usize,
    forcing: Option<Forcing<'_>>,
) -> Result<LinearRun> {
    if steps == 0 || sample_every == 0 || !(t_end > 0.0) {
        return Err(NskError::InvalidParams(
            "need positive t_end, steps and sample stride".into(),
        ));
    }
    let grid = *u0.grid();
    let h = t_end / steps as f64;
    let cache = StepCache::new(grid, params, h, viscous);
    let mut u = u0.to_modes();
    let mut times = vec![0.0];
    let mut states = vec![FlowState::from_modes(grid, &u)];
    let mut f_prev = forcing.map(|f| f(0.0));
    for n in 1..=steps {
        let t = n as f64 * h;
        match (&forcing, &f_prev) {
            (Some(f), Some(fp)) => {
                let f_next = f(t);
                cache.exp_trapezoid(&mut u, fp, &f_next);
                f_prev = Some(f_next);
            }
            _ => cache.propagate(&mut u),
        }
        if n % sample_every == 0 || n == steps {
            times.push(t);
            states.push(FlowState::from_modes(grid, &u));
        }
    }
    Ok(LinearRun { times, states })
}
