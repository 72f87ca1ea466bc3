use crate::error::{NskError, Result};
use crate::linear::StepCache;
use crate::params::PhysParams;
use crate::spectral::{FlowState, GridSpec};
use crate::C64;

use super::nonlinear::Nonlinearity;

/// Second-order exponential time differencing with a cached per-mode
/// propagator:
///
/// ```text
/// u*      = e^{hA} u + h phi_1(hA) F(u)
/// u_{n+1} = u* + h phi_2(hA) (F(u*) - F(u))
/// ```
#[derive(Clone, Debug)]
pub struct Etd2 {
    cache: StepCache,
}

impl Etd2 {
    pub fn new(grid: GridSpec, params: &PhysParams, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(NskError::InvalidParams(format!(
                "step size must be positive, got {h}"
            )));
        }
        Ok(Self {
            cache: StepCache::new(grid, params, h, true),
        })
    }

    pub fn from_cache(cache: StepCache) -> Self {
        Self { cache }
    }

    pub fn step_size(&self) -> f64 {
        self.cache.step()
    }

    pub fn grid(&self) -> &GridSpec {
        self.cache.grid()
    }

    pub fn cache(&self) -> &StepCache {
        &self.cache
    }

    /// Advances per-mode data by one step. `f0` is `F(u)` if already known.
    pub fn step_modes(
        &self,
        u: &mut Vec<[C64; 4]>,
        forcing: &dyn Nonlinearity,
        f0: Option<Vec<[C64; 4]>>,
    ) -> Result<()> {
        let grid = *self.cache.grid();
        if u.len() != grid.len() {
            return Err(NskError::GridMismatch);
        }
        let f0 = match f0 {
            Some(f) => f,
            None => forcing.eval(grid, u)?,
        };
        let mut star = u.clone();
        self.cache.exp_euler(&mut star, &f0);
        let f1 = forcing.eval(grid, &star)?;
        self.cache.add_phi2(&mut star, &f0, &f1);
        *u = star;
        Ok(())
    }

    pub fn step(&self, state: &FlowState, forcing: &dyn Nonlinearity) -> Result<FlowState> {
        if state.grid() != self.cache.grid() {
            return Err(NskError::GridMismatch);
        }
        let mut u = state.to_modes();
        self.step_modes(&mut u, forcing, None)?;
        Ok(FlowState::from_modes(*state.grid(), &u))
    }
}
