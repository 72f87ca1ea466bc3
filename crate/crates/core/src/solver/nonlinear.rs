use crate::error::{NskError, Result};
use crate::params::PhysParams;
use crate::spectral::{
    dealiased_indices, forward_many_truncated, inverse_many_truncated, FlowState, GridSpec,
    SpectralField, VectorField,
};
use crate::C64;

use super::pressure::PressureHelpers;

/// Switches for reduced models of the nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearOptions {
    /// Replace `I(b)` by `b` and `G(b)` by `G''(0) b^2 / 2`.
    pub frozen_coefficients: bool,
    /// Keep the three capillary terms.
    pub capillary: bool,
    /// Smallest admissible density `1 + eps a`.
    pub density_floor: f64,
}

impl Default for NonlinearOptions {
    fn default() -> Self {
        Self {
            frozen_coefficients: false,
            capillary: true,
            density_floor: 0.0,
        }
    }
}

/// The seven terms of the momentum forcing, each a spectral vector field:
///
/// ```text
/// advection        div((I(eps a) - 1) m (x) m)
/// viscous_lap      -mu Lap(I(eps a) m)
/// viscous_grad_div -(mu + lambda) grad div(I(eps a) m)
/// pressure         -(1/eps^2) grad G(eps a)
/// cap_a_lap        kappa eps^2 grad(a Lap a)
/// cap_grad_sq      (kappa eps^2 / 2) grad |grad a|^2
/// cap_tensor       -kappa eps^2 div(grad a (x) grad a)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearTerms {
    pub advection: VectorField,
    pub viscous_lap: VectorField,
    pub viscous_grad_div: VectorField,
    pub pressure: VectorField,
    pub cap_a_lap: VectorField,
    pub cap_grad_sq: VectorField,
    pub cap_tensor: VectorField,
}

impl NonlinearTerms {
    pub const NAMES: [&'static str; 7] = [
        "advection",
        "viscous_lap",
        "viscous_grad_div",
        "pressure",
        "cap_a_lap",
        "cap_grad_sq",
        "cap_tensor",
    ];

    pub fn terms(&self) -> [&VectorField; 7] {
        [
            &self.advection,
            &self.viscous_lap,
            &self.viscous_grad_div,
            &self.pressure,
            &self.cap_a_lap,
            &self.cap_grad_sq,
            &self.cap_tensor,
        ]
    }

    pub fn total(&self) -> VectorField {
        let mut out = self.advection.clone();
        for t in &self.terms()[1..] {
            out.axpy(1.0, t);
        }
        out
    }
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn pair_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    PAIRS.iter().position(|&p| p == (i, j)).expect("valid pair")
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// `sum_j i xi_j T_ij` for a symmetric tensor stored by `PAIRS`.
fn tensor_divergence(grid: GridSpec, t: &[SpectralField]) -> VectorField {
    let comp = |i: usize| {
        let mut out = SpectralField::zeros(grid);
        for j in 0..3 {
            out.axpy(1.0, &t[pair_index(i, j)].derivative(j));
        }
        out
    };
    VectorField {
        comps: [comp(0), comp(1), comp(2)],
    }
}

fn gradient_scaled(f: &SpectralField, s: f64) -> VectorField {
    let mut g = f.gradient();
    g.scale(s);
    g
}

/// Truncated spectra of every product entering the forcing.
struct ProductStage {
    /// `G(eps a)`
    g: SpectralField,
    /// `m_i m_j` by `PAIRS`
    mm: Vec<SpectralField>,
    /// `I(eps a) m_i m_j` by `PAIRS`
    imm: Vec<SpectralField>,
    /// `I(eps a) m_i`
    im: Vec<SpectralField>,
    /// `a Lap a`, `|grad a|^2` and `d_i a d_j a` by `PAIRS`; empty without capillarity.
    cap: Vec<SpectralField>,
}

/// Transform stage shared by the per-term and the fused assembly. Products are
/// formed in physical space from 2/3-truncated factors and truncated again, so
/// every binary product equals the truncated convolution of its factors;
/// `I(eps a)` and `G(eps a)` are evaluated pointwise and truncated once.
fn product_stage(
    state: &FlowState,
    params: &PhysParams,
    opts: &NonlinearOptions,
) -> Result<ProductStage> {
    let grid = *state.grid();
    let eps = params.eps;
    let helpers = PressureHelpers::new(params.gamma);
    let a = &state.a;
    let m = &state.m.comps;
    let mut inputs: Vec<SpectralField> = vec![a.clone(), m[0].clone(), m[1].clone(), m[2].clone()];
    if opts.capillary {
        inputs.extend(a.gradient().comps);
        inputs.push(a.laplacian());
    }
    let refs: Vec<&SpectralField> = inputs.iter().collect();
    let phys = inverse_many_truncated(&refs);
    let (pa, pm) = (&phys[0], &phys[1..4]);

    let mut min_density = f64::INFINITY;
    for &v in pa.iter() {
        if !v.is_finite() {
            return Err(NskError::NonFinite("density fluctuation".into()));
        }
        min_density = min_density.min(1.0 + eps * v);
    }
    if !(min_density > opts.density_floor) {
        return Err(NskError::InadmissibleDensity {
            min_density,
            time: f64::NAN,
        });
    }
    if pm.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(NskError::NonFinite("momentum".into()));
    }

    let (ivals, gvals): (Vec<f64>, Vec<f64>) = pa
        .iter()
        .map(|&v| {
            let b = eps * v;
            if opts.frozen_coefficients {
                (b, 0.5 * helpers.g2() * b * b)
            } else {
                (helpers.i(b), helpers.g(b))
            }
        })
        .unzip();
    let mut first: Vec<Vec<f64>> = vec![ivals, gvals];
    first.extend(PAIRS.iter().map(|&(i, j)| mul(&pm[i], &pm[j])));
    let mut first = forward_many_truncated(grid, &first).into_iter();
    let i_hat = first.next().expect("I");
    let g_hat = first.next().expect("G");
    let mm: Vec<SpectralField> = first.collect();

    let mut back: Vec<&SpectralField> = vec![&i_hat];
    back.extend(mm.iter());
    let back = inverse_many_truncated(&back);
    let (pi, pmm) = (&back[0], &back[1..7]);

    let mut second: Vec<Vec<f64>> = pmm.iter().map(|p| mul(pi, p)).collect();
    second.extend(pm.iter().map(|p| mul(pi, p)));
    if opts.capillary {
        let (pga, plap) = (&phys[4..7], &phys[7]);
        second.push(mul(pa, plap));
        second.push(pga.iter().fold(vec![0.0; grid.len()], |acc, g| {
            acc.iter().zip(g).map(|(s, x)| s + x * x).collect()
        }));
        second.extend(PAIRS.iter().map(|&(i, j)| mul(&pga[i], &pga[j])));
    }
    let mut second = forward_many_truncated(grid, &second);
    let cap = second.split_off(9);
    let im = second.split_off(6);
    Ok(ProductStage {
        g: g_hat,
        mm,
        imm: second,
        im,
        cap,
    })
}

/// Evaluates the seven forcing terms separately.
pub fn eval_terms(
    state: &FlowState,
    params: &PhysParams,
    opts: &NonlinearOptions,
) -> Result<NonlinearTerms> {
    let grid = *state.grid();
    let PhysParams {
        mu,
        lambda,
        kappa,
        eps,
        ..
    } = *params;
    let st = product_stage(state, params, opts)?;

    let adv_tensor: Vec<SpectralField> = st.imm.iter().zip(&st.mm).map(|(x, y)| x - y).collect();
    let advection = tensor_divergence(grid, &adv_tensor);

    let im = VectorField {
        comps: [st.im[0].clone(), st.im[1].clone(), st.im[2].clone()],
    };
    let viscous_lap = VectorField {
        comps: [0, 1, 2].map(|c| {
            im.comps[c].multiplier(|i| {
                let x = grid.xi_norm(i);
                C64::from(mu * x * x)
            })
        }),
    };
    let viscous_grad_div = gradient_scaled(&im.divergence(), -(mu + lambda));
    let pressure = gradient_scaled(&st.g, -1.0 / (eps * eps));

    let (cap_a_lap, cap_grad_sq, cap_tensor) = if opts.capillary {
        let c = kappa * eps * eps;
        let mut tensor = tensor_divergence(grid, &st.cap[2..8]);
        tensor.scale(-c);
        (
            gradient_scaled(&st.cap[0], c),
            gradient_scaled(&st.cap[1], 0.5 * c),
            tensor,
        )
    } else {
        (
            VectorField::zeros(grid),
            VectorField::zeros(grid),
            VectorField::zeros(grid),
        )
    };

    Ok(NonlinearTerms {
        advection,
        viscous_lap,
        viscous_grad_div,
        pressure,
        cap_a_lap,
        cap_grad_sq,
        cap_tensor,
    })
}

/// Per-mode forcing `(0, N_eps[a, m])` assembled in one pass:
/// `N_i = sum_j i xi_j T_ij + i xi_i phi + mu |xi|^2 (I m)_i` with
/// `T_ij = (I m m)_ij - (m m)_ij - kappa eps^2 (d_i a d_j a)` and
/// `phi = -(mu + lambda) div(I m) - G/eps^2 + kappa eps^2 (a Lap a + |grad a|^2 / 2)`.
/// Equal to the sum of [`eval_terms`] up to roundoff.
pub fn eval_forcing_modes(
    state: &FlowState,
    params: &PhysParams,
    opts: &NonlinearOptions,
) -> Result<Vec<[C64; 4]>> {
    let grid = *state.grid();
    let PhysParams {
        mu,
        lambda,
        kappa,
        eps,
        ..
    } = *params;
    let st = product_stage(state, params, opts)?;
    let c = kappa * eps * eps;
    let freq = grid.axis_frequencies();
    let mut out = vec![[C64::default(); 4]; grid.len()];
    let coeff = |f: &SpectralField, i: usize| f.coeffs()[i];
    for i in dealiased_indices(grid) {
        let pos = grid.split(i);
        let xi = pos.map(|p| freq[p]);
        let ixi = xi.map(|x| C64::new(0.0, x));
        let xi2 = xi.iter().map(|x| x * x).sum::<f64>();
        let tensor = |a: usize, b: usize| {
            let k = pair_index(a, b);
            let mut t = coeff(&st.imm[k], i) - coeff(&st.mm[k], i);
            if opts.capillary {
                t -= c * coeff(&st.cap[2 + k], i);
            }
            t
        };
        let div_im: C64 = (0..3).map(|j| ixi[j] * coeff(&st.im[j], i)).sum();
        let mut phi = -(mu + lambda) * div_im - coeff(&st.g, i) / (eps * eps);
        if opts.capillary {
            phi += c * (coeff(&st.cap[0], i) + 0.5 * coeff(&st.cap[1], i));
        }
        for a in 0..3 {
            let div_t: C64 = (0..3).map(|j| ixi[j] * tensor(a, j)).sum();
            out[i][a + 1] = div_t + ixi[a] * phi + mu * xi2 * coeff(&st.im[a], i);
        }
    }
    Ok(out)
}

/// Momentum forcing `N_eps[a, m]`.
pub fn eval_nonlinearity(
    state: &FlowState,
    params: &PhysParams,
    opts: &NonlinearOptions,
) -> Result<VectorField> {
    Ok(eval_terms(state, params, opts)?.total())
}

/// Forcing of the per-mode system `d/dt (a, m) = A (a, m) + F(a, m)`.
pub trait Nonlinearity: Sync {
    fn eval(&self, grid: GridSpec, modes: &[[C64; 4]]) -> Result<Vec<[C64; 4]>>;
}

/// The compressible rotating forcing `(0, N_eps[a, m])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NskForcing {
    pub params: PhysParams,
    pub options: NonlinearOptions,
}

impl Nonlinearity for NskForcing {
    fn eval(&self, grid: GridSpec, modes: &[[C64; 4]]) -> Result<Vec<[C64; 4]>> {
        let state = FlowState::from_modes(grid, modes);
        eval_forcing_modes(&state, &self.params, &self.options)
    }
}

/// No forcing: the linear system.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ZeroForcing;

impl Nonlinearity for ZeroForcing {
    fn eval(&self, grid: GridSpec, _modes: &[[C64; 4]]) -> Result<Vec<[C64; 4]>> {
        Ok(vec![[C64::default(); 4]; grid.len()])
    }
}
