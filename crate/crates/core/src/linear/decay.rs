use crate::error::{NskError, Result};
use crate::par;
use crate::params::PhysParams;

use super::lyapunov::decay_rate_bound;
use super::mode::assemble_mode_matrix;
use super::quad::fit_slope;
use super::ReportRow;

/// Polar angles (from the rotation axis) sampled when a rate is reduced over
/// directions; the generator is axisymmetric about `e3` and even in `xi3`.
pub fn polar_directions(n: usize) -> Vec<[f64; 3]> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let th = std::f64::consts::FRAC_PI_2 * i as f64 / (n - 1) as f64;
            [th.sin(), 0.0, th.cos()]
        })
        .collect()
}

fn scaled(dir: [f64; 3], r: f64) -> [f64; 3] {
    dir.map(|d| d * r)
}

/// Slowest modal decay rate `-max Re eig A(xi)` over the given directions at
/// radius `xi_norm`.
pub fn slowest_rate(xi_norm: f64, params: &PhysParams, dirs: &[[f64; 3]]) -> f64 {
    dirs.iter()
        .map(|&d| -assemble_mode_matrix(scaled(d, xi_norm), params, true).spectral_abscissa())
        .fold(f64::INFINITY, f64::min)
}

/// Asymptotic decay rate of `|e^{tA}|` in the energy norm, fitted from the
/// propagator at `t1 < t2`. Independent of the eigensolver.
pub fn integrated_rate(xi: [f64; 3], params: &PhysParams, t1: f64, t2: f64) -> f64 {
    let m = assemble_mode_matrix(xi, params, true);
    let w = m.energy_weight();
    let norm_at = |t: f64| {
        let mut e = m.exp(t);
        for k in 1..4 {
            e[(0, k)] *= w;
            e[(k, 0)] /= w;
        }
        e.singular_values()[0]
    };
    -(norm_at(t2).ln() - norm_at(t1).ln()) / (t2 - t1)
}

/// One sweep point `(|xi|, Omega, eps)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecaySample {
    pub xi_norm: f64,
    pub omega: f64,
    pub eps: f64,
}

/// For each sample, the slowest modal rate over `n_dirs` polar directions
/// against the guaranteed rate `(eta/3) Theta`. A non-negative margin means
/// the spectral abscissa respects the bound up to `1e-9`.
pub fn verify_mode_decay(
    samples: &[DecaySample],
    params: &PhysParams,
    n_dirs: usize,
) -> Result<Vec<ReportRow>> {
    params.validate()?;
    let dirs = polar_directions(n_dirs);
    let rows = par::map_slice(samples, |s| {
        let p = PhysParams {
            omega: s.omega,
            eps: s.eps,
            ..*params
        };
        let measured = slowest_rate(s.xi_norm, &p, &dirs);
        let bound = decay_rate_bound(s.xi_norm, &p);
        ReportRow {
            coord: s.xi_norm,
            omega: s.omega,
            eps: s.eps,
            r: f64::NAN,
            measured,
            bound,
            margin: measured - bound + 1e-9,
        }
    });
    if let Some(bad) = rows.iter().find(|r| !r.measured.is_finite()) {
        return Err(NskError::NonFinite(format!(
            "decay rate at |xi| = {}",
            bad.coord
        )));
    }
    Ok(rows)
}

/// Log-log slope of the integrated slowest rate against `|xi|`, taking for
/// each radius the slowest direction.
pub fn integrated_rate_slope(xi_norms: &[f64], params: &PhysParams, n_dirs: usize) -> f64 {
    let dirs = polar_directions(n_dirs);
    let rates = par::map_slice(xi_norms, |&r| {
        dirs.iter()
            .map(|&d| {
                let xi = scaled(d, r);
                let sigma = -assemble_mode_matrix(xi, params, true).spectral_abscissa();
                integrated_rate(xi, params, 10.0 / sigma, 20.0 / sigma)
            })
            .fold(f64::INFINITY, f64::min)
    });
    let lx: Vec<f64> = xi_norms.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = rates.iter().map(|x| x.ln()).collect();
    fit_slope(&lx, &ly)
}
