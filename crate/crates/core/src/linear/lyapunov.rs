use crate::params::PhysParams;
use crate::C64;

fn norm2(xi: [f64; 3]) -> f64 {
    xi.iter().map(|x| x * x).sum()
}

/// `Theta = |xi|^4 / (Omega^2 eps^2 + |xi|^2)`, the decay scale of one mode.
pub fn theta(xi_norm: f64, omega_eps: f64) -> f64 {
    let k2 = xi_norm * xi_norm;
    if k2 == 0.0 {
        0.0
    } else {
        k2 * k2 / (omega_eps * omega_eps + k2)
    }
}

/// Guaranteed decay rate `(eta/3) Theta`.
pub fn decay_rate_bound(xi_norm: f64, params: &PhysParams) -> f64 {
    params.eta() / 3.0 * theta(xi_norm, params.rotation_scale())
}

/// Reference quadratic form `(Omega^2 eps^2 + |xi|^2) |(a, sqrt(kappa) eps i xi a, m)|^2`.
pub fn lyapunov_reference(xi: [f64; 3], params: &PhysParams, v: &[C64; 4]) -> f64 {
    let k2 = norm2(xi);
    let w = params.rotation_scale().powi(2) + k2;
    let aug = v[0].norm_sqr() * (1.0 + params.kappa * params.eps.powi(2) * k2)
        + v[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
    w * aug
}

/// Lyapunov functional `V^2`: the reference form plus the cross term
/// `2 eta |xi|^2 Re <eps i xi a, m>`.
pub fn lyapunov_sq(xi: [f64; 3], params: &PhysParams, v: &[C64; 4]) -> f64 {
    let k2 = norm2(xi);
    let cross: C64 = (0..3)
        .map(|k| C64::i() * params.eps * xi[k] * v[0] * v[k + 1].conj())
        .sum();
    lyapunov_reference(xi, params, v) + 2.0 * params.eta() * k2 * cross.re
}

/// `V^2` divided by the reference form; lies in `[1/2, 3/2]`.
pub fn lyapunov_ratio(xi: [f64; 3], params: &PhysParams, v: &[C64; 4]) -> f64 {
    lyapunov_sq(xi, params, v) / lyapunov_reference(xi, params, v)
}

/// `V^2`, its reference form `Q` and the ratio `V^2 / Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovReport {
    pub value: f64,
    pub reference: f64,
    pub ratio: f64,
}

impl LyapunovReport {
    pub fn new(xi: [f64; 3], params: &PhysParams, v: &[C64; 4]) -> Self {
        let value = lyapunov_sq(xi, params, v);
        let reference = lyapunov_reference(xi, params, v);
        Self {
            value,
            reference,
            ratio: value / reference,
        }
    }

    pub fn within_bounds(&self) -> bool {
        (0.5..=1.5).contains(&self.ratio)
    }
}
