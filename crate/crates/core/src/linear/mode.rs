use nalgebra::{Matrix4, SymmetricEigen, Vector4};

use crate::error::{NskError, Result};
use crate::params::PhysParams;
use crate::C64;

use super::expm::expm;

/// Generator `A(xi)` of the linearised system for one frequency, acting on
/// `(a^, m1^, m2^, m3^)`:
///
/// ```text
/// d a^/dt = -(i/eps) xi.m^
/// d m^/dt = -mu |xi|^2 m^ - (mu+lambda) xi (xi.m^) - Omega e3 x m^
///           - (i/eps) xi a^ - kappa eps |xi|^2 (i xi) a^
/// ```
///
/// Without dissipation the viscous terms are dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMatrix {
    xi: [f64; 3],
    params: PhysParams,
    viscous: bool,
    mat: Matrix4<C64>,
}

pub fn assemble_mode_matrix(xi: [f64; 3], params: &PhysParams, viscous: bool) -> ModeMatrix {
    let PhysParams {
        mu,
        lambda,
        kappa,
        eps,
        omega,
        ..
    } = *params;
    let k2 = xi.iter().map(|x| x * x).sum::<f64>();
    let i = C64::i();
    let mut m = Matrix4::<C64>::zeros();
    for k in 0..3 {
        m[(0, k + 1)] = -i * (xi[k] / eps);
        m[(k + 1, 0)] = -i * xi[k] * (1.0 / eps + kappa * eps * k2);
    }
    m[(1, 2)] = C64::from(omega);
    m[(2, 1)] = C64::from(-omega);
    if viscous {
        for k in 0..3 {
            for l in 0..3 {
                let diag = if k == l { mu * k2 } else { 0.0 };
                m[(k + 1, l + 1)] -= C64::from(diag + (mu + lambda) * xi[k] * xi[l]);
            }
        }
    }
    ModeMatrix {
        xi,
        params: *params,
        viscous,
        mat: m,
    }
}

impl ModeMatrix {
    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.mat
    }

    pub fn xi(&self) -> [f64; 3] {
        self.xi
    }

    pub fn is_viscous(&self) -> bool {
        self.viscous
    }

    /// Weight `sqrt(1 + kappa eps^2 |xi|^2)` that symmetrises the acoustic
    /// coupling.
    pub fn energy_weight(&self) -> f64 {
        let k2 = self.xi.iter().map(|x| x * x).sum::<f64>();
        (1.0 + self.params.kappa * self.params.eps.powi(2) * k2).sqrt()
    }

    /// `S A S^{-1}` with `S = diag(w, 1, 1, 1)`; skew-Hermitian when inviscid.
    pub fn symmetrized(&self) -> Matrix4<C64> {
        let w = self.energy_weight();
        let mut m = self.mat;
        for k in 1..4 {
            m[(0, k)] *= w;
            m[(k, 0)] /= w;
        }
        m
    }

    /// Eigenvalues sorted by decreasing real part.
    pub fn eigenvalues(&self) -> [C64; 4] {
        let ev = self
            .mat
            .schur()
            .eigenvalues()
            .expect("complex Schur form is triangular");
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(|a, b| b.re.total_cmp(&a.re));
        out
    }

    /// Largest real part of the spectrum.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues()[0].re
    }

    /// `e^{tA}`.
    pub fn exp(&self, t: f64) -> Matrix4<C64> {
        expm(&(self.mat * C64::from(t)))
    }

    /// Unitary diagonalisation of the inviscid generator in symmetrised
    /// variables: returns frequencies `w_k` and eigenvectors `V` with
    /// `S A S^{-1} = V diag(-i w) V^*`.
    pub fn inviscid_modes(&self) -> ([f64; 4], Matrix4<C64>) {
        debug_assert!(!self.viscous);
        let h = self.symmetrized() * C64::i();
        let h = (h + h.adjoint()) * C64::from(0.5);
        let eig = SymmetricEigen::new(h);
        let w = [
            eig.eigenvalues[0],
            eig.eigenvalues[1],
            eig.eigenvalues[2],
            eig.eigenvalues[3],
        ];
        (w, eig.eigenvectors)
    }

    /// `e^{tA}` of the inviscid generator through [`ModeMatrix::inviscid_modes`];
    /// exact to round-off for any `t`, unlike scaling and squaring.
    pub fn inviscid_exp(&self, t: f64) -> Matrix4<C64> {
        let (w, v) = self.inviscid_modes();
        let phase =
            Matrix4::from_diagonal(&Vector4::from_fn(|r, _| C64::from_polar(1.0, -w[r] * t)));
        let s = self.energy_weight();
        let mut left = v * phase * v.adjoint();
        for k in 0..4 {
            left[(0, k)] /= s;
            left[(k, 0)] *= s;
        }
        left
    }
}

/// `e^{tA}` for `t >= 0`, rejecting non-finite results.
pub fn mode_exponential(m: &ModeMatrix, t: f64) -> Result<Matrix4<C64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(NskError::InvalidParams(format!(
            "exponential time must be finite and >= 0, got {t}"
        )));
    }
    let e = m.exp(t);
    if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NskError::NonFinite(format!(
            "mode exponential overflowed at t = {t}, xi = {:?}",
            m.xi
        )));
    }
    Ok(e)
}

/// Quadratic energy `(1 + kappa eps^2 |xi|^2)|a^|^2 + |m^|^2`, conserved by
/// the inviscid flow and non-increasing under dissipation.
pub fn mode_energy(xi: [f64; 3], params: &PhysParams, v: &[C64; 4]) -> f64 {
    let k2 = xi.iter().map(|x| x * x).sum::<f64>();
    (1.0 + params.kappa * params.eps.powi(2) * k2) * v[0].norm_sqr()
        + v[1..].iter().map(|z| z.norm_sqr()).sum::<f64>()
}
