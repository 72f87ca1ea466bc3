//! Physical parameters of the scaled system.

use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};

/// Coefficients of the scaled rotating NSK system.
///
/// `eps` is the Mach-number scaling, `omega` the rotation speed about the
/// third axis and `gamma` the exponent of the pressure law `P(rho) =
/// rho^gamma / gamma`, normalised so that `P'(1) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub eps: f64,
    pub omega: f64,
    pub gamma: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            mu: 1.0,
            lambda: 1.0,
            kappa: 1.0,
            eps: 0.1,
            omega: 10.0,
            gamma: 2.0,
        }
    }
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mu,
            self.lambda,
            self.kappa,
            self.eps,
            self.omega,
            self.gamma,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(NskError::InvalidParams("non-finite coefficient".into()));
        }
        if self.mu <= 0.0 {
            return Err(NskError::InvalidParams(format!(
                "mu = {} must be positive",
                self.mu
            )));
        }
        if self.nu() <= 0.0 {
            return Err(NskError::InvalidParams(format!(
                "2 mu + lambda = {} must be positive",
                self.nu()
            )));
        }
        if self.kappa <= 0.0 {
            return Err(NskError::InvalidParams(format!(
                "kappa = {} must be positive",
                self.kappa
            )));
        }
        if self.eps <= 0.0 {
            return Err(NskError::InvalidParams(format!(
                "eps = {} must be positive",
                self.eps
            )));
        }
        if self.gamma <= 1.0 {
            return Err(NskError::InvalidParams(format!(
                "gamma = {} must exceed 1",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Longitudinal viscosity `2 mu + lambda`.
    pub fn nu(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// `min(mu, 1)`.
    pub fn mu_lower(&self) -> f64 {
        self.mu.min(1.0)
    }

    /// Coupling weight of the Lyapunov cross term,
    /// `min(1/2, kappa/2, kappa mu_lower/2, mu_lower/4, sqrt(kappa))`.
    pub fn eta(&self) -> f64 {
        let ml = self.mu_lower();
        [
            0.5,
            self.kappa / 2.0,
            self.kappa * ml / 2.0,
            ml / 4.0,
            self.kappa.sqrt(),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    /// `|Omega| eps`, the frequency that separates the low and high bands.
    pub fn rotation_scale(&self) -> f64 {
        self.omega.abs() * self.eps
    }
}
