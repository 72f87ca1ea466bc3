//! Pressure-law helpers for `P(rho) = rho^gamma / gamma`, normalised so that
//! `P'(1) = 1`.

/// Below this `|b|` the removable singularities are evaluated by series.
pub const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureHelpers {
    pub gamma: f64,
}

impl PressureHelpers {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    /// `I(b) = b / (1 + b)`.
    pub fn i(&self, b: f64) -> f64 {
        b / (1.0 + b)
    }

    /// `J(b) = P'(1 + b) - 1 = (1 + b)^{gamma - 1} - 1`.
    pub fn j(&self, b: f64) -> f64 {
        ((self.gamma - 1.0) * b.ln_1p()).exp_m1()
    }

    /// `G''(0) = gamma - 1`.
    pub fn g2(&self) -> f64 {
        self.gamma - 1.0
    }

    /// `G(b) = int_0^b J = ((1 + b)^gamma - 1)/gamma - b`.
    pub fn g(&self, b: f64) -> f64 {
        if b.abs() < SERIES_CUTOFF {
            b * b * (self.g2() / 2.0 + self.h_series(b))
        } else {
            (self.gamma * b.ln_1p()).exp_m1() / self.gamma - b
        }
    }

    /// `H(b) = G(b)/b^2 - G''(0)/2`, with `H(0) = 0`.
    pub fn h(&self, b: f64) -> f64 {
        if b.abs() < SERIES_CUTOFF {
            self.h_series(b)
        } else {
            self.g(b) / (b * b) - self.g2() / 2.0
        }
    }

    /// `sum_{k >= 3} binom(gamma, k) b^{k-2} / gamma`, four terms.
    fn h_series(&self, b: f64) -> f64 {
        let g = self.gamma;
        let c3 = (g - 1.0) * (g - 2.0) / 6.0;
        let c4 = c3 * (g - 3.0) / 4.0;
        let c5 = c4 * (g - 4.0) / 5.0;
        let c6 = c5 * (g - 5.0) / 6.0;
        b * (c3 + b * (c4 + b * (c5 + b * c6)))
    }
}
