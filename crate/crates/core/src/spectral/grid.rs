use std::f64::consts::PI;

use crate::error::{NskError, Result};

/// Default box side `2 pi 2^4`, which gives frequency spacing `2^-4`.
pub const DEFAULT_PERIOD: f64 = 2.0 * PI * 16.0;

/// Cubic periodic box of side `period` sampled on `n^3` points.
///
/// Lattice frequencies are `xi_k = (2 pi / period) k` with
/// `k in [-n/2, n/2)^3`. Coefficients are stored in FFT order with the last
/// axis fastest: index `(i0 n + i1) n + i2`, where `i < n/2` holds `k = i`
/// and `i >= n/2` holds `k = i - n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    period: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(period: f64, n: usize) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(NskError::InvalidGrid(format!(
                "period {period} must be positive"
            )));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(NskError::InvalidGrid(format!(
                "n = {n} must be even and at least 8"
            )));
        }
        if n > 1024 {
            return Err(NskError::InvalidGrid(format!(
                "n = {n} exceeds the supported 1024"
            )));
        }
        Ok(Self { period, n })
    }

    /// Grid with the default box side.
    pub fn with_n(n: usize) -> Result<Self> {
        Self::new(DEFAULT_PERIOD, n)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points, `n^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency spacing `2 pi / period`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Physical spacing `period / n`.
    pub fn dx(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Largest resolved frequency magnitude along an axis, `(n/2) dk`.
    pub fn xi_max(&self) -> f64 {
        self.dk() * (self.n / 2) as f64
    }

    /// Per-axis cutoff of the 2/3 rule: modes with `|k_i| <= n/3` survive.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Integer wavenumber stored at axis position `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Axis position holding wavenumber `k`, for `k in [-n/2, n/2)`.
    #[inline]
    pub fn position(&self, k: i64) -> Option<usize> {
        let h = (self.n / 2) as i64;
        (-h..h)
            .contains(&k)
            .then(|| k.rem_euclid(self.n as i64) as usize)
    }

    #[inline]
    pub fn split(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn join(&self, pos: [usize; 3]) -> usize {
        (pos[0] * self.n + pos[1]) * self.n + pos[2]
    }

    /// Integer mode `k` at flat index `idx`.
    #[inline]
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        self.split(idx).map(|i| self.wavenumber(i))
    }

    /// Flat index of mode `k`, if it lies on the lattice.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        Some(self.join([
            self.position(k[0])?,
            self.position(k[1])?,
            self.position(k[2])?,
        ]))
    }

    /// Frequency vector at flat index `idx`.
    #[inline]
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let dk = self.dk();
        self.mode(idx).map(|k| k as f64 * dk)
    }

    #[inline]
    pub fn xi_norm(&self, idx: usize) -> f64 {
        let [a, b, c] = self.xi(idx);
        (a * a + b * b + c * c).sqrt()
    }

    /// Index of the mode `-k` modulo `n`; the Nyquist plane maps to itself.
    #[inline]
    pub fn neg_index(&self, idx: usize) -> usize {
        let n = self.n;
        self.join(self.split(idx).map(|i| (n - i) % n))
    }

    /// True when some component sits on the unpaired Nyquist plane `k_i = -n/2`.
    #[inline]
    pub fn on_nyquist(&self, idx: usize) -> bool {
        self.split(idx).contains(&(self.n / 2))
    }

    /// Per-axis flags of the positions kept by the 2/3 rule.
    pub fn dealias_axis_mask(&self) -> Vec<bool> {
        let c = self.dealias_cutoff();
        (0..self.n).map(|i| self.wavenumber(i).abs() <= c).collect()
    }

    /// Per-axis frequencies `k dk` in storage order.
    pub fn axis_frequencies(&self) -> Vec<f64> {
        let dk = self.dk();
        (0..self.n)
            .map(|i| self.wavenumber(i) as f64 * dk)
            .collect()
    }

    /// True when the mode survives the 2/3 rule.
    #[inline]
    pub fn is_dealiased(&self, idx: usize) -> bool {
        let c = self.dealias_cutoff();
        self.mode(idx).iter().all(|k| k.abs() <= c)
    }

    /// Physical coordinate of collocation point `idx`.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let dx = self.dx();
        self.split(idx).map(|i| i as f64 * dx)
    }

    /// Quadrature weight of one physical cell, `(period/n)^3`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    /// Quadrature weight of one frequency cell, `(2 pi/period)^3`.
    pub fn frequency_cell(&self) -> f64 {
        self.dk().powi(3)
    }
}
