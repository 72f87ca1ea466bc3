use crate::besov::{block_norms, Band, BlockNorms, Flavor};
use crate::error::{NskError, Result};
use crate::params::PhysParams;
use crate::spectral::{DyadicDecomposition, FlowState, SpectralField};

/// Exponents and band split of the a priori functionals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackerConfig {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Upper edge `beta` of the middle band `|Omega| eps < 2^j <= beta`.
    pub beta: f64,
}

impl TrackerConfig {
    /// `2 <= p < q < 3`, `2 < r < inf`, `1/r <= min(1/p - 1/q, 3/(2q) - 1/4)`.
    pub fn validate(&self) -> Result<()> {
        let Self { p, q, r, beta } = *self;
        if !(2.0 <= p && p < q && q < 3.0) {
            return Err(NskError::Hypothesis(format!(
                "need 2 <= p < q < 3, got p = {p}, q = {q}"
            )));
        }
        if !(r > 2.0 && r.is_finite()) {
            return Err(NskError::Hypothesis(format!(
                "need 2 < r < inf, got r = {r}"
            )));
        }
        let cap = (1.0 / p - 1.0 / q).min(1.5 / q - 0.25);
        if 1.0 / r > cap + 1e-15 {
            return Err(NskError::Hypothesis(format!(
                "need 1/r <= min(1/p - 1/q, 3/(2q) - 1/4) = {cap}, got 1/r = {}",
                1.0 / r
            )));
        }
        if !(beta > 0.0) {
            return Err(NskError::Hypothesis(format!(
                "band split beta = {beta} must be positive"
            )));
        }
        Ok(())
    }
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            q: 2.5,
            r: 10.0,
            beta: 16.0,
        }
    }
}

/// One tracker sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackerRow {
    pub t: f64,
    pub e_p: f64,
    /// `L~^r(B^{3/q - 3 + 4/r}_{q,1})` part of `D_{p,q,r}`.
    pub d_low: f64,
    /// `L~^r(B^{3/q - 1 + 2/r}_{q,1})` part of `D_{p,q,r}`.
    pub d_high: f64,
    /// `L~^inf(B^^{3/p - 1}_{p,1})` norm of `eps grad a`.
    pub d_grad: f64,
    pub eps_a_linf: f64,
    pub min_density: f64,
    /// `L~^r(B^{3/q - 1 + 2/r}_{q,1})` norm of `(a, m)` on the middle band.
    pub mid_band: f64,
}

impl TrackerRow {
    pub const CSV_HEADER: &'static str =
        "t,e_p,d_low,d_high,d_grad,d_pqr,eps_a_linf,min_density,mid_band";

    pub fn d_pqr(&self) -> f64 {
        self.d_low + self.d_high + self.d_grad
    }

    pub fn csv(&self) -> String {
        format!(
            "{:.9e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.t,
            self.e_p,
            self.d_low,
            self.d_high,
            self.d_grad,
            self.d_pqr(),
            self.eps_a_linf,
            self.min_density,
            self.mid_band
        )
    }
}

#[derive(Clone, Debug)]
struct Sample {
    t: f64,
    fourier: BlockNorms,
    physical_r: Vec<f64>,
    mid_r: Vec<f64>,
}

/// Running Chemin-Lerner accumulators for `E_p`, `D_{p,q,r}` and the
/// middle-band monitor, updated sample by sample (time integrals by
/// trapezoid).
#[derive(Clone, Debug)]
pub struct AprioriTracker {
    config: TrackerConfig,
    params: PhysParams,
    dyadic: DyadicDecomposition,
    e_p0: Option<f64>,
    last: Option<Sample>,
    sup_fourier: Vec<f64>,
    int_fourier: Vec<f64>,
    int_physical_r: Vec<f64>,
    sup_grad: Vec<f64>,
    int_mid_r: Vec<f64>,
    eps_a_sup: f64,
    first_window_violation: Option<f64>,
    rows: Vec<TrackerRow>,
}

fn sum_blocks(
    fields: &[&SpectralField],
    dyadic: &DyadicDecomposition,
    flavor: Flavor,
    p: f64,
) -> Result<BlockNorms> {
    let mut acc = BlockNorms {
        j_min: dyadic.j_min(),
        values: vec![0.0; dyadic.len()],
    };
    for f in fields {
        acc.add(&block_norms(f, dyadic, flavor, p)?);
    }
    Ok(acc)
}

fn weighted(values: &[f64], j_min: i32, s: f64, band: Band) -> f64 {
    BlockNorms {
        j_min,
        values: values.to_vec(),
    }
    .aggregate(s, 1.0, band)
}

impl AprioriTracker {
    pub fn new(
        config: TrackerConfig,
        params: PhysParams,
        dyadic: DyadicDecomposition,
    ) -> Result<Self> {
        config.validate()?;
        let n = dyadic.len();
        Ok(Self {
            config,
            params,
            dyadic,
            e_p0: None,
            last: None,
            sup_fourier: vec![0.0; n],
            int_fourier: vec![0.0; n],
            int_physical_r: vec![0.0; n],
            sup_grad: vec![0.0; n],
            int_mid_r: vec![0.0; n],
            eps_a_sup: 0.0,
            first_window_violation: None,
            rows: Vec::new(),
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn dyadic(&self) -> &DyadicDecomposition {
        &self.dyadic
    }

    /// Data norm `E_{p,0}`, set by the first sample.
    pub fn e_p0(&self) -> Option<f64> {
        self.e_p0
    }

    pub fn rows(&self) -> &[TrackerRow] {
        &self.rows
    }

    pub fn last_row(&self) -> Option<&TrackerRow> {
        self.rows.last()
    }

    /// `sup_t ||eps a||_{L^inf}` so far.
    pub fn eps_a_sup(&self) -> f64 {
        self.eps_a_sup
    }

    /// Time of the first sample with `||eps a||_{L^inf} > 1/2`.
    pub fn first_window_violation(&self) -> Option<f64> {
        self.first_window_violation
    }

    /// Middle-band dispersive functional of `(a, m)` over the samples so far;
    /// nondecreasing in time.
    pub fn mid_band_max(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.mid_band)
    }

    /// Adds the state at time `t` (strictly after the previous sample).
    pub fn push(&mut self, t: f64, state: &FlowState) -> Result<TrackerRow> {
        if let Some(last) = &self.last {
            if !(t > last.t) {
                return Err(NskError::InvalidParams(format!(
                    "tracker times must increase, got {t}"
                )));
            }
        }
        let TrackerConfig { p, q, r, beta } = self.config;
        let eps = self.params.eps;
        let aug = state.augmented(eps);
        let refs: Vec<&SpectralField> = aug.iter().collect();
        let fourier = sum_blocks(&refs, &self.dyadic, Flavor::Fourier, p)?;
        let mut mid = sum_blocks(&[refs[0]], &self.dyadic, Flavor::Physical, q)?;
        mid.add(&sum_blocks(&refs[4..], &self.dyadic, Flavor::Physical, q)?);
        let mut physical = sum_blocks(&refs[1..4], &self.dyadic, Flavor::Physical, q)?;
        physical.add(&mid);
        let physical_r: Vec<f64> = physical.values.iter().map(|v| v.powf(r)).collect();
        let mid_r: Vec<f64> = mid.values.iter().map(|v| v.powf(r)).collect();
        let grad = sum_blocks(&refs[1..4], &self.dyadic, Flavor::Fourier, p)?;

        let a_phys = state.a.to_physical()?;
        let (mut lo, mut hi) = (f64::INFINITY, 0f64);
        for &v in &a_phys {
            lo = lo.min(1.0 + eps * v);
            hi = hi.max((eps * v).abs());
        }
        if !hi.is_finite() || !lo.is_finite() {
            return Err(NskError::NonFinite(format!("density at t = {t}")));
        }
        self.eps_a_sup = self.eps_a_sup.max(hi);
        if hi > 0.5 && self.first_window_violation.is_none() {
            self.first_window_violation = Some(t);
        }

        let n = self.dyadic.len();
        for b in 0..n {
            self.sup_fourier[b] = self.sup_fourier[b].max(fourier.values[b]);
            self.sup_grad[b] = self.sup_grad[b].max(grad.values[b]);
        }
        if let Some(last) = &self.last {
            let dt = t - last.t;
            for b in 0..n {
                self.int_fourier[b] += 0.5 * dt * (last.fourier.values[b] + fourier.values[b]);
                self.int_physical_r[b] += 0.5 * dt * (last.physical_r[b] + physical_r[b]);
                self.int_mid_r[b] += 0.5 * dt * (last.mid_r[b] + mid_r[b]);
            }
        }
        let j_min = self.dyadic.j_min();
        if self.e_p0.is_none() {
            let e0 = fourier.aggregate(3.0 / p - 1.0, 1.0, Band::Full)
                + fourier.aggregate(3.0 / p - 3.0, 1.0, Band::Full);
            self.e_p0 = Some(e0);
        }
        let e_p = weighted(&self.sup_fourier, j_min, 3.0 / p - 3.0, Band::Full)
            + weighted(&self.sup_fourier, j_min, 3.0 / p - 1.0, Band::Full)
            + weighted(&self.int_fourier, j_min, 3.0 / p + 1.0, Band::Full);
        let lr: Vec<f64> = self
            .int_physical_r
            .iter()
            .map(|v| v.powf(1.0 / r))
            .collect();
        let mid_lr: Vec<f64> = self.int_mid_r.iter().map(|v| v.powf(1.0 / r)).collect();
        let alpha = self.params.rotation_scale();
        let row = TrackerRow {
            t,
            e_p,
            d_low: weighted(&lr, j_min, 3.0 / q - 3.0 + 4.0 / r, Band::Full),
            d_high: weighted(&lr, j_min, 3.0 / q - 1.0 + 2.0 / r, Band::Full),
            d_grad: weighted(&self.sup_grad, j_min, 3.0 / p - 1.0, Band::Full),
            eps_a_linf: hi,
            min_density: lo,
            mid_band: weighted(
                &mid_lr,
                j_min,
                3.0 / q - 1.0 + 2.0 / r,
                Band::Middle { alpha, beta },
            ),
        };
        self.last = Some(Sample {
            t,
            fourier,
            physical_r,
            mid_r,
        });
        self.rows.push(row);
        Ok(row)
    }
}

/// Runs a tracker over a sampled trajectory.
pub fn track_apriori(
    times: &[f64],
    states: &[FlowState],
    config: TrackerConfig,
    params: PhysParams,
    dyadic: DyadicDecomposition,
) -> Result<AprioriTracker> {
    if times.len() != states.len() {
        return Err(NskError::GridMismatch);
    }
    let mut tracker = AprioriTracker::new(config, params, dyadic)?;
    for (t, s) in times.iter().zip(states) {
        tracker.push(*t, s)?;
    }
    Ok(tracker)
}
