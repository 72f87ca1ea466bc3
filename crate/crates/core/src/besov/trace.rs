use crate::error::{NskError, Result};

use super::norms::{Band, BlockNorms};

/// Block norms of one quantity sampled at increasing times.
///
/// Time integrals use the trapezoidal rule on the sample times; `r = inf`
/// takes the maximum over samples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeTrace {
    j_min: i32,
    times: Vec<f64>,
    samples: Vec<Vec<f64>>,
}

impl TimeTrace {
    pub fn new(j_min: i32) -> Self {
        Self {
            j_min,
            times: Vec::new(),
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, blocks: BlockNorms) -> Result<()> {
        if blocks.j_min != self.j_min {
            return Err(NskError::InvalidParams(
                "block range differs from trace".into(),
            ));
        }
        if let Some(first) = self.samples.first() {
            if first.len() != blocks.values.len() {
                return Err(NskError::InvalidParams(
                    "block count differs from trace".into(),
                ));
            }
        }
        if self.times.last().is_some_and(|&last| t <= last) {
            return Err(NskError::InvalidParams(format!(
                "time {t} is not increasing"
            )));
        }
        self.times.push(t);
        self.samples.push(blocks.values);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_blocks(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    /// Block norms recorded at sample `i`.
    pub fn sample(&self, i: usize) -> BlockNorms {
        BlockNorms {
            j_min: self.j_min,
            values: self.samples[i].clone(),
        }
    }

    /// Trapezoidal weights of the sample times.
    pub fn weights(&self) -> Vec<f64> {
        let t = &self.times;
        let n = t.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { t[i] - t[i - 1] } else { 0.0 };
                let right = if i + 1 < n { t[i + 1] - t[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }

    fn time_norm(&self, series: impl Iterator<Item = f64>, r: f64, w: &[f64]) -> f64 {
        if r.is_infinite() {
            series.fold(0.0, |m, v| m.max(v.abs()))
        } else {
            series
                .zip(w)
                .map(|(v, wi)| wi * v.abs().powf(r))
                .sum::<f64>()
                .powf(1.0 / r)
        }
    }

    /// `|| b_j ||_{L^r(0,T)}` for every block.
    pub fn block_time_norms(&self, r: f64) -> BlockNorms {
        let w = self.weights();
        let values = (0..self.n_blocks())
            .map(|b| self.time_norm(self.samples.iter().map(|s| s[b]), r, &w))
            .collect();
        BlockNorms {
            j_min: self.j_min,
            values,
        }
    }

    /// Chemin-Lerner norm: `L^r` in time per block, then weighted `l^sigma`.
    pub fn chemin_lerner(&self, s: f64, r: f64, sigma: f64, band: Band) -> f64 {
        self.block_time_norms(r).aggregate(s, sigma, band)
    }

    /// Plain norm: Besov norm at each time, then `L^r` in time.
    pub fn plain(&self, s: f64, r: f64, sigma: f64, band: Band) -> f64 {
        let w = self.weights();
        let series = self.samples.iter().map(|v| {
            BlockNorms {
                j_min: self.j_min,
                values: v.clone(),
            }
            .aggregate(s, sigma, band)
        });
        self.time_norm(series, r, &w)
    }

    /// Largest weighted block value at each sample, restricted to `band`.
    pub fn band_max_series(&self, s: f64, band: Band) -> Vec<f64> {
        self.samples
            .iter()
            .map(|v| {
                BlockNorms {
                    j_min: self.j_min,
                    values: v.clone(),
                }
                .aggregate(s, f64::INFINITY, band)
            })
            .collect()
    }
}
