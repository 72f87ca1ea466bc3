//! Smooth dyadic partition of frequency space.
//!
//! The cutoff `chi` is a radial quintic smoothstep equal to one for
//! `|xi| <= 3/4` and zero for `|xi| >= 4/3`. The blocks are
//! `phi_j(xi) = chi(2^{-j-1} xi) - chi(2^{-j} xi)`, supported in
//! `3/4 2^j <= |xi| <= 8/3 2^j` and identically one on `(4/3 2^j, 3/2 2^j)`.
//! A contiguous family `j_min..=j_max` telescopes to one on
//! `[4/3 2^{j_min}, 3/2 2^{j_max}]`, the resolved annulus.

use crate::error::{NskError, Result};
use crate::par;

use super::field::SpectralField;
use super::grid::GridSpec;

/// Lowest block index used by default.
pub const DEFAULT_J_MIN: i32 = -3;

const INNER: f64 = 3.0 / 4.0;
const OUTER: f64 = 4.0 / 3.0;

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

/// Radial low-pass profile.
pub fn chi(r: f64) -> f64 {
    1.0 - smoothstep((r - INNER) / (OUTER - INNER))
}

/// Block profile at scale zero.
pub fn phi0(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Non-zero entries of one block mask: flat lattice index and weight.
#[derive(Clone, Debug)]
pub struct Block {
    pub j: i32,
    pub entries: Vec<(u32, f64)>,
}

/// Masks of the blocks `j_min..=j_max` on a lattice. The zero mode belongs
/// to no block.
#[derive(Clone, Debug)]
pub struct DyadicDecomposition {
    grid: GridSpec,
    j_min: i32,
    j_max: i32,
    blocks: Vec<Block>,
}

impl DyadicDecomposition {
    /// Default family: `j_max` is the largest block whose outer edge stays
    /// strictly below the axis Nyquist frequency, `j_min` is
    /// [`DEFAULT_J_MIN`] or the lowest block that meets the lattice,
    /// whichever is larger.
    pub fn new(grid: GridSpec) -> Result<Self> {
        let j_max = Self::largest_block(&grid);
        let mut j_min = DEFAULT_J_MIN;
        while 8.0 / 3.0 * 2f64.powi(j_min) <= grid.dk() {
            j_min += 1;
        }
        Self::with_range(grid, j_min.min(j_max), j_max)
    }

    /// Largest `j` with `8/3 2^j < xi_max`.
    pub fn largest_block(grid: &GridSpec) -> i32 {
        let mut j = (grid.xi_max() * 3.0 / 8.0).log2().floor() as i32;
        while 8.0 / 3.0 * 2f64.powi(j) >= grid.xi_max() {
            j -= 1;
        }
        j
    }

    pub fn with_range(grid: GridSpec, j_min: i32, j_max: i32) -> Result<Self> {
        if j_min > j_max {
            return Err(NskError::InvalidGrid(format!(
                "empty block range {j_min}..={j_max}"
            )));
        }
        if 8.0 / 3.0 * 2f64.powi(j_max) >= grid.xi_max() {
            return Err(NskError::Resolution(format!(
                "block {j_max} reaches {:.4} but the axis Nyquist frequency is {:.4}",
                8.0 / 3.0 * 2f64.powi(j_max),
                grid.xi_max()
            )));
        }
        let radii: Vec<f64> = par::map_range(grid.len(), |i| grid.xi_norm(i));
        let blocks = par::map_range((j_max - j_min + 1) as usize, |b| {
            let j = j_min + b as i32;
            let scale = 2f64.powi(-j);
            let lo = INNER * 2f64.powi(j);
            let hi = 8.0 / 3.0 * 2f64.powi(j);
            let entries = radii
                .iter()
                .enumerate()
                .filter(|&(_, &r)| r > lo && r < hi)
                .filter_map(|(i, &r)| {
                    let w = phi0(r * scale);
                    (w > 0.0).then_some((i as u32, w))
                })
                .collect();
            Block { j, entries }
        });
        Ok(Self {
            grid,
            j_min,
            j_max,
            blocks,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, j: i32) -> Option<&Block> {
        (self.j_min..=self.j_max)
            .contains(&j)
            .then(|| &self.blocks[(j - self.j_min) as usize])
    }

    /// Mask value `phi_j` at lattice index `idx`, zero outside the family.
    pub fn mask(&self, j: i32, idx: usize) -> f64 {
        if idx == 0 || !(self.j_min..=self.j_max).contains(&j) {
            return 0.0;
        }
        phi0(self.grid.xi_norm(idx) * 2f64.powi(-j))
    }

    /// `(inner, outer)` radii of the annulus on which the family sums to one.
    pub fn resolved_annulus(&self) -> (f64, f64) {
        (OUTER * 2f64.powi(self.j_min), 1.5 * 2f64.powi(self.j_max))
    }

    /// Sum of all masks at every lattice index.
    pub fn mask_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.grid.len()];
        for b in &self.blocks {
            for &(i, w) in &b.entries {
                sum[i as usize] += w;
            }
        }
        sum
    }

    /// Largest `|sum_j phi_j - 1|` over lattice points in the resolved annulus.
    pub fn partition_defect(&self) -> f64 {
        let (lo, hi) = self.resolved_annulus();
        let g = self.grid;
        self.mask_sum()
            .iter()
            .enumerate()
            .filter(|&(i, _)| {
                let r = g.xi_norm(i);
                r >= lo && r <= hi
            })
            .map(|(_, s)| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `Delta_j f`.
    pub fn project(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check(f)?;
        let mut out = SpectralField::zeros(self.grid);
        if let Some(b) = self.block(j) {
            let (src, dst) = (f.coeffs(), out.coeffs_mut());
            for &(i, w) in &b.entries {
                dst[i as usize] = src[i as usize] * w;
            }
        }
        Ok(out)
    }

    /// `S_j f = sum_{j_min <= j' <= j-1} Delta_{j'} f`.
    pub fn low_cutoff(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check(f)?;
        let mut out = SpectralField::zeros(self.grid);
        for b in self.blocks.iter().filter(|b| b.j < j) {
            let (src, dst) = (f.coeffs(), out.coeffs_mut());
            for &(i, w) in &b.entries {
                dst[i as usize] += src[i as usize] * w;
            }
        }
        Ok(out)
    }

    /// All blocks `Delta_j f` for `j = j_min..=j_max`.
    pub fn project_all(&self, f: &SpectralField) -> Result<Vec<SpectralField>> {
        (self.j_min..=self.j_max)
            .map(|j| self.project(f, j))
            .collect()
    }

    /// Share of `f` (in coefficient l2) not captured by the family, zero mode
    /// excluded: `|| (1 - sum_j phi_j) f^ || / || f^ ||`.
    pub fn tail_mass(&self, f: &SpectralField) -> f64 {
        let sum = self.mask_sum();
        let c = f.coeffs();
        let (mut miss, mut total) = (0.0, 0.0);
        for i in 1..c.len() {
            let e = c[i].norm_sqr();
            total += e;
            miss += e * (1.0 - sum[i]).powi(2);
        }
        if total == 0.0 {
            0.0
        } else {
            (miss / total).sqrt()
        }
    }

    /// Checks that every non-zero coefficient of `f` lies where the family
    /// sums to one and inside the 2/3-rule cube.
    pub fn check_band_limited(&self, f: &SpectralField, tol: f64) -> Result<()> {
        self.check(f)?;
        let sum = self.mask_sum();
        let g = self.grid;
        let scale = f.max_abs();
        for (i, c) in f.coeffs().iter().enumerate() {
            if c.norm() <= tol * scale {
                continue;
            }
            if i == 0 || (sum[i] - 1.0).abs() > 1e-12 || !g.is_dealiased(i) {
                return Err(NskError::Resolution(format!(
                    "mode {:?} carries {:.3e} outside the resolved annulus",
                    g.mode(i),
                    c.norm()
                )));
            }
        }
        Ok(())
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if *f.grid() == self.grid {
            Ok(())
        } else {
            Err(NskError::GridMismatch)
        }
    }
}
