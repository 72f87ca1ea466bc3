//! Scalar, vector and flow-state fields stored as spectral coefficients.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{NskError, Result};
use crate::par;
use crate::C64;

use super::fft::Fft3;
use super::grid::GridSpec;

/// Relative imaginary residue above which an inverse transform is rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Spectral coefficients of a real scalar field.
///
/// The coefficient at frequency `xi` approximates `int f(x) e^{-i x.xi} dx`,
/// i.e. the forward transform carries the cell weight `(period/n)^3` and the
/// inverse carries `1/period^3`. A constant `c` therefore maps to
/// `c period^3` at `xi = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<C64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![C64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(NskError::Format(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Field whose coefficient at integer mode `k` is `f(k)`.
    pub fn from_modes<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn([i64; 3]) -> C64 + Sync + Send,
    {
        let coeffs = par::map_range(grid.len(), |idx| f(grid.mode(idx)));
        Self { grid, coeffs }
    }

    /// Forward transform of collocation values.
    pub fn from_physical(grid: GridSpec, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(NskError::Format(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let mut data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        Fft3::plan(grid.n()).forward(&mut data);
        let w = grid.cell_volume();
        data.iter_mut().for_each(|c| *c *= w);
        Ok(Self { grid, coeffs: data })
    }

    /// Samples `f` on the collocation grid and transforms.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        let values = par::map_range(grid.len(), |idx| f(grid.point(idx)));
        Self::from_physical(grid, &values).expect("length matches grid")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Coefficient at integer mode `k`, zero when `k` is off the lattice.
    pub fn at(&self, k: [i64; 3]) -> C64 {
        self.grid
            .index_of(k)
            .map_or(C64::default(), |i| self.coeffs[i])
    }

    /// Inverse transform. Fails when the imaginary residue exceeds
    /// [`HERMITIAN_TOL`] relative to the real part.
    pub fn to_physical(&self) -> Result<Vec<f64>> {
        let data = self.inverse_complex();
        let re = data.iter().fold(0.0_f64, |m, c| m.max(c.re.abs()));
        let im = data.iter().fold(0.0_f64, |m, c| m.max(c.im.abs()));
        if im > HERMITIAN_TOL * re.max(f64::MIN_POSITIVE) && im > 0.0 {
            let residue = if re > 0.0 { im / re } else { f64::INFINITY };
            return Err(NskError::NonHermitian { residue });
        }
        Ok(data.into_iter().map(|c| c.re).collect())
    }

    pub(crate) fn to_physical_unchecked(&self) -> Vec<f64> {
        self.inverse_complex().into_iter().map(|c| c.re).collect()
    }

    fn inverse_complex(&self) -> Vec<C64> {
        let mut data = self.coeffs.clone();
        Fft3::plan(self.grid.n()).inverse(&mut data);
        let w = self.grid.period().powi(-3);
        data.iter_mut().for_each(|c| *c *= w);
        data
    }

    /// Largest `|c(k) - conj(c(-k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let g = self.grid;
        par::max_range(g.len(), |i| {
            (self.coeffs[i] - self.coeffs[g.neg_index(i)].conj()).norm()
        }) / scale
    }

    /// Projects onto Hermitian-symmetric coefficients.
    pub fn symmetrize(&mut self) {
        let g = self.grid;
        let src = self.coeffs.clone();
        par::for_each_indexed(&mut self.coeffs, |i, c| {
            *c = 0.5 * (src[i] + src[g.neg_index(i)].conj());
        });
    }

    /// Spatial mean, `c(0) / period^3`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re / self.grid.period().powi(3)
    }

    pub fn max_abs(&self) -> f64 {
        par::max_range(self.coeffs.len(), |i| self.coeffs[i].norm())
    }

    /// Applies the Fourier multiplier `m(idx)`.
    pub fn multiplier<F>(&self, m: F) -> Self
    where
        F: Fn(usize) -> C64 + Sync + Send,
    {
        let coeffs = par::map_range(self.coeffs.len(), |i| self.coeffs[i] * m(i));
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Partial derivative along `axis`. The unpaired Nyquist plane of that
    /// axis is zeroed so the result stays real.
    pub fn derivative(&self, axis: usize) -> Self {
        let g = self.grid;
        let ny = g.n() / 2;
        self.multiplier(|i| {
            if g.split(i)[axis] == ny {
                C64::default()
            } else {
                C64::new(0.0, g.xi(i)[axis])
            }
        })
    }

    pub fn laplacian(&self) -> Self {
        let g = self.grid;
        self.multiplier(|i| {
            let x = g.xi_norm(i);
            C64::new(-x * x, 0.0)
        })
    }

    pub fn gradient(&self) -> VectorField {
        VectorField {
            comps: [0, 1, 2].map(|a| self.derivative(a)),
        }
    }

    /// Zeroes every mode outside the 2/3-rule cube `|k_i| <= n/3`.
    pub fn dealias(&mut self) {
        let g = self.grid;
        par::for_each_indexed(&mut self.coeffs, |i, c| {
            if !g.is_dealiased(i) {
                *c = C64::default();
            }
        });
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        self.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(c, o)| *c += alpha * o);
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(NskError::GridMismatch)
        }
    }
}

/// Inverse transforms of two real fields with a single complex FFT.
pub(crate) fn inverse_pair(f: &SpectralField, g: &SpectralField) -> (Vec<f64>, Vec<f64>) {
    let grid = f.grid;
    let mut data: Vec<C64> = f
        .coeffs
        .iter()
        .zip(&g.coeffs)
        .map(|(a, b)| a + C64::i() * b)
        .collect();
    Fft3::plan(grid.n()).inverse(&mut data);
    let w = grid.period().powi(-3);
    data.iter().map(|c| (c.re * w, c.im * w)).unzip()
}

/// Inverse transforms of many real fields, two per complex FFT.
pub(crate) fn inverse_many(fields: &[&SpectralField]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        match pair {
            [f, g] => {
                let (a, b) = inverse_pair(f, g);
                out.push(a);
                out.push(b);
            }
            [f] => out.push(f.to_physical_unchecked()),
            _ => unreachable!(),
        }
    }
    out
}

/// Flat indices of the modes kept by the 2/3 rule.
pub(crate) fn dealiased_indices(grid: GridSpec) -> Vec<usize> {
    let keep = grid.dealias_axis_mask();
    let n = grid.n();
    let kept: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    let mut out = Vec::with_capacity(kept.len().pow(3));
    for &i0 in &kept {
        for &i1 in &kept {
            for &i2 in &kept {
                out.push((i0 * n + i1) * n + i2);
            }
        }
    }
    out
}

/// Physical samples of the 2/3 truncations of `fields`, two per complex FFT.
pub(crate) fn inverse_many_truncated(fields: &[&SpectralField]) -> Vec<Vec<f64>> {
    let Some(first) = fields.first() else {
        return Vec::new();
    };
    let grid = first.grid;
    let keep = grid.dealias_axis_mask();
    let idx = dealiased_indices(grid);
    let plan = Fft3::plan(grid.n());
    let w = grid.period().powi(-3);
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let mut data = vec![C64::default(); grid.len()];
        for &i in &idx {
            let b = pair.get(1).map_or(C64::default(), |g| g.coeffs[i]);
            data[i] = pair[0].coeffs[i] + C64::i() * b;
        }
        plan.inverse_supported(&mut data, &keep);
        out.push(data.iter().map(|c| c.re * w).collect());
        if pair.len() == 2 {
            out.push(data.iter().map(|c| c.im * w).collect());
        }
    }
    out
}

/// 2/3-truncated spectra of real sample arrays, two per complex FFT.
pub(crate) fn forward_many_truncated(grid: GridSpec, values: &[Vec<f64>]) -> Vec<SpectralField> {
    let keep = grid.dealias_axis_mask();
    let idx = dealiased_indices(grid);
    let plan = Fft3::plan(grid.n());
    let w = grid.cell_volume();
    let mut out = Vec::with_capacity(values.len());
    for pair in values.chunks(2) {
        let mut z: Vec<C64> = match pair {
            [f, g] => f.iter().zip(g).map(|(&a, &b)| C64::new(a, b)).collect(),
            [f] => f.iter().map(|&a| C64::from(a)).collect(),
            _ => unreachable!(),
        };
        plan.forward_restricted(&mut z, &keep);
        let mut fa = SpectralField::zeros(grid);
        let mut ga = SpectralField::zeros(grid);
        for &i in &idx {
            let zk = z[i];
            let zm = z[grid.neg_index(i)].conj();
            fa.coeffs[i] = 0.5 * w * (zk + zm);
            ga.coeffs[i] = C64::new(0.0, -0.5) * w * (zk - zm);
        }
        out.push(fa);
        if pair.len() == 2 {
            out.push(ga);
        }
    }
    out
}

/// Product of two fields evaluated in physical space and truncated by the
/// 2/3 rule.
pub fn dealias_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_grid(g)?;
    let (a, b) = inverse_pair(f, g);
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(SpectralField::from_physical(f.grid, &prod)?.dealiased())
}

impl Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(s);
        out
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self * -1.0
    }
}

/// Real vector field with three spectral components.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub comps: [SpectralField; 3],
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            comps: [0, 1, 2].map(|_| SpectralField::zeros(grid)),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.comps[0].grid()
    }

    pub fn divergence(&self) -> SpectralField {
        let mut out = self.comps[0].derivative(0);
        out += &self.comps[1].derivative(1);
        out += &self.comps[2].derivative(2);
        out
    }

    pub fn dealias(&mut self) {
        self.comps.iter_mut().for_each(SpectralField::dealias);
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .map(SpectralField::max_abs)
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, s: f64) {
        self.comps.iter_mut().for_each(|c| c.scale(s));
    }

    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        self.comps
            .iter_mut()
            .zip(&other.comps)
            .for_each(|(c, o)| c.axpy(alpha, o));
    }
}

/// State of the perturbation system: density fluctuation `a` and momentum `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub a: SpectralField,
    pub m: VectorField,
}

impl FlowState {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            a: SpectralField::zeros(grid),
            m: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.a.grid()
    }

    /// The four scalar components `(a, m1, m2, m3)`.
    pub fn components(&self) -> [&SpectralField; 4] {
        [
            &self.a,
            &self.m.comps[0],
            &self.m.comps[1],
            &self.m.comps[2],
        ]
    }

    /// Per-mode vectors `(a, m1, m2, m3)`.
    pub fn to_modes(&self) -> Vec<[C64; 4]> {
        let [a, m0, m1, m2] = self.components().map(SpectralField::coeffs);
        par::map_range(self.grid().len(), |i| [a[i], m0[i], m1[i], m2[i]])
    }

    pub fn from_modes(grid: GridSpec, modes: &[[C64; 4]]) -> Self {
        let comp = |c: usize| SpectralField {
            grid,
            coeffs: modes.iter().map(|v| v[c]).collect(),
        };
        Self {
            a: comp(0),
            m: VectorField {
                comps: [comp(1), comp(2), comp(3)],
            },
        }
    }

    /// The seven scalar fields `(a, eps da/dx_i, m_i)` entering the energy
    /// functionals.
    pub fn augmented(&self, eps: f64) -> Vec<SpectralField> {
        let mut out = Vec::with_capacity(7);
        out.push(self.a.clone());
        out.extend((0..3).map(|ax| &self.a.derivative(ax) * eps));
        out.extend(self.m.comps.iter().cloned());
        out
    }

    pub fn dealias(&mut self) {
        self.a.dealias();
        self.m.dealias();
    }

    pub fn max_abs(&self) -> f64 {
        self.a.max_abs().max(self.m.max_abs())
    }

    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        self.a.axpy(alpha, &other.a);
        self.m.axpy(alpha, &other.m);
    }

    pub fn scale(&mut self, s: f64) {
        self.a.scale(s);
        self.m.scale(s);
    }
}
