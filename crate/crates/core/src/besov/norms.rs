use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};
use crate::par;
use crate::spectral::{DyadicDecomposition, GridSpec, SpectralField, HERMITIAN_TOL};

/// Space in which each dyadic block is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// `|| phi_j f^ ||_{L^{p'}}` on the frequency lattice.
    Fourier,
    /// `|| Delta_j f ||_{L^p}` on the collocation grid.
    Physical,
}

impl Flavor {
    pub fn name(&self) -> &'static str {
        match self {
            Flavor::Fourier => "fourier_besov",
            Flavor::Physical => "besov",
        }
    }
}

/// Hoelder conjugate exponent.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub(crate) fn check_exponent(name: &str, p: f64) -> Result<()> {
    if p >= 1.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(NskError::InvalidParams(format!(
            "{name} = {p} must lie in [1, inf]"
        )))
    }
}

/// `(sum_i w |x_i|^q)^{1/q}`, or the maximum for `q = inf`.
pub(crate) fn weighted_lq<I: Iterator<Item = f64>>(xs: I, q: f64, w: f64) -> f64 {
    if q.is_infinite() {
        xs.fold(0.0, |m, x| m.max(x.abs()))
    } else if q == 1.0 {
        w * xs.map(f64::abs).sum::<f64>()
    } else if q == 2.0 {
        (w * xs.map(|x| x * x).sum::<f64>()).sqrt()
    } else {
        (w * xs.map(|x| x.abs().powf(q)).sum::<f64>()).powf(1.0 / q)
    }
}

/// `|| f ||_{L^p^} = || f^ ||_{L^{p'}}` with frequency-cell weight `(2 pi/period)^3`.
pub fn fourier_lebesgue_norm(f: &SpectralField, p: f64) -> f64 {
    let w = f.grid().frequency_cell();
    weighted_lq(f.coeffs().iter().map(|c| c.norm()), conjugate(p), w)
}

/// Collocation `L^p` norm with weight `(period/n)^3`.
pub fn physical_lebesgue_norm(values: &[f64], grid: &GridSpec, p: f64) -> f64 {
    weighted_lq(values.iter().copied(), p, grid.cell_volume())
}

/// Range of dyadic blocks entering a norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Band {
    Full,
    /// `2^j <= alpha`
    Low {
        alpha: f64,
    },
    /// `alpha < 2^j <= beta`
    Middle {
        alpha: f64,
        beta: f64,
    },
    /// `2^j > beta`
    High {
        beta: f64,
    },
}

impl Band {
    pub fn contains(&self, j: i32) -> bool {
        let r = 2f64.powi(j);
        match *self {
            Band::Full => true,
            Band::Low { alpha } => r <= alpha,
            Band::Middle { alpha, beta } => r > alpha && r <= beta,
            Band::High { beta } => r > beta,
        }
    }

    /// Comma-free label: `full`, `low:alpha`, `mid:alpha:beta`, `high:beta`.
    pub fn label(&self) -> String {
        match *self {
            Band::Full => "full".into(),
            Band::Low { alpha } => format!("low:{alpha}"),
            Band::Middle { alpha, beta } => format!("mid:{alpha}:{beta}"),
            Band::High { beta } => format!("high:{beta}"),
        }
    }
}

/// Norms of the individual blocks `j_min..=j_max` of one scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockNorms {
    pub j_min: i32,
    pub values: Vec<f64>,
}

impl BlockNorms {
    pub fn j_max(&self) -> i32 {
        self.j_min + self.values.len() as i32 - 1
    }

    /// `|| (2^{js} b_j)_{j in band} ||_{l^sigma}`.
    pub fn aggregate(&self, s: f64, sigma: f64, band: Band) -> f64 {
        weighted_lq(
            self.values.iter().enumerate().filter_map(|(b, v)| {
                let j = self.j_min + b as i32;
                band.contains(j).then(|| 2f64.powf(j as f64 * s) * v)
            }),
            sigma,
            1.0,
        )
    }

    pub fn add(&mut self, other: &BlockNorms) {
        debug_assert_eq!(self.j_min, other.j_min);
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += b);
    }
}

/// Block norms of `f` in the chosen flavour and Lebesgue exponent.
pub fn block_norms(
    f: &SpectralField,
    dyadic: &DyadicDecomposition,
    flavor: Flavor,
    p: f64,
) -> Result<BlockNorms> {
    check_exponent("p", p)?;
    if f.grid() != dyadic.grid() {
        return Err(NskError::GridMismatch);
    }
    let values = match flavor {
        Flavor::Fourier => {
            let q = conjugate(p);
            let w = f.grid().frequency_cell();
            let c = f.coeffs();
            par::map_slice(dyadic.blocks(), |b| {
                weighted_lq(
                    b.entries.iter().map(|&(i, m)| m * c[i as usize].norm()),
                    q,
                    w,
                )
            })
        }
        Flavor::Physical => {
            let defect = f.hermitian_defect();
            if defect > HERMITIAN_TOL {
                return Err(NskError::NonHermitian { residue: defect });
            }
            let blocks = dyadic.project_all(f)?;
            let refs: Vec<&SpectralField> = blocks.iter().collect();
            crate::spectral::inverse_many(&refs)
                .iter()
                .map(|v| physical_lebesgue_norm(v, f.grid(), p))
                .collect()
        }
    };
    Ok(BlockNorms {
        j_min: dyadic.j_min(),
        values,
    })
}

/// Description of a homogeneous Besov-type norm `B^s_{p,sigma}` restricted to
/// a band of blocks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovNorm {
    pub flavor: Flavor,
    pub s: f64,
    pub p: f64,
    pub sigma: f64,
    pub band: Band,
}

impl BesovNorm {
    pub fn fourier(s: f64, p: f64, sigma: f64) -> Self {
        Self {
            flavor: Flavor::Fourier,
            s,
            p,
            sigma,
            band: Band::Full,
        }
    }

    pub fn physical(s: f64, p: f64, sigma: f64) -> Self {
        Self {
            flavor: Flavor::Physical,
            s,
            p,
            sigma,
            band: Band::Full,
        }
    }

    pub fn with_band(self, band: Band) -> Self {
        Self { band, ..self }
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    pub fn eval(&self, f: &SpectralField, dyadic: &DyadicDecomposition) -> Result<f64> {
        check_exponent("sigma", self.sigma)?;
        Ok(block_norms(f, dyadic, self.flavor, self.p)?.aggregate(self.s, self.sigma, self.band))
    }

    /// Sum of the component norms of a vector-valued quantity.
    pub fn eval_sum(&self, fields: &[&SpectralField], dyadic: &DyadicDecomposition) -> Result<f64> {
        fields.iter().map(|f| self.eval(f, dyadic)).sum()
    }
}

/// `|| f ||_{B^^s_{p,sigma}}`.
pub fn fourier_besov_norm(
    f: &SpectralField,
    dyadic: &DyadicDecomposition,
    s: f64,
    p: f64,
    sigma: f64,
) -> Result<f64> {
    BesovNorm::fourier(s, p, sigma).eval(f, dyadic)
}

/// `|| f ||_{B^s_{p,sigma}}` with blocks measured in physical `L^p`.
pub fn besov_norm(
    f: &SpectralField,
    dyadic: &DyadicDecomposition,
    s: f64,
    p: f64,
    sigma: f64,
) -> Result<f64> {
    BesovNorm::physical(s, p, sigma).eval(f, dyadic)
}
