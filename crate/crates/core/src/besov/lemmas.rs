use serde::{Deserialize, Serialize};

use crate::error::{NskError, Result};
use crate::spectral::{dealias_product, DyadicDecomposition, SpectralField};

use super::norms::{check_exponent, conjugate, weighted_lq, Band, BesovNorm, Flavor};

/// Bernstein ratio `|| |D|^k f ||_{L^q^} / (2^{jk + 3j(1/p - 1/q)} || f ||_{L^p^})`
/// for `f` with spectrum in the support of block `j`.
pub fn bernstein_ratio(
    f: &SpectralField,
    dyadic: &DyadicDecomposition,
    j: i32,
    k: f64,
    p: f64,
    q: f64,
) -> Result<f64> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    if q < p {
        return Err(NskError::Hypothesis(format!(
            "need p <= q, got p = {p}, q = {q}"
        )));
    }
    let g = *f.grid();
    if g != *dyadic.grid() {
        return Err(NskError::GridMismatch);
    }
    let (lo, hi) = (0.75 * 2f64.powi(j), 8.0 / 3.0 * 2f64.powi(j));
    let c = f.coeffs();
    if let Some(i) = (0..g.len()).find(|&i| {
        let r = g.xi_norm(i);
        c[i].norm() > 0.0 && (r < lo || r > hi)
    }) {
        return Err(NskError::Hypothesis(format!(
            "mode {:?} lies outside the support of block {j}",
            g.mode(i)
        )));
    }
    let w = g.frequency_cell();
    let num = weighted_lq(
        (0..g.len()).map(|i| g.xi_norm(i).powf(k) * c[i].norm()),
        conjugate(q),
        w,
    );
    let den = weighted_lq(c.iter().map(|z| z.norm()), conjugate(p), w);
    let scale = 2f64.powf(j as f64 * k + 3.0 * j as f64 * (1.0 / p - 1.0 / q));
    Ok(num / (scale * den))
}

/// Numerical probe of a bilinear product bound: evaluates both sides for a
/// pair `(f, g)` so the ratio can be tracked as an empirical constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ProductBound {
    /// `fg` in `B^^{3/p-s}_{p,1}` against two splittings `s = s1 + s2 = s3 + s4`,
    /// all factors in Fourier-Besov spaces.
    FourierSplit { p: f64, s: f64, s1: f64, s3: f64 },
    /// `fg` in `B^{3/2-s}_{2,1}` against factors in `B^{3/q-.}_{q,1}`.
    BesovSplit { q: f64, s: f64, s1: f64, s3: f64 },
    /// `fg` in `B^^{3/p+s}_{p,1}` against one Fourier-Besov pair and one Besov pair.
    Mixed {
        p: f64,
        q: f64,
        s: f64,
        s1: f64,
        s2: f64,
    },
    /// High-frequency part `2^j > beta` of [`ProductBound::Mixed`], with the
    /// Fourier-Besov factor of `g` restricted to `2^j > beta/16`.
    MixedHigh {
        p: f64,
        q: f64,
        s: f64,
        s1: f64,
        s2: f64,
        beta: f64,
    },
}

/// Both sides of a product bound and their ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductSample {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl ProductBound {
    pub fn name(&self) -> &'static str {
        match self {
            ProductBound::FourierSplit { .. } => "fourier_split",
            ProductBound::BesovSplit { .. } => "besov_split",
            ProductBound::Mixed { .. } => "mixed",
            ProductBound::MixedHigh { .. } => "mixed_high",
        }
    }

    /// Checks the admissible parameter range of the bound.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(NskError::Hypothesis(format!("{}: {m}", self.name())));
        match *self {
            ProductBound::FourierSplit { p, s, s1, s3 } => {
                check_exponent("p", p)?;
                let cap = 3f64.min(6.0 / p);
                if s >= cap {
                    return fail(format!("s = {s} must be below {cap}"));
                }
                if s1 < 0.0 || s3 < 0.0 {
                    return fail(format!("s1 = {s1} and s3 = {s3} must be non-negative"));
                }
            }
            ProductBound::BesovSplit { q, s, s1, s3 } => {
                if !(2.0..=4.0).contains(&q) {
                    return fail(format!("q = {q} must lie in [2, 4]"));
                }
                if s >= 6.0 / q {
                    return fail(format!("s = {s} must be below 6/q"));
                }
                if s1.min(s3) < 1.5 - 3.0 / q {
                    return fail(format!("min(s1, s3) must be at least {}", 1.5 - 3.0 / q));
                }
            }
            ProductBound::Mixed { p, q, s, s1, s2 }
            | ProductBound::MixedHigh {
                p, q, s, s1, s2, ..
            } => {
                if p < 2.0 || p.is_nan() {
                    return fail(format!("p = {p} must lie in [2, inf]"));
                }
                if !(2.0..=4.0).contains(&q) {
                    return fail(format!("q = {q} must lie in [2, 4]"));
                }
                if s <= -6.0 / q {
                    return fail(format!("s = {s} must exceed -6/q"));
                }
                if s1 < 0.0 {
                    return fail(format!("s1 = {s1} must be non-negative"));
                }
                if s2 < 1.5 - 3.0 / q {
                    return fail(format!("s2 = {s2} must be at least {}", 1.5 - 3.0 / q));
                }
                if let ProductBound::MixedHigh { beta, .. } = *self {
                    if beta <= 0.0 {
                        return fail(format!("beta = {beta} must be positive"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(
        &self,
        f: &SpectralField,
        g: &SpectralField,
        dyadic: &DyadicDecomposition,
    ) -> Result<ProductSample> {
        self.validate()?;
        let fg = dealias_product(f, g)?;
        let fb = |s: f64, p: f64| BesovNorm::fourier(s, p, 1.0);
        let pb = |s: f64, q: f64| BesovNorm::physical(s, q, 1.0);
        let (lhs, rhs) = match *self {
            ProductBound::FourierSplit { p, s, s1, s3 } => {
                let (s2, s4) = (s - s1, s - s3);
                let d = 3.0 / p;
                (
                    fb(d - s, p).eval(&fg, dyadic)?,
                    fb(d - s1, p).eval(f, dyadic)? * fb(d - s2, p).eval(g, dyadic)?
                        + fb(d - s3, p).eval(g, dyadic)? * fb(d - s4, p).eval(f, dyadic)?,
                )
            }
            ProductBound::BesovSplit { q, s, s1, s3 } => {
                let (s2, s4) = (s - s1, s - s3);
                let d = 3.0 / q;
                (
                    pb(1.5 - s, 2.0).eval(&fg, dyadic)?,
                    pb(d - s1, q).eval(f, dyadic)? * pb(d - s2, q).eval(g, dyadic)?
                        + pb(d - s3, q).eval(g, dyadic)? * pb(d - s4, q).eval(f, dyadic)?,
                )
            }
            ProductBound::Mixed { p, q, s, s1, s2 } => {
                let (dp, dq) = (3.0 / p, 3.0 / q);
                (
                    fb(dp + s, p).eval(&fg, dyadic)?,
                    fb(dp - s1, p).eval(f, dyadic)? * fb(dp + s + s1, p).eval(g, dyadic)?
                        + pb(dq - s2, q).eval(g, dyadic)? * pb(dq + s + s2, q).eval(f, dyadic)?,
                )
            }
            ProductBound::MixedHigh {
                p,
                q,
                s,
                s1,
                s2,
                beta,
            } => {
                let (dp, dq) = (3.0 / p, 3.0 / q);
                let high = |b: f64| Band::High { beta: b };
                (
                    fb(dp + s, p).with_band(high(beta)).eval(&fg, dyadic)?,
                    fb(dp - s1, p).eval(f, dyadic)?
                        * fb(dp + s + s1, p)
                            .with_band(high(beta / 16.0))
                            .eval(g, dyadic)?
                        + pb(dq - s2, q).eval(g, dyadic)? * pb(dq + s + s2, q).eval(f, dyadic)?,
                )
            }
        };
        if !(lhs.is_finite() && rhs.is_finite()) {
            return Err(NskError::NonFinite(self.name().into()));
        }
        let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
        Ok(ProductSample { lhs, rhs, ratio })
    }
}

/// `|| F(u) ||_{B^^s_{p,1}} / || u ||_{B^^s_{p,1}}` for `F` with `F(0) = 0`
/// analytic near zero, under the smallness `|| u ||_{B^^{3/p}_{p,1}} <= c`.
/// `F(u)` is evaluated pointwise and truncated by the 2/3 rule.
pub fn composition_ratio<F>(
    u: &SpectralField,
    dyadic: &DyadicDecomposition,
    s: f64,
    p: f64,
    func: F,
    smallness: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    check_exponent("p", p)?;
    let lower = -(3.0 / p).min(3.0 / conjugate(p));
    if !(s > lower && s <= 3.0 / p) {
        return Err(NskError::Hypothesis(format!(
            "s = {s} must lie in ({lower}, {}]",
            3.0 / p
        )));
    }
    if func(0.0) != 0.0 {
        return Err(NskError::Hypothesis("F(0) must vanish".into()));
    }
    let crit = BesovNorm::fourier(3.0 / p, p, 1.0).eval(u, dyadic)?;
    if crit > smallness {
        return Err(NskError::Hypothesis(format!(
            "critical norm {crit:.4e} exceeds the smallness threshold {smallness:.4e}"
        )));
    }
    let vals: Vec<f64> = u.to_physical()?.into_iter().map(func).collect();
    let fu = SpectralField::from_physical(*u.grid(), &vals)?.dealiased();
    let norm = BesovNorm::fourier(s, p, 1.0);
    Ok(norm.eval(&fu, dyadic)? / norm.eval(u, dyadic)?)
}

/// Relative excess `(lhs - rhs)/rhs` in the interpolation inequality
/// `|| f ||_{s} <= || f ||_{s1}^theta || f ||_{s2}^{1-theta}` with
/// `s = theta s1 + (1-theta) s2`. Non-positive up to roundoff.
pub fn interpolation_gap(
    f: &SpectralField,
    dyadic: &DyadicDecomposition,
    flavor: Flavor,
    (s1, s2): (f64, f64),
    theta: f64,
    p: f64,
    sigma: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(NskError::InvalidParams(format!(
            "theta = {theta} must lie in [0, 1]"
        )));
    }
    let blocks = super::norms::block_norms(f, dyadic, flavor, p)?;
    let s = theta * s1 + (1.0 - theta) * s2;
    let lhs = blocks.aggregate(s, sigma, Band::Full);
    let rhs = blocks.aggregate(s1, sigma, Band::Full).powf(theta)
        * blocks.aggregate(s2, sigma, Band::Full).powf(1.0 - theta);
    Ok((lhs - rhs) / rhs.max(f64::MIN_POSITIVE))
}
