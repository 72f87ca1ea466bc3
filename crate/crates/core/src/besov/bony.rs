use crate::error::Result;
use crate::spectral::{dealias_product, DyadicDecomposition, SpectralField};

/// Paraproduct `T_f g = sum_j S_{j-1} f Delta_j g`.
pub fn paraproduct(
    f: &SpectralField,
    g: &SpectralField,
    dyadic: &DyadicDecomposition,
) -> Result<SpectralField> {
    let mut out = SpectralField::zeros(*f.grid());
    for j in dyadic.j_min()..=dyadic.j_max() {
        let low = dyadic.low_cutoff(f, j - 1)?;
        let blk = dyadic.project(g, j)?;
        out += &dealias_product(&low, &blk)?;
    }
    Ok(out)
}

/// Remainder `R(f, g) = sum_j sum_{|j' - j| <= 1} Delta_j f Delta_{j'} g`.
pub fn remainder(
    f: &SpectralField,
    g: &SpectralField,
    dyadic: &DyadicDecomposition,
) -> Result<SpectralField> {
    let gb = dyadic.project_all(g)?;
    let mut out = SpectralField::zeros(*f.grid());
    for (b, j) in (dyadic.j_min()..=dyadic.j_max()).enumerate() {
        let mut near = gb[b].clone();
        if b > 0 {
            near += &gb[b - 1];
        }
        if b + 1 < gb.len() {
            near += &gb[b + 1];
        }
        out += &dealias_product(&dyadic.project(f, j)?, &near)?;
    }
    Ok(out)
}

/// Relative residual `max |T_f g + T_g f + R(f,g) - fg| / max |fg|` for
/// fields supported where the block family sums to one.
pub fn bony_residual(
    f: &SpectralField,
    g: &SpectralField,
    dyadic: &DyadicDecomposition,
) -> Result<f64> {
    dyadic.check_band_limited(f, 0.0)?;
    dyadic.check_band_limited(g, 0.0)?;
    let full = dealias_product(f, g)?;
    let mut sum = paraproduct(f, g, dyadic)?;
    sum += &paraproduct(g, f, dyadic)?;
    sum += &remainder(f, g, dyadic)?;
    Ok((&sum - &full).max_abs() / full.max_abs().max(f64::MIN_POSITIVE))
}
