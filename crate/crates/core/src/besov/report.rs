use crate::error::Result;
use crate::spectral::{DyadicDecomposition, SpectralField};

use super::norms::{Band, BesovNorm, Flavor};
use super::trace::TimeTrace;

/// One line of a norm report. `r` is `None` for purely spatial norms.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReportRow {
    pub norm_kind: String,
    pub s: f64,
    pub p: f64,
    pub sigma: f64,
    pub r: Option<f64>,
    pub band: String,
    pub value: f64,
    /// Share of the field outside the resolved block family.
    pub tail_mass: f64,
}

impl NormReportRow {
    pub const CSV_HEADER: &'static str = "norm_kind,s,p,sigma,r,band,value,tail_mass";

    /// Spatial norm of a single field.
    pub fn spatial(
        norm: &BesovNorm,
        f: &SpectralField,
        dyadic: &DyadicDecomposition,
    ) -> Result<Self> {
        Ok(Self {
            norm_kind: norm.flavor.name().into(),
            s: norm.s,
            p: norm.p,
            sigma: norm.sigma,
            r: None,
            band: norm.band.label(),
            value: norm.eval(f, dyadic)?,
            tail_mass: dyadic.tail_mass(f),
        })
    }

    /// Chemin-Lerner norm of a sampled trajectory; `tail_mass` is supplied by
    /// the caller since the trace keeps block norms only.
    #[allow(clippy::too_many_arguments)]
    pub fn chemin_lerner(
        flavor: Flavor,
        trace: &TimeTrace,
        s: f64,
        p: f64,
        sigma: f64,
        r: f64,
        band: Band,
        tail_mass: f64,
    ) -> Self {
        Self {
            norm_kind: format!("chemin_lerner_{}", flavor.name()),
            s,
            p,
            sigma,
            r: Some(r),
            band: band.label(),
            value: trace.chemin_lerner(s, r, sigma, band),
            tail_mass,
        }
    }

    pub fn csv(&self) -> String {
        let r = self.r.map(|r| format!("{r}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{:.12e},{:.6e}",
            self.norm_kind, self.s, self.p, self.sigma, r, self.band, self.value, self.tail_mass
        )
    }
}
