//! Experiment configuration: a flat `key = value` text file with sections,
//! parsed as TOML. The full schema lives in `docs/config.md`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::linear::StrichartzSetup;
use crate::params::PhysParams;
use crate::solver::{DataSpec, NonlinearOptions, PicardConfig, SolverConfig, TrackerConfig};
use crate::spectral::{DyadicDecomposition, GridSpec};

/// Configuration problems, always naming the offending field.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error("invalid config field `{field}`: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    LinearDecay,
    EnergyExponents,
    Strichartz,
    LemmaConstants,
    Picard,
    PhaseDiagram,
    SingleRun,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::LinearDecay,
        Self::EnergyExponents,
        Self::Strichartz,
        Self::LemmaConstants,
        Self::Picard,
        Self::PhaseDiagram,
        Self::SingleRun,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::LinearDecay => "linear_decay",
            Self::EnergyExponents => "energy_exponents",
            Self::Strichartz => "strichartz",
            Self::LemmaConstants => "lemma_constants",
            Self::Picard => "picard",
            Self::PhaseDiagram => "phase_diagram",
            Self::SingleRun => "single_run",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| field_err("kind", format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n: usize,
    /// Box side in units of `2 pi`.
    pub period_over_2pi: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n: 32,
            period_over_2pi: 16.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsSection {
    pub mu: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub eps: f64,
    pub omega: f64,
    pub gamma: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        let p = PhysParams::default();
        Self {
            mu: p.mu,
            lambda: p.lambda,
            kappa: p.kappa,
            eps: p.eps,
            omega: p.omega,
            gamma: p.gamma,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotKind {
    Binary,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub h: f64,
    pub t_end: f64,
    pub track_every: usize,
    pub g_bound: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub beta: f64,
    pub frozen_coefficients: bool,
    pub capillary: bool,
    pub density_floor: f64,
    /// Snapshot stride in steps for `single_run`; 0 keeps only the endpoints.
    pub snapshot_every: usize,
    pub snapshot_format: SnapshotKind,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            h: s.h,
            t_end: s.t_end,
            track_every: s.track_every,
            g_bound: s.g_bound,
            p: s.tracker.p,
            q: s.tracker.q,
            r: s.tracker.r,
            beta: s.tracker.beta,
            frozen_coefficients: s.options.frozen_coefficients,
            capillary: s.options.capillary,
            density_floor: s.options.density_floor,
            snapshot_every: 0,
            snapshot_format: SnapshotKind::Binary,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardSection {
    pub t_end: f64,
    pub steps: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub ball_radius: f64,
    /// Step of the ETD2 reference run.
    pub etd_h: f64,
}

impl Default for PicardSection {
    fn default() -> Self {
        let p = PicardConfig::default();
        Self {
            t_end: p.t_end,
            steps: p.steps,
            tol: p.tol,
            max_iter: p.max_iter,
            ball_radius: p.ball_radius,
            etd_h: 1e-3,
        }
    }
}

/// Settings of the dispersive measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionSection {
    /// Datum shell `lo <= |xi| <= hi`.
    pub shell_lo: f64,
    pub shell_hi: f64,
    pub horizon: f64,
    pub steps_per_segment: usize,
    /// First time step in units of `1/|Omega|`.
    pub first_step: f64,
}

impl Default for DispersionSection {
    fn default() -> Self {
        let s = StrichartzSetup::default();
        Self {
            shell_lo: 6.0,
            shell_hi: 20.0,
            horizon: s.horizon,
            steps_per_segment: s.steps_per_segment,
            first_step: s.first_step,
        }
    }
}

/// Sweep axes. Which ones are required depends on the experiment kind.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub omegas: Option<Vec<f64>>,
    pub epsilons: Option<Vec<f64>>,
    /// `|xi|` samples.
    pub xi: Option<Vec<f64>>,
    /// Time exponents.
    pub rs: Option<Vec<f64>>,
    pub low_blocks: Option<Vec<i32>>,
    pub high_blocks: Option<Vec<i32>>,
    /// `(p, q, r)` exponent triples.
    pub triples: Option<Vec<[f64; 3]>>,
    /// When set, `eps = product / |Omega|` for every rate and `epsilons` is ignored.
    pub omega_eps_product: Option<f64>,
    /// Explicit `[Omega, eps]` pairs; override `omegas` and `epsilons`.
    pub pairs: Option<Vec<[f64; 2]>>,
    /// Random samples per sampled check.
    pub samples: Option<usize>,
    /// Directions per `|xi|` in the decay sweep.
    pub directions: Option<usize>,
}

/// Band-limited random initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    /// `[j, norm]` pairs for the density.
    pub a_blocks: Vec<(i32, f64)>,
    /// `[j, norm]` pairs for each momentum component.
    pub m_blocks: Vec<(i32, f64)>,
    /// Frequency-side Lebesgue exponent of the block norms.
    pub p: f64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            a_blocks: vec![(-2, 1.0)],
            m_blocks: vec![(-2, 1.0)],
            p: 2.0,
        }
    }
}

/// Pass/fail thresholds; defaults equal the acceptance values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    pub conservation_tol: f64,
    pub lyapunov_lo: f64,
    pub lyapunov_hi: f64,
    pub decay_margin_min: f64,
    pub energy_slope_tol: f64,
    pub strichartz_slope_tol: f64,
    pub bony_tol: f64,
    pub partition_tol: f64,
    pub homogeneity_tol: f64,
    pub refinement_factor: f64,
    pub picard_agreement: f64,
    pub mid_band_tol: f64,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        Self {
            conservation_tol: 1e-10,
            lyapunov_lo: 0.5,
            lyapunov_hi: 1.5,
            decay_margin_min: 0.0,
            energy_slope_tol: 0.15,
            strichartz_slope_tol: 0.1,
            bony_tol: 1e-10,
            partition_tol: 1e-12,
            homogeneity_tol: 1e-10,
            refinement_factor: 2.0,
            picard_agreement: 1e-6,
            mid_band_tol: 0.02,
        }
    }
}

impl ThresholdSection {
    fn validate(&self) -> Result<(), ConfigError> {
        let t = self;
        for (name, v) in [
            ("conservation_tol", t.conservation_tol),
            ("energy_slope_tol", t.energy_slope_tol),
            ("strichartz_slope_tol", t.strichartz_slope_tol),
            ("bony_tol", t.bony_tol),
            ("partition_tol", t.partition_tol),
            ("homogeneity_tol", t.homogeneity_tol),
            ("picard_agreement", t.picard_agreement),
        ] {
            positive(&format!("thresholds.{name}"), v)?;
        }
        if !(t.mid_band_tol >= 0.0 && t.mid_band_tol.is_finite()) {
            return Err(field_err(
                "thresholds.mid_band_tol",
                "must be finite and non-negative",
            ));
        }
        if !t.decay_margin_min.is_finite() {
            return Err(field_err("thresholds.decay_margin_min", "must be finite"));
        }
        if !(t.refinement_factor >= 1.0 && t.refinement_factor.is_finite()) {
            return Err(field_err(
                "thresholds.refinement_factor",
                "must be finite and at least 1",
            ));
        }
        positive("thresholds.lyapunov_lo", t.lyapunov_lo)?;
        if !(t.lyapunov_hi > t.lyapunov_lo && t.lyapunov_hi.is_finite()) {
            return Err(field_err(
                "thresholds.lyapunov_hi",
                "must be finite and above lyapunov_lo",
            ));
        }
        Ok(())
    }
}

/// Recorded outcome of a run at one `(Omega, eps)`, checked on every rerun.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedStatus {
    pub omega: f64,
    pub eps: f64,
    /// One of `bounded`, `norm_growth`, `inadmissible_density`, `picard_divergence`.
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub picard: PicardSection,
    #[serde(default)]
    pub dispersion: DispersionSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub thresholds: ThresholdSection,
    #[serde(default)]
    pub expect: Vec<ExpectedStatus>,
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field_err(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn nonempty<'a, T>(field: &str, v: &'a Option<Vec<T>>) -> Result<&'a [T], ConfigError> {
    match v {
        None => Err(field_err(field, "required for this experiment kind")),
        Some(v) if v.is_empty() => Err(field_err(field, "sweep axis must be nonempty")),
        Some(v) => Ok(v),
    }
}

impl ExperimentConfig {
    /// Parses and validates a config text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Canonical text form; the hash is taken over it.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 12 hex digits of the SHA-256 of [`ExperimentConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        GridSpec::new(2.0 * PI * self.grid.period_over_2pi, self.grid.n).map_err(|e| {
            let p = self.grid.period_over_2pi;
            let field = if p.is_finite() && p > 0.0 {
                "grid.n"
            } else {
                "grid.period_over_2pi"
            };
            field_err(field, e.to_string())
        })
    }

    pub fn dyadic(&self) -> Result<DyadicDecomposition, ConfigError> {
        DyadicDecomposition::new(self.grid()?).map_err(|e| field_err("grid.n", e.to_string()))
    }

    pub fn params(&self) -> PhysParams {
        let p = &self.params;
        PhysParams {
            mu: p.mu,
            lambda: p.lambda,
            kappa: p.kappa,
            eps: p.eps,
            omega: p.omega,
            gamma: p.gamma,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            h: s.h,
            t_end: s.t_end,
            track_every: s.track_every,
            tracker: TrackerConfig {
                p: s.p,
                q: s.q,
                r: s.r,
                beta: s.beta,
            },
            g_bound: s.g_bound,
            options: NonlinearOptions {
                frozen_coefficients: s.frozen_coefficients,
                capillary: s.capillary,
                density_floor: s.density_floor,
            },
        }
    }

    pub fn picard_config(&self) -> PicardConfig {
        let p = &self.picard;
        PicardConfig {
            t_end: p.t_end,
            steps: p.steps,
            tol: p.tol,
            max_iter: p.max_iter,
            ball_radius: p.ball_radius,
            p: self.solver.p,
        }
    }

    pub fn data_spec(&self) -> DataSpec {
        DataSpec {
            a_blocks: self.data.a_blocks.clone(),
            m_blocks: self.data.m_blocks.clone(),
            p: self.data.p,
            seed: self.seed,
        }
    }

    /// `(Omega, eps)` pairs of a rate sweep.
    pub fn rate_pairs(&self) -> Vec<(f64, f64)> {
        if let Some(pairs) = &self.sweep.pairs {
            return pairs.iter().map(|&[w, e]| (w, e)).collect();
        }
        let omegas = self.sweep.omegas.clone().unwrap_or_default();
        match self.sweep.omega_eps_product {
            Some(c) => omegas.iter().map(|&w| (w, c / w.abs())).collect(),
            None => {
                let eps = self.sweep.epsilons.clone().unwrap_or_default();
                omegas
                    .iter()
                    .flat_map(|&w| eps.iter().map(move |&e| (w, e)))
                    .collect()
            }
        }
    }

    pub fn samples(&self, default: usize) -> usize {
        self.sweep.samples.unwrap_or(default)
    }

    /// Checks every constraint, reporting the first violated field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid()?;
        self.validate_params()?;
        self.thresholds.validate()?;
        match self.kind {
            ExperimentKind::LinearDecay => {
                for (i, x) in nonempty("sweep.xi", &self.sweep.xi)?.iter().enumerate() {
                    positive(&format!("sweep.xi[{i}]"), *x)?;
                }
                self.validate_rates(true)?;
                if self.sweep.directions == Some(0) {
                    return Err(field_err("sweep.directions", "must be positive"));
                }
            }
            ExperimentKind::EnergyExponents => {
                for (i, r) in nonempty("sweep.rs", &self.sweep.rs)?.iter().enumerate() {
                    if !(*r >= 1.0) {
                        return Err(field_err(
                            &format!("sweep.rs[{i}]"),
                            format!("r = {r} must be at least 1"),
                        ));
                    }
                }
                let low = nonempty("sweep.low_blocks", &self.sweep.low_blocks)?;
                let high = nonempty("sweep.high_blocks", &self.sweep.high_blocks)?;
                if low.len() < 2 || high.len() < 2 {
                    return Err(field_err(
                        "sweep.low_blocks",
                        "each band needs at least two blocks for a slope",
                    ));
                }
                let (w, e) = self.single_rate()?;
                let split = (w * e).abs();
                if let Some(j) = low.iter().find(|&&j| 2f64.powi(j) > split) {
                    return Err(field_err(
                        "sweep.low_blocks",
                        format!("block {j} has 2^j > |Omega| eps = {split}"),
                    ));
                }
                if let Some(j) = high.iter().find(|&&j| 2f64.powi(j) <= split) {
                    return Err(field_err(
                        "sweep.high_blocks",
                        format!("block {j} has 2^j <= |Omega| eps = {split}"),
                    ));
                }
            }
            ExperimentKind::Strichartz => {
                let omegas = nonempty("sweep.omegas", &self.sweep.omegas)?;
                if omegas.len() < 2 || omegas.iter().any(|w| !(w.abs() > 0.0)) {
                    return Err(field_err(
                        "sweep.omegas",
                        "need at least two nonzero rotation rates",
                    ));
                }
                let triples = nonempty("sweep.triples", &self.sweep.triples)?;
                for (i, t) in triples.iter().enumerate() {
                    self.strichartz_setup(*t)
                        .validate()
                        .map_err(|e| field_err(&format!("sweep.triples[{i}]"), e.to_string()))?;
                }
                positive(
                    "sweep.epsilons[0]",
                    nonempty("sweep.epsilons", &self.sweep.epsilons)?[0],
                )?;
                let d = &self.dispersion;
                positive("dispersion.shell_lo", d.shell_lo)?;
                if !(d.shell_hi > d.shell_lo) {
                    return Err(field_err(
                        "dispersion.shell_hi",
                        "must exceed dispersion.shell_lo",
                    ));
                }
                positive("dispersion.horizon", d.horizon)?;
                positive("dispersion.first_step", d.first_step)?;
                if d.steps_per_segment == 0 {
                    return Err(field_err(
                        "dispersion.steps_per_segment",
                        "must be positive",
                    ));
                }
            }
            ExperimentKind::LemmaConstants => {
                if self.samples(100) == 0 {
                    return Err(field_err("sweep.samples", "must be positive"));
                }
                let fine = GridSpec::new(2.0 * PI * self.grid.period_over_2pi, 2 * self.grid.n);
                fine.map_err(|e| field_err("grid.n", format!("refined grid: {e}")))?;
            }
            ExperimentKind::Picard => {
                let p = &self.picard;
                positive("picard.t_end", p.t_end)?;
                positive("picard.tol", p.tol)?;
                positive("picard.ball_radius", p.ball_radius)?;
                positive("picard.etd_h", p.etd_h)?;
                if p.steps == 0 {
                    return Err(field_err("picard.steps", "must be positive"));
                }
                if p.max_iter == 0 {
                    return Err(field_err("picard.max_iter", "must be positive"));
                }
                let ratio = p.t_end / p.etd_h;
                if (ratio - ratio.round()).abs() > 1e-9
                    || !(ratio.round() as usize).is_multiple_of(p.steps)
                {
                    return Err(field_err(
                        "picard.etd_h",
                        "t_end / etd_h must be a multiple of picard.steps so both grids share samples",
                    ));
                }
                self.validate_solver()?;
                self.validate_data()?;
            }
            ExperimentKind::PhaseDiagram => {
                self.validate_rates(false)?;
                self.validate_solver()?;
                self.validate_data()?;
            }
            ExperimentKind::SingleRun => {
                self.validate_solver()?;
                self.validate_data()?;
            }
        }
        for (i, e) in self.expect.iter().enumerate() {
            if crate::solver::RunStatus::parse(&e.status).is_none() {
                return Err(field_err(
                    &format!("expect[{i}].status"),
                    format!("unknown status `{}`", e.status),
                ));
            }
        }
        Ok(())
    }

    fn validate_params(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        positive("params.mu", p.mu)?;
        positive("params.kappa", p.kappa)?;
        positive("params.eps", p.eps)?;
        if !(2.0 * p.mu + p.lambda > 0.0) {
            return Err(field_err("params.lambda", "2 mu + lambda must be positive"));
        }
        if !p.omega.is_finite() {
            return Err(field_err("params.omega", "must be finite"));
        }
        if !(p.gamma > 1.0) {
            return Err(field_err(
                "params.gamma",
                format!("gamma = {} must exceed 1", p.gamma),
            ));
        }
        Ok(())
    }

    fn validate_rates(&self, require_small_product: bool) -> Result<(), ConfigError> {
        if let Some(pairs) = &self.sweep.pairs {
            if pairs.is_empty() {
                return Err(field_err("sweep.pairs", "sweep axis must be nonempty"));
            }
            for (i, [w, e]) in pairs.iter().enumerate() {
                if !w.is_finite() {
                    return Err(field_err(
                        &format!("sweep.pairs[{i}]"),
                        format!("Omega = {w} is not finite"),
                    ));
                }
                positive(&format!("sweep.pairs[{i}]"), *e)?;
            }
            return self.validate_product(require_small_product);
        }
        let omegas = nonempty("sweep.omegas", &self.sweep.omegas)?;
        if let Some((i, w)) = omegas.iter().enumerate().find(|(_, w)| !w.is_finite()) {
            return Err(field_err(
                &format!("sweep.omegas[{i}]"),
                format!("{w} is not finite"),
            ));
        }
        match self.sweep.omega_eps_product {
            Some(c) => {
                positive("sweep.omega_eps_product", c)?;
                if omegas.contains(&0.0) {
                    return Err(field_err(
                        "sweep.omegas",
                        "zero rate cannot carry a fixed |Omega| eps product",
                    ));
                }
            }
            None => {
                for (i, e) in nonempty("sweep.epsilons", &self.sweep.epsilons)?
                    .iter()
                    .enumerate()
                {
                    positive(&format!("sweep.epsilons[{i}]"), *e)?;
                }
            }
        }
        self.validate_product(require_small_product)
    }

    fn validate_product(&self, require_small_product: bool) -> Result<(), ConfigError> {
        if require_small_product {
            if let Some((w, e)) = self
                .rate_pairs()
                .into_iter()
                .find(|(w, e)| (w * e).abs() > 1.0)
            {
                return Err(field_err(
                    "sweep.omegas",
                    format!("|Omega| eps = {} exceeds 1 at Omega = {w}", (w * e).abs()),
                ));
            }
        }
        Ok(())
    }

    fn single_rate(&self) -> Result<(f64, f64), ConfigError> {
        let w = nonempty("sweep.omegas", &self.sweep.omegas)?[0];
        let e = nonempty("sweep.epsilons", &self.sweep.epsilons)?[0];
        positive("sweep.epsilons[0]", e)?;
        if !(w.abs() > 0.0) {
            return Err(field_err("sweep.omegas[0]", "must be nonzero"));
        }
        Ok((w, e))
    }

    fn validate_solver(&self) -> Result<(), ConfigError> {
        let s = &self.solver;
        positive("solver.h", s.h)?;
        positive("solver.t_end", s.t_end)?;
        if s.h > s.t_end {
            return Err(field_err("solver.h", "must not exceed solver.t_end"));
        }
        if s.track_every == 0 {
            return Err(field_err("solver.track_every", "must be positive"));
        }
        if !(s.g_bound > 1.0) {
            return Err(field_err("solver.g_bound", "must exceed 1"));
        }
        if !(s.density_floor >= 0.0 && s.density_floor < 1.0) {
            return Err(field_err("solver.density_floor", "must lie in [0, 1)"));
        }
        positive("solver.beta", s.beta)?;
        self.solver_config()
            .tracker
            .validate()
            .map_err(|e| field_err("solver.r", format!("tracker exponents (p, q, r): {e}")))
    }

    fn validate_data(&self) -> Result<(), ConfigError> {
        let d = self.dyadic()?;
        positive("data.p", self.data.p)?;
        if !(self.data.p >= 1.0) {
            return Err(field_err("data.p", "must be at least 1"));
        }
        for (name, blocks) in [
            ("data.a_blocks", &self.data.a_blocks),
            ("data.m_blocks", &self.data.m_blocks),
        ] {
            for (i, &(j, amp)) in blocks.iter().enumerate() {
                if d.block(j).is_none() {
                    return Err(field_err(
                        &format!("{name}[{i}]"),
                        format!(
                            "block {j} outside the resolved range {}..={}",
                            d.j_min(),
                            d.j_max()
                        ),
                    ));
                }
                if !(amp.is_finite() && amp >= 0.0) {
                    return Err(field_err(
                        &format!("{name}[{i}]"),
                        format!("norm {amp} must be non-negative"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn strichartz_setup(&self, triple: [f64; 3]) -> StrichartzSetup {
        let d = &self.dispersion;
        StrichartzSetup {
            p: triple[0],
            q: triple[1],
            r: triple[2],
            eps: self
                .sweep
                .epsilons
                .as_ref()
                .and_then(|e| e.first().copied())
                .unwrap_or(1.0 / 256.0),
            omegas: self.sweep.omegas.clone().unwrap_or_default(),
            horizon: d.horizon,
            steps_per_segment: d.steps_per_segment,
            first_step: d.first_step,
        }
    }
}
