//! Result files of one experiment run.
//!
//! Every run writes into a fresh directory `<root>/<kind>-<hash>`; when that
//! exists, the first free `<kind>-<hash>-<n>` is used instead so earlier
//! results are never touched.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;

pub const SUMMARY_FILE: &str = "summary.toml";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const CONFIG_FILE: &str = "config.toml";

/// Output directory of a single run.
#[derive(Clone, Debug)]
pub struct RunDir {
    path: PathBuf,
    hash: String,
}

impl RunDir {
    /// Creates a new, previously absent directory under `root`.
    pub fn create(root: &Path, cfg: &ExperimentConfig) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        let hash = cfg.hash();
        let base = format!("{}-{hash}", cfg.kind);
        let mut attempt = 1;
        loop {
            let name = if attempt == 1 {
                base.clone()
            } else {
                format!("{base}-{attempt}")
            };
            let path = root.join(name);
            match fs::create_dir(&path) {
                Ok(()) => {
                    fs::write(path.join(CONFIG_FILE), cfg.canonical())?;
                    return Ok(Self { path, hash });
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => attempt += 1,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// CSV file whose rows all start with the config hash.
    pub fn csv(&self, name: &str, header: &str) -> io::Result<CsvSink> {
        let mut w = BufWriter::new(File::create(self.path.join(name))?);
        writeln!(w, "config_hash,{header}")?;
        Ok(CsvSink {
            w,
            hash: self.hash.clone(),
        })
    }

    pub fn subdir(&self, name: &str) -> io::Result<PathBuf> {
        let p = self.path.join(name);
        fs::create_dir_all(&p)?;
        Ok(p)
    }

    pub fn write_plot(&self, plot: &PlotData) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(
            self.path.join(format!("plot_{}.dat", plot.name)),
        )?);
        writeln!(w, "# config_hash = {}", self.hash)?;
        for c in &plot.comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "# columns: {}", plot.columns.join(" "))?;
        for row in &plot.rows {
            writeln!(w, "{}", row.join(" "))?;
        }
        w.flush()
    }

    pub fn write_summary(&self, summary: &Summary) -> io::Result<()> {
        let text = toml::to_string(summary).map_err(io::Error::other)?;
        fs::write(self.path.join(SUMMARY_FILE), text)
    }

    pub fn write_manifest(&self, manifest: &Manifest) -> io::Result<()> {
        let text = toml::to_string(manifest).map_err(io::Error::other)?;
        fs::write(self.path.join(MANIFEST_FILE), text)
    }
}

/// Buffered CSV writer prefixing each row with the config hash.
pub struct CsvSink {
    w: BufWriter<File>,
    hash: String,
}

impl CsvSink {
    pub fn row(&mut self, fields: &str) -> io::Result<()> {
        writeln!(self.w, "{},{fields}", self.hash)
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.w.flush()
    }
}

/// Float in the fixed CSV format; `NaN` becomes an empty cell.
pub fn cell(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.12e}")
    }
}

/// Column data for plotting, with fitted-line coefficients in the header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotData {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub comments: Vec<String>,
}

impl PlotData {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn fit(&mut self, series: &str, slope: f64, intercept: f64) {
        self.comments.push(format!(
            "fit {series}: y = a + b x, a = {intercept:.12e}, b = {slope:.12e}"
        ));
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// One acceptance-style check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: value >= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    pub fn flag(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        let v = if pass { 1.0 } else { 0.0 };
        Self {
            name: name.into(),
            pass,
            value: v,
            threshold: 1.0,
            detail: detail.into(),
        }
    }
}

/// Machine-readable outcome of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    /// `pass` when every check passes, `fail` otherwise.
    pub status: String,
    pub wall_time_s: f64,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default, rename = "check")]
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            kind: cfg.kind.name().into(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            ..Self::default()
        }
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), v);
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn finalize(&mut self, wall_time_s: f64) {
        self.status = if self.all_pass() { "pass" } else { "fail" }.into();
        self.wall_time_s = wall_time_s;
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}: value {:.6e}, threshold {:.6e} ({})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold,
                    c.detail
                )
            })
            .collect()
    }
}

/// Run manifest: what was run and with which inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub crate_version: String,
    pub parallel: bool,
    pub grid_n: usize,
    pub grid_period: f64,
    pub params: BTreeMap<String, f64>,
    pub monitors: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        let p = &cfg.params;
        let s = &cfg.solver;
        let params = [
            ("mu", p.mu),
            ("lambda", p.lambda),
            ("kappa", p.kappa),
            ("eps", p.eps),
            ("omega", p.omega),
            ("gamma", p.gamma),
        ];
        let monitors = [
            ("g_bound", s.g_bound),
            ("density_floor", s.density_floor),
            ("eps_a_window", 0.5),
            ("beta", s.beta),
        ];
        let map = |xs: &[(&str, f64)]| xs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Self {
            kind: cfg.kind.name().into(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            crate_version: env!("CARGO_PKG_VERSION").into(),
            parallel: cfg!(feature = "parallel"),
            grid_n: cfg.grid.n,
            grid_period: cfg.grid.period_over_2pi * 2.0 * std::f64::consts::PI,
            params: map(&params),
            monitors: map(&monitors),
            files: Vec::new(),
        }
    }
}

/// Reads a summary written by [`RunDir::write_summary`].
pub fn read_summary(dir: &Path) -> io::Result<Summary> {
    let text = fs::read_to_string(dir.join(SUMMARY_FILE))?;
    toml::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
}
