//! One driver per experiment kind. Every driver writes `results.csv`, plot
//! files and `timing.csv` into a fresh run directory; [`run_experiment`]
//! adds `summary.toml` and `manifest.toml`.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::besov::{
    block_norms, bony_residual, composition_ratio, Band, BesovNorm, BlockNorms, Flavor,
    NormReportRow, ProductBound, TimeTrace,
};
use crate::error::NskError;
use crate::linear::{
    fit_slope, integrated_rate_slope, measure_strichartz, strichartz_datum, verify_energy_estimate,
    verify_mode_decay, DecaySample, EnergyExponentSetup, ReportRow,
};
use crate::params::PhysParams;
use crate::solver::{
    block_data, global_run, global_run_with, picard_local_solve, track_apriori, Etd2, NskForcing,
    PicardStatus, RunOutcome, RunStatus,
};
use crate::spectral::{write_snapshot, DyadicDecomposition, FlowState, GridSpec, SnapshotFormat};

use super::config::{ConfigError, ExperimentConfig, ExperimentKind, SnapshotKind};
use super::output::{
    cell, read_summary, Check, Manifest, PlotData, RunDir, Summary, CONFIG_FILE, MANIFEST_FILE,
    SUMMARY_FILE,
};
use super::sampling::{conservation_drift, embed, lyapunov_sweep, resolved_field};

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMING_FILE: &str = "timing.csv";

/// Pairs drawn for the Bony reconstruction check.
const BONY_PAIRS: usize = 50;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write results: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Solver(#[from] NskError),
}

type Result<T> = std::result::Result<T, HarnessError>;

/// Where a run wrote its files and what it concluded.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub summary: Summary,
}

/// Validates `cfg`, runs it into `<root>/<kind>-<hash>` and writes the
/// summary and manifest.
pub fn run_experiment(cfg: &ExperimentConfig, root: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let dir = RunDir::create(root, cfg)?;
    let mut summary = Summary::new(cfg);
    let mut files = match cfg.kind {
        ExperimentKind::LinearDecay => linear_decay(cfg, &dir, &mut summary)?,
        ExperimentKind::EnergyExponents => energy_exponents(cfg, &dir, &mut summary)?,
        ExperimentKind::Strichartz => strichartz(cfg, &dir, &mut summary)?,
        ExperimentKind::LemmaConstants => lemma_constants(cfg, &dir, &mut summary)?,
        ExperimentKind::Picard => picard(cfg, &dir, &mut summary)?,
        ExperimentKind::PhaseDiagram => phase_diagram(cfg, &dir, &mut summary)?,
        ExperimentKind::SingleRun => single_run(cfg, &dir, &mut summary)?,
    };
    summary.finalize(start.elapsed().as_secs_f64());
    dir.write_summary(&summary)?;
    files.extend([CONFIG_FILE, SUMMARY_FILE, MANIFEST_FILE].map(String::from));
    let mut manifest = Manifest::new(cfg);
    manifest.files = files;
    dir.write_manifest(&manifest)?;
    log::info!(
        "{} finished: {} ({})",
        cfg.kind,
        summary.status,
        dir.path().display()
    );
    Ok(RunReport {
        dir: dir.path().to_path_buf(),
        summary,
    })
}

/// Summaries of the run directory `path`, or of every run directory below it.
pub fn collect_reports(path: &Path) -> io::Result<Vec<(PathBuf, Summary)>> {
    if path.join(SUMMARY_FILE).is_file() {
        return Ok(vec![(path.to_path_buf(), read_summary(path)?)]);
    }
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join(SUMMARY_FILE).is_file())
        .collect();
    dirs.sort();
    dirs.into_iter()
        .map(|d| read_summary(&d).map(|s| (d, s)))
        .collect()
}

/// Least-squares line `y = a + b x` as `(b, a)`.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let b = fit_slope(x, y);
    let n = x.len() as f64;
    let a = (y.iter().sum::<f64>() - b * x.iter().sum::<f64>()) / n;
    (b, a)
}

fn grid_and_dyadic(cfg: &ExperimentConfig) -> Result<(GridSpec, DyadicDecomposition)> {
    Ok((cfg.grid()?, cfg.dyadic()?))
}

fn linear_decay(
    cfg: &ExperimentConfig,
    dir: &RunDir,
    summary: &mut Summary,
) -> Result<Vec<String>> {
    let params = cfg.params();
    let th = &cfg.thresholds;
    let xi = cfg.sweep.xi.clone().unwrap_or_default();
    let dirs = cfg.sweep.directions.unwrap_or(16);
    let mut csv = dir.csv(RESULTS_FILE, ReportRow::CSV_HEADER)?;
    let mut timing = dir.csv(TIMING_FILE, "omega,eps,wall_time_s")?;
    let mut plot = PlotData::new(
        "decay",
        &["log2_xi", "log_rate", "log_bound", "omega", "eps"],
    );
    let mut min_margin = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    for (w, e) in cfg.rate_pairs() {
        let t0 = Instant::now();
        let samples: Vec<DecaySample> = xi
            .iter()
            .map(|&x| DecaySample {
                xi_norm: x,
                omega: w,
                eps: e,
            })
            .collect();
        let rows = verify_mode_decay(&samples, &params, dirs)?;
        for r in &rows {
            csv.row(&r.csv())?;
            min_margin = min_margin.min(r.margin);
            min_ratio = min_ratio.min(r.measured / r.bound);
            plot.push(vec![
                cell(r.coord.log2()),
                cell(r.measured.ln()),
                cell(r.bound.ln()),
                cell(w),
                cell(e),
            ]);
        }
        let lx: Vec<f64> = rows.iter().map(|r| r.coord.log2()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r.measured.ln()).collect();
        let (b, a) = fit_line(&lx, &ly);
        plot.fit(&format!("omega={w} eps={e}"), b, a);
        timing.row(&format!(
            "{},{},{}",
            cell(w),
            cell(e),
            cell(t0.elapsed().as_secs_f64())
        ))?;
    }
    csv.finish()?;
    timing.finish()?;
    dir.write_plot(&plot)?;
    summary.value("decay_rate_over_bound_min", min_ratio);
    summary.check(Check::at_least(
        "decay_margin",
        min_margin,
        th.decay_margin_min,
        "slowest modal rate minus guaranteed rate, minimum over the sweep",
    ));

    // Low-frequency slope of the integrated rate, first sweep rate only.
    if let Some(&(w, e)) = cfg.rate_pairs().first() {
        let low: Vec<f64> = xi
            .iter()
            .copied()
            .filter(|&x| x <= 0.1 * (w * e).abs())
            .collect();
        if low.len() >= 2 {
            let p = PhysParams {
                omega: w,
                eps: e,
                ..params
            };
            summary.value(
                "integrated_rate_slope_low",
                integrated_rate_slope(&low, &p, dirs),
            );
        }
    }

    let n = cfg.samples(10_000);
    let range = lyapunov_sweep(n, cfg.seed);
    summary.value("lyapunov_ratio_min", range.min);
    summary.value("lyapunov_ratio_max", range.max);
    summary.check(Check::at_least(
        "lyapunov_ratio_min",
        range.min,
        th.lyapunov_lo,
        format!("{n} random modes and coefficients"),
    ));
    summary.check(Check::at_most(
        "lyapunov_ratio_max",
        range.max,
        th.lyapunov_hi,
        format!("{n} random modes and coefficients"),
    ));
    let drift = conservation_drift(1000, cfg.seed.wrapping_add(1), 10.0);
    summary.check(Check::at_most(
        "conservative_energy_drift",
        drift,
        th.conservation_tol,
        "1000 random modes without dissipation, t in [0, 10]",
    ));
    Ok(vec![
        RESULTS_FILE.into(),
        TIMING_FILE.into(),
        "plot_decay.dat".into(),
    ])
}

fn energy_exponents(
    cfg: &ExperimentConfig,
    dir: &RunDir,
    summary: &mut Summary,
) -> Result<Vec<String>> {
    let sw = &cfg.sweep;
    let w = sw.omegas.as_ref().map_or(0.0, |v| v[0]);
    let e = sw.epsilons.as_ref().map_or(1.0, |v| v[0]);
    let setup = EnergyExponentSetup {
        params: PhysParams {
            omega: w,
            eps: e,
            ..cfg.params()
        },
        rs: sw.rs.clone().unwrap_or_default(),
        p: cfg.data.p,
        low_blocks: sw.low_blocks.clone().unwrap_or_default(),
        high_blocks: sw.high_blocks.clone().unwrap_or_default(),
        ..EnergyExponentSetup::default()
    };
    let t0 = Instant::now();
    let report = verify_energy_estimate(&setup)?;
    let mut csv = dir.csv(RESULTS_FILE, &format!("band,{}", ReportRow::CSV_HEADER))?;
    let mut plot = PlotData::new("energy", &["j", "log2_measured", "r", "band"]);
    let band_of = |j: f64| {
        if setup.low_blocks.contains(&(j as i32)) {
            "low"
        } else {
            "high"
        }
    };
    for row in &report.rows {
        let band = band_of(row.coord);
        csv.row(&format!("{band},{}", row.csv()))?;
        plot.push(vec![
            format!("{}", row.coord),
            cell(row.measured.log2()),
            cell(row.r),
            band.into(),
        ]);
    }
    csv.finish()?;
    let tol = cfg.thresholds.energy_slope_tol;
    for &(r, low, high) in &report.slopes {
        for (band, slope, target) in [("low", low, -4.0 / r), ("high", high, -2.0 / r)] {
            let pts: Vec<(f64, f64)> = report
                .rows
                .iter()
                .filter(|x| x.r == r && band_of(x.coord) == band)
                .map(|x| (x.coord, x.measured.log2()))
                .collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let (_, a) = fit_line(&xs, &ys);
            plot.fit(&format!("r={r} band={band}"), slope, a);
            summary.value(&format!("slope_{band}_r{r}"), slope);
            summary.check(Check::at_most(
                &format!("energy_slope_{band}_r{r}"),
                (slope - target).abs(),
                tol,
                format!("log2 slope {slope:.4} against {target:.4}"),
            ));
        }
    }
    dir.write_plot(&plot)?;
    let mut timing = dir.csv(TIMING_FILE, "omega,eps,wall_time_s")?;
    timing.row(&format!(
        "{},{},{}",
        cell(w),
        cell(e),
        cell(t0.elapsed().as_secs_f64())
    ))?;
    timing.finish()?;
    Ok(vec![
        RESULTS_FILE.into(),
        TIMING_FILE.into(),
        "plot_energy.dat".into(),
    ])
}

fn strichartz(cfg: &ExperimentConfig, dir: &RunDir, summary: &mut Summary) -> Result<Vec<String>> {
    let grid = cfg.grid()?;
    let d = &cfg.dispersion;
    let datum = strichartz_datum(grid, d.shell_lo, d.shell_hi);
    let mut csv = dir.csv(RESULTS_FILE, &format!("p,q,{}", ReportRow::CSV_HEADER))?;
    let mut timing = dir.csv(TIMING_FILE, "p,q,r,wall_time_s")?;
    let mut plot = PlotData::new(
        "strichartz",
        &["log2_omega", "log_norm", "fit_residual", "p", "q", "r"],
    );
    let tol = cfg.thresholds.strichartz_slope_tol;
    for t in cfg.sweep.triples.clone().unwrap_or_default() {
        let [p, q, r] = t;
        let t0 = Instant::now();
        let rep = measure_strichartz(&cfg.strichartz_setup(t), &datum)?;
        let lx: Vec<f64> = rep.rows.iter().map(|x| x.omega.abs().log2()).collect();
        let ly: Vec<f64> = rep.rows.iter().map(|x| x.measured.ln()).collect();
        let (b, a) = fit_line(&lx, &ly);
        for (row, (x, y)) in rep.rows.iter().zip(lx.iter().zip(&ly)) {
            csv.row(&format!("{p},{q},{}", row.csv()))?;
            plot.push(vec![
                cell(*x),
                cell(*y),
                cell(y - (a + b * x)),
                format!("{p}"),
                format!("{q}"),
                format!("{r}"),
            ]);
        }
        plot.fit(&format!("p={p} q={q} r={r} (log2 Omega vs ln norm)"), b, a);
        let key = format!("p{p}_q{q}_r{r}");
        summary.value(&format!("slope_{key}"), rep.slope);
        summary.value(&format!("target_{key}"), rep.target);
        summary.check(Check::at_most(
            &format!("strichartz_slope_{key}"),
            rep.slope,
            rep.target + tol,
            format!("ln-ln slope against |Omega|, target {:.4}", rep.target),
        ));
        timing.row(&format!("{p},{q},{r},{}", cell(t0.elapsed().as_secs_f64())))?;
    }
    csv.finish()?;
    timing.finish()?;
    dir.write_plot(&plot)?;
    Ok(vec![
        RESULTS_FILE.into(),
        TIMING_FILE.into(),
        "plot_strichartz.dat".into(),
    ])
}

/// Product bounds probed by `lemma_constants`; `beta` of the high-band case
/// is set from the block family.
fn product_cases(dyadic: &DyadicDecomposition) -> Vec<ProductBound> {
    let beta = 2f64.powi(dyadic.j_min() + 2);
    vec![
        ProductBound::FourierSplit {
            p: 2.0,
            s: 1.0,
            s1: 0.5,
            s3: 0.25,
        },
        ProductBound::BesovSplit {
            q: 3.0,
            s: 1.2,
            s1: 0.6,
            s3: 0.7,
        },
        ProductBound::Mixed {
            p: 2.0,
            q: 3.0,
            s: 0.0,
            s1: 0.5,
            s2: 0.6,
        },
        ProductBound::MixedHigh {
            p: 2.0,
            q: 3.0,
            s: 0.0,
            s1: 0.5,
            s2: 0.6,
            beta,
        },
    ]
}

/// Smooth function with `F(0) = 0` used for the composition bound.
fn composition_fn(x: f64) -> f64 {
    x / (1.0 + x)
}

const COMPOSITION_S: f64 = 0.5;
const COMPOSITION_P: f64 = 2.0;
const COMPOSITION_SIZE: f64 = 0.1;
const COMPOSITION_SMALLNESS: f64 = 0.2;

/// Per-case aggregates over the samples.
#[derive(Default)]
struct CaseStats {
    max_ratio_n: f64,
    max_ratio_2n: f64,
    max_refine: f64,
    max_homogeneity: f64,
    all_finite: bool,
}

fn lemma_constants(
    cfg: &ExperimentConfig,
    dir: &RunDir,
    summary: &mut Summary,
) -> Result<Vec<String>> {
    let th = &cfg.thresholds;
    let (coarse, dc) = grid_and_dyadic(cfg)?;
    let fine = GridSpec::new(coarse.period(), 2 * coarse.n())?;
    let df = DyadicDecomposition::new(fine)?;
    let n = cfg.samples(100);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = dir.csv(
        RESULTS_FILE,
        "case,sample,ratio_n,ratio_2n,refinement_factor,homogeneity_error",
    )?;
    let mut timing = dir.csv(TIMING_FILE, "case,wall_time_s")?;
    let mut plot = PlotData::new("lemma", &["case_index", "sample", "ratio_n", "ratio_2n"]);
    let cases = product_cases(&dc);
    let mut stats: BTreeMap<String, CaseStats> = BTreeMap::new();
    let (fa, fb) = (3.7, 0.29);

    let pairs: Vec<_> = (0..n)
        .map(|_| (resolved_field(&dc, &mut rng), resolved_field(&dc, &mut rng)))
        .collect();
    for (ci, case) in cases.iter().enumerate() {
        let t0 = Instant::now();
        let st = stats.entry(case.name().into()).or_insert(CaseStats {
            all_finite: true,
            ..Default::default()
        });
        for (k, (f, g)) in pairs.iter().enumerate() {
            let rc = case.evaluate(f, g, &dc)?.ratio;
            let rf = case.evaluate(&embed(f, fine), &embed(g, fine), &df)?.ratio;
            let rs = case.evaluate(&(f * fa), &(g * fb), &dc)?.ratio;
            let refine = (rf / rc).max(rc / rf);
            let homog = (rs - rc).abs() / rc;
            st.all_finite &= [rc, rf, rs].iter().all(|r| r.is_finite() && *r > 0.0);
            st.max_ratio_n = st.max_ratio_n.max(rc);
            st.max_ratio_2n = st.max_ratio_2n.max(rf);
            st.max_refine = st.max_refine.max(refine);
            st.max_homogeneity = st.max_homogeneity.max(homog);
            csv.row(&format!(
                "{},{k},{},{},{},{}",
                case.name(),
                cell(rc),
                cell(rf),
                cell(refine),
                cell(homog)
            ))?;
            plot.push(vec![format!("{ci}"), format!("{k}"), cell(rc), cell(rf)]);
        }
        timing.row(&format!(
            "{},{}",
            case.name(),
            cell(t0.elapsed().as_secs_f64())
        ))?;
    }

    let t0 = Instant::now();
    let crit = BesovNorm::fourier(3.0 / COMPOSITION_P, COMPOSITION_P, 1.0);
    let st = stats.entry("composition".into()).or_insert(CaseStats {
        all_finite: true,
        ..Default::default()
    });
    for (k, (f, _)) in pairs.iter().enumerate() {
        let u = f * (COMPOSITION_SIZE / crit.eval(f, &dc)?);
        let uf = embed(&u, fine);
        let ratio = |u, d| {
            composition_ratio(
                u,
                d,
                COMPOSITION_S,
                COMPOSITION_P,
                composition_fn,
                COMPOSITION_SMALLNESS,
            )
        };
        let (rc, rf) = (ratio(&u, &dc)?, ratio(&uf, &df)?);
        let refine = (rf / rc).max(rc / rf);
        st.all_finite &= rc.is_finite() && rf.is_finite() && rc > 0.0 && rf > 0.0;
        st.max_ratio_n = st.max_ratio_n.max(rc);
        st.max_ratio_2n = st.max_ratio_2n.max(rf);
        st.max_refine = st.max_refine.max(refine);
        csv.row(&format!(
            "composition,{k},{},{},{},",
            cell(rc),
            cell(rf),
            cell(refine)
        ))?;
        plot.push(vec![
            format!("{}", cases.len()),
            format!("{k}"),
            cell(rc),
            cell(rf),
        ]);
    }
    timing.row(&format!("composition,{}", cell(t0.elapsed().as_secs_f64())))?;

    for (name, st) in &stats {
        let (cn, c2n) = (st.max_ratio_n, st.max_ratio_2n);
        summary.value(&format!("constant_{name}_n"), cn);
        summary.value(&format!("constant_{name}_2n"), c2n);
        summary.value(&format!("per_sample_refinement_{name}"), st.max_refine);
        summary.check(Check::flag(
            &format!("finite_{name}"),
            st.all_finite,
            format!("{n} samples on n and 2n"),
        ));
        summary.check(Check::at_most(
            &format!("refinement_{name}"),
            (c2n / cn).max(cn / c2n),
            th.refinement_factor,
            "change of the empirical constant (largest ratio over the samples) from n to 2n",
        ));
        if name != "composition" {
            summary.check(Check::at_most(
                &format!("homogeneity_{name}"),
                st.max_homogeneity,
                th.homogeneity_tol,
                format!("relative change under (f, g) -> ({fa} f, {fb} g)"),
            ));
        }
    }

    let bony = pairs
        .iter()
        .take(BONY_PAIRS)
        .map(|(f, g)| bony_residual(f, g, &dc))
        .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))?;
    summary.check(Check::at_most(
        "bony_residual",
        bony,
        th.bony_tol,
        format!("{} pairs", BONY_PAIRS.min(n)),
    ));
    let defect = dc.partition_defect().max(df.partition_defect());
    summary.check(Check::at_most(
        "partition_defect",
        defect,
        th.partition_tol,
        "resolved annulus on n and 2n",
    ));
    csv.finish()?;
    timing.finish()?;
    dir.write_plot(&plot)?;

    let mut norms = dir.csv(
        "norms.csv",
        &format!("quantity,{}", NormReportRow::CSV_HEADER),
    )?;
    if let Some((f, _)) = pairs.first() {
        for norm in report_norms(2.0, 3.0) {
            norms.row(&format!(
                "sample0_f,{}",
                NormReportRow::spatial(&norm, f, &dc)?.csv()
            ))?;
        }
    }
    norms.finish()?;
    Ok(vec![
        RESULTS_FILE.into(),
        TIMING_FILE.into(),
        "plot_lemma.dat".into(),
        "norms.csv".into(),
    ])
}

/// Spatial norms listed in norm reports for Lebesgue exponents `p`
/// (frequency side) and `q` (physical side).
fn report_norms(p: f64, q: f64) -> Vec<BesovNorm> {
    vec![
        BesovNorm::fourier(3.0 / p - 1.0, p, 1.0),
        BesovNorm::fourier(3.0 / p + 1.0, p, 1.0),
        BesovNorm::fourier(3.0 / p, p, 1.0),
        BesovNorm::physical(3.0 / q - 1.0, q, 1.0),
        BesovNorm::physical(1.5, 2.0, 2.0),
    ]
}

fn picard(cfg: &ExperimentConfig, dir: &RunDir, summary: &mut Summary) -> Result<Vec<String>> {
    let (grid, dyadic) = grid_and_dyadic(cfg)?;
    let params = cfg.params();
    let sc = cfg.solver_config();
    let pc = cfg.picard_config();
    let data = block_data(&dyadic, &cfg.data_spec())?;
    let forcing = NskForcing {
        params,
        options: sc.options,
    };
    let t0 = Instant::now();
    let rep = picard_local_solve(&data, &params, &forcing, &dyadic, &pc)?;
    let t_picard = t0.elapsed().as_secs_f64();

    let mut csv = dir.csv(RESULTS_FILE, "iteration,distance,ratio")?;
    let mut plot = PlotData::new("picard", &["iteration", "log10_distance"]);
    for (k, dist) in rep.distances.iter().enumerate() {
        let ratio = if k == 0 { f64::NAN } else { rep.ratios[k - 1] };
        csv.row(&format!("{},{},{}", k + 1, cell(*dist), cell(ratio)))?;
        plot.push(vec![format!("{}", k + 1), cell(dist.log10())]);
    }
    csv.finish()?;
    let ks: Vec<f64> = (1..=rep.distances.len()).map(|k| k as f64).collect();
    let ld: Vec<f64> = rep
        .distances
        .iter()
        .map(|d| d.max(f64::MIN_POSITIVE).log10())
        .collect();
    if ks.len() >= 2 {
        let (b, a) = fit_line(&ks, &ld);
        plot.fit("log10 distance vs iteration", b, a);
    }
    dir.write_plot(&plot)?;

    summary.value("data_norm", rep.data_norm);
    summary.value("iterations", rep.iterations as f64);
    summary.note(format!("picard status: {}", rep.status.name()));
    if let Some(f) = &rep.failure {
        summary.note(f.clone());
    }
    if !rep.within_ball {
        summary.note(format!(
            "data norm {:.4e} exceeds the ball radius {}",
            rep.data_norm, pc.ball_radius
        ));
    }
    summary.check(Check::flag(
        "picard_converged",
        rep.status == PicardStatus::Converged,
        rep.status.name(),
    ));
    let max_ratio = rep.ratios.iter().copied().fold(0.0, f64::max);
    summary.check(Check::flag(
        "contraction_ratio_below_one",
        max_ratio < 1.0,
        format!("largest ratio {max_ratio:.4e}"),
    ));
    // Ratios at round-off level are excluded from the monotonicity test.
    let floor = 1e-13 * rep.distances.first().copied().unwrap_or(0.0);
    let increases = (2..rep.ratios.len())
        .filter(|&k| rep.distances[k + 1] > floor && rep.ratios[k] >= rep.ratios[k - 1] * 1.0001)
        .count();
    summary.check(Check::flag(
        "ratios_decrease_after_iteration_2",
        increases == 0,
        format!("{increases} increases above round-off"),
    ));

    let mut timing = dir.csv(TIMING_FILE, "stage,wall_time_s")?;
    timing.row(&format!("picard,{}", cell(t_picard)))?;
    if rep.status == PicardStatus::Converged {
        let t1 = Instant::now();
        let etd = Etd2::new(grid, &params, cfg.picard.etd_h)?;
        let total = (pc.t_end / cfg.picard.etd_h).round() as usize;
        let stride = total / pc.steps;
        let mut u = data.to_modes();
        etd.cache().truncate(&mut u);
        let mut states = vec![FlowState::from_modes(grid, &u)];
        for n in 1..=total {
            etd.step_modes(&mut u, &forcing, None)?;
            if n % stride == 0 {
                states.push(FlowState::from_modes(grid, &u));
            }
        }
        let a = track_apriori(&rep.times, &rep.states, sc.tracker, params, dyadic.clone())?;
        let b = track_apriori(&rep.times, &states, sc.tracker, params, dyadic)?;
        let ea = a.last_row().map_or(f64::NAN, |r| r.e_p);
        let eb = b.last_row().map_or(f64::NAN, |r| r.e_p);
        let rel = (ea - eb).abs() / eb.abs().max(f64::MIN_POSITIVE);
        summary.value("e_p_picard", ea);
        summary.value("e_p_etd", eb);
        summary.check(Check::at_most(
            "picard_etd_agreement",
            rel,
            cfg.thresholds.picard_agreement,
            "relative difference of E_p at the end of the window",
        ));
        timing.row(&format!(
            "etd_reference,{}",
            cell(t1.elapsed().as_secs_f64())
        ))?;
    }
    timing.finish()?;
    Ok(vec![
        RESULTS_FILE.into(),
        TIMING_FILE.into(),
        "plot_picard.dat".into(),
    ])
}

fn same_rate(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Compares recorded statuses with the expectations listed in the config.
fn check_expectations(
    cfg: &ExperimentConfig,
    outcomes: &[(f64, f64, RunStatus)],
    summary: &mut Summary,
) {
    for e in &cfg.expect {
        let name = format!("status_omega{}_eps{}", e.omega, e.eps);
        match outcomes
            .iter()
            .find(|(w, x, _)| same_rate(*w, e.omega) && same_rate(*x, e.eps))
        {
            Some((_, _, s)) => summary.check(Check::flag(
                &name,
                s.name() == e.status,
                format!("expected {}, got {}", e.status, s.name()),
            )),
            None => summary.check(Check::flag(&name, false, "rate pair was not run")),
        }
    }
}

const PHASE_HEADER: &str =
    "omega,eps,omega_eps,status,code,t_final,steps,e_p0,e_p_final,mid_band_max,eps_a_sup,window_violation_t";

fn outcome_row(w: f64, e: f64, o: &RunOutcome) -> String {
    let last = o.history.last().map_or(f64::NAN, |r| r.e_p);
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        cell(w),
        cell(e),
        cell((w * e).abs()),
        o.status.name(),
        o.status.code(),
        cell(o.t_final),
        o.steps,
        cell(o.e_p0),
        cell(last),
        cell(o.mid_band_max),
        cell(o.eps_a_sup),
        o.window_violation.map(cell).unwrap_or_default()
    )
}

fn phase_diagram(
    cfg: &ExperimentConfig,
    dir: &RunDir,
    summary: &mut Summary,
) -> Result<Vec<String>> {
    let (_, dyadic) = grid_and_dyadic(cfg)?;
    let base = cfg.params();
    let sc = cfg.solver_config();
    let data = block_data(&dyadic, &cfg.data_spec())?;
    let mut csv = dir.csv(RESULTS_FILE, PHASE_HEADER)?;
    let mut timing = dir.csv(TIMING_FILE, "omega,eps,wall_time_s")?;
    let mut plot = PlotData::new("phase", &["omega", "eps", "status_code"]);
    plot.comments.push(
        "status codes: 0 bounded, 1 norm_growth, 2 inadmissible_density, 3 picard_divergence"
            .into(),
    );
    let mut outcomes = Vec::new();
    let mut mids = Vec::new();
    for (w, e) in cfg.rate_pairs() {
        let t0 = Instant::now();
        let params = PhysParams {
            omega: w,
            eps: e,
            ..base
        };
        let o = global_run(&data, &params, &dyadic, &sc)?;
        log::info!(
            "Omega = {w}, eps = {e}: {} at t = {}",
            o.status.name(),
            o.t_final
        );
        csv.row(&outcome_row(w, e, &o))?;
        plot.push(vec![cell(w), cell(e), format!("{}", o.status.code())]);
        timing.row(&format!(
            "{},{},{}",
            cell(w),
            cell(e),
            cell(t0.elapsed().as_secs_f64())
        ))?;
        if let Some(n) = &o.note {
            summary.note(format!("Omega = {w}, eps = {e}: {n}"));
        }
        outcomes.push((w, e, o.status));
        mids.push((w.abs(), o.mid_band_max));
    }
    csv.finish()?;
    timing.finish()?;
    let bounded = outcomes
        .iter()
        .filter(|o| o.2 == RunStatus::Bounded)
        .count();
    summary.value("bounded_runs", bounded as f64);
    summary.value("runs", outcomes.len() as f64);

    if cfg.sweep.omega_eps_product.is_some() && mids.len() >= 2 {
        mids.sort_by(|a, b| a.0.total_cmp(&b.0));
        let growth = mids
            .windows(2)
            .map(|w| match (w[0].1, w[1].1) {
                (a, b) if a > 0.0 => (b - a) / a,
                (_, b) if b > 0.0 => f64::INFINITY,
                _ => 0.0,
            })
            .fold(f64::NEG_INFINITY, f64::max);
        summary.check(Check::at_most(
            "mid_band_nonincreasing",
            growth,
            cfg.thresholds.mid_band_tol,
            "largest relative increase of the middle-band functional between successive |Omega|",
        ));
        if mids.iter().all(|m| m.1 == 0.0) {
            summary.note("middle band carries no energy for this datum and grid");
        } else if mids.iter().all(|m| m.1 > 0.0) {
            let lx: Vec<f64> = mids.iter().map(|m| m.0.log2()).collect();
            let ly: Vec<f64> = mids.iter().map(|m| m.1.ln()).collect();
            let (b, a) = fit_line(&lx, &ly);
            plot.fit("ln mid-band functional vs log2 |Omega|", b, a);
            summary.check(Check::at_most(
                "mid_band_slope",
                b,
                0.0,
                "fitted ln-log2 slope of the middle-band functional against |Omega|",
            ));
        }
        for (w, m) in &mids {
            summary.value(&format!("mid_band_max_omega{w}"), *m);
        }
    }
    dir.write_plot(&plot)?;
    check_expectations(cfg, &outcomes, summary);
    Ok(vec![
        RESULTS_FILE.into(),
        TIMING_FILE.into(),
        "plot_phase.dat".into(),
    ])
}

/// Density and momentum files of the state at `step`.
fn snapshot_paths(dir: &Path, step: usize, format: SnapshotFormat) -> [PathBuf; 2] {
    let ext = match format {
        SnapshotFormat::Binary => "bin",
        SnapshotFormat::Csv => "csv",
    };
    ["a", "m"].map(|f| dir.join(format!("state_{step:07}_{f}.{ext}")))
}

fn write_state(
    dir: &Path,
    step: usize,
    format: SnapshotFormat,
    state: &FlowState,
) -> crate::Result<()> {
    let [a, m] = snapshot_paths(dir, step, format);
    write_snapshot(&a, format, &[&state.a])?;
    write_snapshot(&m, format, &state.m.comps.iter().collect::<Vec<_>>())
}

fn summed_blocks(
    state: &FlowState,
    dyadic: &DyadicDecomposition,
    eps: f64,
    p: f64,
) -> crate::Result<BlockNorms> {
    let mut acc = BlockNorms {
        j_min: dyadic.j_min(),
        values: vec![0.0; dyadic.len()],
    };
    for f in state.augmented(eps) {
        acc.add(&block_norms(&f, dyadic, Flavor::Fourier, p)?);
    }
    Ok(acc)
}

fn single_run(cfg: &ExperimentConfig, dir: &RunDir, summary: &mut Summary) -> Result<Vec<String>> {
    let (_, dyadic) = grid_and_dyadic(cfg)?;
    let params = cfg.params();
    let sc = cfg.solver_config();
    let data = block_data(&dyadic, &cfg.data_spec())?;
    let format = match cfg.solver.snapshot_format {
        SnapshotKind::Binary => SnapshotFormat::Binary,
        SnapshotKind::Csv => SnapshotFormat::Csv,
    };
    let snaps = dir.subdir("snapshots")?;
    let stride = cfg.solver.snapshot_every;
    let p = sc.tracker.p;
    let mut trace = TimeTrace::new(dyadic.j_min());
    let mut written = Vec::new();
    let mut last_step = 0;
    let mut failure: Option<NskError> = None;
    let t0 = Instant::now();
    let outcome = global_run_with(&data, &params, &dyadic, &sc, &mut |n, t, state| {
        if failure.is_some() {
            return;
        }
        last_step = n;
        let mut work = || -> crate::Result<()> {
            if n == 0 || (stride > 0 && n % stride == 0) {
                write_state(&snaps, n, format, state)?;
                written.push(n);
            }
            if n % sc.track_every == 0 {
                trace.push(t, summed_blocks(state, &dyadic, params.eps, p)?)?;
            }
            Ok(())
        };
        if let Err(e) = work() {
            failure = Some(e);
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    if written.last() != Some(&last_step) {
        write_state(&snaps, last_step, format, &outcome.final_state)?;
    }
    if trace.times().last().is_none_or(|&t| t < outcome.t_final) {
        trace.push(
            outcome.t_final,
            summed_blocks(&outcome.final_state, &dyadic, params.eps, p)?,
        )?;
    }
    let wall = t0.elapsed().as_secs_f64();

    let mut csv = dir.csv(RESULTS_FILE, PHASE_HEADER)?;
    csv.row(&outcome_row(params.omega, params.eps, &outcome))?;
    csv.finish()?;
    let mut tracker = dir.csv("tracker.csv", crate::solver::TrackerRow::CSV_HEADER)?;
    for row in &outcome.history {
        tracker.row(&row.csv())?;
    }
    tracker.finish()?;

    let q = sc.tracker.q;
    let mut norms = dir.csv(
        "norms.csv",
        &format!("quantity,{}", NormReportRow::CSV_HEADER),
    )?;
    for (label, state) in [("initial", &data), ("final", &outcome.final_state)] {
        for (name, f) in ["a", "m1", "m2", "m3"].iter().zip(state.components()) {
            for norm in report_norms(p, q) {
                norms.row(&format!(
                    "{label}_{name},{}",
                    NormReportRow::spatial(&norm, f, &dyadic)?.csv()
                ))?;
            }
        }
    }
    let tail = outcome
        .final_state
        .components()
        .iter()
        .map(|f| dyadic.tail_mass(f))
        .fold(0.0, f64::max);
    let mid = Band::Middle {
        alpha: params.rotation_scale(),
        beta: sc.tracker.beta,
    };
    for (s, r, band) in [
        (3.0 / p - 1.0, f64::INFINITY, Band::Full),
        (3.0 / p - 3.0, f64::INFINITY, Band::Full),
        (3.0 / p + 1.0, 1.0, Band::Full),
        (3.0 / p - 1.0, f64::INFINITY, mid),
    ] {
        let row = NormReportRow::chemin_lerner(Flavor::Fourier, &trace, s, p, 1.0, r, band, tail);
        norms.row(&format!("trajectory,{}", row.csv()))?;
    }
    norms.finish()?;

    let mut timing = dir.csv(TIMING_FILE, "omega,eps,steps,wall_time_s")?;
    timing.row(&format!(
        "{},{},{},{}",
        cell(params.omega),
        cell(params.eps),
        outcome.steps,
        cell(wall)
    ))?;
    timing.finish()?;

    let status = outcome.status;
    summary.note(format!("run status: {}", status.name()));
    if let Some(n) = &outcome.note {
        summary.note(n.clone());
    }
    summary.value("status_code", f64::from(status.code()));
    summary.value("t_final", outcome.t_final);
    summary.value("e_p0", outcome.e_p0);
    summary.value("mid_band_max", outcome.mid_band_max);
    summary.value("eps_a_sup", outcome.eps_a_sup);
    let drift = (outcome.final_state.a.mean() - data.a.mean()).abs();
    summary.check(Check::at_most(
        "mass_drift",
        drift,
        cfg.thresholds.conservation_tol * data.a.max_abs().max(1.0),
        "change of the mean density perturbation",
    ));
    check_expectations(cfg, &[(params.omega, params.eps, status)], summary);

    let mut files: Vec<String> = vec![
        RESULTS_FILE.into(),
        TIMING_FILE.into(),
        "tracker.csv".into(),
        "norms.csv".into(),
    ];
    let mut steps = written;
    if steps.last() != Some(&last_step) {
        steps.push(last_step);
    }
    files.extend(
        steps
            .into_iter()
            .flat_map(|n| snapshot_paths(Path::new("snapshots"), n, format))
            .map(|p| p.display().to_string()),
    );
    Ok(files)
}
