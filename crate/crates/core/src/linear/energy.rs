use nalgebra::{Matrix4, Vector4};

use crate::besov::{block_norms, conjugate, Band, BlockNorms, Flavor, TimeTrace};
use crate::error::{NskError, Result};
use crate::par;
use crate::params::PhysParams;
use crate::spectral::{phi0, DyadicDecomposition, FlowState};
use crate::C64;

use super::expm::expm;
use super::lyapunov::theta;
use super::mode::{assemble_mode_matrix, mode_energy};
use super::propagate::LinearRun;
use super::quad::{fit_slope, gauss_legendre, graded_segments, time_lr};
use super::ReportRow;

/// Sweep of the per-block smoothing measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyExponentSetup {
    pub params: PhysParams,
    /// Time exponents to measure.
    pub rs: Vec<f64>,
    /// Frequency-side Lebesgue exponent of the block norm.
    pub p: f64,
    /// Blocks with `2^j <= |Omega| eps`.
    pub low_blocks: Vec<i32>,
    /// Blocks with `2^j > |Omega| eps`.
    pub high_blocks: Vec<i32>,
    pub radial_nodes: usize,
    pub polar_nodes: usize,
    pub steps_per_segment: usize,
    /// Horizon in units of the slowest decay time of the block.
    pub horizon: f64,
}

impl Default for EnergyExponentSetup {
    fn default() -> Self {
        Self {
            params: PhysParams {
                omega: 64.0,
                eps: 0.125,
                ..PhysParams::default()
            },
            rs: vec![1.0, 2.0],
            p: 1.0,
            low_blocks: vec![-6, -5, -4, -3],
            high_blocks: vec![5, 6, 7, 8],
            radial_nodes: 24,
            polar_nodes: 12,
            steps_per_segment: 64,
            horizon: 40.0,
        }
    }
}

/// Per-block rows and fitted `log2` slopes against `j`, one pair per `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyExponentReport {
    pub rows: Vec<ReportRow>,
    /// `(r, low-band slope, high-band slope)`.
    pub slopes: Vec<(f64, f64, f64)>,
}

struct Node {
    weight: f64,
    matrix: Matrix4<C64>,
    datum: Vector4<C64>,
    xi: [f64; 3],
}

fn block_nodes(params: &PhysParams, j: i32, nr: usize, nc: usize) -> Vec<Node> {
    let scale = 2f64.powi(j);
    let mut nodes = Vec::with_capacity(nr * nc);
    // The horizontal direction carries the slowest low-frequency decay; it
    // enters with zero weight so sup norms see it.
    let mut polar = vec![(0.0, 0.0)];
    polar.extend(gauss_legendre(nc, 0.0, 1.0));
    for &(rho, wr) in &gauss_legendre(nr, 0.75 * scale, 8.0 / 3.0 * scale) {
        for &(c, wc) in &polar {
            let s = (1.0 - c * c).sqrt();
            let xi = [rho * s, 0.0, rho * c];
            let amp = phi0(rho / scale);
            nodes.push(Node {
                // Both hemispheres and the full azimuth.
                weight: 4.0 * std::f64::consts::PI * rho * rho * wr * wc,
                matrix: *assemble_mode_matrix(xi, params, true).matrix(),
                datum: Vector4::new(
                    C64::from(amp),
                    C64::default(),
                    C64::default(),
                    C64::default(),
                ),
                xi,
            });
        }
    }
    nodes
}

/// `L^{p'}` norm over the quadrature nodes of the energy amplitude.
fn node_norm(nodes: &[Node], amps: &[f64], p: f64) -> f64 {
    let q = conjugate(p);
    if q.is_infinite() {
        amps.iter().fold(0.0, |m, a| m.max(*a))
    } else {
        nodes
            .iter()
            .zip(amps)
            .map(|(n, a)| n.weight * a.powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    }
}

/// `|| t -> ||phi_j U(t)||_{L^{p'}_xi} ||_{L^r(0,T)} / ||phi_j U(0)||_{L^{p'}_xi}`
/// for the free viscous evolution of density data spread over block `j`,
/// evaluated by tensor Gauss quadrature over the annulus (axisymmetry
/// removes the azimuth) and a graded time grid. Returns one gain per `r`.
pub fn block_time_gain(setup: &EnergyExponentSetup, j: i32) -> Vec<f64> {
    let params = &setup.params;
    let nodes = block_nodes(params, j, setup.radial_nodes, setup.polar_nodes);
    let mut fastest: f64 = 0.0;
    let mut slowest = f64::INFINITY;
    for n in &nodes {
        let ev = assemble_mode_matrix(n.xi, params, true).eigenvalues();
        slowest = slowest.min(-ev[0].re);
        fastest = fastest.max(ev.iter().map(|z| -z.re).fold(0.0, f64::max));
        let freq = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        fastest = fastest.max(freq);
    }
    let segments = graded_segments(
        0.05 / fastest,
        setup.steps_per_segment,
        setup.horizon / slowest,
    );
    let energy =
        |n: &Node, v: &Vector4<C64>| mode_energy(n.xi, params, &[v[0], v[1], v[2], v[3]]).sqrt();
    let mut states: Vec<Vector4<C64>> = nodes.iter().map(|n| n.datum).collect();
    let amps0: Vec<f64> = nodes
        .iter()
        .zip(&states)
        .map(|(n, v)| energy(n, v))
        .collect();
    let data = node_norm(&nodes, &amps0, setup.p);
    let mut times = vec![0.0];
    let mut series = vec![data];
    let mut t = 0.0;
    for &(dt, steps) in &segments {
        let props = par::map_slice(&nodes, |n| expm(&(n.matrix * C64::from(dt))));
        for _ in 0..steps {
            t += dt;
            for (v, e) in states.iter_mut().zip(&props) {
                *v = e * *v;
            }
            let amps: Vec<f64> = nodes
                .iter()
                .zip(&states)
                .map(|(n, v)| energy(n, v))
                .collect();
            times.push(t);
            series.push(node_norm(&nodes, &amps, setup.p));
        }
    }
    setup
        .rs
        .iter()
        .map(|&r| time_lr(&times, &series, r) / data)
        .collect()
}

/// Measures the per-block gains over the low and high blocks and fits their
/// `log2` slopes against `j`. Rows carry the gain as `measured`, the model
/// `Theta(2^j, |Omega| eps)^{-1/r}` as `bound` and their ratio as `margin`.
pub fn verify_energy_estimate(setup: &EnergyExponentSetup) -> Result<EnergyExponentReport> {
    setup.params.validate()?;
    let alpha = setup.params.rotation_scale();
    if let Some(j) = setup.low_blocks.iter().find(|&&j| 2f64.powi(j) > alpha) {
        return Err(NskError::Hypothesis(format!(
            "block {j} is not in the low band 2^j <= {alpha}"
        )));
    }
    if let Some(j) = setup.high_blocks.iter().find(|&&j| 2f64.powi(j) <= alpha) {
        return Err(NskError::Hypothesis(format!(
            "block {j} is not in the high band 2^j > {alpha}"
        )));
    }
    if setup.low_blocks.len() < 2 || setup.high_blocks.len() < 2 {
        return Err(NskError::Hypothesis(
            "each band needs at least two blocks".into(),
        ));
    }
    let blocks: Vec<i32> = setup
        .low_blocks
        .iter()
        .chain(&setup.high_blocks)
        .copied()
        .collect();
    let gains: Vec<Vec<f64>> = blocks.iter().map(|&j| block_time_gain(setup, j)).collect();
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for (ri, &r) in setup.rs.iter().enumerate() {
        for (&j, g) in blocks.iter().zip(&gains) {
            let bound = theta(2f64.powi(j), alpha).powf(-1.0 / r);
            rows.push(ReportRow {
                coord: j as f64,
                omega: setup.params.omega,
                eps: setup.params.eps,
                r,
                measured: g[ri],
                bound,
                margin: g[ri] / bound,
            });
        }
        let fit = |js: &[i32]| {
            let x: Vec<f64> = js.iter().map(|&j| j as f64).collect();
            let y: Vec<f64> = js
                .iter()
                .map(|j| gains[blocks.iter().position(|b| b == j).unwrap()][ri].log2())
                .collect();
            fit_slope(&x, &y)
        };
        slopes.push((r, fit(&setup.low_blocks), fit(&setup.high_blocks)));
    }
    Ok(EnergyExponentReport { rows, slopes })
}

/// Sum over components of the block norms of a list of fields.
fn summed_blocks(
    fields: &[crate::spectral::SpectralField],
    dyadic: &DyadicDecomposition,
    p: f64,
) -> Result<BlockNorms> {
    let mut acc: Option<BlockNorms> = None;
    for f in fields {
        let b = block_norms(f, dyadic, Flavor::Fourier, p)?;
        match acc.as_mut() {
            Some(a) => a.add(&b),
            None => acc = Some(b),
        }
    }
    acc.ok_or_else(|| NskError::InvalidParams("no fields".into()))
}

/// Both sides of the smoothing estimate on a lattice trajectory, without
/// the unknown constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyEstimate {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Evaluates the low-band (`low = true`) or high-band smoothing estimate on
/// a sampled linear trajectory: the Chemin-Lerner norm of `(a, eps grad a, m)`
/// at regularity `s + 4/r` (low) or `s + 2/r` (high) against the data norm at
/// `s` plus the `L^1`-in-time forcing norm, the low band carrying the factor
/// `(|Omega| eps)^{2/r}`. `forcing`, when given, is sampled at `run.times`.
#[allow(clippy::too_many_arguments)]
pub fn energy_estimate_ratio(
    run: &LinearRun,
    forcing: Option<&[FlowState]>,
    dyadic: &DyadicDecomposition,
    params: &PhysParams,
    s: f64,
    p: f64,
    sigma: f64,
    r: f64,
    low: bool,
) -> Result<EnergyEstimate> {
    let alpha = params.rotation_scale();
    let band = if low {
        Band::Low { alpha }
    } else {
        Band::High { beta: alpha }
    };
    if !(dyadic.j_min()..=dyadic.j_max()).any(|j| band.contains(j)) {
        return Err(NskError::Resolution(format!(
            "band {} has no resolved block",
            band.label()
        )));
    }
    let mut trace = TimeTrace::new(dyadic.j_min());
    for (t, state) in run.times.iter().zip(&run.states) {
        trace.push(*t, summed_blocks(&state.augmented(params.eps), dyadic, p)?)?;
    }
    let gain = if low { 4.0 } else { 2.0 };
    let lhs = trace.chemin_lerner(s + gain / r, r, sigma, band);
    let mut rhs = trace.sample(0).aggregate(s, sigma, band);
    if let Some(f) = forcing {
        if f.len() != run.times.len() {
            return Err(NskError::GridMismatch);
        }
        let mut ft = TimeTrace::new(dyadic.j_min());
        for (t, state) in run.times.iter().zip(f) {
            let comps: Vec<_> = state.components().into_iter().cloned().collect();
            ft.push(*t, summed_blocks(&comps, dyadic, p)?)?;
        }
        rhs += ft.chemin_lerner(s, 1.0, sigma, band);
    }
    if low {
        rhs *= alpha.powf(2.0 / r);
    }
    Ok(EnergyEstimate {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}
