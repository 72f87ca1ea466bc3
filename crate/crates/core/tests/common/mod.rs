//! Shared fixtures: small grids, random states and a direct-sum oracle for
//! the nonlinear terms.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use nskc::solver::{eval_terms, NonlinearOptions, PressureHelpers};
use nskc::spectral::{FlowState, GridSpec, SpectralField};
use nskc::{PhysParams, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grid16() -> GridSpec {
    GridSpec::new(2.0 * PI, 16).unwrap()
}

pub fn params() -> PhysParams {
    PhysParams {
        mu: 1.0,
        lambda: 0.5,
        kappa: 0.8,
        eps: 0.2,
        omega: 3.0,
        gamma: 1.4,
    }
}

pub fn random_field(g: GridSpec, amp: f64, kmax: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let mut f = SpectralField::zeros(g);
    let l3 = g.period().powi(3);
    for i in 0..g.len() {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if g.is_dealiased(i) && g.xi_norm(i) > 0.0 && g.xi_norm(i) <= kmax {
            f.coeffs_mut()[i] = z * amp * l3 / 100.0;
        }
    }
    f.symmetrize();
    f
}

pub fn random_state(g: GridSpec, amp: f64, kmax: f64, seed: u64) -> FlowState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = FlowState::zeros(g);
    s.a = random_field(g, amp, kmax, &mut rng);
    for c in 0..3 {
        s.m.comps[c] = random_field(g, amp, kmax, &mut rng);
    }
    s
}

// ---------- direct-sum oracle ----------

pub struct Oracle {
    g: GridSpec,
    modes: Vec<[i64; 3]>,
}

impl Oracle {
    pub fn new(g: GridSpec) -> Self {
        let modes = (0..g.len())
            .filter(|&i| g.is_dealiased(i))
            .map(|i| g.mode(i))
            .collect();
        Self { g, modes }
    }

    /// Direct inverse DFT: `f(x) = L^{-3} sum_k f^_k e^{i xi.x}`.
    fn inverse(&self, f: &SpectralField) -> Vec<f64> {
        let g = self.g;
        let n = g.n();
        let tw: Vec<C64> = (0..n)
            .map(|m| C64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
            .collect();
        let w = g.period().powi(-3);
        (0..g.len())
            .map(|idx| {
                let p = g.split(idx);
                let mut s = C64::default();
                for k in &self.modes {
                    let ph = (0..3)
                        .map(|d| (k[d].rem_euclid(n as i64) as usize * p[d]) % n)
                        .fold(0, |a, b| (a + b) % n);
                    s += f.at(*k) * tw[ph];
                }
                s.re * w
            })
            .collect()
    }

    /// Direct forward DFT restricted to the 2/3-rule cube.
    fn forward_truncated(&self, v: &[f64]) -> SpectralField {
        let g = self.g;
        let n = g.n();
        let tw: Vec<C64> = (0..n)
            .map(|m| C64::from_polar(1.0, -2.0 * PI * m as f64 / n as f64))
            .collect();
        let w = g.cell_volume();
        SpectralField::from_modes(g, |k| {
            if !g.is_dealiased(g.index_of(k).unwrap()) {
                return C64::default();
            }
            let mut s = C64::default();
            for (idx, &x) in v.iter().enumerate() {
                let p = g.split(idx);
                let ph = (0..3)
                    .map(|d| (k[d].rem_euclid(n as i64) as usize * p[d]) % n)
                    .fold(0, |a, b| (a + b) % n);
                s += tw[ph] * x;
            }
            s * w
        })
    }

    /// `L^{-3} sum_{k1 + k2 = k} f^(k1) g^(k2)`, truncated.
    pub fn conv(&self, f: &SpectralField, h: &SpectralField) -> SpectralField {
        let g = self.g;
        let w = g.period().powi(-3);
        let cut = g.dealias_cutoff();
        SpectralField::from_modes(g, |k| {
            if k.iter().any(|x| x.abs() > cut) {
                return C64::default();
            }
            let mut s = C64::default();
            for k1 in &self.modes {
                let k2 = [k[0] - k1[0], k[1] - k1[1], k[2] - k1[2]];
                if k2.iter().all(|x| x.abs() <= cut) {
                    s += f.at(*k1) * h.at(k2);
                }
            }
            s * w
        })
    }

    pub fn dx(&self, f: &SpectralField, axis: usize) -> SpectralField {
        let g = self.g;
        f.multiplier(|i| C64::new(0.0, g.xi(i)[axis]))
    }

    pub fn terms(&self, s: &FlowState, p: &PhysParams, frozen: bool) -> [[SpectralField; 3]; 7] {
        let g = self.g;
        let h = PressureHelpers::new(p.gamma);
        let pa = self.inverse(&s.a);
        let ivals: Vec<f64> = pa
            .iter()
            .map(|&v| if frozen { p.eps * v } else { h.i(p.eps * v) })
            .collect();
        let gvals: Vec<f64> = pa
            .iter()
            .map(|&v| {
                if frozen {
                    0.5 * h.g2() * (p.eps * v).powi(2)
                } else {
                    h.g(p.eps * v)
                }
            })
            .collect();
        let ih = self.forward_truncated(&ivals);
        let gh = self.forward_truncated(&gvals);
        let m = &s.m.comps;
        let pij = |i: usize, j: usize| self.conv(&m[i], &m[j]);
        let pt: Vec<Vec<SpectralField>> = (0..3)
            .map(|i| (0..3).map(|j| pij(i, j)).collect())
            .collect();
        let zero = || SpectralField::zeros(g);
        let adv = [0, 1, 2].map(|i| {
            let mut out = zero();
            for j in 0..3 {
                let q = &self.conv(&ih, &pt[i][j]) - &pt[i][j];
                out += &self.dx(&q, j);
            }
            out
        });
        let im: Vec<SpectralField> = (0..3).map(|i| self.conv(&ih, &m[i])).collect();
        let lap = [0, 1, 2].map(|i| im[i].multiplier(|k| C64::from(p.mu * g.xi_norm(k).powi(2))));
        let mut div = zero();
        for j in 0..3 {
            div += &self.dx(&im[j], j);
        }
        let gd = [0, 1, 2].map(|i| &self.dx(&div, i) * -(p.mu + p.lambda));
        let pr = [0, 1, 2].map(|i| &self.dx(&gh, i) * (-1.0 / p.eps.powi(2)));
        let c = p.kappa * p.eps * p.eps;
        let lap_a = s.a.multiplier(|k| C64::from(-g.xi_norm(k).powi(2)));
        let ala = self.conv(&s.a, &lap_a);
        let ga: Vec<SpectralField> = (0..3).map(|d| self.dx(&s.a, d)).collect();
        let mut gsq = zero();
        for d in 0..3 {
            gsq += &self.conv(&ga[d], &ga[d]);
        }
        let cap1 = [0, 1, 2].map(|i| &self.dx(&ala, i) * c);
        let cap2 = [0, 1, 2].map(|i| &self.dx(&gsq, i) * (0.5 * c));
        let cap3 = [0, 1, 2].map(|i| {
            let mut out = zero();
            for j in 0..3 {
                out += &self.dx(&self.conv(&ga[i], &ga[j]), j);
            }
            &out * -c
        });
        [adv, lap, gd, pr, cap1, cap2, cap3]
    }
}

pub fn rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    rel_diff_floor(a, b, 0.0)
}

/// Max coefficient difference relative to `max(|a|, |b|, floor)`.
pub fn rel_diff_floor(a: &SpectralField, b: &SpectralField, floor: f64) -> f64 {
    let scale = a.max_abs().max(b.max_abs()).max(floor);
    if scale == 0.0 {
        return 0.0;
    }
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Largest relative term-by-term gap between [`eval_terms`] and the oracle;
/// terms that vanish identically are compared against the largest one.
pub fn oracle_gap(state: &FlowState, p: &PhysParams, frozen: bool) -> f64 {
    let opts = NonlinearOptions {
        frozen_coefficients: frozen,
        ..Default::default()
    };
    let terms = eval_terms(state, p, &opts).unwrap();
    let oracle = Oracle::new(*state.grid()).terms(state, p, frozen);
    let floor = oracle
        .iter()
        .flatten()
        .map(SpectralField::max_abs)
        .fold(0.0, f64::max);
    terms
        .terms()
        .iter()
        .zip(&oracle)
        .flat_map(|(got, want)| {
            (0..3).map(move |c| rel_diff_floor(&got.comps[c], &want[c], 1e-3 * floor))
        })
        .fold(0.0, f64::max)
}

/// Largest zero-mode coefficient of any term relative to that term's size.
pub fn term_mean_defect(state: &FlowState, p: &PhysParams) -> f64 {
    let terms = eval_terms(state, p, &NonlinearOptions::default()).unwrap();
    let zero = state.grid().index_of([0, 0, 0]).unwrap();
    terms
        .terms()
        .iter()
        .map(|t| {
            let scale = t.max_abs().max(1e-300);
            t.comps
                .iter()
                .map(|c| c.coeffs()[zero].norm() / scale)
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
