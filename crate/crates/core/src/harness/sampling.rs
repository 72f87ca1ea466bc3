//! Randomised checks of the per-mode linear theory and random test fields.

use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linear::{assemble_mode_matrix, lyapunov_ratio, mode_energy};
use crate::params::PhysParams;
use crate::spectral::{DyadicDecomposition, GridSpec, SpectralField};
use crate::C64;

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng) -> [C64; 4] {
    std::array::from_fn(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Random coefficients with `mu, lambda, kappa` in `[1/4, 4]`, `eps` in
/// `[1/100, 1]` and `Omega` in `[-100, 100]`.
fn random_params(rng: &mut ChaCha8Rng) -> PhysParams {
    PhysParams {
        mu: rng.gen_range(0.25..=4.0),
        lambda: rng.gen_range(0.25..=4.0),
        kappa: rng.gen_range(0.25..=4.0),
        eps: rng.gen_range(0.01..=1.0),
        omega: rng.gen_range(-100.0..=100.0),
        gamma: 2.0,
    }
}

/// Random frequency with `|xi|` log-uniform in `[1e-3, 1e3]`.
fn random_xi(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let r = 10f64.powf(rng.gen_range(-3.0..=3.0));
    unit_vector(rng).map(|x| x * r)
}

/// Extremes of the Lyapunov ratio over random modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioRange {
    pub min: f64,
    pub max: f64,
}

pub fn lyapunov_sweep(samples: usize, seed: u64) -> RatioRange {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).fold(
        RatioRange {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        },
        |acc, _| {
            let p = random_params(&mut rng);
            let xi = random_xi(&mut rng);
            let v = random_vector(&mut rng);
            let r = lyapunov_ratio(xi, &p, &v);
            RatioRange {
                min: acc.min.min(r),
                max: acc.max.max(r),
            }
        },
    )
}

/// Largest relative energy drift of the non-dissipative mode flow over
/// `samples` random modes and times in `[0, t_end]`.
pub fn conservation_drift(samples: usize, seed: u64, t_end: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let p = random_params(&mut rng);
            let xi = random_xi(&mut rng);
            let v0 = random_vector(&mut rng);
            let t = rng.gen_range(0.0..=t_end);
            let e0 = mode_energy(xi, &p, &v0);
            let u = assemble_mode_matrix(xi, &p, false).inviscid_exp(t) * Vector4::from(v0);
            let e = mode_energy(xi, &p, &[u[0], u[1], u[2], u[3]]);
            (e / e0 - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Random real field on the resolved annulus of `dyadic` (inside the
/// dealiasing cube) with spectrum `|xi|^slope`, its shape drawn from `rng`.
pub fn resolved_field(dyadic: &DyadicDecomposition, rng: &mut ChaCha8Rng) -> SpectralField {
    let grid = *dyadic.grid();
    let (lo, hi) = dyadic.resolved_annulus();
    let hi = hi.min(grid.dealias_cutoff() as f64 * grid.dk());
    let slope = rng.gen_range(-2.0..=2.0);
    let mut f = SpectralField::zeros(grid);
    for (i, c) in f.coeffs_mut().iter_mut().enumerate() {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let r = grid.xi_norm(i);
        if r >= lo && r <= hi && grid.is_dealiased(i) {
            *c = z * r.powf(slope);
        }
    }
    f.symmetrize();
    f
}

/// The same Fourier coefficients on another lattice with the same period.
pub fn embed(f: &SpectralField, target: GridSpec) -> SpectralField {
    SpectralField::from_modes(target, |k| f.at(k))
}
