use std::f64::consts::PI;

use nskc::besov::{
    bernstein_ratio, besov_norm, block_norms, bony_residual, composition_ratio, fourier_besov_norm,
    fourier_lebesgue_norm, interpolation_gap, Band, BesovNorm, Flavor, ProductBound, TimeTrace,
};
use nskc::spectral::{DyadicDecomposition, GridSpec, SpectralField};
use nskc::{NskError, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> GridSpec {
    GridSpec::new(2.0 * PI, 32).unwrap()
}

/// Random real field with spectrum in `lo <= |xi| <= hi`.
fn shell_field(g: GridSpec, lo: f64, hi: f64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(g);
    for i in 0..g.len() {
        let r = g.xi_norm(i);
        if r >= lo && r <= hi && g.is_dealiased(i) {
            f.coeffs_mut()[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    f.symmetrize();
    f
}

fn resolved_field(d: &DyadicDecomposition, seed: u64) -> SpectralField {
    let (lo, hi) = d.resolved_annulus();
    let cut = d.grid().dealias_cutoff() as f64 * d.grid().dk();
    shell_field(*d.grid(), lo, hi.min(cut), seed)
}

#[test]
fn fourier_lebesgue_of_single_mode() {
    let g = GridSpec::with_n(16).unwrap();
    let mut f = SpectralField::zeros(g);
    f.coeffs_mut()[g.index_of([2, 1, 0]).unwrap()] = C64::new(3.0, 4.0);
    let dk = g.dk();
    assert!((fourier_lebesgue_norm(&f, 2.0) - 5.0 * dk.powf(1.5)).abs() < 1e-14);
    assert!((fourier_lebesgue_norm(&f, 1.0) - 5.0).abs() < 1e-14);
    assert!((fourier_lebesgue_norm(&f, f64::INFINITY) - 5.0 * dk.powi(3)).abs() < 1e-16);
}

#[test]
fn plancherel_links_the_two_flavours_at_p2() {
    let g = grid();
    let d = DyadicDecomposition::new(g).unwrap();
    let f = resolved_field(&d, 11);
    for s in [-1.0, 0.0, 0.5, 1.5] {
        let fb = fourier_besov_norm(&f, &d, s, 2.0, 1.0).unwrap();
        let pb = besov_norm(&f, &d, s, 2.0, 1.0).unwrap();
        let want = (2.0 * PI).powf(1.5) * pb;
        assert!((fb - want).abs() <= 1e-10 * want, "s={s}: {fb} vs {want}");
    }
}

#[test]
fn bands_split_the_full_norm() {
    let g = grid();
    let d = DyadicDecomposition::new(g).unwrap();
    let f = resolved_field(&d, 3);
    let n = BesovNorm::fourier(0.7, 2.0, 1.0);
    let full = n.eval(&f, &d).unwrap();
    let (alpha, beta) = (1.0, 4.0);
    let parts: f64 = [
        Band::Low { alpha },
        Band::Middle { alpha, beta },
        Band::High { beta },
    ]
    .iter()
    .map(|&b| n.with_band(b).eval(&f, &d).unwrap())
    .sum();
    assert!((full - parts).abs() <= 1e-13 * full);
}

#[test]
fn bony_identity_on_random_pairs() {
    let g = grid();
    let d = DyadicDecomposition::new(g).unwrap();
    for seed in 0..5 {
        let f = resolved_field(&d, 2 * seed);
        let h = resolved_field(&d, 2 * seed + 1);
        let r = bony_residual(&f, &h, &d).unwrap();
        assert!(r <= 1e-10, "seed {seed}: residual {r}");
    }
}

#[test]
fn bony_rejects_unresolved_support() {
    let g = grid();
    let d = DyadicDecomposition::new(g).unwrap();
    let f = shell_field(g, 5.0, 10.0, 1);
    let h = resolved_field(&d, 2);
    assert!(matches!(
        bony_residual(&f, &h, &d),
        Err(NskError::Resolution(_))
    ));
}

#[test]
fn bernstein_ratio_is_bounded() {
    let g = grid();
    let d = DyadicDecomposition::new(g).unwrap();
    let j = 2;
    let f = shell_field(g, 0.75 * 4.0, 8.0 / 3.0 * 4.0, 5);
    let area = 4.0 * PI / 3.0 * (8.0f64 / 3.0).powi(3);
    for (k, p, q) in [
        (0.0, 1.0, 2.0),
        (1.0, 2.0, 2.0),
        (2.0, 2.0, f64::INFINITY),
        (1.0, 1.0, 1.0),
    ] {
        let ratio = bernstein_ratio(&f, &d, j, k, p, q).unwrap();
        let cap = (8.0f64 / 3.0).powf(k) * area.powf(1.0 / p - 1.0 / q);
        assert!(
            ratio > 0.0 && ratio <= cap,
            "k={k} p={p} q={q}: {ratio} > {cap}"
        );
    }
    assert!(matches!(
        bernstein_ratio(&f, &d, 0, 0.0, 2.0, 2.0),
        Err(NskError::Hypothesis(_))
    ));
    assert!(matches!(
        bernstein_ratio(&f, &d, j, 0.0, 2.0, 1.0),
        Err(NskError::Hypothesis(_))
    ));
}

#[test]
fn product_bounds_are_finite_and_homogeneous() {
    let g = grid();
    let d = DyadicDecomposition::new(g).unwrap();
    let f = resolved_field(&d, 21);
    let h = resolved_field(&d, 22);
    let cases = [
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
            beta: 1.0,
        },
    ];
    for case in cases {
        let a = case.evaluate(&f, &h, &d).unwrap();
        let b = case.evaluate(&(&f * 3.0), &(&h * 0.25), &d).unwrap();
        assert!(a.ratio.is_finite() && a.ratio > 0.0, "{case:?}");
        assert!((a.ratio - b.ratio).abs() <= 1e-10 * a.ratio, "{case:?}");
    }
}

#[test]
fn product_bounds_reject_bad_parameters() {
    let bad = [
        ProductBound::FourierSplit {
            p: 2.0,
            s: 3.0,
            s1: 1.0,
            s3: 1.0,
        },
        ProductBound::FourierSplit {
            p: 2.0,
            s: 1.0,
            s1: -0.1,
            s3: 0.5,
        },
        ProductBound::BesovSplit {
            q: 5.0,
            s: 1.0,
            s1: 0.5,
            s3: 0.5,
        },
        ProductBound::BesovSplit {
            q: 3.0,
            s: 1.0,
            s1: 0.2,
            s3: 0.8,
        },
        ProductBound::Mixed {
            p: 1.5,
            q: 3.0,
            s: 0.0,
            s1: 0.5,
            s2: 0.6,
        },
        ProductBound::Mixed {
            p: 2.0,
            q: 3.0,
            s: -2.5,
            s1: 0.5,
            s2: 0.6,
        },
        ProductBound::MixedHigh {
            p: 2.0,
            q: 3.0,
            s: 0.0,
            s1: 0.5,
            s2: 0.6,
            beta: 0.0,
        },
    ];
    for case in bad {
        assert!(
            matches!(case.validate(), Err(NskError::Hypothesis(_))),
            "{case:?}"
        );
    }
}

#[test]
fn composition_with_identity_is_exact() {
    let g = grid();
    let d = DyadicDecomposition::new(g).unwrap();
    let mut u = resolved_field(&d, 4);
    let crit = BesovNorm::fourier(1.5, 2.0, 1.0).eval(&u, &d).unwrap();
    u.scale(0.1 / crit);
    let r = composition_ratio(&u, &d, 1.0, 2.0, |x| x, 0.2).unwrap();
    assert!((r - 1.0).abs() < 1e-12);
    let r = composition_ratio(&u, &d, 1.0, 2.0, |x| x / (1.0 + x), 0.2).unwrap();
    assert!(r.is_finite() && r > 0.5 && r < 2.0);
    assert!(composition_ratio(&u, &d, 1.6, 2.0, |x| x, 0.2).is_err());
    assert!(composition_ratio(&u, &d, 1.0, 2.0, |x| x, 0.01).is_err());
    assert!(composition_ratio(&u, &d, 1.0, 2.0, |x| x + 1.0, 0.2).is_err());
}

#[test]
fn chemin_lerner_of_steady_trace() {
    let g = grid();
    let d = DyadicDecomposition::new(g).unwrap();
    let f = resolved_field(&d, 9);
    let b = block_norms(&f, &d, Flavor::Fourier, 2.0).unwrap();
    let mut tr = TimeTrace::new(d.j_min());
    for i in 0..=10 {
        tr.push(0.3 * i as f64, b.clone()).unwrap();
    }
    let full = b.aggregate(0.5, 1.0, Band::Full);
    let inf = tr.chemin_lerner(0.5, f64::INFINITY, 1.0, Band::Full);
    assert!((inf - full).abs() <= 1e-14 * full);
    let l1 = tr.chemin_lerner(0.5, 1.0, 1.0, Band::Full);
    assert!((l1 - 3.0 * full).abs() <= 1e-12 * full);
    assert!(tr.push(3.0, b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_minkowski_ordering(seed in any::<u64>(), r in 1.0f64..4.0, sigma in 1.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tr = TimeTrace::new(-2);
        let mut t = 0.0;
        for _ in 0..12 {
            t += rng.gen_range(0.05..0.5);
            let vals = (0..6).map(|_| rng.gen_range(0.0..2.0)).collect();
            tr.push(t, nskc::besov::BlockNorms { j_min: -2, values: vals }).unwrap();
        }
        let tilde = tr.chemin_lerner(0.3, r, sigma, Band::Full);
        let plain = tr.plain(0.3, r, sigma, Band::Full);
        if r >= sigma {
            prop_assert!(plain <= tilde * (1.0 + 1e-12));
        } else {
            prop_assert!(tilde <= plain * (1.0 + 1e-12));
        }
    }

    #[test]
    fn prop_interpolation_holds(seed in 0u64..1000, theta in 0.0f64..1.0, p in 1.0f64..6.0) {
        let g = GridSpec::new(2.0 * PI, 16).unwrap();
        let d = DyadicDecomposition::new(g).unwrap();
        let f = resolved_field(&d, seed);
        let gap = interpolation_gap(&f, &d, Flavor::Fourier, (-0.5, 1.5), theta, p, 1.0).unwrap();
        prop_assert!(gap <= 1e-10);
    }

    #[test]
    fn prop_fourier_embedding(seed in 0u64..1000, p1 in 1.0f64..3.0, dp in 0.0f64..3.0) {
        let g = GridSpec::new(2.0 * PI, 16).unwrap();
        let d = DyadicDecomposition::new(g).unwrap();
        let f = resolved_field(&d, seed);
        let p2 = p1 + dp;
        let s = 0.4;
        let lhs = fourier_besov_norm(&f, &d, s - 3.0 * (1.0 / p1 - 1.0 / p2), p2, 1.0).unwrap();
        let rhs = fourier_besov_norm(&f, &d, s, p1, 1.0).unwrap();
        let c = (4.0 * PI / 3.0 * (8.0f64 / 3.0).powi(3)).powf(1.0 / p1 - 1.0 / p2);
        prop_assert!(lhs <= c * rhs * (1.0 + 1e-12));
    }
}
