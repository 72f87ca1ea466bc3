use std::f64::consts::PI;

use nskc::spectral::{
    chi, dealias_product, phi0, read_snapshot, write_snapshot, DyadicDecomposition, Fft3, GridSpec,
    SnapshotFormat, SpectralField,
};
use nskc::{NskError, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_band_limited(grid: GridSpec, kmax: i64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    for idx in 0..grid.len() {
        let k = grid.mode(idx);
        if k.iter().all(|c| c.abs() <= kmax) {
            f.coeffs_mut()[idx] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    f.symmetrize();
    f
}

#[test]
fn grid_rejects_bad_sizes() {
    assert!(matches!(
        GridSpec::new(1.0, 7),
        Err(NskError::InvalidGrid(_))
    ));
    assert!(matches!(
        GridSpec::new(1.0, 6),
        Err(NskError::InvalidGrid(_))
    ));
    assert!(matches!(
        GridSpec::new(-1.0, 8),
        Err(NskError::InvalidGrid(_))
    ));
    assert!(GridSpec::new(1.0, 8).is_ok());
}

#[test]
fn lattice_indexing_round_trips() {
    let g = GridSpec::new(2.0 * PI, 8).unwrap();
    for idx in 0..g.len() {
        let k = g.mode(idx);
        assert_eq!(g.index_of(k), Some(idx));
        let neg = g.neg_index(idx);
        let kn = g.mode(neg);
        for a in 0..3 {
            assert_eq!((k[a] + kn[a]).rem_euclid(8), 0);
        }
    }
}

#[test]
fn constant_maps_to_zero_mode() {
    let g = GridSpec::with_n(16).unwrap();
    let c = 2.5;
    let f = SpectralField::from_fn(g, |_| c);
    let l3 = g.period().powi(3);
    assert!((f.coeffs()[0].re - c * l3).abs() <= 1e-12 * c * l3);
    let rest = f.coeffs()[1..].iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    assert!(rest <= 1e-12 * c * l3);
}

#[test]
fn cosine_maps_to_half_volume_at_unit_modes() {
    let g = GridSpec::with_n(16).unwrap();
    let dk = g.dk();
    let f = SpectralField::from_fn(g, |x| (dk * x[0]).cos());
    let l3 = g.period().powi(3);
    for k in [[1, 0, 0], [-1, 0, 0]] {
        let z = f.at(k);
        assert!((z - C64::new(l3 / 2.0, 0.0)).norm() <= 1e-12 * l3);
    }
    let total: f64 = f.coeffs().iter().map(|z| z.norm()).sum();
    assert!((total - l3).abs() <= 1e-10 * l3);
}

#[test]
fn forward_transform_matches_direct_sum() {
    let g = GridSpec::new(3.0, 8).unwrap();
    let vals: Vec<f64> = (0..g.len())
        .map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0)
        .collect();
    let f = SpectralField::from_physical(g, &vals).unwrap();
    let w = g.cell_volume();
    for idx in [0usize, 1, 9, 77, 200, 511] {
        let xi = g.xi(idx);
        let direct: C64 = (0..g.len())
            .map(|p| {
                let x = g.point(p);
                let ph = -(xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]);
                C64::from_polar(vals[p] * w, ph)
            })
            .sum();
        assert!(
            (direct - f.coeffs()[idx]).norm() <= 1e-12 * 100.0,
            "idx {idx}"
        );
    }
}

#[test]
fn round_trip_is_exact_to_roundoff() {
    let g = GridSpec::with_n(32).unwrap();
    let vals: Vec<f64> = (0..g.len()).map(|i| ((i as f64) * 0.37).sin()).collect();
    let back = SpectralField::from_physical(g, &vals)
        .unwrap()
        .to_physical()
        .unwrap();
    let err = vals
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-12, "round trip error {err}");
}

#[test]
fn non_hermitian_coefficients_are_rejected() {
    let g = GridSpec::with_n(8).unwrap();
    let mut f = SpectralField::zeros(g);
    let i = g.index_of([1, 0, 0]).unwrap();
    f.coeffs_mut()[i] = C64::new(1.0, 0.0);
    assert!(matches!(
        f.to_physical(),
        Err(NskError::NonHermitian { .. })
    ));
    f.symmetrize();
    assert!(f.to_physical().is_ok());
}

#[test]
fn cutoff_profile_edges() {
    assert_eq!(chi(0.0), 1.0);
    assert_eq!(chi(0.75), 1.0);
    assert_eq!(chi(4.0 / 3.0), 0.0);
    assert!(chi(1.0) > 0.0 && chi(1.0) < 1.0);
    assert_eq!(phi0(0.74), 0.0);
    assert_eq!(phi0(8.0 / 3.0), 0.0);
    assert_eq!(phi0(1.4), 1.0);
}

#[test]
fn exclusive_band_point_belongs_to_one_block() {
    let g = GridSpec::new(2.0 * PI, 128).unwrap();
    let d = DyadicDecomposition::with_range(g, -1, 4).unwrap();
    for j in d.j_min()..=d.j_max() {
        let r = 1.4 * 2f64.powi(j);
        for jj in d.j_min()..=d.j_max() {
            let v = phi0(r * 2f64.powi(-jj));
            assert_eq!(v, if jj == j { 1.0 } else { 0.0 }, "j={j} jj={jj}");
        }
    }
}

#[test]
fn masks_scale_exactly() {
    let g = GridSpec::with_n(64).unwrap();
    let d = DyadicDecomposition::new(g).unwrap();
    for b in d.blocks() {
        for &(i, w) in &b.entries {
            assert_eq!(w, phi0(g.xi_norm(i as usize) * 2f64.powi(-b.j)));
            assert_eq!(w, d.mask(b.j, i as usize));
        }
    }
}

#[test]
fn partition_of_unity_on_resolved_annulus() {
    for n in [32usize, 64, 128] {
        let g = GridSpec::with_n(n).unwrap();
        let d = DyadicDecomposition::new(g).unwrap();
        assert!(
            d.partition_defect() <= 1e-12,
            "n={n}: {}",
            d.partition_defect()
        );
    }
}

#[test]
fn default_range_matches_documented_values() {
    let g = GridSpec::with_n(128).unwrap();
    let d = DyadicDecomposition::new(g).unwrap();
    assert_eq!((d.j_min(), d.j_max()), (-3, 0));
    let g = GridSpec::with_n(64).unwrap();
    let d = DyadicDecomposition::new(g).unwrap();
    assert_eq!((d.j_min(), d.j_max()), (-3, -1));
}

#[test]
fn nyquist_too_small_is_an_error() {
    let g = GridSpec::with_n(64).unwrap();
    assert!(matches!(
        DyadicDecomposition::with_range(g, -3, 0),
        Err(NskError::Resolution(_))
    ));
}

#[test]
fn almost_orthogonal_blocks() {
    let g = GridSpec::new(2.0 * PI, 64).unwrap();
    let d = DyadicDecomposition::new(g).unwrap();
    for a in d.blocks() {
        for b in d.blocks() {
            if (a.j - b.j).abs() < 2 {
                continue;
            }
            let overlap = a
                .entries
                .iter()
                .any(|(i, _)| b.entries.iter().any(|(k, _)| k == i));
            assert!(!overlap, "blocks {} and {} overlap", a.j, b.j);
        }
    }
}

#[test]
fn paraproduct_terms_have_localised_spectrum() {
    let g = GridSpec::new(2.0 * PI, 64).unwrap();
    let d = DyadicDecomposition::new(g).unwrap();
    let f = random_band_limited(g, 10, 1);
    let h = random_band_limited(g, 10, 2);
    for j in d.j_min()..=d.j_max() {
        let low = d.low_cutoff(&f, j - 1).unwrap();
        let blk = d.project(&h, j).unwrap();
        let prod = dealias_product(&low, &blk).unwrap();
        let scale = prod.max_abs().max(1e-300);
        for k in d.j_min()..=d.j_max() {
            if (k - j).abs() >= 5 {
                let pk = d.project(&prod, k).unwrap();
                assert!(pk.max_abs() <= 1e-12 * scale, "j={j} k={k}");
            }
        }
    }
}

#[test]
fn dealiased_product_of_cosines() {
    let g = GridSpec::new(2.0 * PI, 16).unwrap();
    let f = SpectralField::from_fn(g, |x| (2.0 * x[0]).cos());
    let h = SpectralField::from_fn(g, |x| (3.0 * x[0]).cos());
    let p = dealias_product(&f, &h).unwrap();
    // cos 2x cos 3x = (cos x + cos 5x)/2 and |5| <= 16/3 survives
    let l3 = g.period().powi(3);
    assert!((p.at([1, 0, 0]).re - l3 / 4.0).abs() < 1e-10 * l3);
    assert!((p.at([5, 0, 0]).re - l3 / 4.0).abs() < 1e-10 * l3);
    let f = SpectralField::from_fn(g, |x| (4.0 * x[0]).cos());
    let p = dealias_product(&f, &f).unwrap();
    // cos^2 4x = (1 + cos 8x)/2 and mode 8 is removed
    assert!(p.at([8, 0, 0]).norm() < 1e-12 * l3);
    assert!(p.at([-8, 0, 0]).norm() < 1e-12 * l3);
    assert!((p.coeffs()[0].re - l3 / 2.0).abs() < 1e-10 * l3);
}

#[test]
fn snapshot_round_trip_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridSpec::with_n(8).unwrap();
    let f = random_band_limited(g, 2, 7);
    let v = [
        random_band_limited(g, 2, 8),
        random_band_limited(g, 3, 9),
        f.clone(),
    ];
    for fmt in [SnapshotFormat::Binary, SnapshotFormat::Csv] {
        let p = dir.path().join(format!("s.{:?}", fmt).to_lowercase());
        write_snapshot(&p, fmt, &[&f]).unwrap();
        let s = read_snapshot(&p).unwrap();
        assert_eq!(s.rank(), 1);
        assert_eq!(s.comps[0], f);
        write_snapshot(&p, fmt, &[&v[0], &v[1], &v[2]]).unwrap();
        let s = read_snapshot(&p).unwrap();
        assert_eq!(s.rank(), 3);
        assert_eq!(s.comps, v.to_vec());
    }
}

#[test]
fn tail_mass_reports_uncovered_modes() {
    let g = GridSpec::with_n(32).unwrap();
    let d = DyadicDecomposition::new(g).unwrap();
    let mut f = SpectralField::zeros(g);
    let i = g.index_of([1, 0, 0]).unwrap();
    f.coeffs_mut()[i] = C64::new(1.0, 0.0);
    f.symmetrize();
    // |xi| = 1/16 sits below the lowest block
    assert!((d.tail_mass(&f) - 1.0).abs() < 1e-14);
    assert!(d.check_band_limited(&f, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn prop_round_trip(seed in any::<u64>(), kmax in 1i64..6) {
        let g = GridSpec::with_n(16).unwrap();
        let f = random_band_limited(g, kmax, seed);
        let back = SpectralField::from_physical(g, &f.to_physical().unwrap()).unwrap();
        let err = (&back - &f).max_abs() / f.max_abs();
        prop_assert!(err <= 1e-12);
    }

    #[test]
    fn prop_dealias_idempotent(seed in any::<u64>()) {
        let g = GridSpec::with_n(16).unwrap();
        let f = random_band_limited(g, 8, seed).dealiased();
        prop_assert_eq!(f.clone().dealiased(), f);
    }

    #[test]
    fn prop_blocks_sum_to_field(seed in any::<u64>()) {
        let g = GridSpec::new(2.0 * PI, 32).unwrap();
        let d = DyadicDecomposition::new(g).unwrap();
        let (lo, hi) = d.resolved_annulus();
        let mut f = random_band_limited(g, 10, seed);
        for (i, c) in f.coeffs_mut().iter_mut().enumerate() {
            let r = g.xi_norm(i);
            if r < lo || r > hi { *c = C64::default(); }
        }
        let mut sum = SpectralField::zeros(g);
        for blk in d.project_all(&f).unwrap() { sum += &blk; }
        prop_assert!((&sum - &f).max_abs() <= 1e-12 * f.max_abs().max(1e-300));
    }
}

#[test]
fn pruned_transforms_match_full_ones_where_exact() {
    let g = GridSpec::with_n(24).unwrap();
    let keep = g.dealias_axis_mask();
    let plan = Fft3::plan(g.n());
    let f = random_band_limited(g, g.dealias_cutoff(), 21);
    let mut full = f.coeffs().to_vec();
    let mut pruned = full.clone();
    plan.inverse(&mut full);
    plan.inverse_supported(&mut pruned, &keep);
    let scale = full.iter().map(|c| c.norm()).fold(0.0, f64::max);
    assert!(full
        .iter()
        .zip(&pruned)
        .all(|(a, b)| (a - b).norm() <= 1e-13 * scale));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut full: Vec<C64> = (0..g.len())
        .map(|_| C64::new(rng.gen(), rng.gen()))
        .collect();
    let mut pruned = full.clone();
    plan.forward(&mut full);
    plan.forward_restricted(&mut pruned, &keep);
    let scale = full.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for i in (0..g.len()).filter(|&i| g.is_dealiased(i)) {
        assert!((full[i] - pruned[i]).norm() <= 1e-13 * scale);
    }
}
