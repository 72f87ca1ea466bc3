use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::Vector4;
use nskc::besov::{block_norms, Band, BlockNorms, Flavor, TimeTrace};
use nskc::linear::{assemble_mode_matrix, expm, propagate_linear};
use nskc::solver::{
    block_data, eval_forcing_modes, eval_terms, global_run, picard_local_solve, track_apriori,
    AprioriTracker, DataSpec, Etd2, NonlinearOptions, Nonlinearity, NskForcing, PicardConfig,
    PicardStatus, PressureHelpers, RunStatus, SolverConfig, TrackerConfig, ZeroForcing,
    SERIES_CUTOFF,
};
use nskc::spectral::{DyadicDecomposition, FlowState, GridSpec, SpectralField};
use nskc::{NskError, PhysParams, C64};

mod common;

use common::*;

fn check_against_oracle(state: &FlowState, p: &PhysParams, frozen: bool) {
    let gap = oracle_gap(state, p, frozen);
    assert!(gap <= 1e-12, "oracle gap {gap:e}");
}

#[test]
fn nonlinearity_matches_convolution_oracle() {
    let s = random_state(grid16(), 1.0, 5.0, 1);
    check_against_oracle(&s, &params(), false);
}

#[test]
fn frozen_coefficients_match_quadratic_oracle() {
    let s = random_state(grid16(), 1.0, 5.0, 2);
    let p = PhysParams {
        kappa: 1.0,
        ..params()
    };
    check_against_oracle(&s, &p, true);
}

#[test]
fn every_term_has_zero_mean() {
    let s = random_state(grid16(), 2.0, 6.0, 3);
    assert!(term_mean_defect(&s, &params()) <= 1e-12);
}

#[test]
fn zero_density_leaves_only_advection() {
    let mut s = random_state(grid16(), 1.0, 5.0, 4);
    s.a = SpectralField::zeros(*s.grid());
    let p = params();
    let terms = eval_terms(&s, &p, &NonlinearOptions::default()).unwrap();
    let scale = terms.advection.max_abs();
    for t in &terms.terms()[1..] {
        assert!(t.max_abs() <= 1e-12 * scale);
    }
    // div((0 - 1) m (x) m) = -div(m (x) m).
    let o = Oracle::new(*s.grid());
    for i in 0..3 {
        let mut want = SpectralField::zeros(*s.grid());
        for j in 0..3 {
            want -= &o.dx(&o.conv(&s.m.comps[i], &s.m.comps[j]), j);
        }
        assert!(rel_diff(&terms.advection.comps[i], &want) < 1e-12);
    }
}

#[test]
fn zero_momentum_keeps_pressure_and_capillarity() {
    let g = grid16();
    let mut s = FlowState::zeros(g);
    s.a = SpectralField::from_modes(g, |k| match k {
        [2, 0, 0] | [-2, 0, 0] => C64::from(g.period().powi(3) * 0.3),
        _ => C64::default(),
    });
    let p = params();
    let terms = eval_terms(&s, &p, &NonlinearOptions::default()).unwrap();
    let scale = terms.pressure.max_abs();
    assert!(terms.advection.max_abs() <= 1e-12 * scale);
    assert!(terms.viscous_lap.max_abs() <= 1e-12 * scale);
    assert!(terms.pressure.max_abs() > 0.0 && terms.cap_a_lap.max_abs() > 0.0);
    check_against_oracle(&s, &p, false);
}

#[test]
fn pressure_helper_examples() {
    let h = PressureHelpers::new(2.0);
    assert_eq!(
        (h.i(0.0), h.j(0.0), h.g(0.0), h.h(0.0)),
        (0.0, 0.0, 0.0, 0.0)
    );
    assert_relative_eq!(h.i(1.0), 0.5);
    for b in [-0.5, -1e-5, 1e-6, 0.3, 2.0] {
        assert_relative_eq!(h.j(b), b, max_relative = 1e-13);
        assert_relative_eq!(h.g(b), b * b / 2.0, max_relative = 1e-13);
        assert!(h.h(b).abs() < 1e-12);
    }
    assert_eq!(h.g2(), 1.0);
    // Series and closed form agree across the cutoff.
    let h = PressureHelpers::new(1.4);
    for b in [
        SERIES_CUTOFF * 0.999,
        SERIES_CUTOFF * 1.001,
        -SERIES_CUTOFF * 0.999,
        -SERIES_CUTOFF * 1.001,
    ] {
        let closed = ((1.0 + b).powf(1.4) - 1.0) / 1.4 - b;
        assert_relative_eq!(h.g(b), closed, max_relative = 1e-8);
    }
    let below = h.h(SERIES_CUTOFF * 0.9999);
    let above = h.h(SERIES_CUTOFF * 1.0001);
    assert!((below - above).abs() < 1e-9);
    // G' = J by central differences.
    for b in [-0.4, 0.1, 0.7] {
        let d = (h.g(b + 1e-6) - h.g(b - 1e-6)) / 2e-6;
        assert_relative_eq!(d, h.j(b), max_relative = 1e-7);
    }
}

#[test]
fn negative_density_is_rejected() {
    let g = grid16();
    let mut s = FlowState::zeros(g);
    s.a = SpectralField::from_modes(g, |k| match k {
        [1, 0, 0] | [-1, 0, 0] => C64::from(g.period().powi(3) * 10.0),
        _ => C64::default(),
    });
    let err = eval_terms(&s, &params(), &NonlinearOptions::default()).unwrap_err();
    assert!(matches!(err, NskError::InadmissibleDensity { .. }));
}

// ---------- ETD2 ----------

struct Scaled(f64);

impl Nonlinearity for Scaled {
    fn eval(&self, _grid: GridSpec, modes: &[[C64; 4]]) -> nskc::Result<Vec<[C64; 4]>> {
        Ok(modes.iter().map(|v| v.map(|z| z * self.0)).collect())
    }
}

#[test]
fn etd_without_forcing_matches_linear_propagation() {
    let g = grid16();
    let p = params();
    let s = random_state(g, 1.0, 5.0, 5);
    let etd = Etd2::new(g, &p, 0.01).unwrap();
    let mut u = s.clone();
    for _ in 0..5 {
        u = etd.step(&u, &ZeroForcing).unwrap();
    }
    let run = propagate_linear(&s, &p, true, 0.05, 5, 5, None).unwrap();
    let a = u.to_modes();
    let b = run.states[1].to_modes();
    for (x, y) in a.iter().zip(&b) {
        for k in 0..4 {
            assert!((x[k] - y[k]).norm() <= 1e-12 * (1.0 + y[k].norm()));
        }
    }
}

#[test]
fn etd_local_error_is_third_order_for_linear_forcing() {
    let g = GridSpec::new(2.0 * PI, 8).unwrap();
    let p = params();
    let k = [1i64, -1, 2];
    let idx = g.index_of(k).unwrap();
    let v0 = [
        C64::new(0.4, 0.1),
        C64::new(-0.3, 0.2),
        C64::new(0.1, 0.0),
        C64::new(0.2, -0.5),
    ];
    let c = 1.5;
    let a = *assemble_mode_matrix(g.xi(idx), &p, true).matrix();
    let errs: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&h| {
            let etd = Etd2::new(g, &p, h).unwrap();
            let mut u = vec![[C64::default(); 4]; g.len()];
            u[idx] = v0;
            etd.step_modes(&mut u, &Scaled(c), None).unwrap();
            let exact = expm(&((a + nalgebra::Matrix4::identity() * C64::from(c)) * C64::from(h)))
                * Vector4::from(v0);
            (0..4)
                .map(|i| (u[idx][i] - exact[i]).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(
            (order - 3.0).abs() < 0.3,
            "local order {order}, errors {errs:?}"
        );
    }
}

fn march(s: &FlowState, p: &PhysParams, h: f64, steps: usize) -> FlowState {
    let etd = Etd2::new(*s.grid(), p, h).unwrap();
    let f = NskForcing {
        params: *p,
        options: NonlinearOptions::default(),
    };
    let mut u = s.to_modes();
    etd.cache().truncate(&mut u);
    for _ in 0..steps {
        etd.step_modes(&mut u, &f, None).unwrap();
    }
    FlowState::from_modes(*s.grid(), &u)
}

fn max_mode_diff(a: &FlowState, b: &FlowState) -> f64 {
    let (x, y) = (a.to_modes(), b.to_modes());
    x.iter()
        .zip(&y)
        .flat_map(|(u, v)| (0..4).map(move |k| (u[k] - v[k]).norm()))
        .fold(0.0, f64::max)
}

#[test]
fn etd_self_convergence_is_second_order() {
    let g = grid16();
    let p = PhysParams {
        eps: 0.5,
        omega: 1.0,
        ..params()
    };
    let s = random_state(g, 3.0, 4.0, 6);
    let t = 0.05;
    let sols: Vec<FlowState> = [10, 20, 40, 80]
        .iter()
        .map(|&n| march(&s, &p, t / n as f64, n))
        .collect();
    let diffs: Vec<f64> = sols
        .windows(2)
        .map(|w| max_mode_diff(&w[0], &w[1]))
        .collect();
    for w in diffs.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            (ratio / 4.0 - 1.0).abs() <= 0.2,
            "ratio {ratio}, diffs {diffs:?}"
        );
    }
}

#[test]
fn mass_is_conserved() {
    let g = grid16();
    let p = params();
    let mut s = random_state(g, 2.0, 5.0, 7);
    let zero = g.index_of([0, 0, 0]).unwrap();
    s.a.coeffs_mut()[zero] = C64::from(0.7 * g.period().powi(3));
    let out = march(&s, &p, 0.01, 50);
    let drift = (out.a.coeffs()[zero] - s.a.coeffs()[zero]).norm() / s.a.coeffs()[zero].norm();
    assert!(drift <= 1e-10 * 0.5);
}

// ---------- Picard ----------

fn picard_setup() -> (GridSpec, PhysParams, DyadicDecomposition) {
    let g = grid16();
    let p = PhysParams {
        eps: 0.5,
        omega: 1.0,
        ..params()
    };
    let d = DyadicDecomposition::new(g).unwrap();
    (g, p, d)
}

#[test]
fn picard_zero_data_converges_at_once() {
    let (g, p, d) = picard_setup();
    let f = NskForcing {
        params: p,
        options: NonlinearOptions::default(),
    };
    let rep =
        picard_local_solve(&FlowState::zeros(g), &p, &f, &d, &PicardConfig::default()).unwrap();
    assert_eq!(rep.status, PicardStatus::Converged);
    assert_eq!(rep.iterations, 1);
    assert!(rep.states.iter().all(|s| s.max_abs() == 0.0));
}

#[test]
fn picard_contracts_and_agrees_with_etd() {
    let (g, p, d) = picard_setup();
    let mut s = random_state(g, 1.0, 4.0, 8);
    s.scale(2.5e-3);
    let f = NskForcing {
        params: p,
        options: NonlinearOptions::default(),
    };
    let cfg = PicardConfig {
        t_end: 0.1,
        steps: 100,
        ..Default::default()
    };
    let rep = picard_local_solve(&s, &p, &f, &d, &cfg).unwrap();
    assert_eq!(rep.status, PicardStatus::Converged, "{rep:?}");
    assert!(rep.within_ball, "data norm {}", rep.data_norm);
    let floor = 1e-13 * rep.distances[0];
    for (k, r) in rep.ratios.iter().enumerate() {
        assert!(*r < 1.0);
        if k >= 2 && rep.distances[k + 1] > floor {
            assert!(*r < rep.ratios[k - 1] * 1.0001, "ratios {:?}", rep.ratios);
        }
    }
    // Same window with ETD2 at the same step.
    let etd = Etd2::new(g, &p, 1e-3).unwrap();
    let mut u = s.to_modes();
    etd.cache().truncate(&mut u);
    let mut states = vec![FlowState::from_modes(g, &u)];
    for _ in 0..100 {
        etd.step_modes(&mut u, &f, None).unwrap();
        states.push(FlowState::from_modes(g, &u));
    }
    let tc = TrackerConfig::default();
    let a = track_apriori(&rep.times, &rep.states, tc, p, d.clone()).unwrap();
    let b = track_apriori(&rep.times, &states, tc, p, d).unwrap();
    let (ea, eb) = (a.last_row().unwrap().e_p, b.last_row().unwrap().e_p);
    assert!((ea - eb).abs() <= 1e-6 * eb, "{ea} vs {eb}");
}

#[test]
fn picard_flags_large_data_without_crashing() {
    let (g, p, d) = picard_setup();
    let mut s = random_state(g, 1.0, 4.0, 8);
    s.scale(400.0);
    let f = NskForcing {
        params: p,
        options: NonlinearOptions::default(),
    };
    let cfg = PicardConfig {
        t_end: 0.1,
        steps: 50,
        max_iter: 20,
        ..Default::default()
    };
    let rep = picard_local_solve(&s, &p, &f, &d, &cfg).unwrap();
    assert!(!rep.within_ball);
    let flagged = rep.status == PicardStatus::Diverged || rep.ratios.iter().any(|r| *r >= 1.0);
    assert!(flagged, "{:?} {:?}", rep.status, rep.ratios);
}

// ---------- tracker ----------

#[test]
fn tracker_zero_trajectory_is_zero() {
    let (g, p, d) = picard_setup();
    let states = vec![FlowState::zeros(g); 3];
    let tr = track_apriori(&[0.0, 0.1, 0.2], &states, TrackerConfig::default(), p, d).unwrap();
    for r in tr.rows() {
        assert_eq!(
            (r.e_p, r.d_low, r.d_high, r.d_grad, r.mid_band),
            (0.0, 0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(r.min_density, 1.0);
    }
}

#[test]
fn tracker_rejects_bad_exponents() {
    for (p, q, r) in [
        (2.0, 2.5, 5.0),
        (2.5, 2.0, 10.0),
        (2.0, 3.5, 20.0),
        (2.0, 2.5, 2.0),
    ] {
        let c = TrackerConfig {
            p,
            q,
            r,
            beta: 16.0,
        };
        assert!(
            matches!(c.validate(), Err(NskError::Hypothesis(_))),
            "{p} {q} {r}"
        );
    }
    assert!(TrackerConfig::default().validate().is_ok());
}

#[test]
fn tracker_matches_offline_chemin_lerner_norms() {
    let (g, p, d) = picard_setup();
    let s = random_state(g, 1.0, 5.0, 9);
    let run = propagate_linear(&s, &p, true, 0.2, 20, 2, None).unwrap();
    let tc = TrackerConfig::default();
    let tr = track_apriori(&run.times, &run.states, tc, p, d.clone()).unwrap();
    let mut fourier = TimeTrace::new(d.j_min());
    let mut physical = TimeTrace::new(d.j_min());
    for (t, st) in run.times.iter().zip(&run.states) {
        let mut fb = BlockNorms {
            j_min: d.j_min(),
            values: vec![0.0; d.len()],
        };
        let mut pb = fb.clone();
        for f in st.augmented(p.eps) {
            fb.add(&block_norms(&f, &d, Flavor::Fourier, tc.p).unwrap());
            pb.add(&block_norms(&f, &d, Flavor::Physical, tc.q).unwrap());
        }
        fourier.push(*t, fb).unwrap();
        physical.push(*t, pb).unwrap();
    }
    let (pp, q, r) = (tc.p, tc.q, tc.r);
    let e_p = fourier.chemin_lerner(3.0 / pp - 3.0, f64::INFINITY, 1.0, Band::Full)
        + fourier.chemin_lerner(3.0 / pp - 1.0, f64::INFINITY, 1.0, Band::Full)
        + fourier.chemin_lerner(3.0 / pp + 1.0, 1.0, 1.0, Band::Full);
    let d_low = physical.chemin_lerner(3.0 / q - 3.0 + 4.0 / r, r, 1.0, Band::Full);
    let last = tr.last_row().unwrap();
    assert_relative_eq!(last.e_p, e_p, max_relative = 1e-12);
    assert_relative_eq!(last.d_low, d_low, max_relative = 1e-12);
    assert!(tr
        .rows()
        .windows(2)
        .all(|w| w[1].e_p >= w[0].e_p && w[1].d_high >= w[0].d_high));
}

#[test]
fn tracker_flags_first_window_crossing() {
    let (g, p, d) = picard_setup();
    let bump = |amp: f64| {
        let mut s = FlowState::zeros(g);
        s.a = SpectralField::from_modes(g, |k| match k {
            [1, 0, 0] | [-1, 0, 0] => C64::from(g.period().powi(3) * amp / 2.0),
            _ => C64::default(),
        });
        s
    };
    // eps a peaks at eps * amp.
    let mut tr = AprioriTracker::new(TrackerConfig::default(), p, d).unwrap();
    for (t, amp) in [(0.0, 0.4), (0.1, 0.9), (0.2, 1.2), (0.3, 0.5)] {
        tr.push(t, &bump(amp)).unwrap();
    }
    assert_eq!(tr.first_window_violation(), Some(0.2));
    assert_relative_eq!(tr.eps_a_sup(), 0.6, max_relative = 1e-12);
}

#[test]
fn tracker_e_p_matches_per_mode_quadrature() {
    // Single low-block datum on a linear trajectory: the tracker's E_p on a
    // coarse sampling agrees with exact per-mode evolution on a fine one.
    let g = GridSpec::new(2.0 * PI * 4.0, 16).unwrap();
    let p = PhysParams {
        eps: 0.5,
        omega: 2.0,
        ..params()
    };
    let d = DyadicDecomposition::new(g).unwrap();
    let spec = DataSpec {
        a_blocks: vec![(d.j_min(), 1.0)],
        m_blocks: vec![],
        p: 2.0,
        seed: 3,
    };
    let s = block_data(&d, &spec).unwrap();
    let run = propagate_linear(&s, &p, true, 2.0, 200, 4, None).unwrap();
    let coarse = track_apriori(
        &run.times,
        &run.states,
        TrackerConfig::default(),
        p,
        d.clone(),
    )
    .unwrap();
    let modes = s.to_modes();
    let mats: Vec<_> = (0..g.len())
        .map(|i| assemble_mode_matrix(g.xi(i), &p, true))
        .collect();
    let fine_times: Vec<f64> = (0..=400).map(|n| n as f64 * 0.005).collect();
    let fine_states: Vec<FlowState> = fine_times
        .iter()
        .map(|&t| {
            let u: Vec<[C64; 4]> = (0..g.len())
                .map(|i| {
                    let v = mats[i].exp(t) * Vector4::from(modes[i]);
                    [v[0], v[1], v[2], v[3]]
                })
                .collect();
            FlowState::from_modes(g, &u)
        })
        .collect();
    let fine = track_apriori(&fine_times, &fine_states, TrackerConfig::default(), p, d).unwrap();
    let (a, b) = (coarse.last_row().unwrap().e_p, fine.last_row().unwrap().e_p);
    assert!((a - b).abs() <= 0.02 * b, "{a} vs {b}");
}

// ---------- runs ----------

#[test]
fn zero_data_run_is_bounded() {
    let (g, p, d) = picard_setup();
    let cfg = SolverConfig {
        h: 0.01,
        t_end: 0.1,
        track_every: 2,
        ..Default::default()
    };
    let out = global_run(&FlowState::zeros(g), &p, &d, &cfg).unwrap();
    assert_eq!(out.status, RunStatus::Bounded);
    assert_relative_eq!(out.t_final, 0.1, max_relative = 1e-12);
}

#[test]
fn block_data_has_prescribed_block_norms() {
    let g = GridSpec::new(2.0 * PI * 4.0, 32).unwrap();
    let d = DyadicDecomposition::new(g).unwrap();
    let spec = DataSpec {
        a_blocks: vec![(0, 2.0)],
        m_blocks: vec![(-1, 0.5)],
        p: 2.0,
        seed: 11,
    };
    let bad = DataSpec {
        a_blocks: vec![(d.j_max() + 1, 1.0)],
        ..spec.clone()
    };
    assert!(matches!(block_data(&d, &bad), Err(NskError::Resolution(_))));
    let s = block_data(&d, &spec).unwrap();
    let na = block_norms(&s.a, &d, Flavor::Fourier, 2.0).unwrap();
    assert_relative_eq!(
        na.values[(0 - d.j_min()) as usize],
        2.0,
        max_relative = 1e-12
    );
    assert!(s.a.hermitian_defect() < 1e-14);
    assert_eq!(block_data(&d, &spec).unwrap(), s);
}

#[test]
fn fused_forcing_equals_sum_of_terms() {
    let s = random_state(grid16(), 1.5, 6.0, 12);
    let p = params();
    for opts in [
        NonlinearOptions::default(),
        NonlinearOptions {
            frozen_coefficients: true,
            capillary: false,
            density_floor: 0.0,
        },
    ] {
        let total = eval_terms(&s, &p, &opts).unwrap().total();
        let fused = eval_forcing_modes(&s, &p, &opts).unwrap();
        let scale = total.max_abs();
        for (i, v) in fused.iter().enumerate() {
            assert_eq!(v[0], C64::default());
            for c in 0..3 {
                assert!((v[c + 1] - total.comps[c].coeffs()[i]).norm() <= 1e-13 * scale);
            }
        }
    }
}
