//! Three-dimensional complex FFT assembled from rustfft line transforms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::{Fft, FftPlanner};

use crate::par;
use crate::C64;

/// Unnormalised forward (`e^{-i k x}`) and inverse (`e^{+i k x}`) transforms
/// on an `n^3` cube stored with the last axis fastest.
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

impl Fft3 {
    /// Shared plan for size `n`, built on first use.
    pub fn plan(n: usize) -> Arc<Fft3> {
        let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("fft plan cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    n,
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                })
            })
            .clone()
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.run(data, &self.forward, Prune::None);
    }

    pub fn inverse(&self, data: &mut [C64]) {
        self.run(data, &self.inverse, Prune::None);
    }

    /// Inverse transform of data supported on `keep[i0] && keep[i1] && keep[i2]`;
    /// lines that are zero on input are skipped.
    pub fn inverse_supported(&self, data: &mut [C64], keep: &[bool]) {
        self.run(data, &self.inverse, Prune::Input(keep));
    }

    /// Forward transform that is exact only at positions with all three
    /// `keep` flags set; other outputs are left unspecified.
    pub fn forward_restricted(&self, data: &mut [C64], keep: &[bool]) {
        self.run(data, &self.forward, Prune::Output(keep));
    }

    fn run(&self, data: &mut [C64], plan: &Arc<dyn Fft<f64>>, prune: Prune<'_>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer does not match the plan size");
        let scratch_len = plan.get_inplace_scratch_len();
        let (input, output) = match prune {
            Prune::None => (None, None),
            Prune::Input(k) => (Some(k), None),
            Prune::Output(k) => (None, Some(k)),
        };
        let on = |mask: Option<&[bool]>, i: usize| mask.is_none_or(|m| m[i]);

        // last axis: contiguous lines, zero on input unless i0 and i1 are kept
        par::for_each_chunk(data, n * n, |i0, slab| {
            if !on(input, i0) {
                return;
            }
            let mut scratch = vec![C64::default(); scratch_len];
            for (i1, line) in slab.chunks_mut(n).enumerate() {
                if on(input, i1) {
                    plan.process_with_scratch(line, &mut scratch);
                }
            }
        });

        // middle axis: strided lines inside each slab
        par::for_each_chunk(data, n * n, |i0, slab| {
            if !on(input, i0) {
                return;
            }
            let mut scratch = vec![C64::default(); scratch_len];
            let mut line = vec![C64::default(); n];
            for i2 in (0..n).filter(|&i2| on(output, i2)) {
                for i1 in 0..n {
                    line[i1] = slab[i1 * n + i2];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for i1 in 0..n {
                    slab[i1 * n + i2] = line[i1];
                }
            }
        });

        // first axis: gather into a transposed buffer, transform, scatter back
        let mut tmp = vec![C64::default(); data.len()];
        {
            let src = &*data;
            par::for_each_chunk(&mut tmp, n * n, |i1, lines| {
                if !on(output, i1) {
                    return;
                }
                let mut scratch = vec![C64::default(); scratch_len];
                for (i2, line) in lines.chunks_mut(n).enumerate() {
                    if !on(output, i2) {
                        continue;
                    }
                    let col = i1 * n + i2;
                    for (i0, v) in line.iter_mut().enumerate() {
                        *v = src[i0 * n * n + col];
                    }
                    plan.process_with_scratch(line, &mut scratch);
                }
            });
        }
        let src = &tmp;
        par::for_each_chunk(data, n * n, |i0, slab| {
            for (col, v) in slab.iter_mut().enumerate() {
                *v = src[col * n + i0];
            }
        });
    }
}

/// Which lines of a transform may be skipped.
#[derive(Clone, Copy)]
enum Prune<'a> {
    None,
    /// Input vanishes off the kept positions.
    Input(&'a [bool]),
    /// Only outputs at kept positions are wanted.
    Output(&'a [bool]),
}
