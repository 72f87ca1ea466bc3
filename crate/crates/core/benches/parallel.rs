//! Hot kernels on one worker against the full pool. Without the `parallel`
//! feature only the sequential path is measured.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nskc::linear::StepCache;
use nskc::solver::{block_data, eval_forcing_modes, DataSpec, NonlinearOptions};
use nskc::spectral::{DyadicDecomposition, Fft3, FlowState, GridSpec};
use nskc::{PhysParams, C64};

fn state(n: usize) -> (GridSpec, FlowState) {
    let grid = GridSpec::new(2.0 * std::f64::consts::PI * 4.0, n).expect("grid");
    let dyadic = DyadicDecomposition::new(grid).expect("blocks");
    let blocks: Vec<(i32, f64)> = (dyadic.j_min()..=dyadic.j_max())
        .map(|j| (j, 10.0))
        .collect();
    let spec = DataSpec {
        a_blocks: blocks.clone(),
        m_blocks: blocks,
        p: 2.0,
        seed: 1,
    };
    (grid, block_data(&dyadic, &spec).expect("data"))
}

/// Runs `f` on a pool of `threads` workers, or directly when built sequentially.
fn on_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

fn worker_counts() -> Vec<usize> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    if cfg!(feature = "parallel") && all > 1 {
        vec![1, all]
    } else {
        vec![1]
    }
}

fn kernels(c: &mut Criterion) {
    let params = PhysParams {
        eps: 0.1,
        omega: 10.0,
        ..PhysParams::default()
    };
    let options = NonlinearOptions::default();
    for n in [32, 64] {
        let (grid, s) = state(n);
        let fft = Fft3::plan(n);
        let cache = StepCache::new(grid, &params, 1e-2, true);
        let modes = s.to_modes();
        let data: Vec<C64> = s.a.coeffs().to_vec();
        let mut group = c.benchmark_group(format!("n{n}"));
        group.sample_size(10);
        for threads in worker_counts() {
            group.bench_with_input(
                BenchmarkId::new("fft_forward", threads),
                &threads,
                |b, &t| {
                    b.iter(|| {
                        on_pool(t, || {
                            let mut d = data.clone();
                            fft.forward(&mut d);
                            d
                        })
                    })
                },
            );
            group.bench_with_input(BenchmarkId::new("forcing", threads), &threads, |b, &t| {
                b.iter(|| {
                    on_pool(t, || {
                        eval_forcing_modes(&s, &params, &options).expect("forcing")
                    })
                })
            });
            group.bench_with_input(BenchmarkId::new("propagate", threads), &threads, |b, &t| {
                b.iter(|| {
                    on_pool(t, || {
                        let mut u = modes.clone();
                        cache.propagate(&mut u);
                        u
                    })
                })
            });
        }
        group.finish();
    }
}

criterion_group!(benches, kernels);
criterion_main!(benches);
