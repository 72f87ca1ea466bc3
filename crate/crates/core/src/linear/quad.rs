//! Quadrature nodes and time grids shared by the linear measurements.

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w));
    }
    out.reverse();
    out
}

/// Piecewise-uniform time grid: `per_segment` steps of `dt0`, then the same
/// number of steps at twice the size, and so on until `t_end` is reached.
/// Returns `(dt, steps)` segments; the last one is shortened to land on
/// `t_end`.
pub fn graded_segments(dt0: f64, per_segment: usize, t_end: f64) -> Vec<(f64, usize)> {
    assert!(dt0 > 0.0 && per_segment > 0 && t_end > 0.0);
    let mut out = Vec::new();
    let (mut t, mut dt) = (0.0, dt0);
    while t < t_end * (1.0 - 1e-12) {
        let span = dt * per_segment as f64;
        if t + span >= t_end {
            let steps = ((t_end - t) / dt).ceil().max(1.0) as usize;
            out.push(((t_end - t) / steps as f64, steps));
            break;
        }
        out.push((dt, per_segment));
        t += span;
        dt *= 2.0;
    }
    out
}

/// Sample times of a segment list, starting with zero.
pub fn segment_times(segments: &[(f64, usize)]) -> Vec<f64> {
    let mut times = vec![0.0];
    let mut t = 0.0;
    for &(dt, steps) in segments {
        for _ in 0..steps {
            t += dt;
            times.push(t);
        }
    }
    times
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Trapezoidal `L^r` norm of samples `y` at times `t`; `r = inf` is the max.
pub fn time_lr(t: &[f64], y: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return y.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let s: f64 = t
        .windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0].abs().powf(r) + yw[1].abs().powf(r)))
        .sum();
    s.powf(1.0 / r)
}
