//! Gauss-Legendre panel quadrature building blocks.

use crate::num::Real;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre recurrence; n up to a few
/// hundred converges in a handful of steps at either scalar width.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "empty quadrature rule");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::of(n as f64);
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess for the i-th root of P_n.
        let theta = T::PI() * (T::of(i as f64) + T::of(0.75)) / (nf + T::of(0.5));
        let mut x = theta.cos();
        let mut dp = T::one();
        for _ in 0..100 {
            // Evaluate P_n and P_n' by upward recurrence.
            let mut p0 = T::one();
            let mut p1 = x;
            for k in 2..=n {
                let kf = T::of(k as f64);
                let p2 = ((T::of(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - T::one());
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= T::epsilon() * (T::one() + x.abs()) {
                break;
            }
        }
        let w = T::of(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

/// Reusable n-point rule mapped onto arbitrary panels.
#[derive(Debug, Clone)]
pub struct PanelRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> PanelRule<T> {
    pub fn new(points: usize) -> Self {
        let (nodes, weights) = gauss_legendre(points);
        PanelRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over [a, b] with this rule.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = T::of(0.5);
        let mid = half * (a + b);
        let rad = half * (b - a);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + rad * x);
        }
        acc * rad
    }

    /// Integrates `f` over consecutive panels delimited by `bounds`.
    pub fn integrate_panels<F: FnMut(T) -> T>(&self, bounds: &[T], mut f: F) -> T {
        let mut acc = T::zero();
        for pair in bounds.windows(2) {
            acc += self.integrate(pair[0], pair[1], &mut f);
        }
        acc
    }
}

/// Panel boundaries from `start` to `end` whose widths start at `h0` and
/// double away from `start`; the last panel is truncated to land on `end`.
///
///// Suited to integrands with a short scale at `start`: each panel keeps its
/// distance to `start` at least as large as its own width.
pub fn doubling_bounds<T: Real>(start: T, end: T, h0: T) -> Vec<T> {
    assert!(end > start && h0 > T::zero());
    let mut bounds = vec![start];
    let mut h = h0;
    let mut x = start;
    loop {
        x = (x + h).min(end);
        bounds.push(x);
        if x >= end {
            return bounds;
        }
        h = h + h;
    }
}

/// Panel boundaries from `from` to `to` (either order) whose widths start at
/// `h0` next to `from`, double moving away, and never exceed `hmax`; the last
/// panel is truncated to land exactly on `to`. Returned ascending.
pub fn graded_bounds<T: Real>(from: T, to: T, h0: T, hmax: T) -> Vec<T> {
    assert!(h0 > T::zero() && hmax >= h0 && to != from);
    let span = (to - from).abs();
    let mut offsets = vec![T::zero()];
    let mut h = h0;
    let mut x = T::zero();
    while x < span {
        x = (x + h).min(span);
        offsets.push(x);
        h = (h + h).min(hmax);
    }
    let sign = if to > from { T::one() } else { -T::one() };
    let mut out: Vec<T> = offsets.into_iter().map(|o| from + sign * o).collect();
    if sign < T::zero() {
        out.reverse();
    }
    // Pin both endpoints so shared region boundaries merge exactly.
    out[0] = from.min(to);
    let last = out.len() - 1;
    out[last] = from.max(to);
    out
}

/// Mean of a 2π-periodic function over one period by the trapezoid rule,
/// doubling the point count from `n0` until two successive levels agree to
/// `rtol` relative. Spectrally accurate for analytic integrands.
///
/// Midpoint samples are reused between levels, and sums are compensated so
/// the quadrature error dominates rounding even at the finest level.
pub fn periodic_mean<T: Real, F: Fn(T) -> T>(f: F, n0: usize, rtol: T) -> T {
    let two_pi = T::of(2.0) * T::PI();
    let mut n = n0.next_power_of_two().max(16);
    let sum_at = |count: usize, offset: T| -> T {
        let step = two_pi / T::of(count as f64);
        let mut acc = T::zero();
        let mut comp = T::zero();
        for j in 0..count {
            let x = step * (T::of(j as f64) + offset);
            let y = f(x) - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        acc
    };
    let mut mean = sum_at(n, T::zero()) / T::of(n as f64);
    while n < (1 << 17) {
        let mid = sum_at(n, T::of(0.5)) / T::of(n as f64);
        let refined = (mean + mid) * T::of(0.5);
        let err = (refined - mean).abs();
        mean = refined;
        n *= 2;
        if err <= rtol * mean.abs() {
            break;
        }
    }
    mean
}

/// Sorted union of breakpoints, dropping near-duplicates (relative gap below
/// a few ulps) that would create degenerate panels.
pub fn merge_bounds<T: Real>(mut points: Vec<T>) -> Vec<T> {
    points.sort_by(|a, b| a.partial_cmp(b).expect("NaN breakpoint"));
    let mut out: Vec<T> = Vec::with_capacity(points.len());
    for x in points {
        match out.last() {
            Some(&last) => {
                let scale = last.abs().max(x.abs()).max(T::min_positive_value());
                if x - last > T::of(8.0) * T::epsilon() * scale {
                    out.push(x);
                }
            }
            None => out.push(x),
        }
    }
    out
}
