//! Independent numerical oracles for the integration tests: slow, direct
//! implementations of the defining formulas, sharing no code paths with
//! the library. Everything here is plain f64.
#![allow(dead_code)]

use bcs_core::potential::PotentialSpec;
use bcs_core::spectral::SymmetricOperatorMatrix;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Adaptive Simpson quadrature with Richardson acceptance.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let refined = left + right;
        if depth == 0 || (refined - whole).abs() <= 15.0 * tol {
            return refined + (refined - whole) / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Integral split at interior kink points, each segment done adaptively.
pub fn adaptive_split<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: f64) -> f64 {
    points
        .windows(2)
        .map(|pair| adaptive(f, pair[0], pair[1], tol))
        .sum()
}

/// Fourier cosine mean (2π)^{−1}∫₀^{2π} f(ψ)·cos(kψ) dψ by the doubling
/// trapezoid rule, which is exponentially accurate for periodic analytic
/// integrands.
pub fn cosine_mean<F: Fn(f64) -> f64>(f: &F, k: usize, tol: f64) -> f64 {
    let sample = |n: usize| -> f64 {
        (0..n)
            .map(|i| {
                let psi = TWO_PI * i as f64 / n as f64;
                f(psi) * (k as f64 * psi).cos()
            })
            .sum::<f64>()
            / n as f64
    };
    let mut n = 64.max(8 * (k + 1));
    let mut value = sample(n);
    while n < 1 << 20 {
        n *= 2;
        let refined = sample(n);
        let settled = (refined - value).abs() <= tol * refined.abs().max(1e-300);
        value = refined;
        if settled {
            break;
        }
    }
    value
}

/// ⟨u, 𝒲_μ u⟩ for d = 1 computed straight from the defining radial
/// integral: g(r) is the direction sum of |V̂ u|² at radius √μ·r, the
/// integrand below √2 is (g − g(1))/|r²−1| and g/(r²−1) beyond, all
/// times μ^{−1/2}. The removable point r = 1 is bridged by a thin strip
/// evaluated one step off the singularity.
pub fn wmu_brute_d1(potential: &PotentialSpec<f64>, mu: f64, up: f64, um: f64) -> f64 {
    let root_mu = mu.sqrt();
    let g = |r: f64| -> f64 {
        let va = potential.vhat(root_mu * (r - 1.0).abs());
        let vb = potential.vhat(root_mu * (r + 1.0));
        let psi_p = va * up + vb * um;
        let psi_m = vb * up + va * um;
        (psi_p * psi_p + psi_m * psi_m) / TWO_PI
    };
    wmu_brute_radial(&g, mu, 1)
}

/// ⟨e_k, 𝒲_μ e_k⟩ for d = 2: the angular factor a_k(r) is the k-th cosine
/// mean of V̂ over the relative angle, squared, with Jacobian r.
pub fn wmu_brute_d2(potential: &PotentialSpec<f64>, mu: f64, k: usize) -> f64 {
    let root_mu = mu.sqrt();
    let g = move |r: f64| -> f64 {
        let a = cosine_mean(
            &|psi: f64| {
                let m2 = (r * r + 1.0 - 2.0 * r * psi.cos()).max(0.0);
                potential.vhat(root_mu * m2.sqrt())
            },
            k,
            1e-13,
        );
        a * a
    };
    wmu_brute_radial(&g, mu, 2)
}

fn wmu_brute_radial<G: Fn(f64) -> f64>(g: &G, mu: f64, d: usize) -> f64 {
    let root2 = 2.0f64.sqrt();
    let g1 = g(1.0);
    let jac = |r: f64| if d == 1 { 1.0 } else { r };
    let inner = |r: f64| (g(r) - g1) * jac(r) / (r * r - 1.0).abs();
    let eps = 1e-7;
    let tol = 1e-11;
    let mut value = adaptive(&inner, 0.0, 1.0 - eps, tol)
        + adaptive(&inner, 1.0 + eps, root2, tol)
        + 2.0 * eps * 0.5 * (inner(1.0 - eps) + inner(1.0 + eps));
    // Outer region, no subtraction; 1 + 16 dimensionless radii is far past
    // any interaction scale used in the tests.
    let outer = |r: f64| g(r) * jac(r) / (r * r - 1.0);
    value += adaptive(&outer, root2, 17.0, tol);
    let prefactor = if d == 1 { mu.sqrt().recip() } else { 1.0 };
    prefactor * value
}

/// Angular average of V̂ between momentum shells p and q in the plane,
/// directly as π^{−1}∫₀^π V̂(√(p² + q² − 2pq·cosθ)) dθ.
pub fn angular_average_d2(potential: &PotentialSpec<f64>, p: f64, q: f64) -> f64 {
    adaptive(
        &|theta: f64| {
            let m2 = (p * p + q * q - 2.0 * p * q * theta.cos()).max(0.0);
            potential.vhat(m2.sqrt())
        },
        0.0,
        std::f64::consts::PI,
        1e-13,
    ) / std::f64::consts::PI
}

/// Smallest eigenvalue of a dense symmetric matrix located by Sylvester
/// inertia: Gaussian elimination without pivoting counts eigenvalues below
/// a shift, and bisection pins the lowest one between Gershgorin bounds.
pub fn smallest_eigenvalue_inertia(a: &[Vec<f64>], tol: f64) -> f64 {
    let n = a.len();
    assert!(n > 0 && a.iter().all(|row| row.len() == n));
    let eigenvalues_below = |x: f64| -> Option<usize> {
        let mut m: Vec<Vec<f64>> = a.to_vec();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= x;
        }
        let mut negative = 0usize;
        for k in 0..n {
            let pivot = m[k][k];
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            if pivot < 0.0 {
                negative += 1;
            }
            let row_k: Vec<f64> = m[k][k..].to_vec();
            for row in m.iter_mut().skip(k + 1) {
                let factor = row[k] / pivot;
                for (dst, &src) in row[k..].iter_mut().zip(&row_k) {
                    *dst -= factor * src;
                }
            }
        }
        Some(negative)
    };
    let mut below = f64::INFINITY;
    let mut above = f64::NEG_INFINITY;
    for (i, row) in a.iter().enumerate() {
        let radius: f64 = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.abs())
            .sum();
        below = below.min(row[i] - radius);
        above = above.max(row[i] + radius);
    }
    above += 1.0;
    below -= 1.0;
    for _ in 0..200 {
        if above - below <= tol * above.abs().max(below.abs()).max(1e-30) {
            break;
        }
        let mid = 0.5 * (below + above);
        // A vanishing pivot means the shift sits on an eigenvalue of a
        // leading minor; nudging by a relative ulp restores the count.
        let count = eigenvalues_below(mid)
            .or_else(|| eigenvalues_below(mid + (above - below) * 1e-12))
            .or_else(|| eigenvalues_below(mid - (above - below) * 1e-11));
        match count {
            Some(c) if c >= 1 => above = mid,
            Some(_) => below = mid,
            None => below = mid + (above - below) * 1e-9,
        }
    }
    0.5 * (below + above)
}

/// Dense copy of an operator matrix for the oracle eigensolve.
pub fn dense_copy(matrix: &SymmetricOperatorMatrix<f64>) -> Vec<Vec<f64>> {
    let n = matrix.order();
    (0..n)
        .map(|i| (0..n).map(|j| matrix.at(i, j)).collect())
        .collect()
}

/// Sup-norm residual ‖Av − λv‖_∞ scaled by ‖A‖_∞‖v‖_∞.
pub fn eigenpair_residual(a: &[Vec<f64>], eigenvalue: f64, v: &[f64]) -> f64 {
    let n = a.len();
    let norm_a = a
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let norm_v = v.iter().fold(0.0f64, |s, &x| s.max(x.abs()));
    let mut worst = 0.0f64;
    for i in 0..n {
        let av: f64 = (0..n).map(|j| a[i][j] * v[j]).sum();
        worst = worst.max((av - eigenvalue * v[i]).abs());
    }
    worst / (norm_a * norm_v)
}
