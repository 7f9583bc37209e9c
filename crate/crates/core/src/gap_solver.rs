//! Damped fixed-point solver for the BCS gap equation, mainly at T = 0,
//! plus the energy gap Ξ and the gap-scale integral m_μ(Δ).
//!
//! The radial gap equation reads Δ(p) = −λ∫₀^∞ A_d(p,q)·Δ(q)/E(q)·
//! tanh(E(q)/(2T))·q^{d−1} dq with E(q) = √((q²−μ)² + Δ(q)²) and A_d the
//! angular interaction kernel. For V̂ ≤ 0 the map preserves the cone
//! Δ ≥ 0, and at T = 0 it has exactly one nontrivial fixed point there.
//! The solution is exponentially small in 1/λ, so the iteration starts
//! from the predicted amplitude and leading shape rather than a generic
//! O(μ) guess, which would collapse to zero on realistic grids.

use crate::error::{Error, Result};
use crate::fermi_grid::{angular_kernel, RadialGrid};
use crate::num::Real;
use crate::potential::PotentialSpec;
use crate::quad::{graded_bounds, merge_bounds, PanelRule};
use crate::spectral::{assemble_kernel, KernelMatrix};
use crate::sphere_asymptotics::{b_mu, build_vmu, build_wmu, e_mu, predicted_xi};

/// Nonnegative gap profile sampled on a radial grid, extended off the nodes
/// by piecewise-linear interpolation and clamped beyond the ends.
#[derive(Debug, Clone)]
pub struct GapFunction<T> {
    grid: RadialGrid<T>,
    values: Vec<T>,
}

impl<T: Real> GapFunction<T> {
    pub fn new(grid: RadialGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "gap values ({}) do not match the grid ({} nodes)",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::Domain(
                "gap values must be finite and nonnegative".into(),
            ));
        }
        Ok(GapFunction { grid, values })
    }

    /// The zero profile, the trivial fixed point of the gap map.
    pub fn zero(grid: RadialGrid<T>) -> Self {
        let values = vec![T::zero(); grid.len()];
        GapFunction { grid, values }
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// Piecewise-linear interpolation in p, clamped outside the node range.
    pub fn at(&self, p: T) -> T {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        if p <= nodes[0] {
            return self.values[0];
        }
        if p >= nodes[n - 1] {
            return self.values[n - 1];
        }
        let mut hi = match nodes.binary_search_by(|x| x.partial_cmp(&p).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        if hi == 0 {
            hi = 1;
        }
        let (p0, p1) = (nodes[hi - 1], nodes[hi]);
        let t = (p - p0) / (p1 - p0);
        self.values[hi - 1] * (T::one() - t) + self.values[hi] * t
    }

    /// Quasiparticle dispersion E(p) = √((p² − μ)² + Δ(p)²).
    pub fn dispersion(&self, p: T, mu: T) -> T {
        let x = p * p - mu;
        x.hypot(self.at(p))
    }
}

/// One application of the gap map on the grid nodes.
///
/// Δ'(p_i) = −λ·Σ_j w_j·p_j^{d−1}·A_d(p_i, p_j)·Δ_j/E_j·tanh(E_j/(2T)),
/// with the tanh factor ≡ 1 at T = 0 and Δ_j/E_j read as 0 where Δ_j = 0.
/// Assembles the interaction kernel on every call; iterating callers use
/// [`gap_map_with_kernel`] to amortize that cost.
pub fn gap_map<T: Real>(
    potential: &PotentialSpec<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    temperature: T,
    delta: &GapFunction<T>,
) -> Result<GapFunction<T>> {
    let kernel = assemble_kernel(potential, grid);
    gap_map_with_kernel(&kernel, grid, lambda, temperature, delta)
}

/// [`gap_map`] against a kernel already assembled for this grid.
pub fn gap_map_with_kernel<T: Real>(
    kernel: &KernelMatrix<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    temperature: T,
    delta: &GapFunction<T>,
) -> Result<GapFunction<T>> {
    let n = grid.len();
    if kernel.order() != n || kernel.mu() != grid.mu() {
        return Err(Error::Domain(
            "kernel was assembled for a different grid".into(),
        ));
    }
    if delta.grid.len() != n {
        return Err(Error::Domain(
            "gap function lives on a different grid".into(),
        ));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "coupling must be finite and nonnegative, got {lambda}"
        )));
    }
    if !(temperature >= T::zero()) || !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be finite and nonnegative, got {temperature}"
        )));
    }
    let mu = grid.mu();
    // Source vector scaled by sqrt-weights: the symmetrized kernel entry is
    // s_i A_ij s_j with s_j = sqrt(w_j p_j^{d-1}), so w_j p_j^{d-1} r_j
    // contracts to s_j * r_j against it.
    let s = kernel.weights_sqrt();
    let source: Vec<T> = grid
        .nodes()
        .iter()
        .zip(&delta.values)
        .zip(s)
        .map(|((&p, &dv), &sj)| {
            if dv == T::zero() {
                return T::zero();
            }
            let e = (p * p - mu).hypot(dv);
            let thermal = if temperature == T::zero() {
                T::one()
            } else {
                (e / (T::of(2.0) * temperature)).tanh()
            };
            sj * dv / e * thermal
        })
        .collect();
    let sym = kernel.symmetrized();
    let values: Vec<T> = (0..n)
        .map(|i| {
            let row = &sym[i * n..(i + 1) * n];
            let dot: T = row.iter().zip(&source).map(|(&a, &b)| a * b).sum();
            // A <= 0 entrywise for admissible potentials, so the sum of
            // -lambda * A * (nonnegative) terms stays in the cone.
            (-lambda * dot / s[i]).max(T::zero())
        })
        .collect();
    Ok(GapFunction {
        grid: delta.grid.clone(),
        values,
    })
}

/// Solves the gap equation by damped fixed-point iteration
/// Δ_{n+1} = (1−θ)Δ_n + θ·gap_map(Δ_n).
///
/// The initial iterate is the predicted amplitude times the leading shape
/// A_d(p, √μ)/A_d(√μ, √μ). Convergence means a relative sup-norm residual
/// ‖Δ − gap_map(Δ)‖_∞/‖Δ‖_∞ ≤ rtol. At T = 0 a collapse below
/// 1e−3 × the predicted amplitude contradicts the guaranteed positive
/// solution and reports a numerical error (under-resolved grid); at finite
/// temperature collapse is physics (T above the transition) and returns
/// the zero profile.
pub fn solve_gap<T: Real>(
    potential: &PotentialSpec<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    temperature: T,
    damping: T,
    rtol: T,
    max_iter: usize,
) -> Result<GapFunction<T>> {
    let kernel = assemble_kernel(potential, grid);
    solve_gap_with_kernel(
        potential,
        &kernel,
        grid,
        lambda,
        temperature,
        damping,
        rtol,
        max_iter,
    )
}

/// [`solve_gap`] against a kernel already assembled for this grid.
#[allow(clippy::too_many_arguments)]
pub fn solve_gap_with_kernel<T: Real>(
    potential: &PotentialSpec<T>,
    kernel: &KernelMatrix<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    temperature: T,
    damping: T,
    rtol: T,
    max_iter: usize,
) -> Result<GapFunction<T>> {
    solve_gap_detailed(
        potential,
        kernel,
        grid,
        lambda,
        temperature,
        damping,
        rtol,
        max_iter,
    )
    .map(|solve| solve.gap)
}

/// A converged solve plus how it got there.
#[derive(Debug, Clone)]
pub struct GapSolve<T> {
    pub gap: GapFunction<T>,
    /// Applications of the gap map, including the final accepting one.
    pub iterations: usize,
    /// Relative sup-norm residual at acceptance; exactly zero for the
    /// collapsed finite-temperature profile, which is a fixed point.
    pub residual: T,
}

/// [`solve_gap_with_kernel`], also reporting iteration count and final
/// residual.
#[allow(clippy::too_many_arguments)]
pub fn solve_gap_detailed<T: Real>(
    potential: &PotentialSpec<T>,
    kernel: &KernelMatrix<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    temperature: T,
    damping: T,
    rtol: T,
    max_iter: usize,
) -> Result<GapSolve<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "coupling must be positive and finite, got {lambda}"
        )));
    }
    if !(damping > T::zero()) || damping > T::one() {
        return Err(Error::Domain(format!(
            "damping must lie in (0, 1], got {damping}"
        )));
    }
    if !(rtol > T::zero()) {
        return Err(Error::Domain(format!(
            "relative tolerance must be positive, got {rtol}"
        )));
    }
    if !potential.validate().gap_eligible() {
        return Err(Error::Domain(
            "potential fails the gap-equation hypotheses (attraction plus the \
             dimension-specific moment bounds)"
                .into(),
        ));
    }
    let mu = grid.mu();
    let xi_pred = predicted_amplitude(potential, mu, lambda)?;
    let shape_norm = angular_kernel(potential, mu.sqrt(), mu.sqrt());
    if shape_norm == T::zero() {
        return Err(Error::Domain(
            "interaction vanishes on the Fermi surface; no pairing shape to seed".into(),
        ));
    }
    let seed: Vec<T> = grid
        .nodes()
        .iter()
        .map(|&p| {
            let shape = (angular_kernel(potential, p, mu.sqrt()) / shape_norm).max(T::zero());
            xi_pred * shape
        })
        .collect();
    let mut delta = GapFunction {
        grid: grid.clone(),
        values: seed,
    };

    let collapse = T::of(1e-3) * xi_pred;
    let mut theta = damping;
    let mut prev_residuals = [T::infinity(); 2];
    let mut residual = T::infinity();
    for step in 0..max_iter {
        let mapped = gap_map_with_kernel(kernel, grid, lambda, temperature, &delta)?;
        let norm = delta.max_value();
        if norm < collapse {
            if temperature > T::zero() {
                return Ok(GapSolve {
                    gap: GapFunction::zero(delta.grid),
                    iterations: step + 1,
                    residual: T::zero(),
                });
            }
            return Err(Error::Numerical(format!(
                "gap collapsed below 1e-3 of the predicted amplitude {xi_pred:e} at T = 0; \
                 the grid under-resolves the pairing scale"
            )));
        }
        residual = delta
            .values
            .iter()
            .zip(&mapped.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
            / norm;
        if residual <= rtol {
            return Ok(GapSolve {
                gap: delta,
                iterations: step + 1,
                residual,
            });
        }
        // Plain iteration can enter a two-cycle at strong coupling; halve
        // the step when the residual has grown twice in a row.
        if residual > prev_residuals[0] && prev_residuals[0] > prev_residuals[1] {
            theta = (theta * T::of(0.5)).max(T::of(0.125));
            prev_residuals = [T::infinity(); 2];
        } else {
            prev_residuals = [residual, prev_residuals[0]];
        }
        for (v, m) in delta.values.iter_mut().zip(&mapped.values) {
            *v = (T::one() - theta) * *v + theta * *m;
        }
    }
    Err(Error::Convergence(format!(
        "gap iteration did not reach rtol = {rtol:e} within {max_iter} steps; \
         last residual {residual:e}"
    )))
}

fn predicted_amplitude<T: Real>(potential: &PotentialSpec<T>, mu: T, lambda: T) -> Result<T> {
    let d = potential.dimension();
    let second = build_vmu(potential, mu, 32).and_then(|v| {
        let w = build_wmu(potential, mu, 32)?;
        predicted_xi(mu, d, b_mu(&v, &w, lambda)?)
    });
    second.or_else(|_| {
        build_vmu(potential, mu, 48)
            .and_then(|v| predicted_xi(mu, d, T::FRAC_PI_2() * lambda * e_mu(&v)?))
    })
}

/// Minimum of the quasiparticle dispersion E(p) = √((p²−μ)² + Δ(p)²):
/// the energy gap Ξ and its location.
///
/// Scans the grid nodes and then refines by golden-section search on the
/// interpolant between the neighbors of the best node.
pub fn energy_gap<T: Real>(delta: &GapFunction<T>, mu: T) -> Result<(T, T)> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let nodes = delta.grid.nodes();
    let mut best = 0;
    let mut best_e = T::infinity();
    for (i, &p) in nodes.iter().enumerate() {
        let e = delta.dispersion(p, mu);
        if e < best_e {
            best_e = e;
            best = i;
        }
    }
    let lo = if best == 0 {
        T::zero()
    } else {
        nodes[best - 1]
    };
    let hi = if best + 1 == nodes.len() {
        nodes[best]
    } else {
        nodes[best + 1]
    };

    let inv_phi = (T::of(5.0).sqrt() - T::one()) * T::of(0.5);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = delta.dispersion(c, mu);
    let mut fd = delta.dispersion(d, mu);
    for _ in 0..200 {
        if b - a <= T::epsilon() * (T::one() + a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = delta.dispersion(c, mu);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = delta.dispersion(d, mu);
        }
    }
    let p_star = (a + b) * T::of(0.5);
    let xi = delta.dispersion(p_star, mu).min(best_e);
    Ok((xi, p_star))
}

/// Gap-scale integral m_μ(Δ) in its reduced form: with x_±(s) =
/// Δ(√μ·√(1±s))/μ,
/// m = (μ^{d/2−1}/2)·∫₀¹ [(1−s)^{d/2−1}/√(s²+x_−²) + (1+s)^{d/2−1}/√(s²+x_+²)] ds.
///
/// Requires Δ(√μ) > 0; the integral diverges logarithmically otherwise
/// (see [`m_delta_truncated`]).
pub fn m_delta_direct<T: Real>(delta: &GapFunction<T>, mu: T, d: usize) -> Result<T> {
    let x0 = delta.at(mu.sqrt()) / mu;
    if !(x0 > T::zero()) {
        return Err(Error::Domain(
            "gap vanishes on the Fermi surface; m diverges (use m_delta_truncated)".into(),
        ));
    }
    m_delta_impl(delta, mu, d, T::zero())
}

/// [`m_delta_direct`] with the region s < s0 excised, exposing the
/// ln(1/s0) divergence of the zero-gap integrand.
pub fn m_delta_truncated<T: Real>(delta: &GapFunction<T>, mu: T, d: usize, s0: T) -> Result<T> {
    if !(s0 > T::zero()) || s0 >= T::one() {
        return Err(Error::Domain(format!(
            "truncation must lie in (0, 1), got {s0}"
        )));
    }
    m_delta_impl(delta, mu, d, s0)
}

fn m_delta_impl<T: Real>(delta: &GapFunction<T>, mu: T, d: usize, s0: T) -> Result<T> {
    if d != 1 && d != 2 {
        return Err(Error::Domain(format!("dimension must be 1 or 2, got {d}")));
    }
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let half_exp = T::of(d as f64 / 2.0 - 1.0);
    let d_exp = T::of(d as f64 - 1.0);
    let root_mu = mu.sqrt();
    let x0 = delta.at(root_mu) / mu;
    let h0 = (x0 * T::of(0.25)).max(s0 * T::of(0.25)).max(T::of(1e-12));
    let hmax = T::of(0.0625);
    let rule = PanelRule::new(16);

    // The interpolated gap has kinks at the nodes; pin panel boundaries to
    // the s-images of the nodes so every panel sees a smooth integrand.
    let node_s = |above: bool| -> Vec<T> {
        delta
            .grid
            .nodes()
            .iter()
            .filter_map(|&p| {
                let s = p * p / mu - T::one();
                let in_range = if above {
                    s > T::zero() && s < T::one()
                } else {
                    s < T::zero() && s > -T::one()
                };
                in_range.then(|| s.abs())
            })
            .collect()
    };

    // (1+s) piece on [s0, 1], graded toward the gap scale at s = 0.
    let mut plus_bounds = graded_bounds(s0, T::one(), h0, hmax);
    plus_bounds.extend(node_s(true).into_iter().filter(|&s| s > s0));
    let plus_bounds = merge_bounds(plus_bounds);
    let plus = rule.integrate_panels(&plus_bounds, |s: T| {
        let x = delta.at(root_mu * (T::one() + s).sqrt()) / mu;
        (T::one() + s).powf(half_exp) / s.hypot(x)
    });

    // (1-s) piece under s = 1 - t^2, killing the d = 1 endpoint
    // singularity; s = s0 maps to the upper end t = sqrt(1 - s0).
    let t_hi = (T::one() - s0).sqrt();
    let mut minus_bounds = graded_bounds(t_hi, T::zero(), (h0 * T::of(0.5)).min(hmax), hmax);
    minus_bounds.extend(
        node_s(false)
            .into_iter()
            .filter(|&s| s > s0)
            .map(|s| (T::one() - s).sqrt()),
    );
    let minus_bounds = merge_bounds(minus_bounds);
    let minus = rule.integrate_panels(&minus_bounds, |t: T| {
        let s = T::one() - t * t;
        let x = delta.at(root_mu * t) / mu;
        T::of(2.0) * t.powf(d_exp) / s.hypot(x)
    });

    Ok(mu.powf(half_exp) * T::of(0.5) * (plus + minus))
}
