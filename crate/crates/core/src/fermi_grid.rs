//! Radial momentum grids graded toward the Fermi radius √μ, and the
//! angular-averaged interaction kernel A_d(p, q).
//!
//! The integrands in this problem (1/K_T, 1/E_Δ) develop a scale T/μ or Δ/μ
//! at the Fermi surface while staying analytic elsewhere, so the grid uses
//! Gauss-Legendre panels whose widths double moving away from √μ, starting
//! at s_min·√μ. Each panel's distance to the Fermi radius is then at least
//! its own width, which keeps the per-panel quadrature error geometric.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::potential::PotentialSpec;
use crate::quad::{gauss_legendre, graded_bounds, merge_bounds, periodic_mean};

/// Summary of a grid's resolution, carried through result records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta<T> {
    pub nodes: usize,
    pub panels: usize,
    pub s_min: T,
    pub cutoff: T,
    pub points_per_panel: usize,
}

/// Quadrature grid on (0, Λ] with panel boundaries at √μ and √(2μ).
#[derive(Debug, Clone)]
pub struct RadialGrid<T> {
    mu: T,
    cutoff: T,
    s_min: T,
    points_per_panel: usize,
    panel_bounds: Vec<T>,
    nodes: Vec<T>,
    weights: Vec<T>,
}

/// Largest panel width relative to √μ; beyond this the interaction kernel
/// (not the Fermi singularity) limits accuracy, handled by points_per_panel.
const MAX_PANEL_FRACTION: f64 = 0.5;

const MAX_NODES: usize = 40_000;

/// Builds a grid on (0, `cutoff`] for chemical potential `mu`.
///
/// Panels grade geometrically (ratio 2) away from √μ down to width
/// s_min·√μ on both sides; √(2μ) is always a panel boundary so integrals
/// restricted to |p| < √(2μ) split exactly.
pub fn build_grid<T: Real>(
    mu: T,
    cutoff: T,
    points_per_panel: usize,
    s_min: T,
) -> Result<RadialGrid<T>> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::Domain(format!(
            "mu must be finite and positive, got {mu}"
        )));
    }
    let p_fermi = mu.sqrt();
    let p_outer = (T::of(2.0) * mu).sqrt();
    if !(cutoff > p_outer) || !cutoff.is_finite() {
        return Err(Error::Domain(format!(
            "cutoff {cutoff} must exceed sqrt(2 mu) = {p_outer} so the \
             sub-Fermi shell |p| < sqrt(2 mu) is fully covered"
        )));
    }
    if !(s_min > T::zero() && s_min < T::one()) {
        return Err(Error::Domain(format!(
            "s_min must lie in (0, 1), got {s_min}"
        )));
    }
    if points_per_panel < 4 {
        return Err(Error::Domain(format!(
            "points_per_panel must be at least 4, got {points_per_panel}"
        )));
    }

    let h0 = s_min * p_fermi;
    let hmax = (T::of(MAX_PANEL_FRACTION) * p_fermi).max(h0);
    let mut bounds = graded_bounds(p_fermi, T::zero(), h0, hmax);
    bounds.extend(graded_bounds(p_fermi, p_outer, h0, hmax));
    let h_tail = (T::of(0.25) * p_fermi).min(cutoff - p_outer);
    bounds.extend(graded_bounds(p_outer, cutoff, h_tail, hmax));
    let panel_bounds = merge_bounds(bounds);

    let panels = panel_bounds.len() - 1;
    if panels * points_per_panel > MAX_NODES {
        return Err(Error::Resolution(format!(
            "grid would need {} nodes (> {MAX_NODES}); raise s_min or lower points_per_panel",
            panels * points_per_panel
        )));
    }

    let (ref_nodes, ref_weights) = gauss_legendre::<T>(points_per_panel);
    let mut nodes = Vec::with_capacity(panels * points_per_panel);
    let mut weights = Vec::with_capacity(panels * points_per_panel);
    let half = T::of(0.5);
    for pair in panel_bounds.windows(2) {
        let mid = half * (pair[0] + pair[1]);
        let rad = half * (pair[1] - pair[0]);
        for (&x, &w) in ref_nodes.iter().zip(&ref_weights) {
            nodes.push(mid + rad * x);
            weights.push(rad * w);
        }
    }

    Ok(RadialGrid {
        mu,
        cutoff,
        s_min,
        points_per_panel,
        panel_bounds,
        nodes,
        weights,
    })
}

impl<T: Real> RadialGrid<T> {
    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn s_min(&self) -> T {
        self.s_min
    }

    pub fn fermi_radius(&self) -> T {
        self.mu.sqrt()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn panel_bounds(&self) -> &[T] {
        &self.panel_bounds
    }

    pub fn points_per_panel(&self) -> usize {
        self.points_per_panel
    }

    pub fn meta(&self) -> GridMeta<T> {
        GridMeta {
            nodes: self.nodes.len(),
            panels: self.panel_bounds.len() - 1,
            s_min: self.s_min,
            cutoff: self.cutoff,
            points_per_panel: self.points_per_panel,
        }
    }

    /// Σ w_i·samples_i for node-aligned samples.
    pub fn integrate(&self, samples: &[T]) -> Result<T> {
        if samples.len() != self.nodes.len() {
            return Err(Error::Domain(format!(
                "expected {} samples, got {}",
                self.nodes.len(),
                samples.len()
            )));
        }
        Ok(self.weights.iter().zip(samples).map(|(&w, &f)| w * f).sum())
    }

    /// Σ w_i·f(p_i) without materializing the sample vector.
    pub fn integrate_with<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.weights
            .iter()
            .zip(&self.nodes)
            .map(|(&w, &p)| w * f(p))
            .sum()
    }
}

/// Angular average A_d(p, q) of the interaction between momentum shells of
/// radii p and q.
///
/// d = 1 folds the even sector: (2π)^{−1/2}·[V̂(|p−q|) + V̂(p+q)]. d = 2
/// averages V̂ over the relative angle with the periodic trapezoid rule to
/// 1e−10 relative. Symmetric under p ↔ q by construction, and nonpositive
/// whenever V̂ ≤ 0.
pub fn angular_kernel<T: Real>(potential: &PotentialSpec<T>, p: T, q: T) -> T {
    debug_assert!(p >= T::zero() && q >= T::zero());
    match potential.dimension() {
        1 => {
            let norm = (T::of(2.0) * T::PI()).sqrt().recip();
            norm * (potential.vhat((p - q).abs()) + potential.vhat(p + q))
        }
        _ => {
            let p2q2 = p * p + q * q;
            let cross = T::of(2.0) * p * q;
            periodic_mean(
                |theta: T| {
                    let m2 = (p2q2 - cross * theta.cos()).max(T::zero());
                    potential.vhat(m2.sqrt())
                },
                16,
                T::of(1e-10),
            )
        }
    }
}

/// Momentum cutoff for solver grids: max(10√μ, √(2μ) plus the radius where
/// the interaction envelope has decayed to 1e−14 of V̂(0)).
///
/// For models whose envelope never decays below the target (flat L¹ bound),
/// falls back to twenty inverse length scales past √(2μ).
pub fn suggest_cutoff<T: Real>(potential: &PotentialSpec<T>, mu: T) -> T {
    let p_fermi = mu.sqrt();
    let p_outer = (T::of(2.0) * mu).sqrt();
    let floor = T::of(10.0) * p_fermi;
    let scale = potential.length_scale().recip();
    let target = T::of(1e-14) * potential.vhat(T::zero()).abs();
    if target <= T::zero() {
        return floor;
    }
    let step = T::of(0.25) * scale;
    let mut p = step;
    while p < T::of(1000.0) * scale {
        if potential.vhat_envelope(p) <= target {
            return floor.max(p_outer + p);
        }
        p += step;
    }
    floor.max(p_outer + T::of(20.0) * scale)
}

/// Fraction of the interaction strength the cutoff discards: the envelope of
/// |V̂| at the largest kernel argument reachable from the sub-Fermi shell,
/// relative to |V̂(0)|.
pub fn cutoff_tail_fraction<T: Real>(potential: &PotentialSpec<T>, grid: &RadialGrid<T>) -> T {
    let p_outer = (T::of(2.0) * grid.mu()).sqrt();
    let denom = potential.vhat(T::zero()).abs();
    if denom <= T::zero() {
        return T::zero();
    }
    potential.vhat_envelope(grid.cutoff() - p_outer) / denom
}
