//! Discretization of the linear operator K_T + λV on the radial sector.
//!
//! K_T is the thermal dispersion K_T(p) = (p²−μ)/tanh((p²−μ)/(2T)). The
//! integral operator V acts through the angular-averaged kernel A_d(p, q);
//! conjugating the quadrature discretization by the weights s_i = √(w_i
//! p_i^{d−1}) makes the matrix symmetric without changing its spectrum, so a
//! symmetric eigensolver applies directly.

use rayon::prelude::*;

use crate::eigen;
use crate::error::{Error, Result};
use crate::fermi_grid::{angular_kernel, GridMeta, RadialGrid};
use crate::num::Real;
use crate::potential::PotentialSpec;

/// Chemical potential and temperature entering K_T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionParams<T> {
    pub mu: T,
    pub temperature: T,
}

impl<T: Real> DispersionParams<T> {
    pub fn new(mu: T, temperature: T) -> Result<Self> {
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        if !(temperature >= T::zero()) || !temperature.is_finite() {
            return Err(Error::Domain(format!(
                "temperature must be nonnegative, got {temperature}"
            )));
        }
        Ok(DispersionParams { mu, temperature })
    }
}

/// K_T(p) = (p²−μ)/tanh((p²−μ)/(2T)), with the removable singularity at the
/// Fermi surface evaluated by series.
///
/// The series branch 2T + x²/(6T) is taken for |x/(2T)| < 1e−4, where its
/// truncation error (next term ∼ u⁴/45 relative) is below machine epsilon;
/// outside that window the tanh form is exact and loses nothing to
/// cancellation. At T = 0 the limit |p²−μ| is returned. Always ≥ 2T.
pub fn k_t<T: Real>(p: T, params: DispersionParams<T>) -> T {
    let x = p * p - params.mu;
    let t = params.temperature;
    if t == T::zero() {
        return x.abs();
    }
    let u = x / (T::of(2.0) * t);
    if u.abs() < T::of(1e-4) {
        T::of(2.0) * t + x * x / (T::of(6.0) * t)
    } else {
        x / u.tanh()
    }
}

/// Temperature-independent part of the discretized operator: the angular
/// kernel sampled on a grid's node pairs, symmetrized by s_i = √(w_i
/// p_i^{d−1}). Assembled once per (potential, grid) and reused across
/// temperatures and couplings, which only touch the diagonal and a scalar
/// factor.
#[derive(Debug, Clone)]
pub struct KernelMatrix<T> {
    n: usize,
    dimension: usize,
    mu: T,
    /// Symmetrized entries s_i·A_d(p_i, p_j)·s_j, row-major.
    sym: Vec<T>,
    /// The weights s_i, kept for unsymmetrized applications.
    s: Vec<T>,
}

impl<T: Real> KernelMatrix<T> {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn symmetrized(&self) -> &[T] {
        &self.sym
    }

    pub fn weights_sqrt(&self) -> &[T] {
        &self.s
    }

    /// Raw kernel value A_d(p_i, p_j), recovered from the symmetrized entry.
    pub fn raw(&self, i: usize, j: usize) -> T {
        self.sym[i * self.n + j] / (self.s[i] * self.s[j])
    }
}

/// Samples the angular kernel on all node pairs of `grid`. Rows are computed
/// concurrently; only the lower triangle is evaluated and then mirrored, so
/// the result is exactly symmetric.
pub fn assemble_kernel<T: Real>(
    potential: &PotentialSpec<T>,
    grid: &RadialGrid<T>,
) -> KernelMatrix<T> {
    let n = grid.len();
    let d = potential.dimension();
    let nodes = grid.nodes();
    let s: Vec<T> = nodes
        .iter()
        .zip(grid.weights())
        .map(|(&p, &w)| {
            let radial = if d == 1 { T::one() } else { p };
            (w * radial).sqrt()
        })
        .collect();

    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| s[i] * angular_kernel(potential, nodes[i], nodes[j]) * s[j])
                .collect()
        })
        .collect();

    let mut sym = vec![T::zero(); n * n];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            sym[i * n + j] = v;
            sym[j * n + i] = v;
        }
    }
    KernelMatrix {
        n,
        dimension: d,
        mu: grid.mu(),
        sym,
        s,
    }
}

/// Dense symmetric discretization of K_T + λV with its provenance.
#[derive(Debug, Clone)]
pub struct SymmetricOperatorMatrix<T> {
    n: usize,
    entries: Vec<T>,
    pub lambda: T,
    pub params: DispersionParams<T>,
    pub grid_meta: GridMeta<T>,
}

impl<T: Real> SymmetricOperatorMatrix<T> {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }
}

/// Discretizes K_T + λV on `grid`: M_ij = K_T(p_i)·δ_ij + λ·s_i·A_d(p_i,
/// p_j)·s_j.
pub fn assemble_ktv<T: Real>(
    potential: &PotentialSpec<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    params: DispersionParams<T>,
) -> Result<SymmetricOperatorMatrix<T>> {
    let kernel = assemble_kernel(potential, grid);
    assemble_ktv_from_kernel(&kernel, grid, lambda, params)
}

/// Same as [`assemble_ktv`] but reuses a previously assembled kernel, the
/// hot path when scanning temperatures.
pub fn assemble_ktv_from_kernel<T: Real>(
    kernel: &KernelMatrix<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    params: DispersionParams<T>,
) -> Result<SymmetricOperatorMatrix<T>> {
    if grid.mu() != params.mu {
        return Err(Error::Domain(format!(
            "grid was built for mu = {} but the dispersion has mu = {}",
            grid.mu(),
            params.mu
        )));
    }
    if kernel.order() != grid.len() || kernel.mu() != grid.mu() {
        return Err(Error::Domain(
            "kernel matrix does not belong to this grid".into(),
        ));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "coupling must be finite and nonnegative, got {lambda}"
        )));
    }
    let n = kernel.order();
    let mut entries: Vec<T> = kernel.symmetrized().iter().map(|&v| lambda * v).collect();
    for (i, &p) in grid.nodes().iter().enumerate() {
        entries[i * n + i] += k_t(p, params);
    }
    Ok(SymmetricOperatorMatrix {
        n,
        entries,
        lambda,
        params,
        grid_meta: grid.meta(),
    })
}

/// Smallest eigenvalue of the discretized operator; enough for sign scans.
pub fn lowest_eigenvalue<T: Real>(matrix: &SymmetricOperatorMatrix<T>) -> Result<T> {
    eigen::lowest_eigenvalue(&matrix.entries, matrix.n)
}

/// Smallest eigenvalue and its unit eigenvector, with the residual contract
/// ‖Mv − λ_min·v‖₂ ≤ 1e−10·‖M‖_F enforced; the vector's first appreciable
/// component is positive.
pub fn lowest_eigenpair<T: Real>(matrix: &SymmetricOperatorMatrix<T>) -> Result<(T, Vec<T>)> {
    let (value, vector) = eigen::lowest_eigenpair(&matrix.entries, matrix.n)?;
    let n = matrix.n;
    let mut residual = T::zero();
    let mut frob = T::zero();
    for i in 0..n {
        let mut row = T::zero();
        for (&m, &v) in matrix.entries[i * n..(i + 1) * n].iter().zip(&vector) {
            frob += m * m;
            row += m * v;
        }
        let r = row - value * vector[i];
        residual += r * r;
    }
    let (residual, frob) = (residual.sqrt(), frob.sqrt());
    if residual > T::of(1e-10) * frob {
        return Err(Error::Numerical(format!(
            "eigenpair residual {residual:e} exceeds 1e-10 of the matrix norm {frob:e}"
        )));
    }
    Ok((value, vector))
}
