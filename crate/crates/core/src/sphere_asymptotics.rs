//! Fermi-sphere operators and the second-order weak-coupling constants.
//!
//! The linear criterion localizes on the Fermi sphere as the coupling λ → 0.
//! Two operators on L²(S^{d−1}) capture the first two orders: 𝒱 averages
//! V̂(√μ(p−q)) over sphere directions, and 𝒲 corrects it by the off-sphere
//! contribution of the resolvent. Their combination fixes the ground-state
//! energy b_μ(λ) = inf spec (π/2)(λ𝒱 − λ²𝒲), which in turn yields closed
//! predictions for T_c and the energy gap Ξ whose ratio is the universal
//! constant π·e^{−γ}.
//!
//! For d = 1 the sphere is the two-point set {±√μ} and both operators are
//! symmetric 2×2 matrices. For d = 2 radial potentials commute with
//! rotations, so both operators are diagonal in the Fourier modes e^{ikθ}
//! and are stored as real mode values.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::potential::PotentialSpec;
use crate::quad::{gauss_legendre, graded_bounds, merge_bounds, PanelRule};

/// Finite representation of a rotation-invariant operator on the sphere.
#[derive(Debug, Clone)]
pub enum SphereRep<T> {
    /// d = 1: the symmetric matrix [[diag, off], [off, diag]] over {+, −};
    /// eigenvalues diag ± off on the even/odd vectors (1, ±1)/√2.
    TwoPoint { diag: T, off: T },
    /// d = 2: the value on each rotation mode e^{ikθ}, k = 0..=K.
    Modes(Vec<T>),
}

#[derive(Debug, Clone)]
pub struct SphereOperator<T> {
    dimension: usize,
    mu: T,
    rep: SphereRep<T>,
}

impl<T: Real> SphereOperator<T> {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn rep(&self) -> &SphereRep<T> {
        &self.rep
    }

    /// (even, odd) eigenvalues of a two-point operator.
    pub fn sector_values(&self) -> Option<(T, T)> {
        match self.rep {
            SphereRep::TwoPoint { diag, off } => Some((diag + off, diag - off)),
            SphereRep::Modes(_) => None,
        }
    }

    pub fn modes(&self) -> Option<&[T]> {
        match &self.rep {
            SphereRep::Modes(m) => Some(m),
            SphereRep::TwoPoint { .. } => None,
        }
    }
}

/// A function on the sphere for quadratic-form evaluations: a pair of values
/// on the two-point sphere (d = 1), or a Fourier-mode index (d = 2).
#[derive(Debug, Clone, Copy)]
pub enum SphereFunction<T> {
    TwoPoint(T, T),
    Mode(usize),
}

/// Mean values m_k = (2π)^{−1}∫₀^{2π} f(θ)·cos(kθ) dθ for k = 0..=kmax, by
/// the trapezoid rule with doubling; all modes share the same f samples.
fn cosine_modes<T: Real, F: Fn(T) -> T>(f: F, kmax: usize, rtol: T) -> Vec<T> {
    let two_pi = T::of(2.0) * T::PI();
    let sums_at = |n: usize, offset: T| -> Vec<T> {
        let mut sums = vec![T::zero(); kmax + 1];
        for j in 0..n {
            let theta = two_pi * (T::of(j as f64) + offset) / T::of(n as f64);
            let fj = f(theta);
            let c1 = theta.cos();
            sums[0] += fj;
            if kmax >= 1 {
                sums[1] += fj * c1;
            }
            let mut prev = T::one();
            let mut cur = c1;
            for s in sums.iter_mut().take(kmax + 1).skip(2) {
                let c = T::of(2.0) * c1 * cur - prev;
                prev = cur;
                cur = c;
                *s += fj * c;
            }
        }
        sums
    };
    let mut n = (4 * (kmax + 1)).next_power_of_two().max(32);
    let mut means: Vec<T> = sums_at(n, T::zero())
        .into_iter()
        .map(|s| s / T::of(n as f64))
        .collect();
    while n < (1 << 17) {
        let mids = sums_at(n, T::of(0.5));
        let mut err = T::zero();
        let mut scale = T::zero();
        for (m, s) in means.iter_mut().zip(mids) {
            let refined = (*m + s / T::of(n as f64)) * T::of(0.5);
            err = err.max((refined - *m).abs());
            scale = scale.max(refined.abs());
            *m = refined;
        }
        n *= 2;
        if err <= rtol * scale {
            break;
        }
    }
    means
}

/// Builds 𝒱: the sphere average of V̂(√μ(p − q)).
///
/// d = 1 is the closed 2×2 form with entries (2π)^{−1/2}·V̂(0) and
/// (2π)^{−1/2}·V̂(2√μ); d = 2 computes v_k = (2π)^{−1}∫ V̂(2√μ|sin(θ/2)|)
/// cos(kθ) dθ for k = 0..=kmax. `kmax` is ignored for d = 1.
pub fn build_vmu<T: Real>(
    potential: &PotentialSpec<T>,
    mu: T,
    kmax: usize,
) -> Result<SphereOperator<T>> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let rep = match potential.dimension() {
        1 => {
            let norm = (T::of(2.0) * T::PI()).sqrt().recip();
            SphereRep::TwoPoint {
                diag: norm * potential.vhat(T::zero()),
                off: norm * potential.vhat(T::of(2.0) * mu.sqrt()),
            }
        }
        _ => {
            let two_root_mu = T::of(2.0) * mu.sqrt();
            SphereRep::Modes(cosine_modes(
                |theta: T| potential.vhat(two_root_mu * (theta * T::of(0.5)).sin().abs()),
                kmax,
                T::of(1e-12),
            ))
        }
    };
    Ok(SphereOperator {
        dimension: potential.dimension(),
        mu,
        rep,
    })
}

/// Lowest eigenvalue of a sphere operator. For mode representations the
/// cutoff must have converged: |v_K| ≤ 1e−12·|v_0|.
pub fn e_mu<T: Real>(op: &SphereOperator<T>) -> Result<T> {
    match &op.rep {
        SphereRep::TwoPoint { diag, off } => Ok((*diag + *off).min(*diag - *off)),
        SphereRep::Modes(v) => {
            let last = v.last().copied().unwrap_or(T::zero());
            if last.abs() > T::of(1e-12) * v[0].abs() {
                return Err(Error::Cutoff(format!(
                    "mode values have not decayed at the cutoff: |v_K| = {:e} vs |v_0| = {:e}; \
                     raise the mode cutoff",
                    last.abs(),
                    v[0].abs()
                )));
            }
            Ok(v.iter().copied().fold(T::infinity(), T::min))
        }
    }
}

/// Trace of a sphere operator; equals (2π)^{−d}·|S^{d−1}|·∫V for 𝒱.
pub fn trace<T: Real>(op: &SphereOperator<T>) -> T {
    match &op.rep {
        SphereRep::TwoPoint { diag, .. } => T::of(2.0) * *diag,
        // Modes k >= 1 are doubly degenerate (e^{±ikθ}).
        SphereRep::Modes(v) => v[0] + T::of(2.0) * v.iter().skip(1).copied().sum::<T>(),
    }
}

/// Result of a 𝒲 quadratic-form evaluation: the form value together with
/// the reported truncation diagnostics of the outer radial integral.
#[derive(Debug, Clone, Copy)]
pub struct WmuEvaluation<T> {
    pub value: T,
    /// Upper bound on the discarded tail beyond `outer_cutoff`, from the
    /// interaction's decay envelope.
    pub tail_bound: T,
    /// Dimensionless radius r = |p|/√μ where the outer integral stops.
    pub outer_cutoff: T,
}

/// ⟨u, 𝒲_μ u⟩ for a sphere function u.
pub fn wmu_form<T: Real>(potential: &PotentialSpec<T>, mu: T, u: SphereFunction<T>) -> Result<T> {
    wmu_form_detailed(potential, mu, u).map(|ev| ev.value)
}

/// As [`wmu_form`], returning the truncation diagnostics too.
///
/// The form is evaluated through its radial reduction: with g(r) the angular
/// integral of |ψ(√μ·rω)|² over directions ω, the value is
/// μ^{d/2−1}·[∫₀^{√2}(g(r) − g(1))·r^{d−1}/|r²−1| dr + ∫_{√2}^{R}
/// g(r)·r^{d−1}/(r²−1) dr], the subtraction making r = 1 removable. R grows
/// until the envelope tail bound is negligible; exceeding 1e−8 of the value
/// is a cutoff error.
pub fn wmu_form_detailed<T: Real>(
    potential: &PotentialSpec<T>,
    mu: T,
    u: SphereFunction<T>,
) -> Result<WmuEvaluation<T>> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    match (potential.dimension(), u) {
        (1, SphereFunction::TwoPoint(up, um)) => {
            let root_mu = mu.sqrt();
            let two_pi = T::of(2.0) * T::PI();
            // Angular sum of |psi|^2 over the two directions +-sqrt(mu) r.
            let g = move |p: &PotentialSpec<T>, r: T| {
                let va = p.vhat(root_mu * (r - T::one()).abs());
                let vb = p.vhat(root_mu * (r + T::one()));
                let psi_plus = va * up + vb * um;
                let psi_minus = vb * up + va * um;
                (psi_plus * psi_plus + psi_minus * psi_minus) / two_pi
            };
            let coef = {
                let s = up.abs() + um.abs();
                T::of(2.0) * s * s / two_pi
            };
            let g1 = g(potential, T::one());
            let (values, tail_bound, outer_cutoff) =
                wmu_radial_engine(potential, mu, |r| vec![g(potential, r)], &[g1], coef)?;
            let value = values[0];
            check_tail(value, tail_bound)?;
            Ok(WmuEvaluation {
                value,
                tail_bound,
                outer_cutoff,
            })
        }
        (2, SphereFunction::Mode(k)) => {
            let (values, tail_bound, outer_cutoff) = wmu_modes_planar(potential, mu, k)?;
            let value = values[k];
            check_tail(value, tail_bound)?;
            Ok(WmuEvaluation {
                value,
                tail_bound,
                outer_cutoff,
            })
        }
        (_, SphereFunction::Mode(_)) => Err(Error::Domain(
            "mode indices describe d = 2 sphere functions; use a two-point vector for d = 1".into(),
        )),
        (_, SphereFunction::TwoPoint(..)) => Err(Error::Domain(
            "two-point vectors describe d = 1 sphere functions; use a mode index for d = 2".into(),
        )),
    }
}

fn check_tail<T: Real>(value: T, tail: T) -> Result<()> {
    if tail > T::of(1e-8) * value.abs() {
        return Err(Error::Cutoff(format!(
            "outer tail bound {tail:e} exceeds 1e-8 of the form value {value:e}; \
             the interaction decays too slowly for a certified truncation"
        )));
    }
    Ok(())
}

/// All planar mode values ⟨e_k, 𝒲 e_k⟩ for k = 0..=kmax in one radial
/// sweep: the angular factor of mode k is a_k(r) = (2π)^{−1}∫ V̂(√μ·
/// √(r²+1−2r·cosψ))·cos(kψ) dψ, and every mode shares the same V̂ samples.
fn wmu_modes_planar<T: Real>(
    potential: &PotentialSpec<T>,
    mu: T,
    kmax: usize,
) -> Result<(Vec<T>, T, T)> {
    let root_mu = mu.sqrt();
    let a_modes = move |p: &PotentialSpec<T>, r: T| -> Vec<T> {
        cosine_modes(
            |psi: T| {
                let m2 = (r * r + T::one() - T::of(2.0) * r * psi.cos()).max(T::zero());
                p.vhat(root_mu * m2.sqrt())
            },
            kmax,
            T::of(1e-12),
        )
    };
    let a1 = a_modes(potential, T::one());
    let q1: Vec<T> = a1.iter().map(|&a| a * a).collect();
    wmu_radial_engine(
        potential,
        mu,
        |r| a_modes(potential, r).into_iter().map(|a| a * a).collect(),
        &q1,
        T::one(),
    )
}

/// Shared radial quadrature for 𝒲 forms. `q(r)` returns the angular-summed
/// |ψ|² for each tracked component at dimensionless radius r, `q_at_one` its
/// value on the sphere, and `tail_coef` a constant with q(r) ≤ tail_coef ·
/// envelope(√μ(r−1))² for r > √2. Returns the form values scaled by
/// μ^{d/2−1}, the tail bound, and the outer cutoff radius.
fn wmu_radial_engine<T: Real, Q: Fn(T) -> Vec<T> + Sync>(
    potential: &PotentialSpec<T>,
    mu: T,
    q: Q,
    q_at_one: &[T],
    tail_coef: T,
) -> Result<(Vec<T>, T, T)> {
    let d = potential.dimension();
    let m = q_at_one.len();
    let root2 = T::of(2.0).sqrt();
    let (gl_nodes, gl_weights) = gauss_legendre::<T>(16);

    // The integrand is analytic at r = 1 thanks to the subtraction, but its
    // scale is set by the interaction; grade panels toward 1 and cap their
    // width at the momentum-space structure scale of V.
    let h_fine = T::of(1e-6);
    let structure = (potential.length_scale() * mu.sqrt()).recip();
    let hmax = (T::of(0.5) * structure).min(T::of(0.125)).max(h_fine);

    let jac = |r: T| if d == 1 { T::one() } else { r };
    let mut inner_bounds = graded_bounds(T::one(), T::zero(), h_fine, hmax);
    inner_bounds.extend(graded_bounds(T::one(), root2, h_fine, hmax));
    let inner_bounds = merge_bounds(inner_bounds);

    // Collect quadrature points, evaluate q concurrently, fold in order.
    let mut points: Vec<(T, T)> = Vec::new();
    let half = T::of(0.5);
    for pair in inner_bounds.windows(2) {
        let mid = half * (pair[0] + pair[1]);
        let rad = half * (pair[1] - pair[0]);
        for (&x, &w) in gl_nodes.iter().zip(&gl_weights) {
            points.push((mid + rad * x, rad * w));
        }
    }
    let evaluated: Vec<(T, T, Vec<T>)> = points.par_iter().map(|&(r, w)| (r, w, q(r))).collect();
    let mut acc = vec![T::zero(); m];
    for (r, w, qr) in &evaluated {
        let denom = (*r * *r - T::one()).abs();
        let factor = *w * jac(*r) / denom;
        for (a, (&qk, &q1k)) in acc.iter_mut().zip(qr.iter().zip(q_at_one)) {
            *a += factor * (qk - q1k);
        }
    }

    // Outer region: no subtraction; extend until the envelope tail bound is
    // far below the accumulated scale. The bound uses q <= coef * env^2 and
    // the integrated envelope decay length 1.2/(l^2 mu) valid for r > sqrt2.
    let ell = potential.length_scale();
    let decay_len = T::of(1.2) / (ell * ell * mu);
    let tail_at = |r: T| {
        let env = potential.vhat_envelope(mu.sqrt() * (r - T::one()));
        tail_coef * env * env * jac(r) / (r * r - T::one()) * decay_len
    };
    let mut end = root2;
    let mut h = hmax.min(T::of(0.25));
    let mut tail = tail_at(end);
    let mut panels_used = 0usize;
    while panels_used < 4000 {
        let scale = acc.iter().fold(T::zero(), |s: T, &v| s.max(v.abs()));
        if tail <= T::of(1e-12) * scale {
            break;
        }
        let (a, b) = (end, end + h);
        let mid = half * (a + b);
        let rad = half * (b - a);
        let seg: Vec<(T, T, Vec<T>)> = gl_nodes
            .par_iter()
            .zip(&gl_weights)
            .map(|(&x, &w)| {
                let r = mid + rad * x;
                (r, rad * w, q(r))
            })
            .collect();
        for (r, w, qr) in &seg {
            let factor = *w * jac(*r) / (*r * *r - T::one());
            for (a, &qk) in acc.iter_mut().zip(qr) {
                *a += factor * qk;
            }
        }
        end = b;
        h = (h + h).min(T::of(0.5));
        tail = tail_at(end);
        panels_used += 1;
    }

    let prefactor = if d == 1 { mu.sqrt().recip() } else { T::one() };
    let values: Vec<T> = acc.into_iter().map(|v| prefactor * v).collect();
    Ok((values, prefactor * tail, end))
}

/// Builds 𝒲 on the sphere: two quadratic-form evaluations for d = 1 (the
/// even and odd sectors), or one shared radial sweep over all modes for
/// d = 2. The mode values must have decayed at the cutoff, |w_K| ≤
/// 1e−10·|w_0|, which stands in for the Hilbert-Schmidt property.
pub fn build_wmu<T: Real>(
    potential: &PotentialSpec<T>,
    mu: T,
    kmax: usize,
) -> Result<SphereOperator<T>> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let rep = match potential.dimension() {
        1 => {
            let r = T::of(0.5).sqrt();
            let even = wmu_form(potential, mu, SphereFunction::TwoPoint(r, r))?;
            let odd = wmu_form(potential, mu, SphereFunction::TwoPoint(r, -r))?;
            SphereRep::TwoPoint {
                diag: T::of(0.5) * (even + odd),
                off: T::of(0.5) * (even - odd),
            }
        }
        _ => {
            let (values, tail, _) = wmu_modes_planar(potential, mu, kmax)?;
            let w0 = values[0].abs();
            let wk = values.last().copied().unwrap_or(T::zero()).abs();
            if wk > T::of(1e-10) * w0 {
                return Err(Error::Cutoff(format!(
                    "mode values have not decayed at the cutoff: |w_K| = {wk:e} vs \
                     |w_0| = {w0:e}; raise the mode cutoff"
                )));
            }
            check_tail(values[0], tail)?;
            SphereRep::Modes(values)
        }
    };
    Ok(SphereOperator {
        dimension: potential.dimension(),
        mu,
        rep,
    })
}

/// Ground-state energy b_μ(λ) = inf spec (π/2)·(λ𝒱 − λ²𝒲).
pub fn b_mu<T: Real>(vop: &SphereOperator<T>, wop: &SphereOperator<T>, lambda: T) -> Result<T> {
    if vop.dimension != wop.dimension || vop.mu != wop.mu {
        return Err(Error::Domain(
            "sphere operators belong to different dimensions or chemical potentials".into(),
        ));
    }
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "coupling must be finite and nonnegative, got {lambda}"
        )));
    }
    let half_pi = T::FRAC_PI_2();
    match (&vop.rep, &wop.rep) {
        (SphereRep::TwoPoint { .. }, SphereRep::TwoPoint { .. }) => {
            let (ve, vo) = vop.sector_values().unwrap();
            let (we, wo) = wop.sector_values().unwrap();
            let even = lambda * ve - lambda * lambda * we;
            let odd = lambda * vo - lambda * lambda * wo;
            Ok(half_pi * even.min(odd))
        }
        (SphereRep::Modes(v), SphereRep::Modes(w)) => {
            if v.len() != w.len() {
                return Err(Error::Domain(format!(
                    "operators carry different mode cutoffs ({} vs {})",
                    v.len() - 1,
                    w.len() - 1
                )));
            }
            let min = v
                .iter()
                .zip(w)
                .map(|(&vk, &wk)| lambda * vk - lambda * lambda * wk)
                .fold(T::infinity(), T::min);
            Ok(half_pi * min)
        }
        _ => Err(Error::Domain(
            "sphere operators use different representations".into(),
        )),
    }
}

/// ln c_d of the weak-coupling constants: ln(4/(1+√2)) for d = 1 and 0 for
/// d = 2, cross-checked on every call against the defining integral
/// ∫₀¹ ((1−s)^{d/2−1} + (1+s)^{d/2−1} − 2)/(2s) ds to 1e−8.
pub fn log_cd<T: Real>(d: usize) -> Result<T> {
    let closed = match d {
        1 => (T::of(4.0) / (T::one() + T::of(2.0).sqrt())).ln(),
        2 => T::zero(),
        _ => return Err(Error::Domain(format!("dimension must be 1 or 2, got {d}"))),
    };
    let rule = PanelRule::<T>::new(16);
    let half_exp = T::of(d as f64 / 2.0 - 1.0);
    // s in [0, 1/2] directly; s in [1/2, 1] via s = 1 - t^2, which absorbs
    // the (1-s)^{-1/2} endpoint singularity of d = 1.
    let s_part = rule.integrate_panels(
        &[
            T::zero(),
            T::of(0.0625),
            T::of(0.125),
            T::of(0.25),
            T::of(0.5),
        ],
        |s: T| {
            ((T::one() - s).powf(half_exp) + (T::one() + s).powf(half_exp) - T::of(2.0))
                / (T::of(2.0) * s)
        },
    );
    let t_hi = T::of(0.5).sqrt();
    let t_bounds: Vec<T> = (0..=8).map(|i| t_hi * T::of(i as f64 / 8.0)).collect();
    let t_part = rule.integrate_panels(&t_bounds, |t: T| {
        let d_exp = T::of(d as f64 - 1.0);
        (t.powf(d_exp) + t * (T::of(2.0) - t * t).powf(half_exp) - T::of(2.0) * t)
            / (T::one() - t * t)
    });
    let quad = s_part + t_part;
    if (quad - closed).abs() > T::of(1e-8) {
        return Err(Error::Numerical(format!(
            "ln c_{d} quadrature {quad:e} disagrees with the closed form {closed:e}"
        )));
    }
    Ok(closed)
}

/// Asymptotic critical temperature 2·c_d·(e^γ/π)·μ·exp(π/(2·μ^{d/2−1}·b)).
pub fn predicted_tc<T: Real>(mu: T, d: usize, b: T) -> Result<T> {
    let gamma_factor = T::euler_gamma().exp() / T::PI();
    Ok(gamma_factor * predicted_xi(mu, d, b)?)
}

/// Asymptotic energy gap 2·c_d·μ·exp(π/(2·μ^{d/2−1}·b)).
pub fn predicted_xi<T: Real>(mu: T, d: usize, b: T) -> Result<T> {
    if !(mu > T::zero()) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    if !(b < T::zero()) {
        return Err(Error::Domain(format!(
            "the sphere ground-state energy must be negative, got {b}"
        )));
    }
    let cd = log_cd::<T>(d)?.exp();
    let mu_pow = mu.powf(T::of(d as f64 / 2.0 - 1.0));
    Ok(T::of(2.0) * cd * mu * (T::FRAC_PI_2() / (mu_pow * b)).exp())
}

/// The universal limit of Ξ/T_c: π·e^{−γ} ≈ 1.7639.
pub fn universal_ratio<T: Real>() -> T {
    T::PI() * (-T::euler_gamma()).exp()
}
