//! Critical temperature of the linear criterion, located by bisection on
//! the sign of the lowest eigenvalue of K_T + λV.
//!
//! The lowest eigenvalue is strictly increasing in T (K_T is), so
//! T_c = inf{T > 0 : K_T + λV ≥ 0} is a simple sign change. The interaction
//! kernel does not depend on T, so the bisection assembles it once and only
//! refreshes the dispersion diagonal. The module also evaluates the two
//! formulas for the thermal integral m_μ(T) whose matching against
//! −π/(2 b_μ(λ)) drives the weak-coupling asymptotics of T_c.

use crate::error::{Error, Result};
use crate::fermi_grid::{GridMeta, RadialGrid};
use crate::num::Real;
use crate::potential::PotentialSpec;
use crate::quad::{doubling_bounds, graded_bounds, PanelRule};
use crate::spectral::{
    assemble_kernel, assemble_ktv_from_kernel, lowest_eigenvalue, DispersionParams, KernelMatrix,
};
use crate::sphere_asymptotics::{b_mu, build_vmu, build_wmu, e_mu, predicted_tc};

/// Outcome of a critical-temperature search.
///
/// The bracket satisfies low < tc ≤ high with the lowest eigenvalue
/// negative at `bracket.0` and nonnegative at `bracket.1`.
#[derive(Debug, Clone)]
pub struct TcResult<T> {
    pub tc: T,
    pub bracket: (T, T),
    pub eigenvalue_at_tc: T,
    pub grid: GridMeta<T>,
}

/// Locates T_c for coupling λ on the given grid, to relative bracket width
/// `rtol`.
///
/// The initial bracket spans predicted_Tc × 10^{±2} (falling back to the
/// first-order prediction, then to [1e−8·μ, μ], when the second-order
/// constant is unavailable) and expands geometrically until it straddles
/// the sign change. The grid cannot resolve the thermal peak of 1/K_T
/// below μ·s_min, so the search never probes colder than that; needing to
/// is a resolution error.
pub fn find_tc<T: Real>(
    potential: &PotentialSpec<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    rtol: T,
) -> Result<TcResult<T>> {
    let seed = seed_bracket(potential, grid.mu(), lambda)?;
    let kernel = assemble_kernel(potential, grid);
    bisect_tc(&kernel, grid, lambda, rtol, seed)
}

/// As [`find_tc`] but starting from a caller-supplied bracket, e.g. the
/// result of a coarser grid. The bracket still expands if it does not
/// straddle the sign change.
pub fn find_tc_seeded<T: Real>(
    potential: &PotentialSpec<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    rtol: T,
    seed: (T, T),
) -> Result<TcResult<T>> {
    let kernel = assemble_kernel(potential, grid);
    find_tc_seeded_with_kernel(potential, &kernel, grid, lambda, rtol, seed)
}

/// As [`find_tc_seeded`] against an interaction kernel already assembled
/// for this grid, sparing its cost when T_c and the gap share one grid.
pub fn find_tc_seeded_with_kernel<T: Real>(
    potential: &PotentialSpec<T>,
    kernel: &KernelMatrix<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    rtol: T,
    seed: (T, T),
) -> Result<TcResult<T>> {
    if !(seed.0 > T::zero()) || !(seed.1 > seed.0) {
        return Err(Error::Domain(format!(
            "seed bracket must satisfy 0 < low < high, got ({:e}, {:e})",
            seed.0, seed.1
        )));
    }
    check_coupling(potential, lambda)?;
    bisect_tc(kernel, grid, lambda, rtol, seed)
}

fn check_coupling<T: Real>(potential: &PotentialSpec<T>, lambda: T) -> Result<()> {
    if lambda == T::zero() {
        return Err(Error::NoTransition(
            "zero coupling leaves K_T strictly positive; no critical temperature".into(),
        ));
    }
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "coupling must be positive and finite, got {lambda}"
        )));
    }
    if !potential.validate().tc_eligible() {
        return Err(Error::Domain(
            "potential fails the attraction hypotheses (V̂ ≤ 0 with V̂(0) < 0 and finite ∫|V|) \
             that guarantee a transition"
                .into(),
        ));
    }
    Ok(())
}

fn seed_bracket<T: Real>(potential: &PotentialSpec<T>, mu: T, lambda: T) -> Result<(T, T)> {
    check_coupling(potential, lambda)?;
    let d = potential.dimension();
    let hundred = T::of(100.0);
    // Second-order prediction when the sphere operators converge, else the
    // first-order one; a slowly decaying interaction can defeat both.
    let second = build_vmu(potential, mu, 32).and_then(|v| {
        let w = build_wmu(potential, mu, 32)?;
        predicted_tc(mu, d, b_mu(&v, &w, lambda)?)
    });
    let predicted = second.or_else(|_| {
        build_vmu(potential, mu, 48)
            .and_then(|v| predicted_tc(mu, d, T::FRAC_PI_2() * lambda * e_mu(&v)?))
    });
    Ok(match predicted {
        Ok(t) => (t / hundred, (t * hundred).min(hundred * mu)),
        Err(_) => (T::of(1e-8) * mu, mu),
    })
}

fn bisect_tc<T: Real>(
    kernel: &KernelMatrix<T>,
    grid: &RadialGrid<T>,
    lambda: T,
    rtol: T,
    seed: (T, T),
) -> Result<TcResult<T>> {
    if !(rtol > T::zero()) || !rtol.is_finite() {
        return Err(Error::Domain(format!(
            "relative tolerance must be positive, got {rtol}"
        )));
    }
    if kernel.order() != grid.len() || kernel.mu() != grid.mu() {
        return Err(Error::Domain(
            "kernel was assembled for a different grid".into(),
        ));
    }
    let mu = grid.mu();
    let eig_at = |t: T| -> Result<T> {
        if grid.s_min() > t / mu {
            return Err(Error::Resolution(format!(
                "grid s_min = {:e} cannot resolve the thermal scale T/mu = {:e}; \
                 rebuild the grid with finer panels near the Fermi surface",
                grid.s_min(),
                t / mu
            )));
        }
        let params = DispersionParams::new(mu, t)?;
        lowest_eigenvalue(&assemble_ktv_from_kernel(kernel, grid, lambda, params)?)
    };

    // The discrete eigenvalue is exactly monotone in T (only the diagonal
    // moves), so any bracket with a sign change is trustworthy; the lower
    // end just must stay on temperatures the grid resolves.
    let t_floor = mu * grid.s_min();
    let (mut lo, mut hi) = seed;
    lo = lo.max(t_floor);
    if hi <= lo {
        hi = lo * T::of(10.0);
    }
    let mut eig_lo = eig_at(lo)?;
    let mut eig_hi = eig_at(hi)?;
    // Expand geometrically until the bracket straddles the sign change.
    let mut guard = 0;
    while eig_hi < T::zero() {
        lo = hi;
        eig_lo = eig_hi;
        hi *= T::of(10.0);
        eig_hi = eig_at(hi)?;
        guard += 1;
        if guard > 400 {
            return Err(Error::Numerical(
                "lowest eigenvalue stayed negative at absurdly high temperature".into(),
            ));
        }
    }
    while eig_lo >= T::zero() {
        hi = lo;
        eig_hi = eig_lo;
        if lo <= t_floor {
            return Err(Error::Resolution(format!(
                "lowest eigenvalue is still nonnegative at T = {lo:e}, the coldest \
                 temperature resolved by s_min = {:e}; refine the grid to search deeper",
                grid.s_min()
            )));
        }
        lo = (lo / T::of(10.0)).max(t_floor);
        if lo < T::of(1e-14) * mu {
            return Err(Error::NoTransition(format!(
                "lowest eigenvalue is nonnegative down to T = {lo:e}; \
                 no transition detected at coupling {lambda:e}"
            )));
        }
        eig_lo = eig_at(lo)?;
    }

    while (hi - lo) > rtol * T::of(0.5) * (hi + lo) {
        let mid = T::of(0.5) * (hi + lo);
        if mid <= lo || mid >= hi {
            break; // bracket is at floating-point resolution
        }
        if eig_at(mid)? < T::zero() {
            lo = mid;
            eig_lo = eig_at(lo)?;
        } else {
            hi = mid;
            eig_hi = eig_at(hi)?;
        }
    }
    debug_assert!(eig_lo < T::zero() && eig_hi >= T::zero());

    let tc = T::of(0.5) * (hi + lo);
    Ok(TcResult {
        tc,
        bracket: (lo, hi),
        eigenvalue_at_tc: eig_at(tc)?,
        grid: grid.meta(),
    })
}

/// Thermal integral m_μ(T) in its reduced one-dimensional form,
/// μ^{d/2−1}·∫₀¹ tanh(s/(2T/μ))·((1+s)^{d/2−1} + (1−s)^{d/2−1})/(2s) ds.
///
/// The two halves are integrated separately: the (1+s) piece on panels
/// graded toward the thermal scale at s = 0, and the (1−s) piece under
/// s = 1 − t², which turns the d = 1 endpoint singularity into a smooth
/// integrand. Panel widths are halved until successive values agree to
/// `quad_tol` relative.
pub fn m_t_direct<T: Real>(mu: T, temperature: T, d: usize, quad_tol: T) -> Result<T> {
    if d != 1 && d != 2 {
        return Err(Error::Domain(format!("dimension must be 1 or 2, got {d}")));
    }
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    if !(temperature > T::zero()) || !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if !(quad_tol > T::zero()) {
        return Err(Error::Domain(format!(
            "quadrature tolerance must be positive, got {quad_tol}"
        )));
    }
    let tau = temperature / mu;
    let half_exp = T::of(d as f64 / 2.0 - 1.0);
    let d_exp = T::of(d as f64 - 1.0);
    let rule = PanelRule::new(16);
    let hmax = T::of(0.0625);
    let eval = |h0: T| -> T {
        let lower = rule.integrate_panels(&doubling_bounds(T::zero(), T::one(), h0), |s: T| {
            (s / (T::of(2.0) * tau)).tanh() * (T::one() + s).powf(half_exp) / (T::of(2.0) * s)
        });
        let upper = rule.integrate_panels(&graded_bounds(T::one(), T::zero(), h0, hmax), |t: T| {
            let s = T::one() - t * t;
            (s / (T::of(2.0) * tau)).tanh() * t.powf(d_exp) / s
        });
        mu.powf(half_exp) * (lower + upper)
    };
    let mut h0 = (tau * T::of(0.5)).min(hmax);
    let mut prev = eval(h0);
    for _ in 0..6 {
        h0 *= T::of(0.5);
        let cur = eval(h0);
        if (cur - prev).abs() <= quad_tol * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numerical(format!(
        "thermal integral did not settle to relative tolerance {quad_tol:e}"
    )))
}

/// Weak-coupling closed form μ^{d/2−1}·(ln(μ/T) + γ + ln(2c_d/π)); the
/// difference m_t_direct − m_t_asymptotic vanishes as T/μ → 0.
pub fn m_t_asymptotic<T: Real>(mu: T, temperature: T, d: usize) -> Result<T> {
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    if !(temperature > T::zero()) || !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let log_2cd_over_pi = T::of(2.0).ln() + log_cd_checked::<T>(d)? - T::PI().ln();
    Ok(mu.powf(T::of(d as f64 / 2.0 - 1.0))
        * ((mu / temperature).ln() + T::euler_gamma() + log_2cd_over_pi))
}

fn log_cd_checked<T: Real>(d: usize) -> Result<T> {
    crate::sphere_asymptotics::log_cd(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermi_grid::build_grid;

    fn gauss1() -> PotentialSpec<f64> {
        PotentialSpec::gaussian(1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_coupling_has_no_transition() {
        let grid = build_grid(1.0, 10.0, 8, 1e-3).unwrap();
        let err = find_tc(&gauss1(), &grid, 0.0, 1e-6).unwrap_err();
        assert_eq!(err.kind(), "no_transition");
    }

    #[test]
    fn repulsive_potential_is_rejected() {
        let radii: Vec<f64> = (0..200).map(|i| i as f64 * 0.02).collect();
        let values: Vec<f64> = radii.iter().map(|r| (-r * r / 2.0).exp()).collect();
        let pot = PotentialSpec::tabulated(1, radii, values).unwrap();
        let grid = build_grid(1.0, 10.0, 8, 1e-3).unwrap();
        assert_eq!(
            find_tc(&pot, &grid, 0.3, 1e-6).unwrap_err().kind(),
            "domain_error"
        );
    }

    #[test]
    fn transition_found_with_valid_bracket() {
        let pot = gauss1();
        let grid = build_grid(1.0, 10.0, 12, 2e-3).unwrap();
        let res = find_tc(&pot, &grid, 0.5, 1e-8).unwrap();
        assert!(res.tc > 0.0 && res.tc < 1.0);
        assert!(res.bracket.0 < res.tc && res.tc <= res.bracket.1);
        assert!((res.bracket.1 - res.bracket.0) / res.tc <= 1e-8);
        // At the reported midpoint the eigenvalue sits within the bracket's
        // eigenvalue swing, i.e. it is tiny against the temperature scale.
        assert!(res.eigenvalue_at_tc.abs() < 1e-6 * res.tc);
    }

    #[test]
    fn coarse_grids_refuse_cold_searches() {
        // s_min = 0.05 cannot resolve T/mu ~ 1e-4.
        let pot = gauss1();
        let grid = build_grid(1.0, 10.0, 8, 0.05).unwrap();
        let err = find_tc_seeded(&pot, &grid, 0.5, 1e-8, (1e-5, 2e-5)).unwrap_err();
        assert_eq!(err.kind(), "resolution_error");
    }

    #[test]
    fn seeded_search_agrees_with_cold_start() {
        let pot = gauss1();
        let grid = build_grid(1.0, 10.0, 12, 2e-3).unwrap();
        let cold = find_tc(&pot, &grid, 0.5, 1e-8).unwrap();
        let warm =
            find_tc_seeded(&pot, &grid, 0.5, 1e-8, (cold.tc * 0.99, cold.tc * 1.01)).unwrap();
        assert!((warm.tc - cold.tc).abs() <= 1e-7 * cold.tc);
    }

    #[test]
    fn critical_temperature_grows_with_coupling() {
        let pot = gauss1();
        let grid = build_grid(1.0, 10.0, 10, 2e-3).unwrap();
        let tc_weak = find_tc(&pot, &grid, 0.42, 1e-7).unwrap().tc;
        let tc_strong = find_tc(&pot, &grid, 0.5, 1e-7).unwrap().tc;
        assert!(
            tc_weak < tc_strong,
            "Tc(0.42) = {tc_weak} !< Tc(0.5) = {tc_strong}"
        );
    }

    #[test]
    fn thermal_integral_matches_frozen_quadrature() {
        // Independent high-precision quadrature of the defining integral.
        let cases = [
            (1.0, 1e-3, 2, 7.033388238594215),
            (1.0, 1e-3, 1, 7.53830839584118),
            (4.0, 5e-3, 1, 3.6575822487721057),
        ];
        for (mu, t, d, want) in cases {
            let got: f64 = m_t_direct(mu, t, d, 1e-12).unwrap();
            assert!(
                (got - want).abs() < 1e-10 * want,
                "m({mu}, {t}, {d}) = {got:.16e}, want {want:.16e}"
            );
        }
    }

    #[test]
    fn asymptotic_form_is_the_stated_closed_expression() {
        let m2: f64 = m_t_asymptotic(1.0, 1e-4, 2).unwrap();
        assert!((m2 - 9.335973331588261).abs() < 1e-12, "{m2:.16e}");
        let m1: f64 = m_t_asymptotic(1.0, 1e-4, 1).unwrap();
        assert!((m1 - 9.840894105688608).abs() < 1e-12, "{m1:.16e}");
    }

    #[test]
    fn asymptotic_matches_direct_at_low_temperature() {
        // d=2 agrees to exponential accuracy; d=1 carries an O(T/mu) tail.
        let d2 = (m_t_direct::<f64>(1.0, 1e-5, 2, 1e-12).unwrap()
            - m_t_asymptotic(1.0, 1e-5, 2).unwrap())
        .abs();
        assert!(d2 < 1e-10, "{d2:e}");
        let d1 = (m_t_direct::<f64>(1.0, 1e-4, 1, 1e-12).unwrap()
            - m_t_asymptotic(1.0, 1e-4, 1).unwrap())
        .abs();
        assert!((d1 - 6.1685e-9).abs() < 1e-12, "{d1:e}");
    }

    #[test]
    fn domain_errors_for_bad_arguments() {
        assert!(m_t_direct(1.0, -1.0, 2, 1e-10).is_err());
        assert!(m_t_direct(1.0, 0.0, 2, 1e-10).is_err());
        assert!(m_t_direct(-1.0, 0.1, 2, 1e-10).is_err());
        assert!(m_t_direct(1.0, 0.1, 3, 1e-10).is_err());
        assert!(m_t_asymptotic(1.0, 0.0, 2).is_err());
    }
}
