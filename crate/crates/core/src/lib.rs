//! Solvers for the BCS gap equation and critical-temperature criterion of a
//! radial pair potential in one and two dimensions, together with the
//! Fermi-sphere asymptotics that govern the weak-coupling limit.
//!
//! The library works in units where ħ = 1 and 2m = 1, so the dispersion
//! relative to the Fermi level is p² − μ. Momentum-space potentials use the
//! symmetric Fourier convention V̂(p) = (2π)^{−d/2} ∫ V(x) e^{−ipx} dx.
//!
//! The modules follow the pipeline:
//!
//! * [`potential`]: potential models and their transforms V̂,
//! * [`fermi_grid`]: radial quadrature graded toward the Fermi surface,
//! * [`spectral`]: the linear operator K_T + λV on the radial sector,
//! * [`critical_temperature`]: T_c as the sign change of its lowest eigenvalue,
//! * [`gap_solver`]: the nonlinear gap equation at and near zero temperature,
//! * [`sphere_asymptotics`]: Fermi-sphere operators and second-order
//!   weak-coupling predictions for T_c and the energy gap Ξ,
//! * [`universality_sweep`]: coupling ladders that measure the approach of
//!   Ξ/T_c to the universal constant π e^{−γ}.
//!
//! All numerics are generic over the scalar type through [`Real`]; the type
//! aliases at the crate root fix f64, which is what the command-line driver
//! and the acceptance suite use.

// Domain guards use the negated form `!(x > 0)` so that NaN inputs fail
// validation instead of slipping through an `x <= 0` comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod critical_temperature;
pub mod error;
pub mod fermi_grid;
pub mod gap_solver;
pub mod num;
pub mod potential;
pub mod quad;
pub mod spectral;
pub mod sphere_asymptotics;
pub mod universality_sweep;

mod eigen;

pub use error::{Error, Result};
pub use num::Real;

/// f64 instantiations of the main data types.
pub type Potential64 = potential::PotentialSpec<f64>;
pub type AssumptionReport64 = potential::AssumptionReport<f64>;
pub type RadialGrid64 = fermi_grid::RadialGrid<f64>;
pub type Operator64 = spectral::SymmetricOperatorMatrix<f64>;
pub type TcResult64 = critical_temperature::TcResult<f64>;
pub type GapFunction64 = gap_solver::GapFunction<f64>;
pub type SphereOperator64 = sphere_asymptotics::SphereOperator<f64>;
pub type SweepConfig64 = universality_sweep::SweepConfig<f64>;
pub type SweepRecord64 = universality_sweep::SweepRecord<f64>;
