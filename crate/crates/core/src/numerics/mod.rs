//! Quadrature, running integrals and the fixed-step Runge–Kutta oracle.
//!
//! Every closed-form evaluation in the crate routes its integrals through
//! [`integrate`] or a [`RunningIntegral`]; [`rk4_solve`] and
//! [`rk4_solve_system`] integrate the differential equations directly and
//! are used as independent checks on those closed forms.

mod cumulative;
mod quadrature;
mod rk4;

pub use cumulative::RunningIntegral;
pub use quadrature::{gauss_legendre_8, integrate, QuadratureConfig, QuadratureRule};
pub use rk4::{rk4_solve, rk4_solve_system, IntegratorConfig, SystemTrajectory, Trajectory};
