pub mod analyze;
pub mod converge;
pub mod parse_check;
pub mod reference;
pub mod soil;

use drift_ode_core::numerics::{rk4_solve, IntegratorConfig, Trajectory};
use drift_ode_core::ProblemInstance64;

use crate::error::Result;

/// RK4 steps are at most this long; the Hermite interpolant between nodes
/// is then accurate far below the tolerances the tables are checked against.
pub const RK4_MAX_STEP: f64 = 1e-3;

/// One RK4 trajectory of the base problem on `[0, t_end]`.
pub fn rk4_reference(p: &ProblemInstance64, t_end: f64) -> Result<Trajectory<f64>> {
    let cfg = IntegratorConfig::dividing(t_end, RK4_MAX_STEP)?;
    Ok(rk4_solve(
        p.lambda,
        |t| p.rho.eval(t),
        |t| p.b.eval(t),
        p.y0,
        &cfg,
    )?)
}
