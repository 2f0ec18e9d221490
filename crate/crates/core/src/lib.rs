//! Large-time structure of `y'(t) = λ ρ(t) y(t) + b(t)` with periodic `ρ`
//! and drifted-periodic or perturbed-periodic forcing.
//!
//! The engines are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! bottom of this file fix the scalar to `f64`, which is what the command
//! line front end uses.

// `!(x < y)` is how NaN inputs get rejected alongside out-of-range ones
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotic;
pub mod compartments;
pub mod error;
pub mod numerics;
pub mod perturbed;
pub mod scalar;
pub mod signal;

pub use error::{Error, Result};
pub use scalar::{real_fn, Real, RealFn};

pub type PeriodicSignal64 = signal::PeriodicSignal<f64>;
pub type DriftedSignal64 = signal::DriftedSignal<f64>;
pub type ExponentCache64 = signal::ExponentCache<f64>;
pub type QuadratureConfig64 = numerics::QuadratureConfig<f64>;
pub type IntegratorConfig64 = numerics::IntegratorConfig<f64>;
pub type ProblemInstance64 = asymptotic::ProblemInstance<f64>;
pub type AsymptoticSolution64 = asymptotic::AsymptoticSolution<f64>;
pub type PerturbedModel64 = perturbed::PerturbedModel<f64>;
pub type PerturbationFamily64 = perturbed::PerturbationFamily<f64>;
pub type CompartmentSystem64 = compartments::CompartmentSystem<f64>;
