//! Drift decomposition of solutions: the limit initial value `L(T)`, the
//! periodic drift `γ`, the asymptotic solution `y∞` and the transient `δₙ`.
//!
//! With `r = e^{a(T)}`, `I_b = ∫₀ᵀ b e^{−a}` and `I_β = ∫₀ᵀ β e^{−a}`:
//!
//! ```text
//! L(T)  = r/(1−r)·I_b − r/(1−r)²·I_β
//! a₀    = r/(1−r)·I_β
//! γ(t)  = e^{a(t)} [a₀ + ∫₀ᵗ β e^{−a}]
//! y∞(t) = e^{a(t)} [L(T) + ∫₀ᵗ b e^{−a}]
//! δₙ(t) = e^{a(t)} rⁿ (y(0) − L(T))
//! ```
//!
//! so that `y(t + nT) = y∞(t) + δₙ(t) + n·γ(t)` for every solution `y`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadratureConfig, RunningIntegral};
use crate::scalar::{real_fn, Real};
use crate::signal::{DriftedSignal, ExponentCache, PeriodicSignal};

/// `y' = λ ρ(t) y + b(t)` with `y(0) = y0`.
#[derive(Clone)]
pub struct ProblemInstance<T> {
    pub lambda: T,
    pub rho: PeriodicSignal<T>,
    pub b: DriftedSignal<T>,
    pub y0: T,
    pub cache: Arc<ExponentCache<T>>,
}

impl<T: Real> std::fmt::Debug for ProblemInstance<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("lambda", &self.lambda)
            .field("period", &self.period())
            .field("y0", &self.y0)
            .finish()
    }
}

impl<T: Real> ProblemInstance<T> {
    pub fn new(
        lambda: T,
        rho: PeriodicSignal<T>,
        b: DriftedSignal<T>,
        y0: T,
        quad_cfg: QuadratureConfig<T>,
    ) -> Result<Self> {
        let (tr, tb) = (rho.period(), b.period());
        if (tr - tb).abs() > T::lit(1e-12).max(T::epsilon()) * tr.abs().max(T::one()) {
            return Err(Error::InvalidConfig(format!(
                "rho and b must share the period (rho {tr}, b {tb})"
            )));
        }
        let cache = ExponentCache::new(lambda, rho.clone(), quad_cfg)?;
        Ok(ProblemInstance {
            lambda,
            rho,
            b,
            y0,
            cache: Arc::new(cache),
        })
    }

    pub fn period(&self) -> T {
        self.rho.period()
    }

    pub fn quad_cfg(&self) -> &QuadratureConfig<T> {
        self.cache.quad_cfg()
    }

    /// Same coefficients, different initial value; the exponent cache is shared.
    pub fn with_initial_value(&self, y0: T) -> Self {
        ProblemInstance { y0, ..self.clone() }
    }

    /// The exact solution `y(t) = e^{a(t)} (y0 + ∫₀ᵗ b e^{−a})` by one direct quadrature.
    pub fn exact_solution(&self, t: T) -> Result<T> {
        let cache = &self.cache;
        let b = &self.b;
        let integral = integrate(
            |s| b.eval(s) * cache.neg_exp(s),
            T::zero(),
            t,
            self.quad_cfg(),
        )?;
        Ok(cache.exponent(t).exp() * (self.y0 + integral))
    }
}

/// Resolution of the running integrals behind the evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AsymptoticOptions {
    /// Periods covered by the node tables; evaluation beyond is still valid, only slower.
    pub horizon_periods: usize,
    pub panels_per_period: usize,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions {
            horizon_periods: 8,
            panels_per_period: 256,
        }
    }
}

/// Scalar constants shared by every evaluator of one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodConstants<T> {
    /// `a(T)`.
    pub a_period: T,
    /// `r = e^{a(T)}`.
    pub ratio: T,
    /// `∫₀ᵀ b e^{−a}`.
    pub int_b: T,
    /// `∫₀ᵀ β e^{−a}`.
    pub int_beta: T,
}

impl<T: Real> PeriodConstants<T> {
    pub fn compute(p: &ProblemInstance<T>) -> Result<Self> {
        let a_period = p.cache.period_exponent()?;
        let ratio = a_period.exp();
        let cache = &p.cache;
        let period = p.period();
        let cfg = p.quad_cfg();
        let int_b = integrate(|s| p.b.eval(s) * cache.neg_exp(s), T::zero(), period, cfg)?;
        let beta = p.b.drift();
        let int_beta = integrate(|s| beta.eval(s) * cache.neg_exp(s), T::zero(), period, cfg)?;
        Ok(PeriodConstants {
            a_period,
            ratio,
            int_b,
            int_beta,
        })
    }

    /// `r/(1−r)`.
    pub fn geometric(&self) -> T {
        self.ratio / (T::one() - self.ratio)
    }

    /// `r/(1−r)²`.
    pub fn geometric_squared(&self) -> T {
        self.ratio / ((T::one() - self.ratio) * (T::one() - self.ratio))
    }

    /// `L(T) = r/(1−r)·I_b − r/(1−r)²·I_β`.
    pub fn limit_initial_value(&self) -> T {
        self.geometric() * self.int_b - self.geometric_squared() * self.int_beta
    }

    /// `a₀ = γ(0) = r/(1−r)·I_β`.
    pub fn drift_offset(&self) -> T {
        self.geometric() * self.int_beta
    }
}

/// `L(T)`, the initial value selecting the asymptotic solution.
pub fn limit_initial_value<T: Real>(p: &ProblemInstance<T>) -> Result<T> {
    Ok(PeriodConstants::compute(p)?.limit_initial_value())
}

/// The periodic drift `γ(t) = e^{a(t)} [a₀ + ∫₀ᵗ β e^{−a}]`.
#[derive(Clone)]
pub struct DriftFunction<T> {
    cache: Arc<ExponentCache<T>>,
    a0: T,
    running: RunningIntegral<T>,
    zero: bool,
}

impl<T: Real> std::fmt::Debug for DriftFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriftFunction")
            .field("a0", &self.a0)
            .finish()
    }
}

impl<T: Real> DriftFunction<T> {
    fn build(
        p: &ProblemInstance<T>,
        consts: &PeriodConstants<T>,
        opts: &AsymptoticOptions,
    ) -> Result<Self> {
        let cache = p.cache.clone();
        let beta = p.b.drift().func();
        let c = cache.clone();
        let integrand = real_fn(move |s: T| beta(s) * c.neg_exp(s));
        let (span, panels) = table_extent(p.period(), opts);
        let running = RunningIntegral::new(integrand, span, panels, p.quad_cfg())?;
        Ok(DriftFunction {
            cache,
            a0: consts.drift_offset(),
            running,
            zero: p.b.drift().is_identically_zero(),
        })
    }

    /// `γ(0)`.
    pub fn a0(&self) -> T {
        self.a0
    }

    pub fn eval(&self, t: T) -> T {
        if self.zero {
            return T::zero();
        }
        self.cache.exponent(t).exp() * (self.a0 + self.running.eval(t))
    }
}

fn table_extent<T: Real>(period: T, opts: &AsymptoticOptions) -> (T, usize) {
    let periods = opts.horizon_periods.max(1);
    (
        period * T::from_count(periods),
        periods * opts.panels_per_period.max(1),
    )
}

/// `γ` for `p`.
pub fn drift_gamma<T: Real>(p: &ProblemInstance<T>) -> Result<DriftFunction<T>> {
    let consts = PeriodConstants::compute(p)?;
    DriftFunction::build(p, &consts, &AsymptoticOptions::default())
}

/// Evaluators for the large-time structure of one instance.
#[derive(Clone)]
pub struct AsymptoticSolution<T> {
    consts: PeriodConstants<T>,
    limit: T,
    gamma: DriftFunction<T>,
    running_b: RunningIntegral<T>,
    cache: Arc<ExponentCache<T>>,
    period: T,
}

impl<T: Real> std::fmt::Debug for AsymptoticSolution<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AsymptoticSolution")
            .field("limit", &self.limit)
            .field("a0", &self.a0())
            .field("ratio", &self.consts.ratio)
            .finish()
    }
}

impl<T: Real> AsymptoticSolution<T> {
    pub fn new(p: &ProblemInstance<T>, opts: &AsymptoticOptions) -> Result<Self> {
        let consts = PeriodConstants::compute(p)?;
        let gamma = DriftFunction::build(p, &consts, opts)?;
        let cache = p.cache.clone();
        let bf = p.b.func();
        let c = cache.clone();
        let integrand = real_fn(move |s: T| bf(s) * c.neg_exp(s));
        let (span, panels) = table_extent(p.period(), opts);
        let running_b = RunningIntegral::new(integrand, span, panels, p.quad_cfg())?;
        Ok(AsymptoticSolution {
            limit: consts.limit_initial_value(),
            consts,
            gamma,
            running_b,
            cache,
            period: p.period(),
        })
    }

    /// `L(T)`.
    pub fn limit(&self) -> T {
        self.limit
    }

    /// `a₀ = γ(0)`.
    pub fn a0(&self) -> T {
        self.gamma.a0()
    }

    /// `e^{a(T)}`.
    pub fn ratio(&self) -> T {
        self.consts.ratio
    }

    pub fn constants(&self) -> &PeriodConstants<T> {
        &self.consts
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn gamma(&self, t: T) -> T {
        self.gamma.eval(t)
    }

    pub fn drift(&self) -> &DriftFunction<T> {
        &self.gamma
    }

    /// `y∞(t) = e^{a(t)} [L(T) + ∫₀ᵗ b e^{−a}]`.
    pub fn y_inf(&self, t: T) -> T {
        self.cache.exponent(t).exp() * (self.limit + self.running_b.eval(t))
    }

    /// `zₙ(t) = y∞(t) + n·γ(t)`.
    pub fn approximate_at(&self, n: usize, t: T) -> T {
        self.y_inf(t) + T::from_count(n) * self.gamma(t)
    }

    /// `δₙ(t) = e^{a(t)} rⁿ (y0 − L(T))`.
    pub fn transient(&self, y0: T, n: usize, t: T) -> T {
        self.cache.exponent(t).exp() * self.consts.ratio.powi(n as i32) * (y0 - self.limit)
    }

    /// `e^{a(t)} rⁿ |y0 + r/(1−r)·I_b + r/(1−r)²·I_β|`, the transient bracket
    /// taken literally with both integrals added.
    pub fn transient_bound_summed(&self, y0: T, n: usize, t: T) -> T {
        let bracket = y0
            + self.consts.geometric() * self.consts.int_b
            + self.consts.geometric_squared() * self.consts.int_beta;
        self.cache.exponent(t).exp() * self.consts.ratio.powi(n as i32) * bracket.abs()
    }

    /// `y(t + nT)` from the windowed closed form `e^{a(t+nT)} (y0 + ∫₀^{t+nT} b e^{−a})`.
    pub fn window_value(&self, y0: T, n: usize, t: T) -> T {
        let s = t + T::from_count(n) * self.period;
        self.cache.exponent(s).exp() * (y0 + self.running_b.eval(s))
    }
}

/// Builds all evaluators with default resolution.
pub fn asymptotic_solution<T: Real>(p: &ProblemInstance<T>) -> Result<AsymptoticSolution<T>> {
    AsymptoticSolution::new(p, &AsymptoticOptions::default())
}

/// `max |y∞(t+T) − y∞(t) − γ(t)|` over `grid`.
pub fn drift_relation_residual<T: Real>(s: &AsymptoticSolution<T>, grid: &[T]) -> T {
    grid.iter()
        .map(|&t| (s.y_inf(t + s.period) - s.y_inf(t) - s.gamma(t)).abs())
        .fold(T::zero(), T::max)
}

/// `max |γ(t+T) − γ(t)|` over `grid`.
pub fn gamma_periodicity_residual<T: Real>(s: &AsymptoticSolution<T>, grid: &[T]) -> T {
    grid.iter()
        .map(|&t| (s.gamma(t + s.period) - s.gamma(t)).abs())
        .fold(T::zero(), T::max)
}

/// `δₙ(t)` for the initial value carried by `p`.
pub fn transient<T: Real>(p: &ProblemInstance<T>, s: &AsymptoticSolution<T>, n: usize, t: T) -> T {
    s.transient(p.y0, n, t)
}

/// `zₙ(t)`.
pub fn approximate_at<T: Real>(s: &AsymptoticSolution<T>, n: usize, t: T) -> T {
    s.approximate_at(n, t)
}

/// `|y∞'(t) − λρ(t)y∞(t) − b(t)|` with a central difference of relative step `h`.
pub fn ode_residual<T: Real>(p: &ProblemInstance<T>, s: &AsymptoticSolution<T>, t: T, h: T) -> T {
    let step = h * t.abs().max(T::one());
    let lo = (t - step).max(T::zero());
    let hi = t + step;
    let derivative = (s.y_inf(hi) - s.y_inf(lo)) / (hi - lo);
    let mid = (lo + hi) / T::lit(2.0);
    (derivative - p.lambda * p.rho.eval(mid) * s.y_inf(mid) - p.b.eval(mid)).abs()
}

/// Equispaced grid of `points` samples on `[lo, hi]`.
pub fn linspace<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|k| lo + (hi - lo) * T::from_count(k) / T::from_count(points - 1))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{rk4_solve, IntegratorConfig};
    use std::f64::consts::PI;

    fn scenario(y0: f64) -> ProblemInstance<f64> {
        let rho = PeriodicSignal::from_fn(|t: f64| t.sin().powi(2), PI).unwrap();
        let b = DriftedSignal::from_fn(|t: f64| t, PeriodicSignal::constant(PI, PI)).unwrap();
        ProblemInstance::new(-1.0, rho, b, y0, QuadratureConfig::default()).unwrap()
    }

    fn constant_problem() -> ProblemInstance<f64> {
        let rho = PeriodicSignal::constant(1.0, 1.0);
        let b = DriftedSignal::periodic(PeriodicSignal::constant(1.0, 1.0));
        ProblemInstance::new(-1.0, rho, b, 1.0, QuadratureConfig::default()).unwrap()
    }

    // frozen with mpmath at 30 digits
    const L_SCENARIO: f64 = -4.091_576_569_887_239;
    const A0_SCENARIO: f64 = 6.752_380_934_935_049;

    #[test]
    fn scenario_constants() {
        let p = scenario(1.0);
        assert!((limit_initial_value(&p).unwrap() - L_SCENARIO).abs() < 1e-9);
        let g = drift_gamma(&p).unwrap();
        assert!((g.a0() - A0_SCENARIO).abs() < 1e-9);
        assert!((g.eval(0.0) - A0_SCENARIO).abs() < 1e-9);
    }

    #[test]
    fn zero_forcing() {
        let rho = PeriodicSignal::from_fn(|t: f64| t.sin().powi(2), PI).unwrap();
        let b = DriftedSignal::periodic(PeriodicSignal::zero(PI));
        let p = ProblemInstance::new(-1.0, rho, b, 3.0, QuadratureConfig::default()).unwrap();
        let s = asymptotic_solution(&p).unwrap();
        assert_eq!(s.limit(), 0.0);
        let grid = linspace(0.0, 4.0 * PI, 64);
        assert_eq!(drift_relation_residual(&s, &grid), 0.0);
        assert!(grid.iter().all(|&t| s.y_inf(t) == 0.0 && s.gamma(t) == 0.0));
    }

    #[test]
    fn constant_fixed_point() {
        let p = constant_problem();
        assert!((limit_initial_value(&p).unwrap() - 1.0).abs() < 1e-12);
        let s = asymptotic_solution(&p).unwrap();
        for t in linspace(0.0, 5.0, 23) {
            assert!((s.y_inf(t) - 1.0).abs() < 1e-11);
            assert_eq!(s.gamma(t), 0.0);
        }
    }

    #[test]
    fn gamma_periodic_and_drift_relation() {
        let s = asymptotic_solution(&scenario(1.0)).unwrap();
        let grid = linspace(0.0, 5.0 * PI, 400);
        assert!(gamma_periodicity_residual(&s, &grid) <= 1e-8);
        let grid = linspace(0.0, 4.0 * PI, 512);
        assert!(drift_relation_residual(&s, &grid) <= 1e-7);
        assert!((s.y_inf(PI) - (L_SCENARIO + A0_SCENARIO)).abs() < 1e-8);
    }

    #[test]
    fn periodic_case_drift_residual_is_periodicity() {
        let rho = PeriodicSignal::from_fn(|t: f64| t.sin().powi(2), PI).unwrap();
        let b = DriftedSignal::periodic(
            PeriodicSignal::from_fn(|t: f64| 1.0 + (2.0 * t).cos(), PI).unwrap(),
        );
        let p = ProblemInstance::new(-1.0, rho, b, 0.0, QuadratureConfig::default()).unwrap();
        let s = asymptotic_solution(&p).unwrap();
        let grid = linspace(0.0, 3.0 * PI, 200);
        let periodicity = grid
            .iter()
            .map(|&t| (s.y_inf(t + PI) - s.y_inf(t)).abs())
            .fold(0.0, f64::max);
        assert!(periodicity <= 1e-7);
        assert_eq!(periodicity, drift_relation_residual(&s, &grid));
    }

    #[test]
    fn y_inf_solves_ode() {
        let p = scenario(1.0);
        let s = asymptotic_solution(&p).unwrap();
        for t in linspace(0.05, 3.0 * PI, 97) {
            assert!(ode_residual(&p, &s, t, 1e-5) <= 1e-6, "t = {t}");
        }
        assert!((s.y_inf(0.0) - s.limit()).abs() == 0.0);
    }

    #[test]
    fn transient_vanishes_at_limit() {
        let p = scenario(L_SCENARIO);
        let s = asymptotic_solution(&p).unwrap();
        let y0 = s.limit();
        for n in 0..5 {
            assert_eq!(s.transient(y0, n, 1.3), 0.0);
        }
    }

    #[test]
    fn transient_decays_with_ratio() {
        let p = scenario(1.0);
        let s = asymptotic_solution(&p).unwrap();
        let t = 0.7;
        let values: Vec<f64> = (1..=20).map(|n| transient(&p, &s, n, t).abs()).collect();
        for w in values.windows(2) {
            assert!(((w[1] / w[0]) - s.ratio()).abs() < 1e-12);
        }
    }

    #[test]
    fn transient_at_five() {
        // 0.0758 from the closed form; the summed bracket gives a larger envelope
        let p = scenario(1.0);
        let s = asymptotic_solution(&p).unwrap();
        let d = transient(&p, &s, 1, 5.0).abs();
        let expected =
            (-2.5f64 + (10.0f64).sin() / 4.0).exp() * (-PI / 2.0).exp() * (1.0 - L_SCENARIO);
        assert!((d - expected).abs() < 1e-9);
        assert!(s.transient_bound_summed(1.0, 1, 5.0) > d);
    }

    #[test]
    fn decomposition_matches_rk4() {
        let p = scenario(1.0);
        let s = asymptotic_solution(&p).unwrap();
        let cfg = IntegratorConfig::dividing(11.0 * PI, 2e-3).unwrap();
        let traj = rk4_solve(-1.0, |t: f64| t.sin().powi(2), |t| t, 1.0, &cfg).unwrap();
        for n in 0..=10 {
            for t in linspace(0.0, PI, 33) {
                let lhs = traj.value_at(t + n as f64 * PI);
                let rhs = s.y_inf(t) + s.transient(1.0, n, t) + n as f64 * s.gamma(t);
                assert!((lhs - rhs).abs() < 1e-6, "n = {n}, t = {t}: {lhs} vs {rhs}");
                assert!((s.window_value(1.0, n, t) - rhs).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn approximate_at_zero_is_y_inf() {
        let s = asymptotic_solution(&scenario(1.0)).unwrap();
        assert_eq!(approximate_at(&s, 0, 1.1), s.y_inf(1.1));
    }

    #[test]
    fn initial_value_independence() {
        let a = asymptotic_solution(&scenario(1.0)).unwrap();
        let b = asymptotic_solution(&scenario(-7.0)).unwrap();
        assert_eq!(a.limit(), b.limit());
        assert_eq!(a.a0(), b.a0());
        assert_eq!(a.y_inf(2.0), b.y_inf(2.0));
        assert_ne!(a.transient(1.0, 1, 2.0), b.transient(-7.0, 1, 2.0));
    }

    #[test]
    fn mismatched_periods_rejected() {
        let rho = PeriodicSignal::from_fn(|t: f64| t.sin().powi(2), PI).unwrap();
        let b = DriftedSignal::periodic(PeriodicSignal::constant(1.0, 1.0));
        assert!(ProblemInstance::new(-1.0, rho, b, 0.0, QuadratureConfig::default()).is_err());
    }
}
