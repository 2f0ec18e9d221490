//! Periodic and drifted-periodic signals, the drift decomposition
//! `b = b̃ + (t/T)·β`, and the cached exponent `a(t) = λ∫₀ᵗρ`.

use crate::error::{Error, Result};
use crate::numerics::{QuadratureConfig, RunningIntegral};
use crate::scalar::{real_fn, Real, RealFn};

/// Sampling plan for periodicity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicityCheck<T> {
    pub samples: usize,
    /// Number of periods covered by the sample grid.
    pub periods: usize,
    /// Allowed deviation, scaled by `1 + |f(t)|`.
    pub tol: T,
}

impl<T: Real> Default for PeriodicityCheck<T> {
    fn default() -> Self {
        PeriodicityCheck {
            samples: 1024,
            periods: 3,
            tol: T::lit(1e-8).max(T::tolerance_floor() * T::lit(16.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicityReport<T> {
    pub passed: bool,
    pub max_deviation: T,
    /// Sample time with the largest scaled deviation.
    pub worst_t: T,
}

/// Samples `residual(t)` on an equispaced grid over `[0, periods·T]` and compares
/// `|residual(t)|` against `tol·(1 + |scale(t)|)`.
fn sample_residual<T, R, S>(
    residual: R,
    scale: S,
    period: T,
    check: &PeriodicityCheck<T>,
) -> PeriodicityReport<T>
where
    T: Real,
    R: Fn(T) -> T,
    S: Fn(T) -> T,
{
    let samples = check.samples.max(2);
    let span = period * T::from_count(check.periods.max(1));
    let mut worst = T::zero();
    let mut worst_ratio = T::zero();
    let mut worst_t = T::zero();
    let mut passed = true;
    for k in 0..samples {
        let t = span * T::from_count(k) / T::from_count(samples - 1);
        let dev = residual(t).abs();
        let allowed = check.tol * (T::one() + scale(t).abs());
        let ratio = if dev.is_nan() {
            T::infinity()
        } else {
            dev / allowed
        };
        if !(dev <= allowed) {
            passed = false;
        }
        if k == 0 || ratio > worst_ratio {
            worst_ratio = ratio;
            worst = dev;
            worst_t = t;
        }
    }
    PeriodicityReport {
        passed,
        max_deviation: worst,
        worst_t,
    }
}

/// Checks `f(t + T) ≈ f(t)` on `samples` points over three periods.
pub fn verify_periodicity<T, F>(f: F, period: T, samples: usize, tol: T) -> PeriodicityReport<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    let check = PeriodicityCheck {
        samples,
        tol,
        ..PeriodicityCheck::default()
    };
    verify_periodicity_with(f, period, &check)
}

pub fn verify_periodicity_with<T, F>(
    f: F,
    period: T,
    check: &PeriodicityCheck<T>,
) -> PeriodicityReport<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    sample_residual(|t| f(t + period) - f(t), &f, period, check)
}

/// A `T`-periodic real function.
#[derive(Clone)]
pub struct PeriodicSignal<T> {
    f: RealFn<T>,
    period: T,
}

impl<T: Real> std::fmt::Debug for PeriodicSignal<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicSignal")
            .field("period", &self.period)
            .finish()
    }
}

fn check_period<T: Real>(period: T) -> Result<()> {
    if period > T::zero() && period.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "period must be positive, got {period}"
        )))
    }
}

impl<T: Real> PeriodicSignal<T> {
    /// Builds a signal after checking periodicity with the default sampling plan.
    pub fn new(f: RealFn<T>, period: T) -> Result<Self> {
        Self::checked(f, period, &PeriodicityCheck::default(), "periodic signal")
    }

    pub fn checked(
        f: RealFn<T>,
        period: T,
        check: &PeriodicityCheck<T>,
        what: &str,
    ) -> Result<Self> {
        check_period(period)?;
        let report = verify_periodicity_with(&*f, period, check);
        if !report.passed {
            return Err(Error::PeriodicityViolation {
                what: what.to_string(),
                at: report.worst_t.as_f64(),
                deviation: report.max_deviation.as_f64(),
                tol: check.tol.as_f64(),
            });
        }
        Ok(PeriodicSignal { f, period })
    }

    /// Builds a signal whose periodicity the caller guarantees.
    pub fn new_unchecked(f: RealFn<T>, period: T) -> Self {
        PeriodicSignal { f, period }
    }

    pub fn from_fn<F>(f: F, period: T) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        Self::new(real_fn(f), period)
    }

    pub fn constant(value: T, period: T) -> Self {
        PeriodicSignal::new_unchecked(real_fn(move |_| value), period)
    }

    pub fn zero(period: T) -> Self {
        Self::constant(T::zero(), period)
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        (self.f)(t)
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn func(&self) -> RealFn<T> {
        self.f.clone()
    }

    /// True when every sample on the default grid is exactly zero.
    pub fn is_identically_zero(&self) -> bool {
        let n = 257;
        (0..n)
            .all(|k| self.eval(self.period * T::from_count(k) / T::from_count(n - 1)) == T::zero())
    }
}

/// A function with `b(t + T) = b(t) + β(t)` for a `T`-periodic drift `β`.
#[derive(Clone)]
pub struct DriftedSignal<T> {
    f: RealFn<T>,
    drift: PeriodicSignal<T>,
}

impl<T: Real> std::fmt::Debug for DriftedSignal<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriftedSignal")
            .field("period", &self.drift.period)
            .finish()
    }
}

impl<T: Real> DriftedSignal<T> {
    pub fn new(f: RealFn<T>, drift: PeriodicSignal<T>) -> Result<Self> {
        Self::checked(f, drift, &PeriodicityCheck::default())
    }

    pub fn checked(
        f: RealFn<T>,
        drift: PeriodicSignal<T>,
        check: &PeriodicityCheck<T>,
    ) -> Result<Self> {
        let period = drift.period();
        check_period(period)?;
        let report = sample_residual(
            |t| f(t + period) - f(t) - drift.eval(t),
            |t| f(t + period),
            period,
            check,
        );
        if !report.passed {
            return Err(Error::PeriodicityViolation {
                what: "drift relation b(t+T) = b(t) + beta(t)".into(),
                at: report.worst_t.as_f64(),
                deviation: report.max_deviation.as_f64(),
                tol: check.tol.as_f64(),
            });
        }
        Ok(DriftedSignal { f, drift })
    }

    pub fn new_unchecked(f: RealFn<T>, drift: PeriodicSignal<T>) -> Self {
        DriftedSignal { f, drift }
    }

    pub fn from_fn<F>(f: F, drift: PeriodicSignal<T>) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        Self::new(real_fn(f), drift)
    }

    /// A periodic signal viewed as drifted with `β ≡ 0`.
    pub fn periodic(signal: PeriodicSignal<T>) -> Self {
        let period = signal.period();
        DriftedSignal {
            f: signal.func(),
            drift: PeriodicSignal::zero(period),
        }
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        (self.f)(t)
    }

    pub fn period(&self) -> T {
        self.drift.period()
    }

    pub fn drift(&self) -> &PeriodicSignal<T> {
        &self.drift
    }

    pub fn func(&self) -> RealFn<T> {
        self.f.clone()
    }
}

/// Splits `b` into its periodic part `b̃(t) = b(t) − (t/T)·β(t)` and drift `β`.
pub fn decompose_drift<T: Real>(
    b: &DriftedSignal<T>,
) -> Result<(PeriodicSignal<T>, PeriodicSignal<T>)> {
    let period = b.period();
    let f = b.func();
    let beta = b.drift().clone();
    let beta_fn = beta.func();
    let tilde = real_fn(move |t: T| f(t) - t / period * beta_fn(t));
    let tilde = PeriodicSignal::checked(
        tilde,
        period,
        &PeriodicityCheck::default(),
        "drift residual b~",
    )?;
    Ok((tilde, beta))
}

/// Inverse of [`decompose_drift`]: `b(t) = b̃(t) + (t/T)·β(t)`.
pub fn reconstruct<T: Real>(
    tilde: &PeriodicSignal<T>,
    beta: &PeriodicSignal<T>,
) -> DriftedSignal<T> {
    let period = beta.period();
    let tf = tilde.func();
    let bf = beta.func();
    DriftedSignal::new_unchecked(
        real_fn(move |t: T| tf(t) + t / period * bf(t)),
        beta.clone(),
    )
}

/// Splits `t ≥ 0` into `(n, r)` with `t = n·T + r`, `r ∈ [0, T)`.
pub fn reduce_period<T: Real>(t: T, period: T) -> (T, T) {
    let mut n = (t / period).floor();
    let mut r = (-n).mul_add(period, t);
    if r < T::zero() {
        r = r + period;
        n = n - T::one();
    }
    if r >= period {
        r = r - period;
        n = n + T::one();
    }
    (n, r.max(T::zero()))
}

/// `a(t) = λ∫₀ᵗρ(s)ds`, tabulated on one period and extended by
/// `a(t + nT) = a(t) + n·a(T)`.
#[derive(Clone)]
pub struct ExponentCache<T> {
    lambda: T,
    rho: PeriodicSignal<T>,
    a_period: T,
    table: RunningIntegral<T>,
    slopes: Vec<T>,
    use_hermite: bool,
    interp_error: T,
    quad_cfg: QuadratureConfig<T>,
}

impl<T: Real> std::fmt::Debug for ExponentCache<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExponentCache")
            .field("lambda", &self.lambda)
            .field("a_period", &self.a_period)
            .field("use_hermite", &self.use_hermite)
            .field("interp_error", &self.interp_error)
            .finish()
    }
}

pub const DEFAULT_TABLE_NODES: usize = 4096;

impl<T: Real> ExponentCache<T> {
    pub fn new(lambda: T, rho: PeriodicSignal<T>, quad_cfg: QuadratureConfig<T>) -> Result<Self> {
        Self::with_nodes(lambda, rho, quad_cfg, DEFAULT_TABLE_NODES)
    }

    pub fn with_nodes(
        lambda: T,
        rho: PeriodicSignal<T>,
        quad_cfg: QuadratureConfig<T>,
        nodes: usize,
    ) -> Result<Self> {
        if !(lambda < T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be negative, got {lambda}"
            )));
        }
        quad_cfg.validate()?;
        let period = rho.period();
        let rf = rho.func();
        let integrand = real_fn(move |s: T| lambda * rf(s));
        let table = RunningIntegral::new(integrand, period, nodes, &quad_cfg)?;
        let h = table.spacing();
        let slopes: Vec<T> = (0..=nodes)
            .map(|k| lambda * rho.eval(h * T::from_count(k)))
            .collect();
        let a_period = *table.nodes().last().expect("table has nodes");

        let mut cache = ExponentCache {
            lambda,
            rho,
            a_period,
            table,
            slopes,
            use_hermite: false,
            interp_error: T::zero(),
            quad_cfg,
        };
        let mut estimate = T::zero();
        for k in 0..nodes {
            let mid = h * (T::from_count(k) + T::lit(0.5));
            let diff = (cache.hermite(k, mid) - cache.table.eval(mid)).abs();
            estimate = estimate.max(diff);
        }
        cache.interp_error = estimate;
        cache.use_hermite = estimate <= quad_cfg.abs_tol;
        Ok(cache)
    }

    fn hermite(&self, k: usize, r: T) -> T {
        let h = self.table.spacing();
        let x0 = h * T::from_count(k);
        let s = (r - x0) / h;
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let v = self.table.nodes();
        (one + two * s) * (one - s) * (one - s) * v[k]
            + s * (one - s) * (one - s) * h * self.slopes[k]
            + s * s * (three - two * s) * v[k + 1]
            + s * s * (s - one) * h * self.slopes[k + 1]
    }

    /// `a(r)` for `r ∈ [0, T]`.
    fn local(&self, r: T) -> T {
        if !self.use_hermite {
            return self.table.eval(r);
        }
        let h = self.table.spacing();
        let last = self.slopes.len() - 2;
        let k = (r / h).floor().to_usize().unwrap_or(0).min(last);
        self.hermite(k, r)
    }

    /// `a(t)` for `t ≥ 0`.
    pub fn exponent(&self, t: T) -> T {
        debug_assert!(t >= T::zero(), "exponent needs t >= 0, got {t}");
        let (n, r) = reduce_period(t, self.period());
        self.local(r) + n * self.a_period
    }

    /// `e^{−a(t)}`.
    #[inline]
    pub fn neg_exp(&self, t: T) -> T {
        (-self.exponent(t)).exp()
    }

    /// `a(T)`; fails when `e^{a(T)} ∉ (0, 1)`.
    pub fn period_exponent(&self) -> Result<T> {
        let ratio = self.a_period.exp();
        if ratio > T::zero() && ratio < T::one() {
            Ok(self.a_period)
        } else {
            Err(Error::NonContracting {
                ratio: ratio.as_f64(),
            })
        }
    }

    /// `ρ₁ = e^{a(T)}`.
    pub fn contraction_ratio(&self) -> Result<T> {
        self.period_exponent().map(T::exp)
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn rho(&self) -> &PeriodicSignal<T> {
        &self.rho
    }

    pub fn period(&self) -> T {
        self.rho.period()
    }

    pub fn quad_cfg(&self) -> &QuadratureConfig<T> {
        &self.quad_cfg
    }

    /// Largest Hermite-vs-quadrature gap observed at panel midpoints.
    pub fn interpolation_error(&self) -> T {
        self.interp_error
    }

    pub fn uses_interpolation(&self) -> bool {
        self.use_hermite
    }
}
