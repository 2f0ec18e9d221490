//! Perturbed-periodic coefficients `ρ(t+iT) = ρ(t) + αᵢ(t)`,
//! `b(t+iT) = b(t) + βᵢ(t)`: window recursion for `yₙ(0)`, sufficient
//! conditions for a periodic limit and Cauchy diagnostics of the partial
//! sums `Zₙ`.
//!
//! Window 0 is the unperturbed base (`α₀ = β₀ = 0`); window `n ≥ 1` uses
//! `αₙ, βₙ`. On each window, with `α̂ₙ(t) = ∫₀ᵗ αₙ` and
//! `β̂ₙ(t) = ∫₀ᵗ (b + βₙ) e^{−a − λα̂ₙ}`,
//!
//! ```text
//! yₙ(t)     = e^{a(t) + λα̂ₙ(t)} (yₙ(0) + β̂ₙ(t))
//! yₙ₊₁(0)   = μₙ (yₙ(0) + β̂ₙ(T)),   μₙ = e^{a(T) + λα̂ₙ(T)}
//! ```

use std::sync::Arc;

use crate::asymptotic::ProblemInstance;
use crate::error::{Error, Result};
use crate::numerics::{
    integrate, rk4_solve, IntegratorConfig, QuadratureConfig, RunningIntegral, Trajectory,
};
use crate::scalar::{real_fn, Real};
use crate::signal::reduce_period;

/// Indexed function `(i, t) ↦ fᵢ(t)`.
pub type IndexedFn<T> = Arc<dyn Fn(usize, T) -> T + Send + Sync>;

/// The perturbation sequences `αᵢ` and `βᵢ`, indexed from 1.
#[derive(Clone)]
pub struct PerturbationFamily<T> {
    alpha: IndexedFn<T>,
    beta: IndexedFn<T>,
    /// Truncation index for series diagnostics.
    pub index_max: usize,
}

impl<T: Real> std::fmt::Debug for PerturbationFamily<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PerturbationFamily")
            .field("index_max", &self.index_max)
            .finish()
    }
}

pub const DEFAULT_INDEX_MAX: usize = 64;
const RATIO_MARGIN: f64 = 0.05;

impl<T: Real> PerturbationFamily<T> {
    pub fn new<A, B>(alpha: A, beta: B, index_max: usize) -> Self
    where
        A: Fn(usize, T) -> T + Send + Sync + 'static,
        B: Fn(usize, T) -> T + Send + Sync + 'static,
    {
        PerturbationFamily {
            alpha: Arc::new(alpha),
            beta: Arc::new(beta),
            index_max,
        }
    }

    pub fn zero(index_max: usize) -> Self {
        Self::new(|_, _| T::zero(), |_, _| T::zero(), index_max)
    }

    /// `αᵢ(t)`; index 0 is the unperturbed base window.
    #[inline]
    pub fn alpha(&self, i: usize, t: T) -> T {
        if i == 0 {
            T::zero()
        } else {
            (self.alpha)(i, t)
        }
    }

    #[inline]
    pub fn beta(&self, i: usize, t: T) -> T {
        if i == 0 {
            T::zero()
        } else {
            (self.beta)(i, t)
        }
    }
}

/// `α̂ᵢ(t) = ∫₀ᵗ αᵢ` by direct quadrature.
pub fn alpha_hat<T: Real>(
    fam: &PerturbationFamily<T>,
    base: &ProblemInstance<T>,
    i: usize,
    t: T,
) -> Result<T> {
    integrate(|s| fam.alpha(i, s), T::zero(), t, base.quad_cfg())
}

/// `β̂ᵢ(t) = ∫₀ᵗ (b + βᵢ) e^{−a − λα̂ᵢ}` by direct quadrature over a tabulated `α̂ᵢ`.
pub fn beta_hat<T: Real>(
    fam: &PerturbationFamily<T>,
    base: &ProblemInstance<T>,
    i: usize,
    t: T,
) -> Result<T> {
    let hat = alpha_table(fam, base, i)?;
    let cache = &base.cache;
    let lambda = base.lambda;
    integrate(
        |s| (base.b.eval(s) + fam.beta(i, s)) * (-cache.exponent(s) - lambda * hat.eval(s)).exp(),
        T::zero(),
        t,
        base.quad_cfg(),
    )
}

const WINDOW_PANELS: usize = 128;

fn alpha_table<T: Real>(
    fam: &PerturbationFamily<T>,
    base: &ProblemInstance<T>,
    i: usize,
) -> Result<RunningIntegral<T>> {
    let f = fam.clone();
    RunningIntegral::new(
        real_fn(move |s: T| f.alpha(i, s)),
        base.period(),
        WINDOW_PANELS,
        base.quad_cfg(),
    )
}

#[derive(Clone)]
struct WindowTables<T> {
    alpha_hat: RunningIntegral<T>,
    beta_hat: RunningIntegral<T>,
    /// `∫₀ᵀ βᵢ e^{−a}`
    beta_plain: T,
    /// `β̂ᵢ(T) − ∫₀ᵀ b e^{−a}`, integrated directly so it keeps relative accuracy
    beta_excess: T,
}

/// Verdict for one of the two summability conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
    /// Identically zero perturbation: the base is exactly periodic.
    DegeneratePeriodic,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
            Verdict::DegeneratePeriodic => "degenerate-periodic",
        }
    }

    /// True when the limit theory applies.
    pub fn admits_limit(&self) -> bool {
        matches!(self, Verdict::Pass | Verdict::DegeneratePeriodic)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Positivity, monotone decay and ratio test for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub positive: bool,
    pub monotone: bool,
    /// `min` and `max` of successive term ratios over the second half of the window.
    pub ratio_min: T,
    pub ratio_max: T,
    pub verdict: Verdict,
    pub detail: String,
}

/// Sampled check of `ρ(t+iT) = ρ(t) + αᵢ(t)` and `b(t+iT) = b(t) + βᵢ(t)`
/// on the assembled global coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport<T> {
    pub rho_deviation: T,
    pub b_deviation: T,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDiagnostics<T> {
    /// `α̂ᵢ(T)` for `i = 1..=index_max`.
    pub alpha_hats: Vec<T>,
    pub beta_hats: Vec<T>,
    /// `ρ₁ = e^{a(T)}`.
    pub ratio: T,
    /// `K(T) = ∫₀ᵀ (|b| + β₁) e^{−a − λα̂₁}`.
    pub k_envelope: T,
    /// Partial sums of `e^{−i a(T)} α̂ᵢ`.
    pub alpha_series_partial: Vec<T>,
    /// Partial sums of `e^{−i a(T)} (β̂ᵢ − ∫₀ᵀ b e^{−a})`.
    pub beta_series_partial: Vec<T>,
    pub alpha: ConditionReport<T>,
    pub beta: ConditionReport<T>,
    pub consistency: ConsistencyReport<T>,
    pub verdict: Verdict,
}

/// The `T`-periodic limit `y∞(t) = e^{a(t)} [L(T) + ∫₀ᵗ b e^{−a}]`, `b`
/// extended periodically from the base window.
#[derive(Clone)]
pub struct PeriodicLimit<T> {
    pub limit: T,
    pub verdict: Verdict,
    base: ProblemInstance<T>,
    running_b: RunningIntegral<T>,
}

impl<T: Real> std::fmt::Debug for PeriodicLimit<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicLimit")
            .field("limit", &self.limit)
            .field("verdict", &self.verdict)
            .finish()
    }
}

impl<T: Real> PeriodicLimit<T> {
    pub fn y_inf(&self, t: T) -> T {
        self.base.cache.exponent(t).exp() * (self.limit + self.running_b.eval(t))
    }

    /// `max |y∞(t+T) − y∞(t)|` over `grid`.
    pub fn periodicity_residual(&self, grid: &[T]) -> T {
        let period = self.base.period();
        grid.iter()
            .map(|&t| (self.y_inf(t + period) - self.y_inf(t)).abs())
            .fold(T::zero(), T::max)
    }

    /// `|y∞' − λρ y∞ − b|` at `t ∈ (0, T)` by central difference of relative step `h`.
    pub fn ode_residual(&self, t: T, h: T) -> T {
        let step = h * t.abs().max(T::one());
        let d = (self.y_inf(t + step) - self.y_inf(t - step)) / (step + step);
        (d - self.base.lambda * self.base.rho.eval(t) * self.y_inf(t) - self.base.b.eval(t)).abs()
    }
}

/// One row of [`PerturbedModel::cauchy_diagnostics`]: the pair `n < m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyRow<T> {
    pub n: usize,
    pub m: usize,
    pub z_n: T,
    pub z_m: T,
    pub gap: T,
    /// `K(T) Σ_{i=n+1}^{m} ρ₁ⁱ`.
    pub j1_bound: T,
    /// `Σ_{i=1}^{n} ρ₁ⁱ (|λ| K α̂_{n−i+1} + e^{|λ|α̂₁} ∫₀ᵀ β_{n−i+1} e^{−a})`.
    pub j2_beta_bound: T,
    /// `K |λ| Σ_{i=1}^{n} ρ₁ⁱ Σ_{j=n−i+1}^{n} α̂ⱼ`.
    pub j2_delta_bound: T,
    pub bound: T,
}

/// Perturbation family attached to a base instance, with per-window tables.
#[derive(Clone)]
pub struct PerturbedModel<T> {
    family: PerturbationFamily<T>,
    base: ProblemInstance<T>,
    windows: Vec<WindowTables<T>>,
    a_period: T,
    ratio: T,
    int_b: T,
}

impl<T: Real> std::fmt::Debug for PerturbedModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PerturbedModel")
            .field("windows", &self.windows.len())
            .field("ratio", &self.ratio)
            .finish()
    }
}

impl<T: Real> PerturbedModel<T> {
    /// Tabulates windows `0..=max(windows, index_max)`.
    pub fn new(
        family: PerturbationFamily<T>,
        base: ProblemInstance<T>,
        windows: usize,
    ) -> Result<Self> {
        let a_period = base.cache.period_exponent()?;
        let ratio = a_period.exp();
        let count = windows.max(family.index_max) + 1;
        let mut tables = Vec::with_capacity(count);
        for i in 0..count {
            tables.push(Self::window_tables(&family, &base, i)?);
        }
        let int_b = tables[0].beta_hat.eval(base.period());
        Ok(PerturbedModel {
            family,
            base,
            windows: tables,
            a_period,
            ratio,
            int_b,
        })
    }

    fn window_tables(
        family: &PerturbationFamily<T>,
        base: &ProblemInstance<T>,
        i: usize,
    ) -> Result<WindowTables<T>> {
        let period = base.period();
        let cfg = base.quad_cfg();
        let alpha_hat = alpha_table(family, base, i)?;
        let hat = alpha_hat.clone();
        let fam = family.clone();
        let cache = base.cache.clone();
        let bf = base.b.func();
        let lambda = base.lambda;
        let integrand = real_fn(move |s: T| {
            (bf(s) + fam.beta(i, s)) * (-cache.exponent(s) - lambda * hat.eval(s)).exp()
        });
        let beta_hat = RunningIntegral::new(integrand, period, WINDOW_PANELS, cfg)?;
        let beta_plain = integrate(
            |s| family.beta(i, s) * base.cache.neg_exp(s),
            T::zero(),
            period,
            cfg,
        )?;
        // excesses shrink geometrically with i; an absolute tolerance would swamp them
        let relative =
            QuadratureConfig::new(T::min_positive_value(), cfg.rel_tol, cfg.max_subdivisions)?;
        let excess_hat = &alpha_hat;
        let beta_excess = integrate(
            |s| {
                let w = base.cache.neg_exp(s);
                (base.b.eval(s) + family.beta(i, s)) * w * (-lambda * excess_hat.eval(s)).exp_m1()
                    + family.beta(i, s) * w
            },
            T::zero(),
            period,
            &relative,
        )?;
        Ok(WindowTables {
            alpha_hat,
            beta_hat,
            beta_plain,
            beta_excess,
        })
    }

    pub fn family(&self) -> &PerturbationFamily<T> {
        &self.family
    }

    pub fn base(&self) -> &ProblemInstance<T> {
        &self.base
    }

    /// Highest tabulated window index.
    pub fn max_window(&self) -> usize {
        self.windows.len() - 1
    }

    fn table(&self, i: usize) -> &WindowTables<T> {
        self.windows.get(i).unwrap_or_else(|| {
            panic!(
                "window {i} not tabulated (max {}); build the model with more windows",
                self.windows.len() - 1
            )
        })
    }

    /// `ρ₁ = e^{a(T)}`.
    pub fn ratio(&self) -> T {
        self.ratio
    }

    /// `α̂ᵢ(t)` for `t ∈ [0, T]`.
    pub fn alpha_hat(&self, i: usize, t: T) -> T {
        self.table(i).alpha_hat.eval(t)
    }

    pub fn beta_hat(&self, i: usize, t: T) -> T {
        self.table(i).beta_hat.eval(t)
    }

    /// `α̂ᵢ ≡ α̂ᵢ(T)`.
    pub fn alpha_hat_period(&self, i: usize) -> T {
        self.alpha_hat(i, self.base.period())
    }

    pub fn beta_hat_period(&self, i: usize) -> T {
        self.beta_hat(i, self.base.period())
    }

    /// `∫₀ᵗ b e^{−a}` on the base window (the `n → ∞` limit of `β̂ₙ(t)`).
    pub fn base_integral(&self, t: T) -> T {
        self.beta_hat(0, t)
    }

    /// `μₙ = e^{a(T) + λα̂ₙ}`.
    pub fn mu(&self, n: usize) -> T {
        (self.a_period + self.base.lambda * self.alpha_hat_period(n)).exp()
    }

    /// `yₙ(t) = e^{a(t) + λα̂ₙ(t)} (yₙ(0) + β̂ₙ(t))`.
    pub fn window_solution(&self, n: usize, start: T, t: T) -> T {
        let exponent = self.base.cache.exponent(t) + self.base.lambda * self.alpha_hat(n, t);
        exponent.exp() * (start + self.beta_hat(n, t))
    }

    /// `y(T) = y₁(0)`, the end of the unperturbed base window.
    pub fn first_period_value(&self) -> T {
        self.mu(0) * (self.base.y0 + self.beta_hat_period(0))
    }

    /// `[y₁(0), …, y_{n_max+1}(0)]` by the one-step recursion from `y₀(0) = y0`.
    pub fn iterate_initial_values(&self, n_max: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(n_max + 1);
        let mut y = self.base.y0;
        for n in 0..=n_max {
            y = self.mu(n) * (y + self.beta_hat_period(n));
            out.push(y);
        }
        out
    }

    /// `δᵢ⁽ⁿ⁾ = e^{i a(T) + λ(α̂ₙ + … + α̂_{n+1−i})}`.
    pub fn delta(&self, i: usize, n: usize) -> T {
        assert!(
            i >= 1 && i <= n,
            "delta needs 1 <= i <= n (i = {i}, n = {n})"
        );
        let sum = ((n + 1 - i)..=n).fold(T::zero(), |acc, j| acc + self.alpha_hat_period(j));
        (T::from_count(i) * self.a_period + self.base.lambda * sum).exp()
    }

    /// `Zₙ = Σ_{i=1}^{n} δᵢ⁽ⁿ⁾ β̂_{n−i+1}`.
    pub fn z(&self, n: usize) -> T {
        (1..=n).fold(T::zero(), |acc, i| {
            acc + self.delta(i, n) * self.beta_hat_period(n - i + 1)
        })
    }

    /// `y_{n+1}(0) = Zₙ + δₙ⁽ⁿ⁾ y(T)`.
    pub fn product_sum_initial_value(&self, n: usize) -> T {
        assert!(n >= 1, "product sum needs n >= 1");
        self.z(n) + self.delta(n, n) * self.first_period_value()
    }

    /// The limit `r/(1−r) ∫₀ᵀ b e^{−a}` of `yₙ(0)`.
    pub fn periodic_limit_value(&self) -> T {
        self.ratio / (T::one() - self.ratio) * self.int_b
    }

    /// `K(T)`.
    pub fn k_envelope(&self) -> Result<T> {
        let hat = &self.table(1).alpha_hat;
        let cache = &self.base.cache;
        let lambda = self.base.lambda;
        integrate(
            |s| {
                (self.base.b.eval(s).abs() + self.family.beta(1, s))
                    * (-cache.exponent(s) - lambda * hat.eval(s)).exp()
            },
            T::zero(),
            self.base.period(),
            self.base.quad_cfg(),
        )
    }

    /// Samples the assembled coefficients against `ρ(t+iT) = ρ(t) + αᵢ(t)` and
    /// `b(t+iT) = b(t) + βᵢ(t)` for `t` in the base window and `i ≤ max_i`.
    pub fn consistency(&self, max_i: usize, samples: usize) -> ConsistencyReport<T> {
        let period = self.base.period();
        let rho = |t: T| {
            let (n, r) = reduce_period(t, period);
            self.base.rho.eval(r) + self.family.alpha(n.to_usize().unwrap_or(0), r)
        };
        let b = |t: T| {
            let (n, r) = reduce_period(t, period);
            self.base.b.eval(r) + self.family.beta(n.to_usize().unwrap_or(0), r)
        };
        let mut rho_dev = T::zero();
        let mut b_dev = T::zero();
        for i in 1..=max_i {
            let shift = period * T::from_count(i);
            for k in 0..samples.max(2) {
                // stay off window boundaries where the assembled functions jump
                let t = period * (T::from_count(k) + T::lit(0.5)) / T::from_count(samples.max(2));
                rho_dev = rho_dev.max((rho(t + shift) - rho(t) - self.family.alpha(i, t)).abs());
                b_dev = b_dev.max((b(t + shift) - b(t) - self.family.beta(i, t)).abs());
            }
        }
        let tol = T::lit(1e-8);
        ConsistencyReport {
            rho_deviation: rho_dev,
            b_deviation: b_dev,
            consistent: rho_dev <= tol && b_dev <= tol,
        }
    }

    fn condition(&self, name: &str, seq: impl Fn(usize, T) -> T, hats: &[T]) -> ConditionReport<T> {
        let n_max = hats.len();
        let period = self.base.period();
        let grid = 64usize;
        let mut positive = true;
        let mut monotone = true;
        let mut all_zero = true;
        for i in 1..=n_max {
            for k in 0..=grid {
                let t = period * T::from_count(k) / T::from_count(grid);
                let cur = seq(i, t);
                if cur != T::zero() {
                    all_zero = false;
                }
                if !(cur > T::zero()) {
                    positive = false;
                }
                if i < n_max && !(seq(i + 1, t) <= cur) {
                    monotone = false;
                }
            }
        }
        if all_zero && hats.iter().all(|h| *h == T::zero()) {
            return ConditionReport {
                positive: false,
                monotone: true,
                ratio_min: T::nan(),
                ratio_max: T::nan(),
                verdict: Verdict::DegeneratePeriodic,
                detail: format!("{name}: identically zero"),
            };
        }

        // log-space ratios of e^{−i a(T)} x̂ᵢ avoid overflow for strong contraction
        let lo = (n_max / 2).max(1);
        let mut ratio_min = T::infinity();
        let mut ratio_max = T::neg_infinity();
        let mut zero_terms = false;
        for i in lo..n_max {
            let (cur, next) = (hats[i - 1].abs(), hats[i].abs());
            if !(cur > T::zero()) || !(next > T::zero()) {
                zero_terms = true;
                continue;
            }
            let log_ratio = -self.a_period + (next.ln() - cur.ln());
            let ratio = log_ratio.exp();
            ratio_min = ratio_min.min(ratio);
            ratio_max = ratio_max.max(ratio);
        }
        let margin = T::lit(RATIO_MARGIN);
        let (verdict, why) = if !positive || !monotone {
            (
                Verdict::Fail,
                format!("{name}: positivity {positive}, monotone decay {monotone}"),
            )
        } else if zero_terms || !ratio_max.is_finite() {
            (
                Verdict::Indeterminate,
                format!("{name}: ratio test not applicable"),
            )
        } else if ratio_max <= T::one() - margin {
            (
                Verdict::Pass,
                format!("{name}: term ratio <= {ratio_max:.6} over [{lo}, {n_max}]"),
            )
        } else if ratio_min >= T::one() {
            (
                Verdict::Fail,
                format!(
                    "{name}: term ratio >= {ratio_min:.6} over [{lo}, {n_max}], series diverges"
                ),
            )
        } else {
            (
                Verdict::Indeterminate,
                format!(
                    "{name}: term ratio in [{ratio_min:.6}, {ratio_max:.6}] over [{lo}, {n_max}]"
                ),
            )
        };
        ConditionReport {
            positive,
            monotone,
            ratio_min,
            ratio_max,
            verdict,
            detail: why,
        }
    }

    fn partial_sums(&self, hats: &[T]) -> Vec<T> {
        let mut acc = T::zero();
        hats.iter()
            .enumerate()
            .map(|(k, h)| {
                acc = acc + (-T::from_count(k + 1) * self.a_period).exp() * *h;
                acc
            })
            .collect()
    }

    /// Sufficient conditions for a periodic limit, evaluated on `1..=index_max`.
    pub fn check_conditions(&self) -> Result<SeriesDiagnostics<T>> {
        let n_max = self.family.index_max;
        if n_max < 8 {
            return Err(Error::InvalidConfig(format!(
                "index_max must be at least 8 for series diagnostics, got {n_max}"
            )));
        }
        let alpha_hats: Vec<T> = (1..=n_max).map(|i| self.alpha_hat_period(i)).collect();
        let beta_hats: Vec<T> = (1..=n_max).map(|i| self.beta_hat_period(i)).collect();
        let fam = &self.family;
        let alpha = self.condition("alpha", |i, t| fam.alpha(i, t), &alpha_hats);
        let beta_excess = beta_excess(self, n_max);
        let beta = self.condition("beta", |i, t| fam.beta(i, t), &beta_excess);
        let verdict = combine(alpha.verdict, beta.verdict);
        Ok(SeriesDiagnostics {
            alpha_series_partial: self.partial_sums(&alpha_hats),
            beta_series_partial: self.partial_sums(&beta_excess),
            alpha_hats,
            beta_hats,
            ratio: self.ratio,
            k_envelope: self.k_envelope()?,
            alpha,
            beta,
            consistency: self.consistency(5, 256),
            verdict,
        })
    }

    /// The periodic limit; requires a passing verdict unless `force`.
    pub fn limit_periodic_solution(&self, force: bool) -> Result<PeriodicLimit<T>> {
        let diag = self.check_conditions()?;
        if !diag.verdict.admits_limit() && !force {
            return Err(Error::ConditionsNotVerified(format!(
                "verdict {} ({}; {})",
                diag.verdict, diag.alpha.detail, diag.beta.detail
            )));
        }
        let period = self.base.period();
        let bf = self.base.b.func();
        let cache = self.base.cache.clone();
        let integrand = real_fn(move |s: T| {
            let (_, r) = reduce_period(s, period);
            bf(r) * cache.neg_exp(s)
        });
        let periods = 4;
        let running_b = RunningIntegral::new(
            integrand,
            period * T::from_count(periods),
            periods * 256,
            self.base.quad_cfg(),
        )?;
        Ok(PeriodicLimit {
            limit: self.periodic_limit_value(),
            verdict: diag.verdict,
            base: self.base.clone(),
            running_b,
        })
    }

    /// `Zₙ` gaps between consecutive entries of `n_list` with computable envelopes.
    pub fn cauchy_diagnostics(&self, n_list: &[usize]) -> Result<Vec<CauchyRow<T>>> {
        if n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "n_list must be strictly ascending".into(),
            ));
        }
        let k = self.k_envelope()?;
        let lam = self.base.lambda.abs();
        let rho1 = self.ratio;
        let growth = (lam * self.alpha_hat_period(1)).exp();
        let mut rows = Vec::with_capacity(n_list.len().saturating_sub(1));
        for pair in n_list.windows(2) {
            let (n, m) = (pair[0], pair[1]);
            let z_n = self.z(n);
            let z_m = self.z(m);
            let j1_bound = k * ((n + 1)..=m).fold(T::zero(), |acc, i| acc + rho1.powi(i as i32));
            let mut j2_beta = T::zero();
            let mut j2_delta = T::zero();
            for i in 1..=n {
                let w = rho1.powi(i as i32);
                let idx = n - i + 1;
                j2_beta = j2_beta
                    + w * (lam * k * self.alpha_hat_period(idx)
                        + growth * self.table(idx).beta_plain);
                let tail =
                    ((n + 1 - i)..=n).fold(T::zero(), |acc, j| acc + self.alpha_hat_period(j));
                j2_delta = j2_delta + w * tail;
            }
            let j2_delta_bound = k * lam * j2_delta;
            rows.push(CauchyRow {
                n,
                m,
                z_n,
                z_m,
                gap: (z_m - z_n).abs(),
                j1_bound,
                j2_beta_bound: j2_beta,
                j2_delta_bound,
                bound: j1_bound + j2_beta + j2_delta_bound,
            });
        }
        Ok(rows)
    }

    /// RK4 on the assembled coefficients, window by window from `y(0) = y0`,
    /// with `steps` steps per window. Returns one local trajectory per window `0..=n_windows`.
    pub fn rk4_windows(&self, n_windows: usize, steps: usize) -> Result<Vec<Trajectory<T>>> {
        let period = self.base.period();
        let cfg = IntegratorConfig::new(period / T::from_count(steps.max(1)), period)?;
        let lambda = self.base.lambda;
        let mut start = self.base.y0;
        let mut out = Vec::with_capacity(n_windows + 1);
        for n in 0..=n_windows {
            let traj = rk4_solve(
                lambda,
                |s| self.base.rho.eval(s) + self.family.alpha(n, s),
                |s| self.base.b.eval(s) + self.family.beta(n, s),
                start,
                &cfg,
            )?;
            start = traj.last_value();
            out.push(traj);
        }
        Ok(out)
    }
}

fn beta_excess<T: Real>(model: &PerturbedModel<T>, n_max: usize) -> Vec<T> {
    // β̂ᵢ itself tends to ∫b e^{−a}; only the excess over that limit can be summable
    (1..=n_max).map(|i| model.table(i).beta_excess).collect()
}

fn combine(a: Verdict, b: Verdict) -> Verdict {
    use Verdict::*;
    match (a, b) {
        (DegeneratePeriodic, DegeneratePeriodic) => DegeneratePeriodic,
        (Fail, _) | (_, Fail) => Fail,
        (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
        _ => Pass,
    }
}
