use crate::error::{Error, Result};
use crate::scalar::Real;

/// Quadrature rule behind [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureRule {
    /// Adaptive Simpson with Richardson correction.
    #[default]
    AdaptiveSimpson,
    /// Composite 8-point Gauss–Legendre, panel count doubled until two
    /// successive estimates agree.
    GaussLegendre,
}

/// Error targets for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
    pub rule: QuadratureRule,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        let floor = T::tolerance_floor();
        QuadratureConfig {
            abs_tol: T::lit(1e-10).max(floor),
            rel_tol: T::lit(1e-10).max(floor),
            max_subdivisions: 1 << 20,
            rule: QuadratureRule::AdaptiveSimpson,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn new(abs_tol: T, rel_tol: T, max_subdivisions: usize) -> Result<Self> {
        let cfg = QuadratureConfig {
            abs_tol,
            rel_tol,
            max_subdivisions,
            rule: QuadratureRule::AdaptiveSimpson,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol >= T::zero()) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must be non-negative, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidConfig(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Same targets with the absolute tolerance divided across `parts` pieces.
    pub(crate) fn split(&self, parts: usize) -> Self {
        let mut cfg = *self;
        cfg.abs_tol = (self.abs_tol / T::from_count(parts.max(1))).max(T::tolerance_floor());
        cfg
    }
}

#[inline]
pub(crate) fn sample<T: Real, F: Fn(T) -> T + ?Sized>(f: &F, t: T) -> Result<T> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteSample {
            at: t.as_f64(),
            value: v.as_f64(),
        })
    }
}

/// Integrates `f` over `[lo, hi]`.
///
/// The result satisfies `|Q - I| <= max(abs_tol, rel_tol * |I|)` for smooth
/// integrands; cubic polynomials are integrated exactly by the default rule.
pub fn integrate<T, F>(f: F, lo: T, hi: T, cfg: &QuadratureConfig<T>) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    cfg.validate()?;
    if !(lo <= hi) {
        return Err(Error::InvalidConfig(format!(
            "integration bounds out of order: [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(T::zero());
    }
    match cfg.rule {
        QuadratureRule::AdaptiveSimpson => adaptive_simpson(&f, lo, hi, cfg),
        QuadratureRule::GaussLegendre => composite_gauss(&f, lo, hi, cfg),
    }
}

struct Segment<T> {
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
}

const INITIAL_PANELS: usize = 16;

fn adaptive_simpson<T: Real, F: Fn(T) -> T>(
    f: &F,
    lo: T,
    hi: T,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let fifteen = T::lit(15.0);
    let panels = T::from_count(INITIAL_PANELS);
    let width = (hi - lo) / panels;

    let mut stack = Vec::with_capacity(64);
    let mut coarse = T::zero();
    let mut f_left = sample(f, lo)?;
    for k in 0..INITIAL_PANELS {
        let a = lo + width * T::from_count(k);
        let b = if k + 1 == INITIAL_PANELS {
            hi
        } else {
            lo + width * T::from_count(k + 1)
        };
        let m = (a + b) / two;
        let fm = sample(f, m)?;
        let fb = sample(f, b)?;
        let whole = (b - a) / six * (f_left + T::lit(4.0) * fm + fb);
        coarse = coarse + whole;
        stack.push(Segment {
            a,
            b,
            fa: f_left,
            fm,
            fb,
            whole,
            tol: T::zero(),
        });
        f_left = fb;
    }

    let tol = cfg.abs_tol.max(cfg.rel_tol * coarse.abs());
    for seg in stack.iter_mut() {
        seg.tol = tol / panels;
    }
    // process left to right so the accumulated sum is order-stable
    stack.reverse();

    let mut total = T::zero();
    let mut compensation = T::zero();
    let mut splits = 0usize;
    while let Some(seg) = stack.pop() {
        let m = (seg.a + seg.b) / two;
        let lm = (seg.a + m) / two;
        let rm = (m + seg.b) / two;
        let flm = sample(f, lm)?;
        let frm = sample(f, rm)?;
        let half = (m - seg.a) / six;
        let left = half * (seg.fa + T::lit(4.0) * flm + seg.fm);
        let right = (seg.b - m) / six * (seg.fm + T::lit(4.0) * frm + seg.fb);
        let delta = left + right - seg.whole;
        let exhausted = lm <= seg.a || rm >= seg.b || m <= seg.a || m >= seg.b;
        if delta.abs() <= fifteen * seg.tol || exhausted {
            let accepted = left + right + delta / fifteen;
            // Neumaier summation
            let next = total + accepted;
            if total.abs() >= accepted.abs() {
                compensation = compensation + ((total - next) + accepted);
            } else {
                compensation = compensation + ((accepted - next) + total);
            }
            total = next;
            continue;
        }
        splits += 1;
        if splits > cfg.max_subdivisions {
            return Err(Error::SubdivisionLimit {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
                limit: cfg.max_subdivisions,
                estimate: (delta / fifteen).abs().as_f64(),
            });
        }
        let child_tol = seg.tol / two;
        stack.push(Segment {
            a: m,
            b: seg.b,
            fa: seg.fm,
            fm: frm,
            fb: seg.fb,
            whole: right,
            tol: child_tol,
        });
        stack.push(Segment {
            a: seg.a,
            b: m,
            fa: seg.fa,
            fm: flm,
            fb: seg.fm,
            whole: left,
            tol: child_tol,
        });
    }
    Ok(total + compensation)
}

const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_26,
];

/// Fixed 8-point Gauss–Legendre rule on `[lo, hi]`. Exact for degree ≤ 15.
///
/// Does not check samples for finiteness.
#[inline]
pub fn gauss_legendre_8<T: Real, F: Fn(T) -> T + ?Sized>(f: &F, lo: T, hi: T) -> T {
    let half = (hi - lo) / T::lit(2.0);
    let mid = (hi + lo) / T::lit(2.0);
    let mut acc = T::zero();
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        let dx = half * T::lit(*x);
        acc = acc + T::lit(*w) * (f(mid - dx) + f(mid + dx));
    }
    acc * half
}

fn composite_gauss<T: Real, F: Fn(T) -> T>(
    f: &F,
    lo: T,
    hi: T,
    cfg: &QuadratureConfig<T>,
) -> Result<T> {
    let checked = |t: T| -> Result<T> { sample(f, t) };
    let estimate = |panels: usize| -> Result<T> {
        let width = (hi - lo) / T::from_count(panels);
        let mut acc = T::zero();
        for k in 0..panels {
            let a = lo + width * T::from_count(k);
            let b = if k + 1 == panels { hi } else { a + width };
            // surface non-finite samples before summing
            checked(a)?;
            let q = gauss_legendre_8(f, a, b);
            if !q.is_finite() {
                return Err(Error::NonFiniteSample {
                    at: a.as_f64(),
                    value: q.as_f64(),
                });
            }
            acc = acc + q;
        }
        Ok(acc)
    };
    let mut panels = 1usize;
    let mut prev = estimate(panels)?;
    loop {
        let next_panels = panels * 2;
        if next_panels > cfg.max_subdivisions {
            let cur = estimate(panels)?;
            return Err(Error::SubdivisionLimit {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
                limit: cfg.max_subdivisions,
                estimate: (cur - prev).abs().as_f64(),
            });
        }
        let cur = estimate(next_panels)?;
        let tol = cfg.abs_tol.max(cfg.rel_tol * cur.abs());
        if (cur - prev).abs() <= tol {
            return Ok(cur);
        }
        prev = cur;
        panels = next_panels;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn sin_squared_over_period() {
        let q = integrate(|s: f64| s.sin().powi(2), 0.0, PI, &cfg()).unwrap();
        assert!((q - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn zero_integrand() {
        assert_eq!(integrate(|_s: f64| 0.0, 0.0, 7.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|s: f64| s, 2.0, 2.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn reversed_bounds_rejected() {
        assert!(matches!(
            integrate(|s: f64| s, 1.0, 0.0, &cfg()),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn cubic_exact() {
        let p = |s: f64| 3.0 * s * s * s - 2.0 * s * s + 0.5 * s - 7.0;
        let anti = |s: f64| 0.75 * s.powi(4) - 2.0 / 3.0 * s.powi(3) + 0.25 * s * s - 7.0 * s;
        let q = integrate(p, -1.3, 2.9, &cfg()).unwrap();
        assert!((q - (anti(2.9) - anti(-1.3))).abs() < 1e-12);
    }

    #[test]
    fn non_finite_sample_reported() {
        let err = integrate(|s: f64| 1.0 / (s - 0.5), 0.0, 1.0, &cfg()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteSample { .. }), "{err:?}");
    }

    #[test]
    fn subdivision_limit_reported() {
        let tight = QuadratureConfig::new(1e-14, 0.0, 4).unwrap();
        let err = integrate(|s: f64| (50.0 * s).sin().abs(), 0.0, 3.0, &tight).unwrap_err();
        assert!(
            matches!(err, Error::SubdivisionLimit { limit: 4, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn invalid_config() {
        assert!(QuadratureConfig::<f64>::new(0.0, 0.0, 10).is_err());
        assert!(QuadratureConfig::<f64>::new(1e-8, -1.0, 10).is_err());
        assert!(QuadratureConfig::<f64>::new(1e-8, 0.0, 0).is_err());
    }

    #[test]
    fn gauss_rule_agrees() {
        let g = cfg().with_rule(QuadratureRule::GaussLegendre);
        let f = |s: f64| (s / 2.0 - (2.0 * s).sin() / 4.0).exp() * s;
        let a = integrate(f, 0.0, PI, &g).unwrap();
        let b = integrate(f, 0.0, PI, &cfg()).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn gauss_fixed_rule_degree_15() {
        let q = gauss_legendre_8(&|s: f64| s.powi(15) + s.powi(14), 0.0, 1.0);
        assert!((q - (1.0 / 16.0 + 1.0 / 15.0)).abs() < 1e-15);
    }

    #[test]
    fn works_for_f32() {
        let q = integrate(
            |s: f32| s.sin().powi(2),
            0.0,
            std::f32::consts::PI,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!((q - std::f32::consts::FRAC_PI_2).abs() < 1e-4);
    }
}
