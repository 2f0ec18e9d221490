use crate::error::{Error, Result};
use crate::numerics::quadrature::{gauss_legendre_8, integrate, QuadratureConfig};
use crate::scalar::{Real, RealFn};

/// Tabulated antiderivative `F(t) = ∫₀ᵗ f(s) ds`.
///
/// Node values on `[0, span]` come from [`integrate`] on each panel and are
/// accumulated with compensated summation. A query adds a fixed 8-point
/// Gauss–Legendre integral from the nearest node below, so `F` is smooth in
/// `t` to rounding. Past `span` the tail is covered by Gauss panels of the
/// same width.
#[derive(Clone)]
pub struct RunningIntegral<T> {
    integrand: RealFn<T>,
    spacing: T,
    table: Vec<T>,
}

impl<T: Real> std::fmt::Debug for RunningIntegral<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunningIntegral")
            .field("spacing", &self.spacing)
            .field("nodes", &self.table.len())
            .finish()
    }
}

impl<T: Real> RunningIntegral<T> {
    pub fn new(
        integrand: RealFn<T>,
        span: T,
        panels: usize,
        cfg: &QuadratureConfig<T>,
    ) -> Result<Self> {
        if !(span > T::zero()) || panels == 0 {
            return Err(Error::InvalidConfig(format!(
                "running integral needs span > 0 and panels >= 1 (span {span}, panels {panels})"
            )));
        }
        let spacing = span / T::from_count(panels);
        let panel_cfg = cfg.split(panels);
        let mut table = Vec::with_capacity(panels + 1);
        table.push(T::zero());
        let mut sum = T::zero();
        let mut comp = T::zero();
        for k in 0..panels {
            let a = spacing * T::from_count(k);
            let b = if k + 1 == panels {
                span
            } else {
                spacing * T::from_count(k + 1)
            };
            let q = integrate(|s| integrand(s), a, b, &panel_cfg)?;
            let next = sum + q;
            if sum.abs() >= q.abs() {
                comp = comp + ((sum - next) + q);
            } else {
                comp = comp + ((q - next) + sum);
            }
            sum = next;
            table.push(sum + comp);
        }
        Ok(RunningIntegral {
            integrand,
            spacing,
            table,
        })
    }

    pub fn span(&self) -> T {
        self.spacing * T::from_count(self.table.len() - 1)
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn nodes(&self) -> &[T] {
        &self.table
    }

    /// The integrand itself (the derivative of [`Self::eval`]).
    #[inline]
    pub fn integrand(&self, t: T) -> T {
        (self.integrand)(t)
    }

    /// `∫₀ᵗ f(s) ds` for `t ≥ 0`.
    pub fn eval(&self, t: T) -> T {
        debug_assert!(
            t >= T::zero(),
            "RunningIntegral::eval needs t >= 0, got {t}"
        );
        let last = self.table.len() - 1;
        let pos = (t / self.spacing).floor();
        let k = pos.to_usize().unwrap_or(0).min(last);
        let node = self.spacing * T::from_count(k);
        let f = &*self.integrand;
        if k < last || t <= node + self.spacing {
            return self.table[k] + gauss_legendre_8(f, node, t);
        }
        // beyond the table: equal Gauss panels no wider than the spacing
        let rest = t - node;
        let pieces = (rest / self.spacing).ceil().to_usize().unwrap_or(1).max(1);
        let width = rest / T::from_count(pieces);
        let mut acc = self.table[last];
        for j in 0..pieces {
            let a = node + width * T::from_count(j);
            let b = if j + 1 == pieces { t } else { a + width };
            acc = acc + gauss_legendre_8(f, a, b);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::real_fn;

    #[test]
    fn matches_closed_form_inside_and_beyond_table() {
        let cfg = QuadratureConfig::default();
        let ri = RunningIntegral::new(real_fn(|s: f64| s.cos()), 3.0, 64, &cfg).unwrap();
        for &t in &[0.0, 0.01, 1.234, 2.999, 3.0, 4.5, 9.0] {
            assert!((ri.eval(t) - t.sin()).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn smooth_under_central_differences() {
        let cfg = QuadratureConfig::default();
        let f = |s: f64| (s / 2.0 - (2.0 * s).sin() / 4.0).exp() * s;
        let ri = RunningIntegral::new(real_fn(f), 10.0, 512, &cfg).unwrap();
        let h = 1e-5;
        for k in 1..200 {
            let t = 0.049 * k as f64;
            let d = (ri.eval(t + h) - ri.eval(t - h)) / (2.0 * h);
            assert!((d - f(t)).abs() <= 1e-8 * (1.0 + f(t).abs()), "t = {t}");
        }
    }

    #[test]
    fn rejects_empty_span() {
        let cfg = QuadratureConfig::default();
        assert!(RunningIntegral::new(real_fn(|s: f64| s), 0.0, 4, &cfg).is_err());
        assert!(RunningIntegral::new(real_fn(|s: f64| s), 1.0, 0, &cfg).is_err());
    }
}
