use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fixed-step RK4 settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub step: T,
    pub t_max: T,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(step: T, t_max: T) -> Result<Self> {
        let cfg = IntegratorConfig { step, t_max };
        cfg.steps()?;
        Ok(cfg)
    }

    /// Number of steps; the step must divide `t_max` to relative rounding.
    pub fn steps(&self) -> Result<usize> {
        if !(self.step > T::zero()) || !(self.step <= self.t_max) || !self.t_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "integrator needs 0 < step <= t_max (step {}, t_max {})",
                self.step, self.t_max
            )));
        }
        let n = (self.t_max / self.step).round();
        let slack = T::lit(1e-9).max(T::tolerance_floor()) * self.t_max;
        if (n * self.step - self.t_max).abs() > slack {
            return Err(Error::StepMismatch {
                step: self.step.as_f64(),
                t_max: self.t_max.as_f64(),
            });
        }
        n.to_usize()
            .ok_or_else(|| Error::InvalidConfig("step count overflow".into()))
    }

    /// Largest step not exceeding `max_step` that divides `t_max` exactly.
    pub fn dividing(t_max: T, max_step: T) -> Result<Self> {
        let n = (t_max / max_step).ceil().max(T::one());
        IntegratorConfig::new(t_max / n, t_max)
    }
}

/// Sampled solution of a vector ODE with slopes at every node.
#[derive(Debug, Clone)]
pub struct SystemTrajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub slopes: Vec<Vec<T>>,
}

impl<T: Real> SystemTrajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn last_state(&self) -> &[T] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    fn bracket(&self, t: T) -> (usize, T, T) {
        let n = self.times.len();
        let step = self.times[n - 1] / T::from_count(n - 1);
        let k = (t / step).floor().to_usize().unwrap_or(0).min(n - 2);
        let h = self.times[k + 1] - self.times[k];
        (k, h, (t - self.times[k]) / h)
    }

    /// Cubic Hermite interpolation between steps (fourth-order accurate,
    /// matching the method).
    pub fn state_at(&self, t: T) -> Vec<T> {
        let n = self.times.len();
        assert!(n >= 2, "trajectory too short to interpolate");
        if t <= self.times[0] {
            return self.states[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.states[n - 1].clone();
        }
        let (k, h, s) = self.bracket(t);
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = (one + two * s) * (one - s) * (one - s);
        let h10 = s * (one - s) * (one - s);
        let h01 = s * s * (three - two * s);
        let h11 = s * s * (s - one);
        (0..self.dim())
            .map(|j| {
                h00 * self.states[k][j]
                    + h10 * h * self.slopes[k][j]
                    + h01 * self.states[k + 1][j]
                    + h11 * h * self.slopes[k + 1][j]
            })
            .collect()
    }
}

/// Sampled scalar solution.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub slopes: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_value(&self) -> T {
        *self.values.last().expect("non-empty trajectory")
    }

    /// Value at node closest to `t`.
    pub fn nearest(&self, t: T) -> T {
        let n = self.times.len();
        let step = self.times[n - 1] / T::from_count(n - 1);
        let k = (t / step).round().to_usize().unwrap_or(0).min(n - 1);
        self.values[k]
    }

    pub fn value_at(&self, t: T) -> T {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let step = self.times[n - 1] / T::from_count(n - 1);
        let k = (t / step).floor().to_usize().unwrap_or(0).min(n - 2);
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        (one + two * s) * (one - s) * (one - s) * self.values[k]
            + s * (one - s) * (one - s) * h * self.slopes[k]
            + s * s * (three - two * s) * self.values[k + 1]
            + s * s * (s - one) * h * self.slopes[k + 1]
    }
}

fn check_finite<T: Real>(t: T, v: &[T]) -> Result<()> {
    match v.iter().find(|x| !x.is_finite()) {
        Some(bad) => Err(Error::NonFiniteSample {
            at: t.as_f64(),
            value: bad.as_f64(),
        }),
        None => Ok(()),
    }
}

/// Classical RK4 for `y' = f(t, y)` from `t = 0` with node times `k·step`.
///
/// `rhs(t, y, dy)` writes the derivative into `dy`.
pub fn rk4_solve_system<T, F>(
    rhs: F,
    y0: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<SystemTrajectory<T>>
where
    T: Real,
    F: Fn(T, &[T], &mut [T]),
{
    let steps = cfg.steps()?;
    let h = cfg.step;
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let dim = y0.len();

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut slopes = Vec::with_capacity(steps + 1);

    let mut y = y0.to_vec();
    let mut k1 = vec![T::zero(); dim];
    let mut k2 = vec![T::zero(); dim];
    let mut k3 = vec![T::zero(); dim];
    let mut k4 = vec![T::zero(); dim];
    let mut probe = vec![T::zero(); dim];

    check_finite(T::zero(), &y)?;
    rhs(T::zero(), &y, &mut k1);
    check_finite(T::zero(), &k1)?;
    times.push(T::zero());
    states.push(y.clone());
    slopes.push(k1.clone());

    for n in 0..steps {
        let t = h * T::from_count(n);
        let t_next = h * T::from_count(n + 1);
        for j in 0..dim {
            probe[j] = y[j] + half * k1[j];
        }
        rhs(t + half, &probe, &mut k2);
        for j in 0..dim {
            probe[j] = y[j] + half * k2[j];
        }
        rhs(t + half, &probe, &mut k3);
        for j in 0..dim {
            probe[j] = y[j] + h * k3[j];
        }
        rhs(t_next, &probe, &mut k4);
        for j in 0..dim {
            y[j] = y[j] + sixth * (k1[j] + two * k2[j] + two * k3[j] + k4[j]);
        }
        check_finite(t_next, &y)?;
        rhs(t_next, &y, &mut k1);
        check_finite(t_next, &k1)?;
        times.push(t_next);
        states.push(y.clone());
        slopes.push(k1.clone());
    }
    Ok(SystemTrajectory {
        times,
        states,
        slopes,
    })
}

/// RK4 trajectory of `y' = λ ρ(t) y + b(t)`, `y(0) = y0`.
pub fn rk4_solve<T, R, B>(
    lambda: T,
    rho: R,
    b: B,
    y0: T,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>>
where
    T: Real,
    R: Fn(T) -> T,
    B: Fn(T) -> T,
{
    let traj = rk4_solve_system(
        |t, y: &[T], dy: &mut [T]| dy[0] = lambda * rho(t) * y[0] + b(t),
        &[y0],
        cfg,
    )?;
    Ok(Trajectory {
        times: traj.times,
        values: traj.states.into_iter().map(|s| s[0]).collect(),
        slopes: traj.slopes.into_iter().map(|s| s[0]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let cfg = IntegratorConfig::new(1e-3, 1.0).unwrap();
        let traj = rk4_solve(-1.0, |_| 1.0, |_| 0.0, 1.0, &cfg).unwrap();
        assert!((traj.last_value() - (-1.0f64).exp()).abs() < 1e-8);
        assert_eq!(traj.len(), 1001);
    }

    #[test]
    fn fixed_point_stays_put() {
        let cfg = IntegratorConfig::new(0.01, 3.0).unwrap();
        let traj = rk4_solve(-1.0, |_| 1.0, |_| 1.0, 1.0, &cfg).unwrap();
        assert!(traj.values.iter().all(|v: &f64| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn step_must_divide_horizon() {
        assert!(matches!(
            IntegratorConfig::new(0.3, 1.0),
            Err(Error::StepMismatch { .. })
        ));
        assert!(IntegratorConfig::new(0.0, 1.0).is_err());
        assert!(IntegratorConfig::new(2.0, 1.0).is_err());
        let cfg = IntegratorConfig::dividing(std::f64::consts::PI, 1e-3).unwrap();
        assert!(cfg.step <= 1e-3);
        assert_eq!(cfg.steps().unwrap(), 3142);
    }

    #[test]
    fn blow_up_reported() {
        let cfg = IntegratorConfig::new(0.1, 10.0).unwrap();
        let err = rk4_solve(1.0, |_| 1000.0, |_| 0.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::NonFiniteSample { .. }));
    }

    #[test]
    fn hermite_dense_output() {
        let cfg = IntegratorConfig::new(1e-2, 2.0).unwrap();
        let traj = rk4_solve(-1.0, |_| 1.0, |_| 0.0, 1.0, &cfg).unwrap();
        for &t in &[0.005f64, 0.777, 1.5031] {
            assert!((traj.value_at(t) - (-t).exp()).abs() < 1e-9);
        }
    }
}
