//! Compartment systems `C' = ρ(t) A C + B(t)` reduced to the scalar theory
//! mode by mode. `A` must be diagonalizable over the reals with a strictly
//! negative spectrum.

mod eigen;
mod matrix;

use rayon::prelude::*;

pub use eigen::eigenvalues;
pub use matrix::Matrix;

use crate::asymptotic::{AsymptoticOptions, AsymptoticSolution, ProblemInstance};
use crate::error::{Error, Result};
use crate::numerics::{rk4_solve_system, IntegratorConfig, QuadratureConfig, SystemTrajectory};
use crate::scalar::{real_fn, Real};
use crate::signal::{DriftedSignal, PeriodicSignal};

pub const MAX_DIMENSION: usize = 16;
pub const DEFAULT_LABELS: [&str; 4] = ["DPM", "RPM", "BIO", "HUM"];

const COMPLEX_TOL: f64 = 1e-8;
const CONDITION_LIMIT: f64 = 1e12;
const CLUSTER_TOL: f64 = 1e-6;

/// `A = P diag(λ) P⁻¹` with eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub p: Matrix<T>,
    pub p_inv: Matrix<T>,
    /// `‖P‖₁ ‖P⁻¹‖₁`.
    pub condition: T,
}

impl<T: Real> ModalDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `‖P diag(λ) P⁻¹ − A‖_max`.
    pub fn reconstruction_residual(&self, a: &Matrix<T>) -> T {
        let pd = self
            .p
            .mul(&Matrix::diagonal(&self.eigenvalues))
            .expect("square");
        pd.mul(&self.p_inv).expect("square").sub(a).norm_max()
    }

    /// Modal coordinates `P⁻¹ v`.
    pub fn to_modal(&self, v: &[T]) -> Vec<T> {
        self.p_inv.mul_vec(v)
    }

    /// Physical coordinates `P w`.
    pub fn to_physical(&self, w: &[T]) -> Vec<T> {
        self.p.mul_vec(w)
    }
}

/// Real eigendecomposition of a small square matrix with negative spectrum.
pub fn diagonalize<T: Real>(a: &Matrix<T>) -> Result<ModalDecomposition<T>> {
    let n = a.rows();
    if !a.is_square() || n == 0 {
        return Err(Error::Dimension(format!(
            "A must be square and non-empty, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if n > MAX_DIMENSION {
        return Err(Error::Dimension(format!(
            "A is {n}x{n}; at most {MAX_DIMENSION} compartments are supported"
        )));
    }
    if let Some(bad) = (0..n)
        .flat_map(|i| a.row(i).iter())
        .find(|x| !x.is_finite())
    {
        return Err(Error::NonFiniteSample {
            at: f64::NAN,
            value: bad.as_f64(),
        });
    }
    let scale = a.norm_max();
    let mut spectrum = eigenvalues(a)?;
    if let Some(&(re, im)) = spectrum
        .iter()
        .find(|(_, im)| im.abs() > T::lit(COMPLEX_TOL) * scale)
    {
        return Err(Error::ComplexSpectrum {
            re: re.as_f64(),
            im: im.as_f64(),
        });
    }
    spectrum.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<T> = spectrum.into_iter().map(|(re, _)| re).collect();
    if let Some(&v) = values.iter().find(|v| **v >= T::zero()) {
        return Err(Error::NonNegativeEigenvalue { value: v.as_f64() });
    }

    let mut p = Matrix::zeros(n, n);
    let mut cluster: Vec<Vec<T>> = Vec::new();
    for (k, &lambda) in values.iter().enumerate() {
        if k > 0 && (values[k - 1] - lambda).abs() > T::lit(CLUSTER_TOL) * scale.max(T::one()) {
            cluster.clear();
        }
        let v = eigen::inverse_iteration(a, lambda, k, &cluster)?;
        p.set_column(k, &v);
        cluster.push(v);
    }
    let p_inv = p.inverse()?;
    let condition = p.norm_1() * p_inv.norm_1();
    if !(condition <= T::lit(CONDITION_LIMIT)) {
        return Err(Error::DefectiveMatrix {
            condition: condition.as_f64(),
        });
    }
    let modal = ModalDecomposition {
        eigenvalues: values,
        p,
        p_inv,
        condition,
    };
    // orthogonalized vectors inside a Jordan-like cluster are not eigenvectors
    let residual = modal.reconstruction_residual(a);
    if !(residual <= T::lit(1e-8) * scale.max(T::one())) {
        return Err(Error::DefectiveMatrix {
            condition: f64::INFINITY,
        });
    }
    Ok(modal)
}

/// `C' = ρ(t) A C + B(t)`.
#[derive(Clone)]
pub struct CompartmentSystem<T> {
    pub a: Matrix<T>,
    pub rho: PeriodicSignal<T>,
    pub b: Vec<DriftedSignal<T>>,
    pub labels: Vec<String>,
    pub c0: Vec<T>,
}

impl<T: Real> std::fmt::Debug for CompartmentSystem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompartmentSystem")
            .field("a", &self.a)
            .field("labels", &self.labels)
            .field("c0", &self.c0)
            .finish()
    }
}

impl<T: Real> CompartmentSystem<T> {
    pub fn new(
        a: Matrix<T>,
        rho: PeriodicSignal<T>,
        b: Vec<DriftedSignal<T>>,
        labels: Vec<String>,
        c0: Vec<T>,
    ) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if b.len() != n || c0.len() != n || labels.len() != n {
            return Err(Error::Dimension(format!(
                "A is {n}x{n} but there are {} inputs, {} initial values and {} labels",
                b.len(),
                c0.len(),
                labels.len()
            )));
        }
        let period = rho.period();
        let tol = T::lit(1e-12) * period.abs().max(T::one());
        if let Some((k, s)) = b
            .iter()
            .enumerate()
            .find(|(_, s)| (s.period() - period).abs() > tol)
        {
            return Err(Error::InvalidConfig(format!(
                "input {} has period {} but rho has period {period}",
                labels[k],
                s.period()
            )));
        }
        Ok(CompartmentSystem {
            a,
            rho,
            b,
            labels,
            c0,
        })
    }

    /// Labels `DPM, RPM, BIO, HUM` for four compartments, `C1..Cn` otherwise.
    pub fn default_labels(n: usize) -> Vec<String> {
        if n == DEFAULT_LABELS.len() {
            DEFAULT_LABELS.iter().map(|s| s.to_string()).collect()
        } else {
            (1..=n).map(|k| format!("C{k}")).collect()
        }
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn period(&self) -> T {
        self.rho.period()
    }

    /// Inputs `B(t)`.
    pub fn input(&self, t: T) -> Vec<T> {
        self.b.iter().map(|s| s.eval(t)).collect()
    }
}

/// Per-mode scalar solutions and their physical-space recombination.
#[derive(Clone)]
pub struct SystemAnalysis<T> {
    pub modal: ModalDecomposition<T>,
    pub problems: Vec<ProblemInstance<T>>,
    pub modes: Vec<AsymptoticSolution<T>>,
    period: T,
}

impl<T: Real> std::fmt::Debug for SystemAnalysis<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemAnalysis")
            .field("eigenvalues", &self.modal.eigenvalues)
            .field("modes", &self.modes)
            .finish()
    }
}

impl<T: Real> SystemAnalysis<T> {
    fn map<F: Fn(&AsymptoticSolution<T>) -> T>(&self, f: F) -> Vec<T> {
        let w: Vec<T> = self.modes.iter().map(f).collect();
        self.modal.to_physical(&w)
    }

    /// `C∞(t) = P y∞_modal(t)`.
    pub fn c_inf(&self, t: T) -> Vec<T> {
        self.map(|m| m.y_inf(t))
    }

    /// `Γ(t) = P γ_modal(t)`.
    pub fn gamma(&self, t: T) -> Vec<T> {
        self.map(|m| m.gamma(t))
    }

    /// `C∞(0)`.
    pub fn limit(&self) -> Vec<T> {
        self.map(|m| m.limit())
    }

    /// Modal transients recombined: `P (e^{a_k(t)} r_kⁿ (w_k(0) − L_k))`.
    pub fn transient(&self, n: usize, t: T) -> Vec<T> {
        let w: Vec<T> = self
            .modes
            .iter()
            .zip(&self.problems)
            .map(|(m, p)| m.transient(p.y0, n, t))
            .collect();
        self.modal.to_physical(&w)
    }

    /// `C(t + nT) ≈ C∞(t) + nΓ(t) + transient`.
    pub fn approximate_at(&self, n: usize, t: T) -> Vec<T> {
        let w: Vec<T> = self
            .modes
            .iter()
            .zip(&self.problems)
            .map(|(m, p)| m.approximate_at(n, t) + m.transient(p.y0, n, t))
            .collect();
        self.modal.to_physical(&w)
    }

    /// Slowest per-period contraction `max_k e^{a_k(T)}`.
    pub fn slowest_ratio(&self) -> T {
        self.modes.iter().map(|m| m.ratio()).fold(T::zero(), T::max)
    }

    /// Modes whose projected drift is not negligible next to the largest one.
    pub fn drifting_modes(&self) -> Vec<usize> {
        let samples = 64;
        let sizes: Vec<T> = self
            .problems
            .iter()
            .map(|p| {
                (0..samples)
                    .map(|k| {
                        p.b.drift()
                            .eval(self.period * T::from_count(k) / T::from_count(samples))
                            .abs()
                    })
                    .fold(T::zero(), T::max)
            })
            .collect();
        let top = sizes.iter().copied().fold(T::zero(), T::max);
        sizes
            .iter()
            .enumerate()
            .filter(|(_, s)| top > T::zero() && **s > T::lit(1e-12) * top)
            .map(|(k, _)| k)
            .collect()
    }

    /// `max |C∞(t+T) − C∞(t) − Γ(t)|` over components and `grid`.
    pub fn drift_residual(&self, grid: &[T]) -> T {
        let mut worst = T::zero();
        for &t in grid {
            let now = self.c_inf(t);
            let next = self.c_inf(t + self.period);
            let g = self.gamma(t);
            for k in 0..now.len() {
                worst = worst.max((next[k] - now[k] - g[k]).abs());
            }
        }
        worst
    }

    /// `max |Γ(t+T) − Γ(t)|` over components and `grid`.
    pub fn gamma_periodicity_residual(&self, grid: &[T]) -> T {
        let mut worst = T::zero();
        for &t in grid {
            let now = self.gamma(t);
            let next = self.gamma(t + self.period);
            for k in 0..now.len() {
                worst = worst.max((next[k] - now[k]).abs());
            }
        }
        worst
    }
}

/// Modal forcing `(P⁻¹B)_k` with drift `(P⁻¹β)_k`.
fn modal_forcing<T: Real>(
    sys: &CompartmentSystem<T>,
    modal: &ModalDecomposition<T>,
    k: usize,
) -> Result<DriftedSignal<T>> {
    let row: Vec<T> = modal.p_inv.row(k).to_vec();
    let period = sys.period();
    let inputs = sys.b.clone();
    let drift_inputs = sys.b.clone();
    let all_periodic = sys.b.iter().all(|s| s.drift().is_identically_zero());
    let row_b = row.clone();
    let f = real_fn(move |t: T| {
        row_b
            .iter()
            .zip(&inputs)
            .fold(T::zero(), |s, (c, b)| s + *c * b.eval(t))
    });
    let drift = if all_periodic {
        PeriodicSignal::zero(period)
    } else {
        let g = real_fn(move |t: T| {
            row.iter()
                .zip(&drift_inputs)
                .fold(T::zero(), |s, (c, b)| s + *c * b.drift().eval(t))
        });
        PeriodicSignal::new_unchecked(g, period)
    };
    DriftedSignal::new(f, drift)
}

/// Diagonalizes `A`, runs the scalar engine on every mode and maps back.
pub fn analyze_system<T: Real>(
    sys: &CompartmentSystem<T>,
    opts: &AsymptoticOptions,
    quad_cfg: &QuadratureConfig<T>,
) -> Result<SystemAnalysis<T>> {
    let modal = diagonalize(&sys.a)?;
    let w0 = modal.to_modal(&sys.c0);
    let results: Vec<Result<(ProblemInstance<T>, AsymptoticSolution<T>)>> = (0..modal.dim())
        .into_par_iter()
        .map(|k| {
            let tag = |e: Error| Error::Mode {
                index: k,
                source: Box::new(e),
            };
            let b = modal_forcing(sys, &modal, k).map_err(tag)?;
            let p =
                ProblemInstance::new(modal.eigenvalues[k], sys.rho.clone(), b, w0[k], *quad_cfg)
                    .map_err(tag)?;
            let s = AsymptoticSolution::new(&p, opts).map_err(tag)?;
            Ok((p, s))
        })
        .collect();
    let mut problems = Vec::with_capacity(results.len());
    let mut modes = Vec::with_capacity(results.len());
    for r in results {
        let (p, s) = r?;
        problems.push(p);
        modes.push(s);
    }
    Ok(SystemAnalysis {
        modal,
        problems,
        modes,
        period: sys.period(),
    })
}

/// RK4 on the full coupled system, without diagonalization.
pub fn simulate<T: Real>(
    sys: &CompartmentSystem<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<SystemTrajectory<T>> {
    rk4_solve_system(
        |t, y: &[T], dy: &mut [T]| {
            let r = sys.rho.eval(t);
            for (i, d) in dy.iter_mut().enumerate() {
                let ay = sys
                    .a
                    .row(i)
                    .iter()
                    .zip(y)
                    .fold(T::zero(), |s, (a, x)| s + *a * *x);
                *d = r * ay + sys.b[i].eval(t);
            }
        },
        &sys.c0,
        cfg,
    )
}

/// Synthetic RothC-like four-pool system in years, clearly not a calibrated parameter set:
/// decomposition rates 10, 0.3, 0.66, 0.02 per year, 22.4% of each pool's
/// loss retained and split 46/54 into BIO and HUM, seasonal rate modifier
/// `1 + 0.5 cos 2πt`, plant input `2(1 + 0.8 sin 2πt)` split 59/41 into DPM
/// and RPM, with input growing by 1% of the mean per year.
pub fn demo_system() -> Result<CompartmentSystem<f64>> {
    use std::f64::consts::PI;
    let rates = [10.0, 0.3, 0.66, 0.02];
    let retained = 0.224;
    let mut a = Matrix::zeros(4, 4);
    for (j, k) in rates.iter().enumerate() {
        a[(j, j)] = -k;
        a[(2, j)] += retained * 0.46 * k;
        a[(3, j)] += retained * 0.54 * k;
    }
    let rho = PeriodicSignal::from_fn(|t: f64| 1.0 + 0.5 * (2.0 * PI * t).cos(), 1.0)?;
    let growth = 0.02;
    let input = |share: f64| -> Result<DriftedSignal<f64>> {
        let drift = PeriodicSignal::from_fn(
            move |t: f64| share * growth * (1.0 + 0.8 * (2.0 * PI * t).sin()),
            1.0,
        )?;
        DriftedSignal::from_fn(
            move |t: f64| share * (2.0 + growth * t) * (1.0 + 0.8 * (2.0 * PI * t).sin()),
            drift,
        )
    };
    let none = || DriftedSignal::periodic(PeriodicSignal::zero(1.0));
    CompartmentSystem::new(
        a,
        rho,
        vec![input(0.59)?, input(0.41)?, none(), none()],
        CompartmentSystem::<f64>::default_labels(4),
        vec![0.2, 5.0, 1.0, 40.0],
    )
}
