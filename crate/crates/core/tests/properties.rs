use std::f64::consts::PI;

use drift_ode_core::compartments::{diagonalize, simulate, CompartmentSystem, Matrix};
use drift_ode_core::numerics::{
    integrate, rk4_solve, IntegratorConfig, QuadratureConfig, QuadratureRule,
};
use drift_ode_core::signal::{
    decompose_drift, reconstruct, DriftedSignal, ExponentCache, PeriodicSignal,
};
use drift_ode_core::{numerics::rk4_solve_system, real_fn};
use proptest::prelude::*;

fn smooth(x: f64) -> f64 {
    (3.0 * x).sin() * (-x / 4.0).exp() + x * x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cubics_integrate_exactly(c in prop::array::uniform4(-3.0f64..3.0), lo in -2.0f64..0.0, hi in 0.0f64..2.0) {
        let f = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let prim = |x: f64| x * (c[0] + x * (c[1] / 2.0 + x * (c[2] / 3.0 + x * c[3] / 4.0)));
        let got = integrate(f, lo, hi, &QuadratureConfig::default()).unwrap();
        prop_assert!((got - (prim(hi) - prim(lo))).abs() < 1e-12);
    }

    #[test]
    fn quadrature_is_additive(x in 0.0f64..10.0, y in 0.0f64..10.0, z in 0.0f64..10.0) {
        let mut v = [x, y, z];
        v.sort_by(|p, q| p.partial_cmp(q).unwrap());
        // absolute tolerance only, so 2·abs_tol is the governing bound
        let cfg = QuadratureConfig::new(1e-10, 0.0, 1 << 20).unwrap();
        let whole = integrate(smooth, v[0], v[2], &cfg).unwrap();
        let parts = integrate(smooth, v[0], v[1], &cfg).unwrap() + integrate(smooth, v[1], v[2], &cfg).unwrap();
        prop_assert!((whole - parts).abs() <= 2.0 * cfg.abs_tol);
    }

    #[test]
    fn rules_agree(lo in -3.0f64..0.0, hi in 0.0f64..6.0) {
        let simpson = integrate(smooth, lo, hi, &QuadratureConfig::default()).unwrap();
        let gauss = integrate(smooth, lo, hi, &QuadratureConfig::default().with_rule(QuadratureRule::GaussLegendre)).unwrap();
        prop_assert!((simpson - gauss).abs() < 1e-9);
    }

    #[test]
    fn exponent_is_additive(t in 0.0f64..PI, n in 0usize..=50) {
        let rho = PeriodicSignal::from_fn(|t: f64| t.sin().powi(2), PI).unwrap();
        let cache = ExponentCache::new(-1.0, rho, QuadratureConfig::default()).unwrap();
        let lhs = cache.exponent(t + n as f64 * PI);
        let rhs = cache.exponent(t) + n as f64 * cache.period_exponent().unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
        // against the closed form −(s/2 − sin 2s / 4)
        let s = t + n as f64 * PI;
        prop_assert!((lhs + s / 2.0 - (2.0 * s).sin() / 4.0).abs() < 1e-9);
    }

    #[test]
    fn exponent_strictly_decreases(k in 0usize..4000) {
        let rho = PeriodicSignal::from_fn(|t: f64| 1.0 + 0.5 * (2.0 * PI * t).cos(), 1.0).unwrap();
        let cache = ExponentCache::new(-0.7, rho, QuadratureConfig::default()).unwrap();
        let t = k as f64 / 1000.0;
        prop_assert!(cache.exponent(t + 1e-3) < cache.exponent(t));
    }

    #[test]
    fn drift_round_trip(t in 0.0f64..20.0, c in 0.1f64..3.0) {
        let drift = PeriodicSignal::from_fn(move |s: f64| c * (1.0 + (2.0 * s).cos()), PI).unwrap();
        let b = DriftedSignal::from_fn(move |s: f64| (2.0 * s).sin() + s / PI * c * (1.0 + (2.0 * s).cos()), drift).unwrap();
        let (tilde, beta) = decompose_drift(&b).unwrap();
        let back = reconstruct(&tilde, &beta);
        prop_assert!((back.eval(t) - b.eval(t)).abs() <= 1e-12 * b.eval(t).abs().max(1.0));
        prop_assert!((tilde.eval(t) + t / PI * beta.eval(t) - b.eval(t)).abs() <= 1e-12 * b.eval(t).abs().max(1.0));
    }

    #[test]
    fn similarity_spectra_recovered(seed in prop::array::uniform16(-0.4f64..0.4), shift in 0.05f64..0.5) {
        let want = [-shift, -0.3 - shift, -1.7, -8.0];
        let mut s = Matrix::identity(4);
        for i in 0..4 {
            for j in 0..4 {
                s[(i, j)] += seed[4 * i + j];
            }
        }
        let a = s.mul(&Matrix::diagonal(&want)).unwrap().mul(&s.inverse().unwrap()).unwrap();
        let m = diagonalize(&a).unwrap();
        for (got, w) in m.eigenvalues.iter().zip(want) {
            prop_assert!((got - w).abs() < 1e-8);
        }
        prop_assert!(m.reconstruction_residual(&a) <= 1e-8);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let err = |h: f64| {
        let traj = rk4_solve(
            -1.0,
            |_| 1.0,
            |_| 0.0,
            1.0,
            &IntegratorConfig::new(h, 2.0).unwrap(),
        )
        .unwrap();
        (traj.last_value() - (-2.0f64).exp()).abs()
    };
    let (e1, e2) = (err(0.1), err(0.05));
    assert!((e1 / e2).log2() >= 3.7, "order {}", (e1 / e2).log2());
}

#[test]
fn modal_trajectories_match_scalar_runs() {
    let mut s = Matrix::identity(4);
    let entries = [
        0.3, -0.2, 0.1, 0.25, -0.15, 0.05, 0.2, -0.1, 0.12, 0.3, -0.05, 0.18,
    ];
    let mut k = 0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s[(i, j)] = entries[k];
                k += 1;
            }
        }
    }
    let a = s
        .mul(&Matrix::diagonal(&[-0.2, -0.5, -1.3, -2.9]))
        .unwrap()
        .mul(&s.inverse().unwrap())
        .unwrap();
    let rho = PeriodicSignal::from_fn(|t: f64| 1.0 + 0.5 * (2.0 * PI * t).cos(), 1.0).unwrap();
    let inputs: Vec<DriftedSignal<f64>> = (0..4)
        .map(|j| {
            let w = 0.5 + j as f64;
            let drift = PeriodicSignal::constant(0.1 * w, 1.0);
            DriftedSignal::new(
                real_fn(move |t: f64| w * (2.0 * PI * t).sin() + 0.1 * w * t),
                drift,
            )
            .unwrap()
        })
        .collect();
    let sys = CompartmentSystem::new(
        a,
        rho.clone(),
        inputs.clone(),
        CompartmentSystem::<f64>::default_labels(4),
        vec![1.0, 0.5, 2.0, 0.0],
    )
    .unwrap();
    let modal = diagonalize(&sys.a).unwrap();
    let cfg = IntegratorConfig::new(1.0 / 256.0, 10.0).unwrap();
    let full = simulate(&sys, &cfg).unwrap();
    let w0 = modal.to_modal(&sys.c0);
    for k in 0..4 {
        let row = modal.p_inv.row(k).to_vec();
        let b = |t: f64| {
            row.iter()
                .zip(&inputs)
                .map(|(c, s)| c * s.eval(t))
                .sum::<f64>()
        };
        let scalar = rk4_solve(modal.eigenvalues[k], |t| rho.eval(t), b, w0[k], &cfg).unwrap();
        for (state, v) in full.states.iter().zip(&scalar.values) {
            assert!((modal.to_modal(state)[k] - v).abs() < 1e-8);
        }
    }
    // the generic system solver reproduces simulate exactly
    let again = rk4_solve_system(
        |t, y: &[f64], dy: &mut [f64]| {
            for i in 0..4 {
                dy[i] = rho.eval(t) * sys.a.row(i).iter().zip(y).map(|(a, x)| a * x).sum::<f64>()
                    + inputs[i].eval(t);
            }
        },
        &sys.c0,
        &cfg,
    )
    .unwrap();
    assert_eq!(again.states, full.states);
}
