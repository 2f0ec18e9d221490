//! Window recursion, product sums and RK4 for a perturbed-periodic family.

use drift_ode_core::perturbed::{CauchyRow, ConditionReport, SeriesDiagnostics};
use drift_ode_core::{Error as CoreError, PerturbedModel64};
use rayon::prelude::*;

use crate::config::Scenario;
use crate::csv::{format_number, Cell, OutDir, Table};
use crate::error::{CliError, Result};
use crate::plot::{scripts, Plot, Series};

pub const CONVERGENCE_HEADER: [&str; 6] =
    ["n", "recursion", "product_sum", "rk4", "gap", "path_gap"];
pub const CONDITIONS_HEADER: [&str; 7] = [
    "condition",
    "positive",
    "monotone",
    "ratio_min",
    "ratio_max",
    "verdict",
    "detail",
];
pub const SERIES_HEADER: [&str; 5] = [
    "i",
    "alpha_hat",
    "beta_hat",
    "alpha_partial",
    "beta_partial",
];
pub const CAUCHY_HEADER: [&str; 9] = [
    "n",
    "m",
    "z_n",
    "z_m",
    "gap",
    "j1_bound",
    "j2_beta_bound",
    "j2_delta_bound",
    "bound",
];
pub const LIMIT_HEADER: [&str; 4] = ["t", "y_inf", "y_inf_shifted", "periodicity_residual"];

/// RK4 steps per window for the oracle column.
pub const RK4_STEPS_PER_WINDOW: usize = 4096;

pub struct ConvergeTables {
    pub convergence: Table,
    pub conditions: Table,
    pub series: Table,
    pub cauchy: Table,
    pub diagnostics: SeriesDiagnostics<f64>,
}

pub fn model(scenario: &Scenario) -> Result<PerturbedModel64> {
    let base = scenario.problem_instance()?;
    let family = scenario.perturbation_family()?;
    let windows = family.index_max;
    Ok(PerturbedModel64::new(family, base, windows)?)
}

fn condition_row(name: &str, c: &ConditionReport<f64>) -> Vec<Cell> {
    vec![
        name.into(),
        c.positive.into(),
        c.monotone.into(),
        c.ratio_min.into(),
        c.ratio_max.into(),
        c.verdict.as_str().into(),
        c.detail.clone().into(),
    ]
}

/// `yₙ(0)` for `n = 1..=n_max` by recursion, product sum and RK4.
pub fn convergence(model: &PerturbedModel64, n_max: usize) -> Result<Table> {
    let recursion = model.iterate_initial_values(n_max - 1);
    let product: Vec<f64> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            if n == 1 {
                model.first_period_value()
            } else {
                model.product_sum_initial_value(n - 1)
            }
        })
        .collect();
    let rk4 = model.rk4_windows(n_max - 1, RK4_STEPS_PER_WINDOW)?;
    let limit = model.periodic_limit_value();
    let mut t = Table::new(&CONVERGENCE_HEADER);
    for n in 1..=n_max {
        let y = recursion[n - 1];
        t.push(vec![
            n.into(),
            y.into(),
            product[n - 1].into(),
            rk4[n - 1].last_value().into(),
            (y - limit).abs().into(),
            (y - product[n - 1]).abs().into(),
        ]);
    }
    Ok(t)
}

fn cauchy_pairs(n_max: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [1, 2, 5, 10, 20, 30, 40, 50, 60]
        .into_iter()
        .filter(|&n| n < n_max)
        .collect();
    v.push(n_max);
    v
}

fn cauchy_table(rows: &[CauchyRow<f64>]) -> Table {
    let mut t = Table::new(&CAUCHY_HEADER);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.m.into(),
            r.z_n.into(),
            r.z_m.into(),
            r.gap.into(),
            r.j1_bound.into(),
            r.j2_beta_bound.into(),
            r.j2_delta_bound.into(),
            r.bound.into(),
        ]);
    }
    t
}

pub fn tables(model: &PerturbedModel64) -> Result<ConvergeTables> {
    let n_max = model.family().index_max;
    let d = model.check_conditions()?;
    let mut conditions = Table::new(&CONDITIONS_HEADER);
    conditions.push(condition_row("alpha", &d.alpha));
    conditions.push(condition_row("beta", &d.beta));
    let c = &d.consistency;
    conditions.push(vec![
        "consistency".into(),
        Cell::Text(String::new()),
        Cell::Text(String::new()),
        c.rho_deviation.into(),
        c.b_deviation.into(),
        if c.consistent { "pass" } else { "fail" }.into(),
        "max deviation of rho and b from their windowed assembly".into(),
    ]);
    conditions.push(vec![
        "overall".into(),
        Cell::Text(String::new()),
        Cell::Text(String::new()),
        Cell::Text(String::new()),
        Cell::Text(String::new()),
        d.verdict.as_str().into(),
        format!(
            "rho1 = {}, K(T) = {}",
            format_number(d.ratio),
            format_number(d.k_envelope)
        )
        .into(),
    ]);

    let mut series = Table::new(&SERIES_HEADER);
    for i in 0..n_max {
        series.push(vec![
            (i + 1).into(),
            d.alpha_hats[i].into(),
            d.beta_hats[i].into(),
            d.alpha_series_partial[i].into(),
            d.beta_series_partial[i].into(),
        ]);
    }
    let cauchy = cauchy_table(&model.cauchy_diagnostics(&cauchy_pairs(n_max))?);
    Ok(ConvergeTables {
        convergence: convergence(model, n_max)?,
        conditions,
        series,
        cauchy,
        diagnostics: d,
    })
}

pub fn plot_script() -> String {
    scripts(&[
        Plot {
            output: "convergence.png",
            title: "distance of y_n(0) to the limit",
            xlabel: "n",
            ylabel: "gap",
            logy: true,
            series: vec![Series {
                file: "convergence.csv",
                x: 1,
                y: 5,
                title: "|y_n(0) - L|",
            }],
        },
        Plot {
            output: "limit.png",
            title: "periodic limit",
            xlabel: "t",
            ylabel: "y",
            logy: false,
            series: vec![Series {
                file: "limit.csv",
                x: 1,
                y: 2,
                title: "y_inf(t)",
            }],
        },
    ])
}

pub fn run(scenario: &Scenario, force: bool, out: &mut OutDir) -> Result<String> {
    let model = model(scenario)?;
    let mut t = tables(&model)?;
    let verdict = t.diagnostics.verdict;
    let limit = match model.limit_periodic_solution(force) {
        Ok(l) => Some(l),
        Err(CoreError::ConditionsNotVerified(_)) => None,
        Err(e) => return Err(e.into()),
    };
    if limit.is_some() && !verdict.admits_limit() {
        t.conditions.push(vec![
            "warning".into(),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            verdict.as_str().into(),
            "conditions not verified; limit written because of --force".into(),
        ]);
    }
    out.write_table("convergence.csv", &t.convergence)?;
    out.write_table("conditions.csv", &t.conditions)?;
    out.write_table("series.csv", &t.series)?;
    out.write_table("cauchy.csv", &t.cauchy)?;
    let summary = format!(
        "verdict: {verdict} (alpha {}, beta {})",
        t.diagnostics.alpha.verdict, t.diagnostics.beta.verdict
    );
    let Some(limit) = limit else {
        return Err(CliError::Verdict(format!(
            "{summary}\nalpha: {}\nbeta: {}",
            t.diagnostics.alpha.detail, t.diagnostics.beta.detail
        )));
    };
    let grid = scenario.output.grid();
    let period = scenario.problem.period;
    let mut table = Table::new(&LIMIT_HEADER);
    for &x in &grid {
        let (now, next) = (limit.y_inf(x), limit.y_inf(x + period));
        table.push(vec![x.into(), now.into(), next.into(), (next - now).into()]);
    }
    out.write_table("limit.csv", &table)?;
    out.write_text("plot.gp", &plot_script())?;
    Ok(summary)
}
