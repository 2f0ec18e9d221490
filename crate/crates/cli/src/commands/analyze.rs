//! Drifted-periodic analysis of one scalar problem.

use std::path::Path;

use drift_ode_core::asymptotic::{asymptotic_solution, AsymptoticSolution};
use drift_ode_core::numerics::Trajectory;
use drift_ode_core::ProblemInstance64;
use rayon::prelude::*;

use super::rk4_reference;
use crate::config::Scenario;
use crate::csv::{OutDir, Table};
use crate::error::{CliError, Result};
use crate::plot::{scripts, Plot, Series};

pub const CONSTANTS_HEADER: [&str; 2] = ["name", "value"];
pub const GAMMA_HEADER: [&str; 2] = ["t", "gamma"];
pub const Y_INF_HEADER: [&str; 5] = ["t", "y_inf", "y_inf_shifted", "gamma", "drift_residual"];
pub const WINDOWS_HEADER: [&str; 6] = ["n", "t", "y_n", "z_n", "delta_n", "y_n_rk4"];

/// Everything the analyze tables are built from.
pub struct Analysis {
    pub problem: ProblemInstance64,
    pub solution: AsymptoticSolution<f64>,
}

impl Analysis {
    pub fn new(scenario: &Scenario) -> Result<Analysis> {
        let problem = scenario.problem_instance()?;
        let solution = asymptotic_solution(&problem)?;
        Ok(Analysis { problem, solution })
    }

    pub fn constants(&self) -> Table {
        let s = &self.solution;
        let mut t = Table::new(&CONSTANTS_HEADER);
        t.push(vec!["a_T".into(), s.constants().a_period.into()]);
        t.push(vec!["rho1".into(), s.ratio().into()]);
        t.push(vec!["L_T".into(), s.limit().into()]);
        t.push(vec!["a0".into(), s.a0().into()]);
        t
    }

    pub fn gamma(&self, grid: &[f64]) -> Table {
        let mut t = Table::new(&GAMMA_HEADER);
        for &x in grid {
            t.push(vec![x.into(), self.solution.gamma(x).into()]);
        }
        t
    }

    pub fn y_inf(&self, grid: &[f64]) -> Table {
        let s = &self.solution;
        let period = self.problem.period();
        let mut t = Table::new(&Y_INF_HEADER);
        for &x in grid {
            let (now, next, g) = (s.y_inf(x), s.y_inf(x + period), s.gamma(x));
            t.push(vec![
                x.into(),
                now.into(),
                next.into(),
                g.into(),
                (next - now - g).into(),
            ]);
        }
        t
    }

    /// RK4 reference covering window `n_max` over the whole grid.
    pub fn reference(&self, grid: &[f64], n_max: usize) -> Result<Trajectory<f64>> {
        let end = grid.last().copied().unwrap_or(0.0) + n_max as f64 * self.problem.period();
        rk4_reference(&self.problem, end)
    }

    pub fn windows(&self, grid: &[f64], n_windows: usize) -> Result<Table> {
        let rk4 = self.reference(grid, n_windows)?;
        let s = &self.solution;
        let p = &self.problem;
        let period = p.period();
        let blocks: Vec<Vec<_>> = (0..=n_windows)
            .into_par_iter()
            .map(|n| {
                grid.iter()
                    .map(|&x| {
                        vec![
                            n.into(),
                            x.into(),
                            s.window_value(p.y0, n, x).into(),
                            s.approximate_at(n, x).into(),
                            s.transient(p.y0, n, x).into(),
                            rk4.value_at(x + n as f64 * period).into(),
                        ]
                    })
                    .collect()
            })
            .collect();
        let mut t = Table::new(&WINDOWS_HEADER);
        for row in blocks.into_iter().flatten() {
            t.push(row);
        }
        Ok(t)
    }
}

pub fn plot_script() -> String {
    scripts(&[
        Plot {
            output: "gamma.png",
            title: "drift function",
            xlabel: "t",
            ylabel: "gamma(t)",
            logy: false,
            series: vec![Series {
                file: "gamma.csv",
                x: 1,
                y: 2,
                title: "gamma",
            }],
        },
        Plot {
            output: "y_inf.png",
            title: "asymptotic solution",
            xlabel: "t",
            ylabel: "y",
            logy: false,
            series: vec![
                Series {
                    file: "y_inf.csv",
                    x: 1,
                    y: 2,
                    title: "y_inf(t)",
                },
                Series {
                    file: "y_inf.csv",
                    x: 1,
                    y: 3,
                    title: "y_inf(t+T)",
                },
            ],
        },
        Plot {
            output: "windows.png",
            title: "windows against their approximations",
            xlabel: "t",
            ylabel: "y",
            logy: false,
            series: vec![
                Series {
                    file: "windows.csv",
                    x: 2,
                    y: 3,
                    title: "y_n(t)",
                },
                Series {
                    file: "windows.csv",
                    x: 2,
                    y: 4,
                    title: "z_n(t)",
                },
            ],
        },
    ])
}

pub fn run(scenario: &Scenario, out: &mut OutDir) -> Result<()> {
    if scenario.family.is_some() || scenario.system.is_some() {
        return Err(CliError::Config {
            path: scenario.path.clone(),
            line: scenario.family.as_ref().map(|f| f.line).or(scenario.system.as_ref().map(|s| s.line)),
            msg: "analyze takes a plain scalar scenario; use `converge` for [family] and `soil` for [system]".into(),
        });
    }
    let analysis = Analysis::new(scenario)?;
    let grid = scenario.output.grid();
    let windows = analysis.windows(&grid, scenario.output.n_windows)?;
    out.write_table("constants.csv", &analysis.constants())?;
    out.write_table("gamma.csv", &analysis.gamma(&grid))?;
    out.write_table("y_inf.csv", &analysis.y_inf(&grid))?;
    out.write_table("windows.csv", &windows)?;
    out.write_text("plot.gp", &plot_script())?;
    Ok(())
}

/// Where a scenario's files go under `--out`.
pub fn destination(out_root: &Path, scenario: &Scenario) -> std::path::PathBuf {
    match &scenario.output.dir {
        Some(d) => out_root.join(d),
        None => out_root.to_path_buf(),
    }
}
