//! Compartment systems: modal analysis against a full RK4 solve.

use drift_ode_core::asymptotic::AsymptoticOptions;
use drift_ode_core::compartments::{analyze_system, simulate, SystemAnalysis};
use drift_ode_core::numerics::{IntegratorConfig, QuadratureConfig, SystemTrajectory};
use drift_ode_core::CompartmentSystem64;

use super::RK4_MAX_STEP;
use crate::config::Scenario;
use crate::csv::{Cell, OutDir, Table};
use crate::error::Result;
use crate::plot::{scripts, Plot, Series};

pub const MODAL_HEADER: [&str; 7] = [
    "mode",
    "eigenvalue",
    "rho1",
    "L_T",
    "a0",
    "drifting",
    "condition",
];

pub fn trajectories_header(labels: &[String]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(labels.iter().map(|l| format!("{l}_modal")));
    h.extend(labels.iter().map(|l| format!("{l}_rk4")));
    h
}

pub fn drift_header(labels: &[String]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(labels.iter().map(|l| format!("{l}_drift")));
    h.extend(labels.iter().map(|l| format!("{l}_gamma")));
    h.push("max_residual".into());
    h
}

pub struct SoilRun {
    pub system: CompartmentSystem64,
    pub analysis: SystemAnalysis<f64>,
    pub rk4: SystemTrajectory<f64>,
}

impl SoilRun {
    pub fn new(system: CompartmentSystem64, t_end: f64) -> Result<SoilRun> {
        let analysis = analyze_system(
            &system,
            &AsymptoticOptions::default(),
            &QuadratureConfig::default(),
        )?;
        let rk4 = simulate(&system, &IntegratorConfig::dividing(t_end, RK4_MAX_STEP)?)?;
        Ok(SoilRun {
            system,
            analysis,
            rk4,
        })
    }

    pub fn modal_report(&self) -> Table {
        let drifting = self.analysis.drifting_modes();
        let m = &self.analysis.modal;
        let mut t = Table::new(&MODAL_HEADER);
        for (k, s) in self.analysis.modes.iter().enumerate() {
            t.push(vec![
                (k + 1).into(),
                m.eigenvalues[k].into(),
                s.ratio().into(),
                s.limit().into(),
                s.a0().into(),
                drifting.contains(&k).into(),
                m.condition.into(),
            ]);
        }
        t
    }

    pub fn trajectories(&self, grid: &[f64]) -> Table {
        let mut t = Table::new(&trajectories_header(&self.system.labels));
        for &x in grid {
            let mut row: Vec<Cell> = vec![x.into()];
            row.extend(
                self.analysis
                    .approximate_at(0, x)
                    .into_iter()
                    .map(Cell::from),
            );
            row.extend(self.rk4.state_at(x).into_iter().map(Cell::from));
            t.push(row);
        }
        t
    }

    pub fn drift(&self, grid: &[f64]) -> Table {
        let period = self.system.period();
        let mut t = Table::new(&drift_header(&self.system.labels));
        for &x in grid {
            let now = self.analysis.c_inf(x);
            let next = self.analysis.c_inf(x + period);
            let gamma = self.analysis.gamma(x);
            let drift: Vec<f64> = next.iter().zip(&now).map(|(a, b)| a - b).collect();
            let worst = drift
                .iter()
                .zip(&gamma)
                .map(|(d, g)| (d - g).abs())
                .fold(0.0, f64::max);
            let mut row: Vec<Cell> = vec![x.into()];
            row.extend(drift.into_iter().map(Cell::from));
            row.extend(gamma.into_iter().map(Cell::from));
            row.push(worst.into());
            t.push(row);
        }
        t
    }
}

fn plot_script(labels: &[String]) -> String {
    let n = labels.len();
    let modal: Vec<Series<'_>> = labels
        .iter()
        .enumerate()
        .map(|(k, l)| Series {
            file: "trajectories.csv",
            x: 1,
            y: k + 2,
            title: l,
        })
        .collect();
    let drift: Vec<Series<'_>> = labels
        .iter()
        .enumerate()
        .map(|(k, l)| Series {
            file: "drift.csv",
            x: 1,
            y: n + k + 2,
            title: l,
        })
        .collect();
    scripts(&[
        Plot {
            output: "trajectories.png",
            title: "compartment carbon",
            xlabel: "t",
            ylabel: "C",
            logy: false,
            series: modal,
        },
        Plot {
            output: "drift.png",
            title: "per-period drift Gamma(t)",
            xlabel: "t",
            ylabel: "Gamma",
            logy: false,
            series: drift,
        },
    ])
}

pub fn run(scenario: &Scenario, out: &mut OutDir) -> Result<()> {
    let system = scenario.compartment_system()?;
    let grid = scenario.output.grid();
    let run = SoilRun::new(system, scenario.output.t_max)?;
    out.write_table("modal_report.csv", &run.modal_report())?;
    out.write_table("trajectories.csv", &run.trajectories(&grid))?;
    out.write_table("drift.csv", &run.drift(&grid))?;
    out.write_text("plot.gp", &plot_script(&run.system.labels))?;
    Ok(())
}
