//! The section-4 scenario and the data behind its four figures.

use std::path::Path;

use super::analyze::Analysis;
use crate::config::Scenario;
use crate::csv::{OutDir, Table};
use crate::error::Result;
use crate::plot::{Plot, Series};

pub const REFERENCE_INI: &str = include_str!("../../../../configs/reference.ini");

pub const FIG1_HEADER: [&str; 2] = ["t", "gamma"];
pub const FIG2_HEADER: [&str; 5] = ["t", "y_inf", "y_inf_shifted", "difference", "gamma"];
pub const FIG3_HEADER: [&str; 6] = ["t", "y_1", "z_1", "gap", "delta_1", "y_1_rk4"];
pub const FIG4_HEADER: [&str; 6] = ["t", "y_5", "y_5_shifted", "difference", "gamma", "y_5_rk4"];

pub fn scenario() -> Result<Scenario> {
    Scenario::parse_str(Path::new("reference.ini"), REFERENCE_INI)
}

pub struct Figures {
    pub fig1: Table,
    pub fig2: Table,
    pub fig3: Table,
    pub fig4: Table,
}

pub fn figures(a: &Analysis, grid: &[f64]) -> Result<Figures> {
    let s = &a.solution;
    let y0 = a.problem.y0;
    let period = a.problem.period();
    let rk4 = a.reference(grid, 6)?;

    let mut fig1 = Table::new(&FIG1_HEADER);
    let mut fig2 = Table::new(&FIG2_HEADER);
    let mut fig3 = Table::new(&FIG3_HEADER);
    let mut fig4 = Table::new(&FIG4_HEADER);
    for &t in grid {
        let g = s.gamma(t);
        fig1.push(vec![t.into(), g.into()]);

        let (now, next) = (s.y_inf(t), s.y_inf(t + period));
        fig2.push(vec![
            t.into(),
            now.into(),
            next.into(),
            (next - now).into(),
            g.into(),
        ]);

        let (y1, z1) = (s.window_value(y0, 1, t), s.approximate_at(1, t));
        fig3.push(vec![
            t.into(),
            y1.into(),
            z1.into(),
            (y1 - z1).abs().into(),
            s.transient(y0, 1, t).into(),
            rk4.value_at(t + period).into(),
        ]);

        let (y5, y5_next) = (s.window_value(y0, 5, t), s.window_value(y0, 6, t));
        fig4.push(vec![
            t.into(),
            y5.into(),
            y5_next.into(),
            (y5_next - y5).into(),
            g.into(),
            rk4.value_at(t + 5.0 * period).into(),
        ]);
    }
    Ok(Figures {
        fig1,
        fig2,
        fig3,
        fig4,
    })
}

fn gp(output: &str, title: &str, ylabel: &str, series: Vec<Series<'_>>) -> String {
    Plot {
        output,
        title,
        xlabel: "t",
        ylabel,
        logy: false,
        series,
    }
    .script()
}

pub fn run(out: &mut OutDir) -> Result<()> {
    let scenario = scenario()?;
    let analysis = Analysis::new(&scenario)?;
    let grid = scenario.output.grid();
    let f = figures(&analysis, &grid)?;
    out.write_table("constants.csv", &analysis.constants())?;
    out.write_table("fig1.csv", &f.fig1)?;
    out.write_table("fig2.csv", &f.fig2)?;
    out.write_table("fig3.csv", &f.fig3)?;
    out.write_table("fig4.csv", &f.fig4)?;
    out.write_text(
        "fig1.gp",
        &gp(
            "fig1.png",
            "gamma(t)",
            "gamma",
            vec![Series {
                file: "fig1.csv",
                x: 1,
                y: 2,
                title: "gamma(t)",
            }],
        ),
    )?;
    out.write_text(
        "fig2.gp",
        &gp(
            "fig2.png",
            "y_inf(t) and y_inf(t+pi)",
            "y",
            vec![
                Series {
                    file: "fig2.csv",
                    x: 1,
                    y: 2,
                    title: "y_inf(t)",
                },
                Series {
                    file: "fig2.csv",
                    x: 1,
                    y: 3,
                    title: "y_inf(t+pi)",
                },
            ],
        ),
    )?;
    out.write_text(
        "fig3.gp",
        &gp(
            "fig3.png",
            "y_1(t) and z_1(t)",
            "y",
            vec![
                Series {
                    file: "fig3.csv",
                    x: 1,
                    y: 2,
                    title: "y_1(t)",
                },
                Series {
                    file: "fig3.csv",
                    x: 1,
                    y: 3,
                    title: "z_1(t)",
                },
            ],
        ),
    )?;
    out.write_text(
        "fig4.gp",
        &gp(
            "fig4.png",
            "y_5(t) and y_5(t+pi)",
            "y",
            vec![
                Series {
                    file: "fig4.csv",
                    x: 1,
                    y: 2,
                    title: "y_5(t)",
                },
                Series {
                    file: "fig4.csv",
                    x: 1,
                    y: 3,
                    title: "y_5(t+pi)",
                },
            ],
        ),
    )?;
    Ok(())
}
