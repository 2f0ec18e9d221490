//! Plain-text gnuplot scripts that read the CSVs sitting next to them.

use std::fmt::Write as _;

pub struct Series<'a> {
    pub file: &'a str,
    /// 1-based columns.
    pub x: usize,
    pub y: usize,
    pub title: &'a str,
}

pub struct Plot<'a> {
    pub output: &'a str,
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub logy: bool,
    pub series: Vec<Series<'a>>,
}

impl Plot<'_> {
    pub fn script(&self) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set terminal pngcairo size 900,600\n");
        writeln!(s, "set output '{}'", self.output).unwrap();
        writeln!(s, "set title '{}'", self.title).unwrap();
        writeln!(s, "set xlabel '{}'", self.xlabel).unwrap();
        writeln!(s, "set ylabel '{}'", self.ylabel).unwrap();
        s.push_str("set key top left\nset grid\n");
        if self.logy {
            s.push_str("set logscale y\n");
        }
        let parts: Vec<String> = self
            .series
            .iter()
            .map(|c| {
                format!(
                    "'{}' skip 1 using {}:{} with lines title '{}'",
                    c.file, c.x, c.y, c.title
                )
            })
            .collect();
        writeln!(s, "plot {}", parts.join(", \\\n     ")).unwrap();
        s
    }
}

/// Several plots in one script with a page per plot.
pub fn scripts(plots: &[Plot<'_>]) -> String {
    plots
        .iter()
        .map(|p| p.script())
        .collect::<Vec<_>>()
        .join("\n")
}
