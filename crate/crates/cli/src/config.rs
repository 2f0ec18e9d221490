//! Scenario configs: `[problem]`, optional `[family]` and `[system]`, `[output]`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use drift_ode_core::compartments::{CompartmentSystem, Matrix};
use drift_ode_core::numerics::QuadratureConfig;
use drift_ode_core::perturbed::{PerturbationFamily, DEFAULT_INDEX_MAX};
use drift_ode_core::signal::{DriftedSignal, PeriodicSignal};
use drift_ode_core::{real_fn, CompartmentSystem64, Error as CoreError, ProblemInstance64};
use drift_ode_expr::{parse, Expr, Var};

use crate::error::{CliError, Result};
use crate::ini::{Entry, Ini, Section};

/// An expression with the line it came from.
#[derive(Debug, Clone)]
pub struct Located {
    pub expr: Arc<Expr>,
    pub source: String,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub lambda: f64,
    pub period: f64,
    pub rho: Located,
    pub b: Located,
    pub beta: Option<Located>,
    pub y0: f64,
    /// Line of the `[problem]` header, for errors about the section as a whole.
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub alpha: Located,
    pub beta: Located,
    pub index_max: usize,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub rows: Vec<Vec<f64>>,
    pub inputs: Vec<Located>,
    pub drifts: Vec<Option<Located>>,
    pub labels: Vec<String>,
    pub c0: Vec<f64>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// Subdirectory of `--out`, if any.
    pub dir: Option<PathBuf>,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub n_windows: usize,
}

impl OutputSpec {
    pub fn grid(&self) -> Vec<f64> {
        drift_ode_core::asymptotic::linspace(self.t_min, self.t_max, self.points)
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub path: PathBuf,
    pub problem: ProblemSpec,
    pub family: Option<FamilySpec>,
    pub system: Option<SystemSpec>,
    pub output: OutputSpec,
}

struct Reader<'a> {
    path: &'a Path,
}

impl Reader<'_> {
    fn err(&self, line: usize, msg: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.path.to_path_buf(),
            line: Some(line),
            msg: msg.into(),
        }
    }

    fn check_keys(&self, s: &Section, allowed: &[&str], numbered: &[&str]) -> Result<()> {
        for e in &s.entries {
            let ok = allowed.contains(&e.key.as_str())
                || numbered.iter().any(|p| {
                    e.key
                        .strip_prefix(p)
                        .is_some_and(|n| !n.is_empty() && n.bytes().all(|c| c.is_ascii_digit()))
                });
            if !ok {
                return Err(self.err(e.line, format!("unknown key `{}` in [{}]", e.key, s.name)));
            }
        }
        Ok(())
    }

    fn required<'s>(&self, s: &'s Section, key: &str) -> Result<&'s Entry> {
        s.get(key)
            .ok_or_else(|| self.err(s.line, format!("[{}] is missing `{key}`", s.name)))
    }

    fn expr(&self, e: &Entry, allowed: &[Var]) -> Result<Located> {
        let expr = parse(&e.value).map_err(|p| self.err(e.line, format!("`{}`: {p}", e.key)))?;
        for v in [Var::T, Var::I] {
            if expr.uses(v) && !allowed.contains(&v) {
                return Err(self.err(
                    e.line,
                    format!("`{}` may not depend on `{}`", e.key, v.name()),
                ));
            }
        }
        Ok(Located {
            expr: Arc::new(expr),
            source: e.value.clone(),
            line: e.line,
        })
    }

    fn number_text(&self, key: &str, text: &str, line: usize) -> Result<f64> {
        let expr = parse(text).map_err(|p| self.err(line, format!("`{key}`: {p}")))?;
        let v = expr
            .eval_const()
            .map_err(|m| self.err(line, format!("`{key}` must be a constant: {m}")))?;
        Ok(v)
    }

    fn number(&self, e: &Entry) -> Result<f64> {
        self.number_text(&e.key, &e.value, e.line)
    }

    fn count(&self, e: &Entry) -> Result<usize> {
        let v = self.number(e)?;
        if v < 0.0 || v.fract() != 0.0 || v > 1e9 {
            return Err(self.err(
                e.line,
                format!("`{}` must be a non-negative integer, got {v}", e.key),
            ));
        }
        Ok(v as usize)
    }

    fn list(&self, e: &Entry) -> Result<Vec<f64>> {
        e.value
            .split(',')
            .map(|part| self.number_text(&e.key, part.trim(), e.line))
            .collect()
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        Scenario::from_ini(&Ini::read(path)?)
    }

    pub fn parse_str(path: &Path, text: &str) -> Result<Scenario> {
        Scenario::from_ini(&Ini::parse(path, text)?)
    }

    pub fn from_ini(ini: &Ini) -> Result<Scenario> {
        let r = Reader { path: &ini.path };
        for s in &ini.sections {
            if !["problem", "family", "system", "output"].contains(&s.name.as_str()) {
                return Err(r.err(s.line, format!("unknown section [{}]", s.name)));
            }
        }
        let p = ini.section("problem").ok_or_else(|| CliError::Config {
            path: ini.path.clone(),
            line: None,
            msg: "missing [problem] section".into(),
        })?;
        let is_system = ini.section("system").is_some();
        r.check_keys(p, &["lambda", "period", "rho", "b", "beta", "y0"], &[])?;
        let period_entry = r.required(p, "period")?;
        let period = r.number(period_entry)?;
        if !(period > 0.0) || !period.is_finite() {
            return Err(r.err(
                period_entry.line,
                format!("`period` must be positive, got {period}"),
            ));
        }
        // a compartment system takes its rates from the matrix
        let lambda = match (p.get("lambda"), is_system) {
            (Some(e), _) => {
                let v = r.number(e)?;
                if !(v < 0.0) {
                    return Err(r.err(e.line, format!("`lambda` must be negative, got {v}")));
                }
                v
            }
            (None, true) => -1.0,
            (None, false) => return Err(r.err(p.line, "[problem] is missing `lambda`")),
        };
        let zero_b = Entry {
            key: "b".into(),
            value: "0".into(),
            line: p.line,
        };
        let b_entry = match (p.get("b"), is_system) {
            (Some(e), _) => e,
            (None, true) => &zero_b,
            (None, false) => r.required(p, "b")?,
        };
        let problem = ProblemSpec {
            lambda,
            period,
            rho: r.expr(r.required(p, "rho")?, &[Var::T])?,
            b: r.expr(b_entry, &[Var::T])?,
            beta: p.get("beta").map(|e| r.expr(e, &[Var::T])).transpose()?,
            y0: p.get("y0").map(|e| r.number(e)).transpose()?.unwrap_or(0.0),
            line: p.line,
        };

        let family = match ini.section("family") {
            None => None,
            Some(f) => {
                r.check_keys(f, &["alpha", "beta", "index_max"], &[])?;
                let index_max = f
                    .get("index_max")
                    .map(|e| r.count(e))
                    .transpose()?
                    .unwrap_or(DEFAULT_INDEX_MAX);
                if index_max < 8 {
                    let line = f.get("index_max").map_or(f.line, |e| e.line);
                    return Err(r.err(
                        line,
                        format!("`index_max` must be at least 8, got {index_max}"),
                    ));
                }
                Some(FamilySpec {
                    alpha: r.expr(r.required(f, "alpha")?, &[Var::T, Var::I])?,
                    beta: r.expr(r.required(f, "beta")?, &[Var::T, Var::I])?,
                    index_max,
                    line: f.line,
                })
            }
        };

        let system = match ini.section("system") {
            None => None,
            Some(s) => Some(Self::read_system(&r, s)?),
        };

        let default_output = Section {
            name: "output".into(),
            line: 0,
            entries: Vec::new(),
        };
        let o = ini.section("output").unwrap_or(&default_output);
        r.check_keys(o, &["dir", "t_min", "t_max", "points", "n_windows"], &[])?;
        let t_min = o
            .get("t_min")
            .map(|e| r.number(e))
            .transpose()?
            .unwrap_or(0.0);
        let t_max = o
            .get("t_max")
            .map(|e| r.number(e))
            .transpose()?
            .unwrap_or(4.0 * period);
        let points = o
            .get("points")
            .map(|e| r.count(e))
            .transpose()?
            .unwrap_or(257);
        if points < 2 {
            let line = o.get("points").map_or(o.line, |e| e.line);
            return Err(r.err(line, format!("`points` must be at least 2, got {points}")));
        }
        if !(t_max > t_min) || t_min < 0.0 {
            let line = o.get("t_max").or(o.get("t_min")).map_or(o.line, |e| e.line);
            return Err(r.err(
                line,
                format!("need 0 <= t_min < t_max, got [{t_min}, {t_max}]"),
            ));
        }
        let output = OutputSpec {
            dir: o.get("dir").map(|e| PathBuf::from(&e.value)),
            t_min,
            t_max,
            points,
            n_windows: o
                .get("n_windows")
                .map(|e| r.count(e))
                .transpose()?
                .unwrap_or(5),
        };
        let scenario = Scenario {
            path: ini.path.clone(),
            problem,
            family,
            system,
            output,
        };
        scenario.probe_expressions()?;
        Ok(scenario)
    }

    fn read_system(r: &Reader<'_>, s: &Section) -> Result<SystemSpec> {
        r.check_keys(s, &["labels", "c0"], &["row", "input", "input_drift"])?;
        let mut rows = Vec::new();
        let mut k = 1;
        while let Some(e) = s.get(&format!("row{k}")) {
            rows.push((r.list(e)?, e.line));
            k += 1;
        }
        let n = rows.len();
        if n == 0 {
            return Err(r.err(s.line, "[system] needs matrix rows `row1`, `row2`, ..."));
        }
        for (row, line) in &rows {
            if row.len() != n {
                return Err(r.err(
                    *line,
                    format!(
                        "matrix row has {} entries but there are {n} rows",
                        row.len()
                    ),
                ));
            }
        }
        for e in &s.entries {
            let index = ["input_drift", "input", "row"]
                .iter()
                .find_map(|p| e.key.strip_prefix(p).and_then(|d| d.parse::<usize>().ok()));
            if let Some(i) = index {
                if i == 0 || i > n {
                    return Err(r.err(
                        e.line,
                        format!("`{}` does not name one of the {n} compartments", e.key),
                    ));
                }
            }
        }
        let mut inputs = Vec::with_capacity(n);
        let mut drifts = Vec::with_capacity(n);
        for k in 1..=n {
            let fallback = Entry {
                key: format!("input{k}"),
                value: "0".into(),
                line: s.line,
            };
            inputs.push(r.expr(s.get(&format!("input{k}")).unwrap_or(&fallback), &[Var::T])?);
            drifts.push(
                s.get(&format!("input_drift{k}"))
                    .map(|e| r.expr(e, &[Var::T]))
                    .transpose()?,
            );
        }
        let labels = match s.get("labels") {
            Some(e) => {
                let l: Vec<String> = e.value.split(',').map(|x| x.trim().to_string()).collect();
                if l.len() != n || l.iter().any(|x| x.is_empty() || x.contains(',')) {
                    return Err(r.err(e.line, format!("need {n} non-empty labels")));
                }
                l
            }
            None => CompartmentSystem::<f64>::default_labels(n),
        };
        let c0 = match s.get("c0") {
            Some(e) => {
                let v = r.list(e)?;
                if v.len() != n {
                    return Err(r.err(
                        e.line,
                        format!("`c0` has {} values for {n} compartments", v.len()),
                    ));
                }
                v
            }
            None => vec![0.0; n],
        };
        Ok(SystemSpec {
            rows: rows.into_iter().map(|(r, _)| r).collect(),
            inputs,
            drifts,
            labels,
            c0,
            line: s.line,
        })
    }

    /// Evaluates every expression on a grid so domain errors surface with a line number.
    fn probe_expressions(&self) -> Result<()> {
        let r = Reader { path: &self.path };
        let span = self.output.t_max + (self.output.n_windows as f64 + 2.0) * self.problem.period;
        let samples = 257;
        let probe_t = |e: &Located, lo: f64, hi: f64, key: &str| -> Result<()> {
            for k in 0..samples {
                let t = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
                e.expr
                    .eval_t(t)
                    .map_err(|m| r.err(e.line, format!("`{key}` at t = {t}: {m}")))?;
            }
            Ok(())
        };
        let p = &self.problem;
        probe_t(&p.rho, 0.0, span, "rho")?;
        probe_t(&p.b, 0.0, span, "b")?;
        if let Some(beta) = &p.beta {
            probe_t(beta, 0.0, span, "beta")?;
        }
        if let Some(f) = &self.family {
            let windows = f.index_max.max(self.output.n_windows) + 1;
            for i in 1..=windows {
                for (e, key) in [(&f.alpha, "alpha"), (&f.beta, "beta")] {
                    for k in 0..65 {
                        let t = p.period * k as f64 / 64.0;
                        e.expr.eval_it(i as f64, t).map_err(|m| {
                            r.err(e.line, format!("`{key}` at i = {i}, t = {t}: {m}"))
                        })?;
                    }
                }
            }
        }
        if let Some(s) = &self.system {
            for (k, e) in s.inputs.iter().enumerate() {
                probe_t(e, 0.0, span, &format!("input{}", k + 1))?;
            }
            for (k, e) in s.drifts.iter().enumerate() {
                if let Some(e) = e {
                    probe_t(e, 0.0, span, &format!("input_drift{}", k + 1))?;
                }
            }
        }
        Ok(())
    }

    fn config_err(&self, line: usize, e: CoreError) -> CliError {
        match e {
            CoreError::PeriodicityViolation { .. }
            | CoreError::InvalidConfig(_)
            | CoreError::Dimension(_) => CliError::Config {
                path: self.path.clone(),
                line: Some(line),
                msg: e.to_string(),
            },
            other => CliError::Core(other),
        }
    }

    pub fn rho_signal(&self) -> Result<PeriodicSignal<f64>> {
        let rho = &self.problem.rho;
        PeriodicSignal::new(expr_fn(&rho.expr), self.problem.period)
            .map_err(|e| self.config_err(rho.line, e))
    }

    fn drifted(&self, b: &Located, beta: Option<&Located>) -> Result<DriftedSignal<f64>> {
        let period = self.problem.period;
        let drift = match beta {
            Some(beta) => PeriodicSignal::new(expr_fn(&beta.expr), period)
                .map_err(|e| self.config_err(beta.line, e))?,
            None => PeriodicSignal::zero(period),
        };
        DriftedSignal::new(expr_fn(&b.expr), drift).map_err(|e| self.config_err(b.line, e))
    }

    pub fn problem_instance(&self) -> Result<ProblemInstance64> {
        let p = &self.problem;
        let b = self.drifted(&p.b, p.beta.as_ref())?;
        ProblemInstance64::new(
            p.lambda,
            self.rho_signal()?,
            b,
            p.y0,
            QuadratureConfig::default(),
        )
        .map_err(|e| self.config_err(p.line, e))
    }

    pub fn family_spec(&self) -> Result<&FamilySpec> {
        self.family.as_ref().ok_or_else(|| CliError::Config {
            path: self.path.clone(),
            line: None,
            msg: "this command needs a [family] section".into(),
        })
    }

    pub fn perturbation_family(&self) -> Result<PerturbationFamily<f64>> {
        let f = self.family_spec()?;
        let (alpha, beta) = (f.alpha.expr.clone(), f.beta.expr.clone());
        Ok(PerturbationFamily::new(
            move |i, t| alpha.eval_it(i as f64, t).unwrap_or(f64::NAN),
            move |i, t| beta.eval_it(i as f64, t).unwrap_or(f64::NAN),
            f.index_max,
        ))
    }

    pub fn compartment_system(&self) -> Result<CompartmentSystem64> {
        let s = self.system.as_ref().ok_or_else(|| CliError::Config {
            path: self.path.clone(),
            line: None,
            msg: "this command needs a [system] section".into(),
        })?;
        let a = Matrix::from_rows(&s.rows).map_err(|e| self.config_err(s.line, e))?;
        let b = s
            .inputs
            .iter()
            .zip(&s.drifts)
            .map(|(b, d)| self.drifted(b, d.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        CompartmentSystem::new(a, self.rho_signal()?, b, s.labels.clone(), s.c0.clone())
            .map_err(|e| self.config_err(s.line, e))
    }
}

/// `t ↦ e(t)`, with evaluation errors turned into NaN for the engines to reject.
pub fn expr_fn(e: &Arc<Expr>) -> drift_ode_core::RealFn<f64> {
    let e = e.clone();
    real_fn(move |t: f64| e.eval_t(t).unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<Scenario> {
        Scenario::parse_str(Path::new("s.ini"), text)
    }

    const BASE: &str = "[problem]\nlambda = -1\nperiod = \"pi\"\nrho = \"sin(t)^2\"\nb = \"t\"\nbeta = \"pi\"\ny0 = 1\n";

    fn line_of(r: Result<Scenario>) -> Option<usize> {
        match r {
            Err(CliError::Config { line, .. }) => line,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn section_four_scenario() {
        let s = load(BASE).unwrap();
        assert_eq!(s.problem.period, std::f64::consts::PI);
        assert_eq!(s.output.t_max, 4.0 * std::f64::consts::PI);
        assert!(s.problem_instance().is_ok());
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(
            line_of(load(&BASE.replace("sin(t)^2", "sin(t)^^2"))),
            Some(4)
        );
        assert_eq!(line_of(load(&BASE.replace("\"t\"", "\"x\""))), Some(5));
        assert_eq!(line_of(load(&format!("{BASE}colour = 3\n"))), Some(8));
        assert_eq!(
            line_of(load(&BASE.replace("\"pi\"\nrho", "\"t\"\nrho"))),
            Some(3)
        );
        assert_eq!(line_of(load(&BASE.replace("sin(t)^2", "log(t)"))), Some(4));
        assert_eq!(
            line_of(load(&format!("{BASE}[output]\npoints = 1\n"))),
            Some(9)
        );
        // b = t with the wrong drift fails the drifted-periodicity check
        let bad = load(&BASE.replace("beta = \"pi\"", "beta = \"1\"")).unwrap();
        match bad.problem_instance() {
            Err(e @ CliError::Config { .. }) => assert_eq!(e.exit_code(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_contracting_is_a_math_error() {
        assert_eq!(
            line_of(load(&BASE.replace("lambda = -1", "lambda = 1"))),
            Some(2)
        );
        let s = load(&BASE.replace("sin(t)^2", "-1")).unwrap();
        let p = s.problem_instance().unwrap();
        let e = CliError::from(drift_ode_core::asymptotic::asymptotic_solution(&p).unwrap_err());
        assert_eq!(e.exit_code(), 3);
        assert!(e.explain().contains("negative"));
    }

    #[test]
    fn system_section() {
        let text = "[problem]\nperiod = 1\nrho = \"1\"\n[system]\nrow1 = -1, 0.5\nrow2 = 0, -2\ninput1 = \"1 + t\"\ninput_drift1 = \"1\"\nc0 = 1, 2\n";
        let s = load(text).unwrap();
        let sys = s.compartment_system().unwrap();
        assert_eq!(sys.labels, vec!["C1", "C2"]);
        assert_eq!(sys.c0, vec![1.0, 2.0]);
        assert_eq!(
            line_of(load(&text.replace("row2 = 0, -2", "row2 = 0"))),
            Some(6)
        );
        assert_eq!(line_of(load(&format!("{text}input3 = \"1\"\n"))), Some(10));
    }

    #[test]
    fn family_section() {
        let s = load(&format!(
            "{BASE}[family]\nalpha = \"10^(-i)*(1+sin(t)^2)\"\nbeta = \"10^(-i)\"\n"
        ))
        .unwrap();
        assert_eq!(s.family.as_ref().unwrap().index_max, DEFAULT_INDEX_MAX);
        assert_eq!(
            line_of(load(&format!(
                "{BASE}[family]\nalpha = \"i\"\nbeta = \"i\"\nindex_max = 4\n"
            ))),
            Some(11)
        );
        assert_eq!(
            line_of(load(&format!(
                "{BASE}[family]\nalpha = \"1/(i-3)\"\nbeta = \"1\"\n"
            ))),
            Some(9)
        );
    }
}
