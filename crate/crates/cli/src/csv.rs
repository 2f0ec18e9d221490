//! CSV tables: one header row, `.` decimals, 17 significant digits, LF endings.

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

/// `{:.16e}`: exactly 17 significant digits, independent of magnitude.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        // normalise -0 so identical math gives identical bytes
        let v = if v == 0.0 { 0.0 } else { v };
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Table {
        Table {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut w = ::csv::WriterBuilder::new()
            .terminator(::csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // writing into memory cannot fail
        w.write_record(&self.header).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row.iter().map(|cell| match cell {
                Cell::Num(v) => format_number(*v),
                Cell::Int(v) => v.to_string(),
                Cell::Text(s) => s.clone(),
            }))
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 cells")
    }
}

/// Destination directory; files are written in the order they are recorded.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<OutDir> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.root.join(name);
        std::fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<()> {
        self.write_text(name, &table.render())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(
            format_number(-std::f64::consts::FRAC_PI_2),
            "-1.5707963267948966e0"
        );
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(-0.0), "0.0000000000000000e0");
        assert_eq!(format_number(1e300).len(), "1.0000000000000001e300".len());
        for v in [0.1, 1.0 / 3.0, 6.752380934935049, -4.091576569887239e-17] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn rendering() {
        let mut t = Table::new(&["n", "x", "note"]);
        t.push(vec![1usize.into(), 0.5.into(), "a, b".into()]);
        t.push(vec![2usize.into(), f64::NAN.into(), "say \"hi\"".into()]);
        assert_eq!(
            t.render(),
            "n,x,note\n1,5.0000000000000000e-1,\"a, b\"\n2,nan,\"say \"\"hi\"\"\"\n"
        );
    }
}
