//! CSV tables and `.meta` sidecars under the `--out` directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Round-trip safe rendering: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub enum Cell {
    F(f64),
    I(u64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::I(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::F(x) => num(*x),
                    Cell::I(i) => i.to_string(),
                    Cell::S(t) => t.clone(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Everything one subcommand writes.
pub struct Run {
    out: PathBuf,
    name: &'static str,
    tables: Vec<(String, Table)>,
    meta: Vec<(String, String)>,
}

impl Run {
    pub fn new(out: &Path, name: &'static str, config: Vec<(String, String)>) -> Self {
        let mut meta = vec![
            ("subcommand".to_string(), name.to_string()),
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ];
        meta.extend(config.into_iter().map(|(k, v)| (format!("config.{k}"), v)));
        Run {
            out: out.to_path_buf(),
            name,
            tables: Vec::new(),
            meta,
        }
    }

    /// Adds `<name>.csv`, or `<name>_<suffix>.csv` for a non-empty suffix.
    pub fn table(&mut self, suffix: &str, table: Table) {
        let file = if suffix.is_empty() {
            format!("{}.csv", self.name)
        } else {
            format!("{}_{suffix}.csv", self.name)
        };
        self.tables.push((file, table));
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn write(self) -> Result<Vec<PathBuf>, CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Runtime(format!("{}: {e}", p.display()));
        fs::create_dir_all(&self.out).map_err(|e| io(&self.out, e))?;
        let mut written = Vec::new();
        for (file, table) in &self.tables {
            let path = self.out.join(file);
            fs::write(&path, table.render()).map_err(|e| io(&path, e))?;
            written.push(path);
        }
        let mut meta = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(meta, "{k}={v}");
        }
        let path = self.out.join(format!("{}.meta", self.name));
        fs::write(&path, meta).map_err(|e| io(&path, e))?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![1.5.into(), 3usize.into(), "x".into()]);
        assert_eq!(t.render(), "a,b,c\n1.5000000000000000e0,3,x\n");
    }
}
