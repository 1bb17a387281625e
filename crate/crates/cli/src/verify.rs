//! Cell-by-cell comparison of regenerated tables with golden CSVs.

use std::fmt;
use std::path::Path;

use crate::format::{render, Cell, Kind, Table};
use crate::tables::{build, TABLE_IDS};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Exact,
    Absolute(f64),
    Relative(f64),
}

impl Tolerance {
    pub fn accepts(self, expected: f64, actual: f64) -> bool {
        let slack = 1e-9;
        match self {
            Tolerance::Exact => expected == actual,
            Tolerance::Absolute(tol) => (actual - expected).abs() <= tol + slack * tol,
            Tolerance::Relative(tol) => (actual - expected).abs() <= (tol + slack * tol) * expected.abs(),
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Exact => write!(f, "exact"),
            Tolerance::Absolute(t) => write!(f, "+/-{t}"),
            Tolerance::Relative(t) => write!(f, "+/-{}%", t * 100.0),
        }
    }
}

/// Acceptance tolerance for a column of table `id`.
pub fn tolerance(id: u32, kind: Kind) -> Tolerance {
    match (id, kind) {
        (_, Kind::Key | Kind::Label) => Tolerance::Exact,
        (1, Kind::Currency) => Tolerance::Relative(0.002),
        (1, Kind::Percent) => Tolerance::Absolute(0.1),
        (3 | 5, _) => Tolerance::Absolute(0.05),
        (4, _) => Tolerance::Absolute(0.02),
        (6, _) => Tolerance::Absolute(5e-6),
        _ => Tolerance::Exact,
    }
}

pub fn golden_file(dir: &Path, id: u32) -> std::path::PathBuf {
    dir.join(format!("table{id}.csv"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub table: u32,
    pub location: String,
    pub expected: String,
    pub actual: String,
    pub tolerance: Option<Tolerance>,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "table {} {}: expected {} got {}",
            self.table, self.location, self.expected, self.actual
        )?;
        if let Some(t) = self.tolerance {
            write!(f, " (tolerance {t})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub compared: Vec<(u32, usize)>,
    pub failures: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (id, cells) in &self.compared {
            let failed = self.failures.iter().filter(|m| m.table == *id).count();
            let status = if failed == 0 { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} table {id}: {cells} cells, {failed} failed\n"));
        }
        for m in &self.failures {
            out.push_str(&format!("  {m}\n"));
        }
        out
    }
}

/// Reads a golden CSV, skipping `#` comment lines.
pub fn read_golden(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, csv::Error>>()?;
    Ok((header, rows))
}

/// Compares `actual` with golden cells; returns the number of cells compared.
pub fn compare(id: u32, actual: &Table, header: &[String], rows: &[Vec<String>], failures: &mut Vec<Mismatch>) -> usize {
    let names: Vec<&str> = actual.columns.iter().map(|c| c.name.as_str()).collect();
    if header != names.as_slice() {
        failures.push(Mismatch {
            table: id,
            location: "header".into(),
            expected: header.join(","),
            actual: names.join(","),
            tolerance: None,
        });
        return 0;
    }
    if rows.len() != actual.rows.len() {
        failures.push(Mismatch {
            table: id,
            location: "row count".into(),
            expected: rows.len().to_string(),
            actual: actual.rows.len().to_string(),
            tolerance: None,
        });
    }
    let mut cells = 0;
    for (r, (golden, computed)) in rows.iter().zip(&actual.rows).enumerate() {
        for ((expected, cell), column) in golden.iter().zip(computed).zip(&actual.columns) {
            cells += 1;
            let tol = tolerance(id, column.kind);
            let shown = render(cell, column.kind);
            let ok = match (cell, expected.trim().parse::<f64>()) {
                (Cell::Number(x), Ok(e)) if tol != Tolerance::Exact => tol.accepts(e, *x),
                (Cell::Number(x), Ok(e)) => *x == e,
                _ => shown == expected.trim(),
            };
            if !ok {
                failures.push(Mismatch {
                    table: id,
                    location: format!("row {} column {}", r + 1, column.name),
                    expected: expected.clone(),
                    actual: shown,
                    tolerance: Some(tol),
                });
            }
        }
    }
    cells
}

pub fn verify(dir: &Path, step: f64) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    for id in TABLE_IDS {
        let path = golden_file(dir, id);
        let golden = match read_golden(&path) {
            Ok(g) => g,
            Err(e) => {
                report.compared.push((id, 0));
                report.failures.push(Mismatch {
                    table: id,
                    location: "golden file".into(),
                    expected: "a readable CSV".into(),
                    actual: e.to_string(),
                    tolerance: None,
                });
                continue;
            }
        };
        let actual = build(id, step)?;
        let cells = compare(id, &actual, &golden.0, &golden.1, &mut report.failures);
        report.compared.push((id, cells));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_kinds() {
        assert!(Tolerance::Relative(0.002).accepts(3744.44, 3744.44 * 1.0019));
        assert!(!Tolerance::Relative(0.002).accepts(3744.44, 3744.44 * 1.0021));
        assert!(Tolerance::Absolute(0.05).accepts(-6.57, -6.62));
        assert!(!Tolerance::Absolute(0.05).accepts(-6.57, -6.63));
        assert_eq!(tolerance(6, Kind::Coefficient), Tolerance::Absolute(5e-6));
        assert_eq!(tolerance(4, Kind::Key), Tolerance::Exact);
    }
}
