//! Tables as typed cells and their CSV rendering.

use crate::{Result, VERSION};

/// What a column holds; fixes its printed precision and, in `verify`, its
/// tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Row key (parameter value), printed in shortest form.
    Key,
    Label,
    Currency,
    Percent,
    Ratio,
    Coefficient,
}

impl Kind {
    pub fn decimals(self) -> Option<usize> {
        match self {
            Kind::Currency | Kind::Percent | Kind::Ratio => Some(2),
            Kind::Coefficient => Some(5),
            Kind::Key | Kind::Label => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Number(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: Kind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: Kind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn number(&self, row: usize, column: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(column)?)? {
            Cell::Number(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    pub fn render_row(&self, row: &[Cell]) -> Vec<String> {
        row.iter().zip(&self.columns).map(|(cell, col)| render(cell, col.kind)).collect()
    }

    pub fn to_csv(&self, provenance: &Provenance) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(self.render_row(row))?;
        }
        let body = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(format!("{}\n{}", provenance.line(), String::from_utf8_lossy(&body)))
    }
}

pub fn render(cell: &Cell, kind: Kind) -> String {
    match (cell, kind.decimals()) {
        (Cell::Text(s), _) => s.clone(),
        (Cell::Number(x), Some(d)) => fixed(*x, d),
        (Cell::Number(x), None) => format!("{x}"),
    }
}

/// Fixed-point formatting without negative zero.
pub fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => s,
    }
}

/// Header comment line recording how a CSV was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub step: f64,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn line(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("# lapsecost {VERSION} step_h={} seed={seed}", self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_suppressed() {
        assert_eq!(fixed(-0.001, 2), "0.00");
        assert_eq!(fixed(-0.006, 2), "-0.01");
        assert_eq!(fixed(-0.010091, 5), "-0.01009");
        assert_eq!(fixed(3744.466, 2), "3744.47");
    }

    #[test]
    fn csv_has_provenance_then_header() {
        let t = Table {
            columns: vec![Column::new("phi", Kind::Key), Column::new("cost", Kind::Percent)],
            rows: vec![vec![Cell::Number(5.0), Cell::Number(-6.5712)]],
        };
        let csv = t
            .to_csv(&Provenance {
                step: 0.5,
                seed: Some(3),
            })
            .unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], format!("# lapsecost {VERSION} step_h=0.5 seed=3"));
        assert_eq!(lines[1..], ["phi,cost", "5,-6.57"]);
    }
}
