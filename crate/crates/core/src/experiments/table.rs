use std::fmt::Display;
use std::path::Path;

use crate::error::{Error, Result};

/// A named CSV table. Cells are stored as text; floats use Rust's shortest
/// round-trip formatting so a table read back parses to identical values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub struct Cell(pub String);

impl<T: Display> From<T> for Cell {
    fn from(v: T) -> Self {
        Cell(v.to_string())
    }
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row.into_iter().map(|c| c.0).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn index(&self, column: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == column)
            .ok_or_else(|| Error::Format(format!("table {} has no column {column}", self.name)))
    }

    pub fn text(&self, column: &str) -> Result<Vec<&str>> {
        let i = self.index(column)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn floats(&self, column: &str) -> Result<Vec<f64>> {
        let i = self.index(column)?;
        self.rows
            .iter()
            .map(|r| {
                r[i].parse::<f64>()
                    .map_err(|_| Error::Format(format!("{}.{column}: `{}` is not a number", self.name, r[i])))
            })
            .collect()
    }

    pub fn bools(&self, column: &str) -> Result<Vec<bool>> {
        let i = self.index(column)?;
        self.rows
            .iter()
            .map(|r| {
                r[i].parse::<bool>()
                    .map_err(|_| Error::Format(format!("{}.{column}: `{}` is not a bool", self.name, r[i])))
            })
            .collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join(format!("{}.csv", self.name)), self.to_csv()?)?;
        Ok(())
    }

    pub fn read(dir: &Path, name: &str) -> Result<Table> {
        let path = dir.join(format!("{name}.csv"));
        let mut r = csv::Reader::from_path(&path).map_err(csv_err)?;
        let columns = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()).map_err(csv_err))
            .collect::<Result<_>>()?;
        Ok(Table { name: name.into(), columns, rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_floats() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        let x = 0.1 + 0.2;
        t.push(vec![x.into(), f64::INFINITY.into(), "lbl".into()]);
        t.push(vec![1e-300.into(), f64::NAN.into(), true.into()]);
        let dir = tempfile::tempdir().unwrap();
        t.write(dir.path()).unwrap();
        let back = Table::read(dir.path(), "t").unwrap();
        assert_eq!(back, t);
        assert_eq!(back.floats("a").unwrap()[0], x);
        assert!(back.floats("b").unwrap()[1].is_nan());
    }
}
