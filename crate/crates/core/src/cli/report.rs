//! Numeric CSV tables as written by every task, and the matching reader.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which is
//! enough for the reader to recover every value bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("row {row}, column {column}: `{text}` is not a number")]
    NotANumber { row: usize, column: String, text: String },
    #[error("row {row} has {got} fields, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> CsvTable {
        CsvTable {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), ReportError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|x| format_float(*x)))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<CsvTable, ReportError> {
        let mut input = csv::ReaderBuilder::new().flexible(true).from_reader(r);
        let columns: Vec<String> = input.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in input.records().enumerate() {
            let rec = rec?;
            if rec.len() != columns.len() {
                return Err(ReportError::Ragged {
                    row: i + 1,
                    got: rec.len(),
                    expected: columns.len(),
                });
            }
            let row = rec
                .iter()
                .zip(&columns)
                .map(|(text, col)| {
                    text.trim().parse::<f64>().map_err(|_| ReportError::NotANumber {
                        row: i + 1,
                        column: col.clone(),
                        text: text.to_string(),
                    })
                })
                .collect::<Result<_, _>>()?;
            rows.push(row);
        }
        Ok(CsvTable { columns, rows })
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<CsvTable, ReportError> {
        CsvTable::read(File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec![0.1 + 0.2, -1e-300]);
        t.push(vec![f64::MAX, 5e-324]);
        t.push(vec![1.0 / 3.0, -0.0]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = CsvTable::read(buf.as_slice()).unwrap();
        assert_eq!(back.columns, t.columns);
        for (x, y) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(matches!(
            CsvTable::read("a,b\n1,x\n".as_bytes()),
            Err(ReportError::NotANumber { row: 1, .. })
        ));
        assert!(matches!(CsvTable::read("a,b\n1\n".as_bytes()), Err(ReportError::Ragged { .. })));
    }
}
