//! Comma-separated tables with a header line.

use std::io::Write;
use std::path::Path;

use crate::failure::{write_err, Failure};

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes to `path`, or to standard output when `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), Failure> {
        match path {
            Some(p) => {
                let file = std::fs::File::create(p).map_err(write_err(p))?;
                self.write(std::io::BufWriter::new(file)).map_err(|e| Failure::other(format!("{}: {e}", p.display())))
            }
            None => self.write(std::io::stdout().lock()).map_err(|e| Failure::other(format!("stdout: {e}"))),
        }
    }

    pub fn save(&self, dir: &Path, name: &str) -> Result<(), Failure> {
        self.emit(Some(&dir.join(name)))
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
