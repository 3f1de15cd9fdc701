//! CSV output: fixed six-digit reals, `NA` for undefined values and a
//! provenance comment line ahead of the header.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const NA: &str = "NA";

pub fn real(v: f64) -> String {
    format!("{v:.6}")
}

pub fn opt_real(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), real)
}

/// A table ready to be written: header plus string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, provenance: &str) -> Result<String> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let body = w
            .into_inner()
            .map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
        let mut out = String::new();
        if !provenance.is_empty() {
            out.push_str("# ");
            out.push_str(provenance);
            out.push('\n');
        }
        out.push_str(&String::from_utf8_lossy(&body));
        Ok(out)
    }

    pub fn write(&self, path: &Path, provenance: &str) -> Result<()> {
        let text = self.to_csv(provenance)?;
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Parses CSV written by [`Table::write`], skipping comment lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Table { header, rows })
    }
}
