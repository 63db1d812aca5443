//! CSV input and output.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use l0swap::DesignMatrix;

use crate::CliError;

pub const LABEL: &str = "y";

/// Numeric table read from a CSV file with a header row.
#[derive(Debug, Clone)]
pub struct Table {
    pub features: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let file = File::open(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        Self::from_reader(file, path)
    }

    fn from_reader(reader: impl io::Read, path: &Path) -> Result<Self, CliError> {
        let input = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> =
            csv.headers().map_err(|e| input(e.to_string()))?.iter().map(str::to_string).collect();
        let label_at = header.iter().position(|h| h == LABEL);
        let features: Vec<String> = header.iter().filter(|h| *h != LABEL).cloned().collect();
        let mut rows = Vec::new();
        let mut labels = label_at.map(|_| Vec::new());
        for (r, record) in csv.records().enumerate() {
            let record = record.map_err(|e| input(e.to_string()))?;
            let mut row = Vec::with_capacity(features.len());
            for (c, cell) in record.iter().enumerate() {
                let v: f64 = cell
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| input(format!("row {}, column `{}`: `{cell}` is not a finite number", r + 1, header[c])))?;
                match (label_at, labels.as_mut()) {
                    (Some(at), Some(ys)) if at == c => ys.push(v),
                    _ => row.push(v),
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(input("no data rows".into()));
        }
        Ok(Self { features, rows, labels })
    }

    pub fn labels(&self) -> Result<&[f64], CliError> {
        self.labels.as_deref().ok_or_else(|| CliError::Input(format!("missing label column `{LABEL}`")))
    }

    pub fn design(&self) -> Result<DesignMatrix, CliError> {
        Ok(DesignMatrix::from_rows(&self.rows, self.labels()?.to_vec(), self.features.clone())?)
    }
}

/// Buffered CSV writer to a file, or to stdout when no path is given.
pub fn writer(out: Option<&PathBuf>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(io::BufWriter::new(File::create(path).map_err(|e| CliError::Io { path: path.clone(), source: e })?)),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

/// Flushes a writer from [`writer`].
pub fn finish(mut out: csv::Writer<Box<dyn Write>>) -> Result<(), CliError> {
    out.flush().map_err(|e| match e.kind() {
        io::ErrorKind::BrokenPipe => CliError::BrokenPipe,
        _ => CliError::Input(e.to_string()),
    })
}
