//! CSV and JSON files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tvinesynth::numerics::Matrix;
use tvinesynth::Dataset;

use crate::error::UsageError;

/// Reads a dataset: header row required, `response` names the 0/1 column,
/// every other column is a numeric covariate.
pub fn read_dataset(path: &Path, response: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let Some(ri) = headers.iter().position(|h| h == response) else {
        return Err(UsageError(format!("{} has no response column `{response}`", path.display())).into());
    };
    let names: Vec<String> = headers.iter().enumerate().filter(|&(i, _)| i != ri).map(|(_, h)| h.clone()).collect();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(names.len());
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .with_context(|| format!("{} row {}: `{field}` is not a number", path.display(), line + 1))?;
            if i == ri {
                if v != 0.0 && v != 1.0 {
                    bail!(tvinesynth::Error::Data(format!("row {}: response must be 0 or 1, got {v}", line + 1)));
                }
                y.push(v as u8);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    Ok(Dataset::from_rows(names, &rows, response, y)?)
}

/// Writes covariates then the response, values in shortest round-trip form.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header: Vec<&str> = data.names().iter().map(String::as_str).collect();
    header.push(data.response_name());
    w.write_record(&header)?;
    for i in 0..data.n_rows() {
        let mut rec: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(data.response()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Numeric matrix of every column (response included) of a CSV file.
pub fn read_matrix(path: &Path, response: &str) -> Result<Matrix> {
    Ok(read_dataset(path, response)?.full_matrix())
}
