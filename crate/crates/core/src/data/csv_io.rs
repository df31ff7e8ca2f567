use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

/// Reads a comma-separated numeric table. A first line that does not parse as
/// numbers is taken as a header and skipped. Rows and columns in errors are
/// 1-based line and field numbers.
pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut dim = None;
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row: line,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<std::result::Result<f64, _>> =
            record.iter().map(str::parse::<f64>).collect();
        if i == 0 && parsed.iter().any(|r| r.is_err()) {
            continue;
        }
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row: line,
                col: record.len().min(expected) + 1,
                msg: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        for (j, v) in parsed.into_iter().enumerate() {
            match v {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        row: line,
                        col: j + 1,
                        msg: format!("`{}` is not a finite number", &record[j]),
                    })
                }
            }
        }
    }
    match dim {
        Some(d) => Dataset::new(d, values),
        None => Err(Error::Parse {
            row: 0,
            col: 0,
            msg: "no data rows".into(),
        }),
    }
}

pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Dataset> {
    read_csv(File::open(path)?)
}

/// Writes a header `x0,...` and one row per point using shortest round-trip
/// decimals, so reading the file back reproduces every value exactly.
pub fn write_csv<W: Write>(x: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> = (0..x.dim()).map(|i| format!("x{i}")).collect();
    w.write_record(&header).map_err(csv_to_io)?;
    for p in x.points() {
        w.write_record(p.iter().map(|v| v.to_string()))
            .map_err(csv_to_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv<P: AsRef<Path>>(x: &Dataset, path: P) -> Result<()> {
    write_csv(x, File::create(path)?)
}

pub(crate) fn csv_to_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
