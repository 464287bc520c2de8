use std::path::Path;

use ndarray::Array2;

use super::{read_maybe_gzip, Dataset};
use crate::error::{Error, Result};

/// Loads a comma-separated numeric table.
///
/// A first row containing any non-numeric cell is treated as a header and skipped.
/// With `has_labels`, column `label_column` is split off as integer labels.
pub fn load_csv(path: impl AsRef<Path>, has_labels: bool, label_column: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let mut d = parse_csv(&read_maybe_gzip(path)?, has_labels, label_column)?;
    d.provenance.push(format!("csv {}", path.display()));
    Ok(d)
}

pub fn parse_csv(bytes: &[u8], has_labels: bool, label_column: usize) -> Result<Dataset> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(bytes);

    let mut width = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            what: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if first {
            first = false;
            if record.iter().any(|c| c.parse::<f64>().is_err()) {
                continue;
            }
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Csv {
                line,
                column: record.len().min(w) + 1,
                what: format!("ragged row: {} cells, expected {w}", record.len()),
            });
        }
        if has_labels && label_column >= w {
            return Err(Error::Csv {
                line,
                column: label_column + 1,
                what: format!("label column {label_column} beyond {w} columns"),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Csv {
                line,
                column: col + 1,
                what: format!("non-numeric cell {cell:?}"),
            })?;
            if has_labels && col == label_column {
                if v.fract() != 0.0 || !v.is_finite() {
                    return Err(Error::Csv {
                        line,
                        column: col + 1,
                        what: format!("label {cell:?} is not an integer"),
                    });
                }
                labels.push(v as i64);
            } else {
                values.push(v);
            }
        }
    }
    let w = width.ok_or_else(|| Error::Shape("csv has no data rows".into()))?;
    let features = if has_labels { w - 1 } else { w };
    let rows = values.len() / features.max(1);
    let samples = Array2::from_shape_vec((rows, features), values)
        .map_err(|e| Error::Shape(format!("csv: {e}")))?;
    Dataset::new(samples, has_labels.then_some(labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_labels() {
        let d = parse_csv(b"a,label,b\n1,3,2\n4,5,6\n", true, 1).unwrap();
        assert_eq!(d.samples.row(0).to_vec(), vec![1.0, 2.0]);
        assert_eq!(d.samples.row(1).to_vec(), vec![4.0, 6.0]);
        assert_eq!(d.labels, Some(vec![3, 5]));
    }

    #[test]
    fn no_header() {
        let d = parse_csv(b"0.5,1\n0.25,2\n", false, 0).unwrap();
        assert_eq!(d.n_samples(), 2);
        assert_eq!(d.labels, None);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = parse_csv(b"1,2\n3\n", false, 0).unwrap_err();
        assert!(matches!(err, Error::Csv { line: 2, .. }), "{err}");
    }

    #[test]
    fn non_numeric_cell_located() {
        let err = parse_csv(b"1,2\n3,x\n", false, 0).unwrap_err();
        match err {
            Error::Csv { line, column, .. } => assert_eq!((line, column), (2, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fractional_label_rejected() {
        assert!(parse_csv(b"1,0.5\n", true, 1).is_err());
    }
}
