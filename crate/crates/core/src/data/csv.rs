//! Plain CSV files of labelled feature rows: `label,v1,...,vd`.
//!
//! No header row. Lines starting with `#` are comments and blank lines are
//! skipped; both LF and CRLF line endings are accepted. Errors report the
//! 1-based physical line number.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::data::dataset::LabeledDataset;
use crate::data::prototypes::PrototypeSet;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};
use crate::scalar::Scalar;

/// A parsed data line: physical line number and its comma-separated fields.
pub(crate) struct Record<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

pub(crate) fn records(text: &str) -> impl Iterator<Item = Record<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        Some(Record {
            line: i + 1,
            fields: line.split(',').map(str::trim).collect(),
        })
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_real<T: Scalar>(
    field: &str,
    path: &Path,
    line: usize,
    what: &str,
) -> Result<T> {
    match field.parse::<T>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Ingest {
            path: path.to_path_buf(),
            line,
            message: format!("cannot parse {what} {field:?} as a finite number"),
        }),
    }
}

fn parse_label(field: &str, max: usize, path: &Path, line: usize) -> Result<usize> {
    let label: usize = field.parse().map_err(|_| Error::Ingest {
        path: path.to_path_buf(),
        line,
        message: format!("label {field:?} is not a non-negative integer"),
    })?;
    if label > max {
        return Err(Error::Ingest {
            path: path.to_path_buf(),
            line,
            message: format!("label {label} exceeds the number of known classes {max}"),
        });
    }
    Ok(label)
}

/// Source line and values of one row.
type NumberedRow<T> = (usize, Vec<T>);

/// Labelled rows before any normalization.
fn parse_labelled_rows<T: Scalar>(
    text: &str,
    num_known_classes: usize,
    path: &Path,
) -> Result<(Vec<usize>, Vec<NumberedRow<T>>)> {
    let mut width = None;
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for rec in records(text) {
        let n = rec.fields.len();
        if n < 2 {
            return Err(Error::Ingest {
                path: path.to_path_buf(),
                line: rec.line,
                message: "expected a label followed by at least one feature value".into(),
            });
        }
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(Error::Ingest {
                    path: path.to_path_buf(),
                    line: rec.line,
                    message: format!("ragged row: {n} columns where earlier rows have {w}"),
                })
            }
            _ => {}
        }
        labels.push(parse_label(
            rec.fields[0],
            num_known_classes,
            path,
            rec.line,
        )?);
        let values = rec.fields[1..]
            .iter()
            .map(|f| parse_real(f, path, rec.line, "feature value"))
            .collect::<Result<Vec<T>>>()?;
        rows.push((rec.line, values));
    }
    if rows.is_empty() {
        return Err(Error::Ingest {
            path: path.to_path_buf(),
            line: 0,
            message: "file contains no data rows".into(),
        });
    }
    Ok((labels, rows))
}

/// Parses feature CSV text; `path` only labels error messages.
pub fn parse_feature_csv<T: Scalar>(
    text: &str,
    num_known_classes: usize,
    path: &Path,
) -> Result<LabeledDataset<T>> {
    let (labels, rows) = parse_labelled_rows::<T>(text, num_known_classes, path)?;
    let dim = rows[0].1.len();
    let mut data = Vec::with_capacity(rows.len() * dim);
    for (line, values) in &rows {
        let unit = crate::numerics::l2_normalize(values).map_err(|_| Error::Ingest {
            path: path.to_path_buf(),
            line: *line,
            message: "feature row has zero norm".into(),
        })?;
        data.extend_from_slice(&unit);
    }
    let features = Matrix::new(rows.len(), dim, data)?;
    LabeledDataset::from_normalized(features, labels, num_known_classes)
}

/// Reads a feature CSV and L2-normalizes every row.
pub fn load_feature_csv<T: Scalar>(
    path: impl AsRef<Path>,
    num_known_classes: usize,
) -> Result<LabeledDataset<T>> {
    let path = path.as_ref();
    parse_feature_csv(&read_text(path)?, num_known_classes, path)
}

fn write_lines(
    path: &Path,
    header: &[String],
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| {
        for h in header {
            writeln!(w, "# {h}")?;
        }
        body(&mut w)?;
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

fn write_row<T: Scalar>(w: &mut dyn Write, label: usize, values: &[T]) -> std::io::Result<()> {
    write!(w, "{label}")?;
    for v in values {
        write!(w, ",{v}")?;
    }
    writeln!(w)
}

/// Writes `label,v1,...,vd` rows. Values use the shortest decimal that
/// parses back to the same float.
pub fn write_feature_csv<T: Scalar>(
    path: impl AsRef<Path>,
    ds: &LabeledDataset<T>,
    header: &[String],
) -> Result<()> {
    write_lines(path.as_ref(), header, |w| {
        for i in 0..ds.len() {
            write_row(w, ds.label(i), ds.row(i))?;
        }
        Ok(())
    })
}

/// One row per prototype, class label first.
pub fn write_prototypes<T: Scalar>(
    path: impl AsRef<Path>,
    protos: &PrototypeSet<T>,
    header: &[String],
) -> Result<()> {
    write_lines(path.as_ref(), header, |w| {
        for (class, mu) in protos.iter() {
            write_row(w, class, mu)?;
        }
        Ok(())
    })
}

/// Reads prototypes written by [`write_prototypes`]. Values are taken as-is
/// (prototypes are not unit-norm).
pub fn load_prototypes<T: Scalar>(
    path: impl AsRef<Path>,
    num_known_classes: usize,
) -> Result<PrototypeSet<T>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let (labels, rows) = parse_labelled_rows::<T>(&text, num_known_classes, path)?;
    let mut per_class: Vec<Vec<Vector<T>>> = vec![Vec::new(); num_known_classes];
    for (label, (line, values)) in labels.into_iter().zip(rows) {
        if label == 0 {
            return Err(Error::Ingest {
                path: path.to_path_buf(),
                line,
                message: "prototype rows must carry a known class label (1..K)".into(),
            });
        }
        per_class[label - 1].push(Vector::new(values)?);
    }
    PrototypeSet::new(per_class).map_err(|e| Error::Ingest {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, k: usize) -> Result<LabeledDataset<f64>> {
        parse_feature_csv(text, k, Path::new("mem.csv"))
    }

    #[test]
    fn parses_and_normalizes() {
        let ds = parse("1,3,4\n2,0,1", 2).unwrap();
        assert_eq!(ds.labels(), &[1, 2]);
        assert_eq!(ds.row(0), &[0.6, 0.8]);
        assert_eq!(ds.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn accepts_crlf_comments_and_blank_lines() {
        let ds = parse("# generated\r\n1,3,4\r\n\r\n0,1,0\r\n", 2).unwrap();
        assert_eq!(ds.labels(), &[1, 0]);
    }

    fn ingest_line(err: Error) -> usize {
        match err {
            Error::Ingest { line, .. } => line,
            other => panic!("expected ingest error, got {other}"),
        }
    }

    #[test]
    fn label_out_of_range() {
        assert_eq!(ingest_line(parse("1,1,0\n5,1,1", 2).unwrap_err()), 2);
    }

    #[test]
    fn zero_norm_row() {
        let err = parse("2,1,1\n1,0,0", 2).unwrap_err();
        assert!(err.to_string().contains("zero norm"));
        assert_eq!(ingest_line(err), 2);
    }

    #[test]
    fn ragged_bad_label_bad_number() {
        assert_eq!(ingest_line(parse("1,1,0\n1,1", 2).unwrap_err()), 2);
        assert_eq!(ingest_line(parse("1.5,1,0", 2).unwrap_err()), 1);
        assert_eq!(ingest_line(parse("1,1,abc", 2).unwrap_err()), 1);
        assert_eq!(ingest_line(parse("1,1,NaN", 2).unwrap_err()), 1);
        assert_eq!(ingest_line(parse("1", 2).unwrap_err()), 1);
    }

    #[test]
    fn write_then_read_keeps_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let ds = parse("1,0.1,0.7\n2,-0.3,0.2\n0,5,1", 2).unwrap();
        write_feature_csv(&path, &ds, &["test".to_string()]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# test\n"));
        let back: LabeledDataset<f64> = load_feature_csv(&path, 2).unwrap();
        assert_eq!(back.labels(), ds.labels());
        for i in 0..ds.len() {
            for (a, b) in back.row(i).iter().zip(ds.row(i)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn prototypes_round_trip_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let set = PrototypeSet::new(vec![
            vec![Vector::new(vec![0.1, 1.0 / 3.0]).unwrap()],
            vec![Vector::new(vec![-2.5e-7, 0.7]).unwrap()],
        ])
        .unwrap();
        write_prototypes(&path, &set, &[]).unwrap();
        let back: PrototypeSet<f64> = load_prototypes(&path, 2).unwrap();
        assert_eq!(back, set);
        assert!(load_prototypes::<f64>(&path, 3).is_err(), "class 3 missing");
    }
}
