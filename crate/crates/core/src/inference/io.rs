//! Score files written by the scorer and base-classifier score files read
//! for top-N selection.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::data::csv::{parse_real, read_text, records};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

pub const SCORE_COLUMNS: &str = "sample_index,true_label,membership_score";

/// One line of a score file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreRecord {
    /// 0-based row of the test feature file.
    pub sample_index: usize,
    /// 0 for novel samples.
    pub true_label: usize,
    pub membership_score: f64,
    pub is_novel: Option<bool>,
}

/// Writes `sample_index,true_label,membership_score[,is_novel]` with a
/// column header line. The `is_novel` column is present when any record
/// carries a verdict.
pub fn write_scores(
    path: impl AsRef<Path>,
    scores: &[ScoreRecord],
    header: &[String],
) -> Result<()> {
    let path = path.as_ref();
    let with_verdict = scores.iter().any(|s| s.is_novel.is_some());
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| {
        for h in header {
            writeln!(w, "# {h}")?;
        }
        if with_verdict {
            writeln!(w, "{SCORE_COLUMNS},is_novel")?;
        } else {
            writeln!(w, "{SCORE_COLUMNS}")?;
        }
        for s in scores {
            write!(
                w,
                "{},{},{}",
                s.sample_index, s.true_label, s.membership_score
            )?;
            match (with_verdict, s.is_novel) {
                (true, Some(v)) => writeln!(w, ",{v}")?,
                (true, None) => writeln!(w, ",")?,
                _ => writeln!(w)?,
            }
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

fn ingest(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn parse_scores(text: &str, path: &Path) -> Result<Vec<ScoreRecord>> {
    let mut out = Vec::new();
    for rec in records(text) {
        if rec.fields.first() == Some(&"sample_index") {
            continue;
        }
        if !(3..=4).contains(&rec.fields.len()) {
            return Err(ingest(
                path,
                rec.line,
                format!("expected 3 or 4 fields, found {}", rec.fields.len()),
            ));
        }
        let int = |i: usize, what: &str| -> Result<usize> {
            rec.fields[i].parse().map_err(|_| {
                ingest(
                    path,
                    rec.line,
                    format!("{what} {:?} is not a non-negative integer", rec.fields[i]),
                )
            })
        };
        let is_novel = match rec.fields.get(3).copied() {
            None | Some("") => None,
            Some("true") => Some(true),
            Some("false") => Some(false),
            Some(other) => {
                return Err(ingest(
                    path,
                    rec.line,
                    format!("is_novel {other:?} is not true/false"),
                ))
            }
        };
        out.push(ScoreRecord {
            sample_index: int(0, "sample_index")?,
            true_label: int(1, "true_label")?,
            membership_score: parse_real(rec.fields[2], path, rec.line, "membership_score")?,
            is_novel,
        });
    }
    Ok(out)
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>> {
    let path = path.as_ref();
    parse_scores(&read_text(path)?, path)
}

/// Base-classifier scores: one row per test sample, `num_classes` columns.
pub fn parse_class_scores<T: Scalar>(
    text: &str,
    num_classes: usize,
    path: &Path,
) -> Result<Matrix<T>> {
    let mut data = Vec::new();
    let mut rows = 0;
    for rec in records(text) {
        if rec.fields.len() != num_classes {
            return Err(ingest(
                path,
                rec.line,
                format!(
                    "expected {num_classes} class scores, found {}",
                    rec.fields.len()
                ),
            ));
        }
        for f in &rec.fields {
            data.push(parse_real::<T>(f, path, rec.line, "class score")?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(ingest(path, 0, "no class score rows"));
    }
    Matrix::new(rows, num_classes, data)
}

pub fn load_class_scores<T: Scalar>(
    path: impl AsRef<Path>,
    num_classes: usize,
) -> Result<Matrix<T>> {
    let path = path.as_ref();
    parse_class_scores(&read_text(path)?, num_classes, path)
}
