//! Text checkpoints.
//!
//! ```text
//! # optional comment lines
//! format_version=1
//! scalar=f64
//! dims=<input_dim>,<hidden1>,<hidden2>,<num_classes>
//! dropout_p=0.5
//! W1=<hidden1*input_dim comma-separated values, row-major>
//! b1=...
//! W2=...
//! b2=...
//! W3=...
//! b3=...
//! end
//! ```
//!
//! Values are written with the shortest decimal representation that parses
//! back to the identical float, so a save/load round trip is bit-exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::params::{Architecture, NetworkParams, TENSOR_NAMES};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

/// Serializes parameters to the checkpoint text format.
pub fn checkpoint_to_string<T: Scalar>(p: &NetworkParams<T>, header: &[String]) -> String {
    let a = p.architecture();
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    let _ = writeln!(out, "format_version={FORMAT_VERSION}");
    let _ = writeln!(out, "scalar={}", T::NAME);
    let _ = writeln!(
        out,
        "dims={},{},{},{}",
        a.input_dim, a.hidden1, a.hidden2, a.num_classes
    );
    let _ = writeln!(out, "dropout_p={}", p.dropout_p);
    for (name, values) in TENSOR_NAMES.iter().zip(p.tensors()) {
        out.push_str(name);
        out.push('=');
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

pub fn save_checkpoint<T: Scalar>(
    p: &NetworkParams<T>,
    path: impl AsRef<Path>,
    header: &[String],
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint_to_string(p, header)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint<T: Scalar>(path: impl AsRef<Path>) -> Result<NetworkParams<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text, path)
}

/// Parses checkpoint text; `path` only labels errors.
pub fn parse_checkpoint<T: Scalar>(text: &str, path: &Path) -> Result<NetworkParams<T>> {
    let corrupt = |message: String| Error::Checkpoint {
        path: path.to_path_buf(),
        message,
    };

    let mut fields: HashMap<&str, &str> = HashMap::new();
    let mut ended = false;
    for line in text.lines().map(|l| l.trim_end_matches('\r')) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if ended {
            return Err(corrupt("content after end marker".into()));
        }
        if line == "end" {
            ended = true;
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| corrupt(format!("malformed line {:?}", truncate(line))))?;
        if fields.insert(k.trim(), v.trim()).is_some() {
            return Err(corrupt(format!("duplicate key {k}")));
        }
    }

    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| corrupt(format!("missing key {k} (truncated file?)")))
    };

    let version: u32 = get("format_version")?
        .parse()
        .map_err(|_| corrupt("unreadable format_version".into()))?;
    if version != FORMAT_VERSION {
        return Err(corrupt(format!(
            "unsupported format_version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let scalar = get("scalar")?;
    if scalar != T::NAME {
        return Err(corrupt(format!(
            "checkpoint holds {scalar} values, reader expects {}",
            T::NAME
        )));
    }
    if !ended {
        return Err(corrupt("missing end marker (truncated file?)".into()));
    }
    let dims: Vec<usize> = get("dims")?
        .split(',')
        .map(|d| d.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| corrupt("unreadable dims".into()))?;
    let [input_dim, hidden1, hidden2, num_classes] = dims[..] else {
        return Err(corrupt(format!(
            "dims must have 4 entries, found {}",
            dims.len()
        )));
    };
    let arch = Architecture {
        input_dim,
        hidden1,
        hidden2,
        num_classes,
    };
    arch.validate().map_err(|e| corrupt(e.to_string()))?;
    let dropout_p: f64 = get("dropout_p")?
        .parse()
        .map_err(|_| corrupt("unreadable dropout_p".into()))?;

    let tensor = |name: &str, expected: usize| -> Result<Vec<T>> {
        let raw = get(name)?;
        let values: Vec<T> = raw
            .split(',')
            .map(|s| s.parse::<T>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| corrupt(format!("tensor {name} contains an unreadable value")))?;
        if values.len() != expected {
            return Err(corrupt(format!(
                "tensor {name} has {} values, dims imply {expected}",
                values.len()
            )));
        }
        Ok(values)
    };

    let w1 = tensor("W1", hidden1 * input_dim)?;
    let b1 = tensor("b1", hidden1)?;
    let w2 = tensor("W2", hidden2 * arch.concat_width())?;
    let b2 = tensor("b2", hidden2)?;
    let w3 = tensor("W3", num_classes * hidden2)?;
    let b3 = tensor("b3", num_classes)?;
    let p = NetworkParams {
        w1: Matrix::new(hidden1, input_dim, w1)?,
        b1,
        w2: Matrix::new(hidden2, arch.concat_width(), w2)?,
        b2,
        w3: Matrix::new(num_classes, hidden2, w3)?,
        b3,
        dropout_p,
    };
    p.validate().map_err(|e| corrupt(e.to_string()))?;
    Ok(p)
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(40) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}
