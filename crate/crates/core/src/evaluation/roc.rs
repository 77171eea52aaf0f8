//! ROC curves and the area under them, with known samples as the positive
//! class.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One operating point: samples scoring `>= threshold` are called known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocResult {
    pub auc: f64,
    /// From `(0, 0)` at threshold `+inf` to `(1, 1)` at the lowest score.
    pub curve: Vec<RocPoint>,
    pub n_known: usize,
    pub n_novel: usize,
}

fn check_scores(name: &str, scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::contract(format!("no {name} scores")));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("{name} score {i}")));
    }
    Ok(())
}

/// Distinct scores in decreasing order with the number of known and novel
/// samples at each.
fn grouped(known: &[f64], novel: &[f64]) -> Vec<(f64, u64, u64)> {
    let mut all: Vec<(f64, bool)> = known
        .iter()
        .map(|&s| (s, true))
        .chain(novel.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut groups: Vec<(f64, u64, u64)> = Vec::new();
    for (s, is_known) in all {
        match groups.last_mut() {
            // -0.0 and 0.0 compare equal and form one group.
            Some(g) if g.0 == s => {}
            _ => groups.push((s, 0, 0)),
        }
        let g = groups.last_mut().expect("just pushed");
        if is_known {
            g.1 += 1;
        } else {
            g.2 += 1;
        }
    }
    groups
}

/// AUC as the Mann–Whitney statistic (ties count one half), in
/// `O(n log n)`, plus the ROC curve over every distinct score.
///
/// The pair counts are accumulated as integers, so the AUC is the exact
/// rational rounded once.
pub fn roc_auc(known: &[f64], novel: &[f64]) -> Result<RocResult> {
    check_scores("known", known)?;
    check_scores("novel", novel)?;
    let nk = known.len() as u64;
    let nn = novel.len() as u64;

    let mut curve = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    // Twice the number of (known, novel) pairs won by the known sample.
    let mut twice_wins: u128 = 0;
    for (score, k, n) in grouped(known, novel) {
        let novel_below = (nn - fp - n) as u128;
        twice_wins += k as u128 * (2 * novel_below + n as u128);
        tp += k;
        fp += n;
        curve.push(RocPoint {
            fpr: fp as f64 / nn as f64,
            tpr: tp as f64 / nk as f64,
            threshold: score,
        });
    }
    let auc = twice_wins as f64 / (2.0 * nk as f64 * nn as f64);
    Ok(RocResult {
        auc,
        curve,
        n_known: known.len(),
        n_novel: novel.len(),
    })
}

/// Splits scores by label (0 is novel) and computes the ROC.
pub fn roc_from_labels(scores: &[f64], labels: &[usize]) -> Result<RocResult> {
    if scores.len() != labels.len() {
        return Err(Error::shapes(
            "roc",
            format!("{} scores", scores.len()),
            format!("{} labels", labels.len()),
        ));
    }
    let (mut known, mut novel) = (Vec::new(), Vec::new());
    for (&s, &l) in scores.iter().zip(labels) {
        if l == 0 {
            novel.push(s);
        } else {
            known.push(s);
        }
    }
    roc_auc(&known, &novel)
}

impl RocResult {
    /// Writes `fpr,tpr,threshold`, one line per curve point.
    pub fn write_csv(&self, path: impl AsRef<Path>, header: &[String]) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let res = (|| {
            for h in header {
                writeln!(w, "# {h}")?;
            }
            writeln!(w, "fpr,tpr,threshold")?;
            for p in &self.curve {
                writeln!(w, "{},{},{}", p.fpr, p.tpr, p.threshold)?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }
}
