//! One-parameter ablations over the synthetic benchmark.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::evaluation::benchmark::{Benchmark, BenchmarkConfig};
use crate::inference::TopN;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    TestAlpha,
    /// Loss weight; every value retrains from the same seed.
    G,
    TopN,
    PrototypesPerClass,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::TestAlpha => "test_alpha",
            SweepKind::G => "g",
            SweepKind::TopN => "top_n",
            SweepKind::PrototypesPerClass => "prototypes_per_class",
        }
    }

    fn check(self, v: f64, num_classes: usize) -> Result<()> {
        let ok = match self {
            SweepKind::TestAlpha => v > 0.0 && v < 1.0,
            SweepKind::G => v >= 1.0 && v.is_finite(),
            SweepKind::TopN => v.fract() == 0.0 && v >= 1.0 && v <= num_classes as f64,
            SweepKind::PrototypesPerClass => v.fract() == 0.0 && v >= 1.0,
        };
        if !ok {
            return Err(Error::contract(format!(
                "{v} is not a valid {} value",
                self.name()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "test_alpha" => Ok(SweepKind::TestAlpha),
            "g" => Ok(SweepKind::G),
            "top_n" => Ok(SweepKind::TopN),
            "prototypes_per_class" => Ok(SweepKind::PrototypesPerClass),
            other => Err(Error::contract(format!(
                "unknown sweep kind {other:?} (expected test_alpha, g, top_n or prototypes_per_class)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub auc: f64,
    pub baseline_auc: f64,
    /// Mean mixing-set loss over the last 100 training steps.
    pub final_nonzero_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub kind: SweepKind,
    /// Strictly increasing in `value`.
    pub points: Vec<SweepPoint>,
    /// Effective settings of the base configuration.
    pub config: Vec<(&'static str, String)>,
    pub seed: u64,
}

const LOSS_WINDOW: usize = 100;

impl SweepReport {
    pub fn auc_at(&self, value: f64) -> Option<f64> {
        self.points.iter().find(|p| p.value == value).map(|p| p.auc)
    }

    /// Writes `param_value,auc` to `path` and the configuration snapshot to
    /// [`sidecar_path`](Self::sidecar_path).
    pub fn write(&self, path: impl AsRef<Path>, header: &[String]) -> Result<()> {
        let path = path.as_ref();
        write_text(path, |w| {
            for h in header {
                writeln!(w, "# {h}")?;
            }
            writeln!(w, "param_value,auc")?;
            for p in &self.points {
                writeln!(w, "{},{}", p.value, p.auc)?;
            }
            Ok(())
        })?;
        let sidecar = Self::sidecar_path(path);
        write_text(&sidecar, |w| {
            for h in header {
                writeln!(w, "# {h}")?;
            }
            writeln!(w, "# sweep {} over {} values", self.kind, self.points.len())?;
            for (k, v) in &self.config {
                writeln!(w, "{k}={v}")?;
            }
            Ok(())
        })
    }

    /// `<path>.config`.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".config");
        PathBuf::from(s)
    }
}

fn write_text(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn sorted_values(kind: SweepKind, values: &[f64], num_classes: usize) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::contract("a sweep needs at least two values"));
    }
    for &v in values {
        kind.check(v, num_classes)?;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::contract("sweep values must be distinct"));
    }
    Ok(v)
}

fn point<T: Scalar>(bench: &Benchmark<T>, kind: SweepKind, value: f64) -> Result<SweepPoint> {
    let mut infer = bench.config.infer.clone();
    match kind {
        SweepKind::TestAlpha => infer.test_alpha = value,
        SweepKind::TopN => infer.top_n = TopN::Count(value as usize),
        SweepKind::PrototypesPerClass => infer.prototypes_per_class = value as usize,
        SweepKind::G => {}
    }
    let eval = bench.evaluate(&infer)?;
    Ok(SweepPoint {
        value,
        auc: eval.mnd.auc,
        baseline_auc: eval.baseline.auc,
        final_nonzero_loss: bench.history.tail_nonzero(LOSS_WINDOW),
    })
}

/// Sweeps a scoring parameter over an already trained benchmark.
pub fn sweep_trained<T: Scalar>(
    bench: &Benchmark<T>,
    kind: SweepKind,
    values: &[f64],
) -> Result<SweepReport> {
    if kind == SweepKind::G {
        return Err(Error::contract("a g sweep retrains; use sweep"));
    }
    let values = sorted_values(kind, values, bench.config.synth.known_classes)?;
    let points = values
        .iter()
        .map(|&v| point(bench, kind, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport {
        kind,
        points,
        config: bench.config.entries(),
        seed: bench.config.seed(),
    })
}

/// Runs the benchmark once per value of `kind`.
///
/// Scoring parameters reuse one trained network. A `g` sweep retrains per
/// value from the same seed, so `g` is the only thing that changes; with
/// `base.threads > 1` those trainings run concurrently and are collected in
/// value order.
pub fn sweep<T: Scalar>(
    kind: SweepKind,
    values: &[f64],
    base: &BenchmarkConfig,
) -> Result<SweepReport> {
    if kind != SweepKind::G {
        let bench = Benchmark::<T>::prepare(base.clone())?;
        return sweep_trained(&bench, kind, values);
    }
    let values = sorted_values(kind, values, base.synth.known_classes)?;
    let run = |g: f64| -> Result<SweepPoint> {
        let mut cfg = base.clone();
        cfg.train.g = g;
        cfg.threads = 1;
        let bench = Benchmark::<T>::prepare(cfg)?;
        point(&bench, kind, g)
    };
    let points = if base.threads <= 1 {
        values.iter().map(|&g| run(g)).collect::<Result<Vec<_>>>()?
    } else {
        let chunk = values.len().div_ceil(base.threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = values
                .chunks(chunk)
                .map(|vs| s.spawn(move || vs.iter().map(|&g| run(g)).collect::<Result<Vec<_>>>()))
                .collect();
            let mut out = Vec::with_capacity(values.len());
            for h in handles {
                out.extend(h.join().expect("sweep thread panicked")?);
            }
            Ok::<_, Error>(out)
        })?
    };
    Ok(SweepReport {
        kind,
        points,
        config: base.entries(),
        seed: base.seed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SyntheticConfig;
    use crate::inference::InferenceConfig;
    use crate::training::TrainConfig;

    fn tiny() -> BenchmarkConfig {
        BenchmarkConfig::new(
            SyntheticConfig {
                dim: 6,
                known_classes: 3,
                novel_classes: 2,
                samples_per_class: 12,
                cluster_std: 0.2,
                center_scale: 1.0,
                seed: 5,
            },
            TrainConfig {
                steps: 20,
                batch_size: 4,
                hidden1: 8,
                hidden2: 4,
                seed: 5,
                ..Default::default()
            },
            InferenceConfig::default(),
        )
    }

    #[test]
    fn kinds_parse() {
        assert_eq!(
            "test-alpha".parse::<SweepKind>().unwrap(),
            SweepKind::TestAlpha
        );
        assert_eq!(
            "prototypes_per_class".parse::<SweepKind>().unwrap(),
            SweepKind::PrototypesPerClass
        );
        assert!("alpha".parse::<SweepKind>().is_err());
    }

    #[test]
    fn values_are_sorted_and_validated() {
        assert_eq!(
            sorted_values(SweepKind::TestAlpha, &[0.9, 0.1, 0.5], 3).unwrap(),
            vec![0.1, 0.5, 0.9]
        );
        assert!(sorted_values(SweepKind::TestAlpha, &[0.1], 3).is_err());
        assert!(sorted_values(SweepKind::TestAlpha, &[0.1, 0.1], 3).is_err());
        assert!(sorted_values(SweepKind::TestAlpha, &[0.1, 1.0], 3).is_err());
        assert!(sorted_values(SweepKind::TopN, &[1.0, 4.0], 3).is_err());
        assert!(sorted_values(SweepKind::TopN, &[1.5, 2.0], 3).is_err());
        assert!(sorted_values(SweepKind::G, &[0.5, 2.0], 3).is_err());
    }

    #[test]
    fn scoring_sweep_reuses_one_network() {
        let report = sweep::<f64>(SweepKind::TestAlpha, &[0.7, 0.1], &tiny()).unwrap();
        assert_eq!(report.points.len(), 2);
        assert_eq!(report.points[0].value, 0.1);
        assert_eq!(
            report.points[0].final_nonzero_loss,
            report.points[1].final_nonzero_loss
        );
    }

    #[test]
    fn g_sweep_is_thread_count_independent() {
        let mut cfg = tiny();
        let serial = sweep::<f64>(SweepKind::G, &[1000.0, 1.0, 10.0], &cfg).unwrap();
        cfg.threads = 2;
        let parallel = sweep::<f64>(SweepKind::G, &[1.0, 10.0, 1000.0], &cfg).unwrap();
        assert_eq!(serial.points, parallel.points);
        assert_eq!(
            serial.points.iter().map(|p| p.value).collect::<Vec<_>>(),
            vec![1.0, 10.0, 1000.0]
        );
    }

    #[test]
    fn report_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let report = SweepReport {
            kind: SweepKind::TopN,
            points: vec![
                SweepPoint {
                    value: 1.0,
                    auc: 0.75,
                    baseline_auc: 0.7,
                    final_nonzero_loss: 0.0,
                },
                SweepPoint {
                    value: 2.0,
                    auc: 0.8,
                    baseline_auc: 0.7,
                    final_nonzero_loss: 0.0,
                },
            ],
            config: vec![("seed", "5".into())],
            seed: 5,
        };
        report.write(&path, &["seed=5".into()]).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "# seed=5\nparam_value,auc\n1,0.75\n2,0.8\n"
        );
        let side = fs::read_to_string(SweepReport::sidecar_path(&path)).unwrap();
        assert!(side.contains("seed=5\n"));
        assert_eq!(report.auc_at(2.0), Some(0.8));
    }
}
