//! Flags shared by every subcommand and their merge with config files.

use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use mnd_core::config::{load_key_values, Settings};
use mnd_core::evaluation::BenchmarkConfig;
use mnd_core::inference::TopN;

/// Floating-point type used for all arithmetic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

/// Settings flags. Each one overrides the same key in `--config`, which in
/// turn overrides the built-in default.
#[derive(Args, Clone, Debug, Default)]
pub struct ConfigFlags {
    /// Flat key=value file; flags take precedence over its entries
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seeds data generation, training and every derived random stream
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of known classes K; labels in feature files must lie in 0..=K
    #[arg(long)]
    pub known_classes: Option<usize>,
    #[arg(long)]
    pub novel_classes: Option<usize>,
    #[arg(long)]
    pub samples_per_class: Option<usize>,
    #[arg(long)]
    pub cluster_std: Option<f64>,

    /// Weight of the mixing-set term of the loss
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub matched_pair_prob: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,

    /// Weight of the prototype in each test-time mixture
    #[arg(long)]
    pub test_alpha: Option<f64>,
    /// Classes compared per query: a count, or "all"
    #[arg(long)]
    pub top_n: Option<TopN>,
    #[arg(long)]
    pub prototypes_per_class: Option<usize>,
    /// Scores below this are reported as novel
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,

    /// Arithmetic precision [default: f64]
    #[arg(long, value_enum)]
    pub precision: Option<Precision>,
}

/// Fully merged settings of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Effective {
    pub bench: BenchmarkConfig,
    pub precision: Precision,
}

impl Effective {
    /// `key=value` lines recording every setting.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .bench
            .entries()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        out.push(("precision".into(), self.precision.to_string()));
        out
    }
}

impl ConfigFlags {
    fn flag_entries(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut put = |key: &'static str, v: Option<String>| {
            if let Some(v) = v {
                out.push((key, v));
            }
        };
        put("seed", self.seed.map(|v| v.to_string()));
        put("dim", self.dim.map(|v| v.to_string()));
        put("known-classes", self.known_classes.map(|v| v.to_string()));
        put("novel-classes", self.novel_classes.map(|v| v.to_string()));
        put(
            "samples-per-class",
            self.samples_per_class.map(|v| v.to_string()),
        );
        put("cluster-std", self.cluster_std.map(|v| v.to_string()));
        put("g", self.g.map(|v| v.to_string()));
        put("lr", self.lr.map(|v| v.to_string()));
        put("batch-size", self.batch_size.map(|v| v.to_string()));
        put("steps", self.steps.map(|v| v.to_string()));
        put(
            "matched-pair-prob",
            self.matched_pair_prob.map(|v| v.to_string()),
        );
        put("dropout", self.dropout.map(|v| v.to_string()));
        put("test-alpha", self.test_alpha.map(|v| v.to_string()));
        put("top-n", self.top_n.map(|v| v.to_string()));
        put(
            "prototypes-per-class",
            self.prototypes_per_class.map(|v| v.to_string()),
        );
        put("threshold", self.threshold.map(|v| v.to_string()));
        put("threads", self.threads.map(|v| v.to_string()));
        out
    }

    /// Defaults, then the config file, then flags; the result is validated.
    pub fn resolve(&self) -> Result<Effective> {
        let mut bench = BenchmarkConfig::default();
        let mut precision = Precision::default();
        if let Some(path) = &self.config {
            for e in load_key_values(path)? {
                let at = || format!("{}:{}", path.display(), e.line);
                if e.key == "precision" {
                    precision = Precision::from_str(&e.value, true).map_err(|_| {
                        anyhow::anyhow!(
                            "{}: invalid precision {:?} (expected f32 or f64)",
                            at(),
                            e.value
                        )
                    })?;
                    continue;
                }
                if !bench.set(&e.key, &e.value).with_context(at)? {
                    bail!("{}: unknown config key {:?}", at(), e.key);
                }
            }
        }
        for (key, value) in self.flag_entries() {
            bench.set(key, &value).with_context(|| format!("--{key}"))?;
        }
        if let Some(p) = self.precision {
            precision = p;
        }
        bench.validate()?;
        Ok(Effective { bench, precision })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn flags_override_file_which_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(
            &path,
            "# experiment\nsteps=50\nbatch_size=16\nprecision=f32\n",
        )
        .unwrap();
        let flags = ConfigFlags {
            config: Some(path),
            steps: Some(70),
            ..Default::default()
        };
        let eff = flags.resolve().unwrap();
        assert_eq!(eff.bench.train.steps, 70);
        assert_eq!(eff.bench.train.batch_size, 16);
        assert_eq!(eff.bench.train.g, 1000.0);
        assert_eq!(eff.precision, Precision::F32);
    }

    #[test]
    fn every_flag_key_is_a_setting() {
        let flags = ConfigFlags {
            seed: Some(1),
            dim: Some(4),
            known_classes: Some(3),
            novel_classes: Some(2),
            samples_per_class: Some(5),
            cluster_std: Some(0.5),
            g: Some(2.0),
            lr: Some(0.01),
            batch_size: Some(8),
            steps: Some(9),
            matched_pair_prob: Some(0.3),
            dropout: Some(0.1),
            test_alpha: Some(0.2),
            top_n: Some(TopN::Count(2)),
            prototypes_per_class: Some(2),
            threshold: Some(0.4),
            threads: Some(2),
            ..Default::default()
        };
        let eff = flags.resolve().unwrap();
        let entries = eff.entries();
        for (key, value) in flags.flag_entries() {
            assert!(
                entries.iter().any(|(k, v)| k == key && *v == value),
                "{key}"
            );
        }
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        fs::write(&path, "stepz=5\n").unwrap();
        let err = ConfigFlags {
            config: Some(path.clone()),
            ..Default::default()
        }
        .resolve()
        .unwrap_err();
        assert!(format!("{err:#}").contains("unknown config key \"stepz\""));
        fs::write(&path, "steps=many\n").unwrap();
        assert!(ConfigFlags {
            config: Some(path),
            ..Default::default()
        }
        .resolve()
        .is_err());
        let err = ConfigFlags {
            test_alpha: Some(1.5),
            ..Default::default()
        }
        .resolve()
        .unwrap_err();
        assert!(format!("{err:#}").contains("test alpha"));
    }
}
