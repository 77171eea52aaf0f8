//! End-to-end synthetic benchmark: generate data, train, build prototypes,
//! score the test split and measure AUC against a distance baseline.

use std::sync::OnceLock;

use crate::config::{entry, parse_value, Settings};
use crate::data::{
    compute_prototypes, generate_synthetic, PrototypeSet, SyntheticConfig, SyntheticData,
    DEFAULT_KMEANS_ITERS,
};
use crate::error::{Error, Result};
use crate::evaluation::probe::{train_linear_probe, LinearProbe, ProbeConfig};
use crate::evaluation::roc::{roc_from_labels, RocResult};
use crate::inference::{score_dataset, InferenceConfig, ScoreRecord, TopN};
use crate::network::NetworkParams;
use crate::numerics::linalg::squared_distance;
use crate::numerics::{Matrix, RngStream};
use crate::scalar::Scalar;
use crate::training::{train, TrainConfig, TrainingHistory};

/// Stream tag for k-means seeding of prototypes, derived from the data seed.
pub const STREAM_PROTOTYPES: u64 = 20;
/// Stream tag for linear-probe minibatch order, derived from the training seed.
pub const STREAM_PROBE: u64 = 21;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkConfig {
    pub synth: SyntheticConfig,
    pub train: TrainConfig,
    pub infer: InferenceConfig,
    pub probe: ProbeConfig,
    /// Worker threads for scoring; 1 keeps everything on the calling thread.
    pub threads: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self::new(
            SyntheticConfig::default(),
            TrainConfig::default(),
            InferenceConfig::default(),
        )
    }
}

impl BenchmarkConfig {
    pub fn new(synth: SyntheticConfig, train: TrainConfig, infer: InferenceConfig) -> Self {
        BenchmarkConfig {
            synth,
            train,
            infer,
            probe: ProbeConfig::default(),
            threads: 1,
        }
    }

    /// Checks every part; scoring settings are checked against the
    /// synthetic class count.
    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.train.validate()?;
        self.infer.validate(self.synth.known_classes)?;
        if self.probe.steps == 0 || self.probe.batch_size == 0 || !(self.probe.learning_rate > 0.0)
        {
            return Err(Error::contract(
                "probe steps, batch size and learning rate must be positive",
            ));
        }
        if self.threads == 0 {
            return Err(Error::contract("threads must be at least 1"));
        }
        Ok(())
    }

    /// Training seed; also seeds the linear probe.
    pub fn seed(&self) -> u64 {
        self.train.seed
    }
}

impl Settings for BenchmarkConfig {
    /// A key may belong to several parts (`seed` sets both the data and the
    /// training seed); it is applied to all of them.
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let mut used = false;
        used |= self.synth.set(key, value)?;
        used |= self.train.set(key, value)?;
        used |= self.infer.set(key, value)?;
        used |= self.probe.set(key, value)?;
        if key == "threads" {
            self.threads = parse_value(key, value)?;
            used = true;
        }
        Ok(used)
    }

    /// Each key once, first occurrence wins.
    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out: Vec<(&'static str, String)> = Vec::new();
        let parts = [
            self.synth.entries(),
            self.train.entries(),
            self.infer.entries(),
            self.probe.entries(),
        ];
        for (k, v) in parts.into_iter().flatten() {
            if !out.iter().any(|(seen, _)| *seen == k) {
                out.push((k, v));
            }
        }
        out.push(entry("threads", self.threads));
        out
    }
}

/// Scores of one evaluation pass over the test split.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub mnd: RocResult,
    /// Negative distance to the nearest prototype.
    pub baseline: RocResult,
    pub scores: Vec<ScoreRecord>,
    pub baseline_scores: Vec<f64>,
}

/// Negative Euclidean distance from each row of `queries` to its nearest
/// prototype: higher means closer to a known class.
pub fn nearest_prototype_scores<T: Scalar>(
    protos: &PrototypeSet<T>,
    queries: &Matrix<T>,
) -> Vec<f64> {
    queries
        .iter_rows()
        .map(|q| {
            let best = protos
                .iter()
                .map(|(_, mu)| squared_distance(q, mu).to_f64_lossy())
                .fold(f64::INFINITY, f64::min);
            -best.sqrt()
        })
        .collect()
}

/// A trained network together with the data it was trained and tested on.
#[derive(Debug)]
pub struct Benchmark<T> {
    pub config: BenchmarkConfig,
    pub data: SyntheticData<T>,
    pub params: NetworkParams<T>,
    pub history: TrainingHistory,
    probe: OnceLock<LinearProbe<T>>,
}

impl<T: Scalar> Benchmark<T> {
    /// Generates the data and trains the network.
    pub fn prepare(config: BenchmarkConfig) -> Result<Self> {
        let data = generate_synthetic::<T>(&config.synth)?;
        let outcome = train(&data.train, &config.train)?;
        Ok(Self::from_parts(
            config,
            data,
            outcome.params,
            outcome.history,
        ))
    }

    pub fn from_parts(
        config: BenchmarkConfig,
        data: SyntheticData<T>,
        params: NetworkParams<T>,
        history: TrainingHistory,
    ) -> Self {
        Benchmark {
            config,
            data,
            params,
            history,
            probe: OnceLock::new(),
        }
    }

    /// The linear probe, trained on first use.
    pub fn probe(&self) -> Result<&LinearProbe<T>> {
        if let Some(p) = self.probe.get() {
            return Ok(p);
        }
        let mut rng = RngStream::derive(self.config.seed(), STREAM_PROBE);
        let p = train_linear_probe(&self.data.train, &self.config.probe, &mut rng)?;
        Ok(self.probe.get_or_init(|| p))
    }

    /// Prototypes of the training split, `per_class` per class.
    pub fn prototypes(&self, per_class: usize) -> Result<PrototypeSet<T>> {
        let mut rng = RngStream::derive(self.config.synth.seed, STREAM_PROTOTYPES);
        compute_prototypes(&self.data.train, per_class, DEFAULT_KMEANS_ITERS, &mut rng)
    }

    /// Scores the test split (known rows, then novel rows) under `infer`.
    pub fn evaluate(&self, infer: &InferenceConfig) -> Result<Evaluation> {
        let test = self.data.test();
        let protos = self.prototypes(infer.prototypes_per_class)?;
        let k = protos.num_classes();
        let class_scores = match infer.top_n {
            TopN::Count(n) if n < k => Some(self.probe()?.class_scores_matrix(test.features())?),
            _ => None,
        };
        let scores = score_dataset(
            &self.params,
            &protos,
            &test,
            class_scores.as_ref(),
            infer,
            self.config.threads,
        )?;
        let values: Vec<f64> = scores.iter().map(|s| s.membership_score).collect();
        let mnd = roc_from_labels(&values, test.labels())?;
        let baseline_scores = nearest_prototype_scores(&protos, test.features());
        let baseline = roc_from_labels(&baseline_scores, test.labels())?;
        Ok(Evaluation {
            mnd,
            baseline,
            scores,
            baseline_scores,
        })
    }
}

/// Generates data, trains, and evaluates with `config.infer`.
pub fn run_benchmark<T: Scalar>(config: &BenchmarkConfig) -> Result<(Benchmark<T>, Evaluation)> {
    let bench = Benchmark::<T>::prepare(config.clone())?;
    let eval = bench.evaluate(&config.infer)?;
    Ok((bench, eval))
}

/// AUC of the distance baseline alone; no training involved.
pub fn baseline_auc<T: Scalar>(
    synth: &SyntheticConfig,
    prototypes_per_class: usize,
) -> Result<f64> {
    let data = generate_synthetic::<T>(synth)?;
    let mut rng = RngStream::derive(synth.seed, STREAM_PROTOTYPES);
    let protos = compute_prototypes(
        &data.train,
        prototypes_per_class,
        DEFAULT_KMEANS_ITERS,
        &mut rng,
    )?;
    let test = data.test();
    let scores = nearest_prototype_scores(&protos, test.features());
    Ok(roc_from_labels(&scores, test.labels())?.auc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> BenchmarkConfig {
        BenchmarkConfig::new(
            SyntheticConfig {
                dim: 8,
                known_classes: 3,
                novel_classes: 2,
                samples_per_class: 20,
                cluster_std: 0.2,
                center_scale: 1.0,
                seed: 3,
            },
            TrainConfig {
                steps: 30,
                batch_size: 8,
                hidden1: 16,
                hidden2: 8,
                seed: 3,
                ..Default::default()
            },
            InferenceConfig::default(),
        )
    }

    #[test]
    fn runs_and_is_deterministic() {
        let cfg = tiny();
        let (_, a) = run_benchmark::<f64>(&cfg).unwrap();
        let (_, b) = run_benchmark::<f64>(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.scores.len(), 100);
        assert_eq!((a.mnd.n_known, a.mnd.n_novel), (60, 40));
        assert!((0.0..=1.0).contains(&a.mnd.auc));
    }

    #[test]
    fn top_n_uses_the_probe() {
        let mut cfg = tiny();
        cfg.infer.top_n = TopN::Count(2);
        let (bench, eval) = run_benchmark::<f64>(&cfg).unwrap();
        assert!(bench.probe.get().is_some());
        assert_eq!(eval.scores.len(), 100);
    }

    #[test]
    fn seed_key_sets_both_parts() {
        let mut cfg = BenchmarkConfig::default();
        assert!(cfg.set("seed", "42").unwrap());
        assert_eq!((cfg.synth.seed, cfg.train.seed), (42, 42));
        assert!(!cfg.set("bogus", "1").unwrap());
        cfg.validate().unwrap();
        cfg.set("threads", "0").unwrap();
        assert!(cfg.validate().is_err());
        let keys: Vec<&str> = cfg.entries().iter().map(|(k, _)| *k).collect();
        assert_eq!(keys.iter().filter(|k| **k == "seed").count(), 1);
    }

    #[test]
    fn nearest_prototype_baseline() {
        use crate::numerics::Vector;
        let protos = PrototypeSet::new(vec![
            vec![Vector::new(vec![0.0, 0.0]).unwrap()],
            vec![Vector::new(vec![3.0, 4.0]).unwrap()],
        ])
        .unwrap();
        let q = Matrix::new(2, 2, vec![3.0, 4.0, 0.0, 1.0]).unwrap();
        assert_eq!(nearest_prototype_scores(&protos, &q), vec![0.0, -1.0]);
    }
}
