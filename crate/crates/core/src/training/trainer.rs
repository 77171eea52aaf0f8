//! The training loop: sample α, sample a source pair, mix, forward the
//! triplet, score it with the Constituency loss, back-propagate, update
//! with Adam.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::{entry, parse_value, Settings};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::network::{Architecture, NetworkParams, TripletBatch};
use crate::numerics::{FlushSubnormals, Matrix, RngStream};
use crate::scalar::Scalar;
use crate::training::adam::{AdamConfig, AdamState};
use crate::training::loss::{build_beta, constituency_loss};
use crate::training::sampler::{sample_alpha, PairSampler};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Weight of the mixing-set term of the loss.
    pub g: f64,
    pub adam: AdamConfig,
    /// Triplets per update; loss and gradients are averaged over the batch.
    pub batch_size: usize,
    pub steps: usize,
    pub matched_pair_prob: f64,
    pub dropout_p: f64,
    pub hidden1: usize,
    pub hidden2: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            g: 1000.0,
            adam: AdamConfig::default(),
            batch_size: 64,
            steps: 20_000,
            matched_pair_prob: 0.2,
            dropout_p: 0.5,
            hidden1: Architecture::DEFAULT_HIDDEN1,
            hidden2: Architecture::DEFAULT_HIDDEN2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 1.0) || !self.g.is_finite() {
            return Err(Error::contract(format!(
                "loss weight g = {} must be a finite value >= 1",
                self.g
            )));
        }
        self.adam.validate()?;
        if self.batch_size == 0 || self.steps == 0 {
            return Err(Error::contract(
                "batch size and step count must be positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.matched_pair_prob) {
            return Err(Error::contract(format!(
                "matched pair probability {} is not in [0, 1]",
                self.matched_pair_prob
            )));
        }
        crate::network::params::validate_dropout(self.dropout_p)?;
        if self.hidden1 == 0 || self.hidden2 == 0 {
            return Err(Error::contract("hidden layer widths must be positive"));
        }
        Ok(())
    }

    pub fn architecture(&self, input_dim: usize, num_classes: usize) -> Architecture {
        Architecture {
            input_dim,
            hidden1: self.hidden1,
            hidden2: self.hidden2,
            num_classes,
        }
    }
}

impl Settings for TrainConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "g" => self.g = parse_value(key, value)?,
            "lr" | "learning-rate" => self.adam.learning_rate = parse_value(key, value)?,
            "adam-beta1" => self.adam.beta1 = parse_value(key, value)?,
            "adam-beta2" => self.adam.beta2 = parse_value(key, value)?,
            "adam-eps" => self.adam.eps = parse_value(key, value)?,
            "batch-size" => self.batch_size = parse_value(key, value)?,
            "steps" => self.steps = parse_value(key, value)?,
            "matched-pair-prob" => self.matched_pair_prob = parse_value(key, value)?,
            "dropout" => self.dropout_p = parse_value(key, value)?,
            "hidden1" => self.hidden1 = parse_value(key, value)?,
            "hidden2" => self.hidden2 = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            entry("seed", self.seed),
            entry("g", self.g),
            entry("lr", self.adam.learning_rate),
            entry("adam-beta1", self.adam.beta1),
            entry("adam-beta2", self.adam.beta2),
            entry("adam-eps", self.adam.eps),
            entry("batch-size", self.batch_size),
            entry("steps", self.steps),
            entry("matched-pair-prob", self.matched_pair_prob),
            entry("dropout", self.dropout_p),
            entry("hidden1", self.hidden1),
            entry("hidden2", self.hidden2),
        ]
    }
}

/// Batch-averaged loss of one update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub total: f64,
    /// Penalty on outputs outside the mixing set.
    pub zero_set: f64,
    /// Unweighted squared error on the mixing set.
    pub nonzero_set: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingHistory {
    pub records: Vec<StepRecord>,
}

impl TrainingHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn mean_over(&self, range: std::ops::Range<usize>, field: impl Fn(&StepRecord) -> f64) -> f64 {
        let slice = &self.records[range];
        slice.iter().map(field).sum::<f64>() / slice.len().max(1) as f64
    }

    /// Mean total loss over the first `window` steps.
    pub fn head_total(&self, window: usize) -> f64 {
        self.mean_over(0..window.min(self.len()), |r| r.total)
    }

    /// Mean total loss over the last `window` steps.
    pub fn tail_total(&self, window: usize) -> f64 {
        self.mean_over(self.len().saturating_sub(window)..self.len(), |r| r.total)
    }

    /// Mean mixing-set loss over the last `window` steps.
    pub fn tail_nonzero(&self, window: usize) -> f64 {
        self.mean_over(self.len().saturating_sub(window)..self.len(), |r| {
            r.nonzero_set
        })
    }

    /// Mean off-support loss over the last `window` steps.
    pub fn tail_zero(&self, window: usize) -> f64 {
        self.mean_over(self.len().saturating_sub(window)..self.len(), |r| {
            r.zero_set
        })
    }

    /// Writes `step,total_loss,zero_set_loss,nonzero_set_loss`.
    pub fn write_csv(&self, path: impl AsRef<Path>, header: &[String]) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let res = (|| {
            for h in header {
                writeln!(w, "# {h}")?;
            }
            writeln!(w, "step,total_loss,zero_set_loss,nonzero_set_loss")?;
            for r in &self.records {
                writeln!(w, "{},{},{},{}", r.step, r.total, r.zero_set, r.nonzero_set)?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub params: NetworkParams<T>,
    pub history: TrainingHistory,
}

const STREAM_INIT: u64 = 10;
const STREAM_SAMPLING: u64 = 11;
const STREAM_DROPOUT: u64 = 12;

/// Trains a network on `ds` with the settings in `cfg`. Fully determined by
/// `cfg.seed`.
///
/// Subnormal values are flushed to zero on the calling thread for the
/// duration of the call.
pub fn train<T: Scalar>(ds: &LabeledDataset<T>, cfg: &TrainConfig) -> Result<TrainOutcome<T>> {
    train_with_observer(ds, cfg, |_| {})
}

/// [`train`], calling `observer` after every update.
pub fn train_with_observer<T: Scalar>(
    ds: &LabeledDataset<T>,
    cfg: &TrainConfig,
    mut observer: impl FnMut(&StepRecord),
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    let _flush = FlushSubnormals::enable();
    let sampler = PairSampler::new(ds, cfg.matched_pair_prob)?;
    let k = ds.num_known_classes();
    let arch = cfg.architecture(ds.dim(), k);
    let mut params = NetworkParams::<T>::init(
        arch,
        cfg.dropout_p,
        &mut RngStream::derive(cfg.seed, STREAM_INIT),
    )?;
    let mut sample_rng = RngStream::derive(cfg.seed, STREAM_SAMPLING);
    let mut dropout_rng = RngStream::derive(cfg.seed, STREAM_DROPOUT);

    let lengths: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
    let mut adam = AdamState::<T>::new(&lengths);
    let g = T::of(cfg.g);
    let n = cfg.batch_size;
    let inv_n = T::one() / T::of(n as f64);
    let mut batch = TripletBatch::zeros(n, ds.dim());
    let mut betas = Vec::with_capacity(n);
    let mut d_out = Matrix::zeros(n, k);
    let mut history = TrainingHistory {
        records: Vec::with_capacity(cfg.steps),
    };

    for step in 1..=cfg.steps {
        betas.clear();
        for b in 0..n {
            let alpha: T = sample_alpha(&mut sample_rng);
            let pair = sampler.sample(&mut sample_rng);
            batch.set_mixture(b, ds.row(pair.first), ds.row(pair.second), alpha)?;
            betas.push(build_beta(pair.first_class, pair.second_class, alpha, k)?);
        }

        let cache = params.forward_batch(&batch, Some(&mut dropout_rng))?;
        let (mut total, mut zero, mut nonzero) = (0.0, 0.0, 0.0);
        for (b, beta) in betas.iter().enumerate() {
            let loss = constituency_loss(cache.u(b), beta, g)?;
            total += loss.total.to_f64_lossy();
            zero += loss.zero_set.to_f64_lossy();
            nonzero += loss.nonzero_set.to_f64_lossy();
            for (d, gr) in d_out.row_mut(b).iter_mut().zip(&loss.gradient) {
                *d = *gr * inv_n;
            }
        }
        if !total.is_finite() {
            return Err(Error::NonFinite(format!("loss at step {step}")));
        }
        let grads = params.backward(&cache, &d_out)?;
        adam.step(&mut params.tensors_mut(), &grads.tensors(), &cfg.adam)?;

        let record = StepRecord {
            step,
            total: total / n as f64,
            zero_set: zero / n as f64,
            nonzero_set: nonzero / n as f64,
        };
        observer(&record);
        history.records.push(record);
    }
    Ok(TrainOutcome { params, history })
}
