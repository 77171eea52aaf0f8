//! Gaussian-cluster benchmark generator.

use crate::config::{entry, parse_value, Settings};
use crate::data::dataset::{LabeledDataset, NOVEL_LABEL};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub dim: usize,
    pub known_classes: usize,
    pub novel_classes: usize,
    pub samples_per_class: usize,
    /// Per-coordinate standard deviation of each isotropic cluster.
    pub cluster_std: f64,
    /// Cluster center coordinates are uniform in `[-center_scale, center_scale]`.
    pub center_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            dim: 64,
            known_classes: 8,
            novel_classes: 8,
            samples_per_class: 200,
            cluster_std: 1.25,
            center_scale: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("dim", self.dim),
            ("known_classes", self.known_classes),
            ("novel_classes", self.novel_classes),
            ("samples_per_class", self.samples_per_class),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::contract(format!(
                "synthetic config: {name} must be positive"
            )));
        }
        if !(self.cluster_std > 0.0) || !self.cluster_std.is_finite() {
            return Err(Error::contract(
                "synthetic config: cluster_std must be positive and finite",
            ));
        }
        if !(self.center_scale > 0.0) || !self.center_scale.is_finite() {
            return Err(Error::contract(
                "synthetic config: center_scale must be positive and finite",
            ));
        }
        Ok(())
    }
}

impl Settings for SyntheticConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "dim" => self.dim = parse_value(key, value)?,
            "known-classes" => self.known_classes = parse_value(key, value)?,
            "novel-classes" => self.novel_classes = parse_value(key, value)?,
            "samples-per-class" => self.samples_per_class = parse_value(key, value)?,
            "cluster-std" => self.cluster_std = parse_value(key, value)?,
            "center-scale" => self.center_scale = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            entry("seed", self.seed),
            entry("dim", self.dim),
            entry("known-classes", self.known_classes),
            entry("novel-classes", self.novel_classes),
            entry("samples-per-class", self.samples_per_class),
            entry("cluster-std", self.cluster_std),
            entry("center-scale", self.center_scale),
        ]
    }
}

/// The three splits produced by [`generate_synthetic`].
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticData<T> {
    pub train: LabeledDataset<T>,
    pub test_known: LabeledDataset<T>,
    pub test_novel: LabeledDataset<T>,
}

impl<T: Scalar> SyntheticData<T> {
    /// Known test rows followed by novel test rows.
    pub fn test(&self) -> LabeledDataset<T> {
        self.test_known
            .concat(&self.test_novel)
            .expect("splits share shape")
    }
}

const STREAM_CENTERS: u64 = 1;
const STREAM_TRAIN: u64 = 2;
const STREAM_TEST_KNOWN: u64 = 3;
const STREAM_TEST_NOVEL: u64 = 4;

fn sample_clusters<T: Scalar>(
    centers: &[Vec<f64>],
    labels: impl Fn(usize) -> usize,
    cfg: &SyntheticConfig,
    rng: &mut RngStream,
) -> Result<LabeledDataset<T>> {
    let n = centers.len() * cfg.samples_per_class;
    let mut data = Vec::with_capacity(n * cfg.dim);
    let mut out_labels = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..cfg.samples_per_class {
            data.extend(
                center
                    .iter()
                    .map(|m| T::of(m + cfg.cluster_std * rng.normal())),
            );
            out_labels.push(labels(c));
        }
    }
    LabeledDataset::new(
        Matrix::new(n, cfg.dim, data)?,
        out_labels,
        cfg.known_classes,
    )
}

/// Draws `K + M` cluster centers and isotropic Gaussian samples around them.
///
/// Known classes are labelled `1..=K` in `train` and `test_known`; every
/// novel sample is labelled 0. Train and test samples come from separate
/// random streams. All rows are unit-normalized after sampling.
pub fn generate_synthetic<T: Scalar>(cfg: &SyntheticConfig) -> Result<SyntheticData<T>> {
    cfg.validate()?;
    let mut center_rng = RngStream::derive(cfg.seed, STREAM_CENTERS);
    let centers: Vec<Vec<f64>> = (0..cfg.known_classes + cfg.novel_classes)
        .map(|_| {
            (0..cfg.dim)
                .map(|_| center_rng.uniform(-cfg.center_scale, cfg.center_scale))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let (known, novel) = centers.split_at(cfg.known_classes);

    let train = sample_clusters(
        known,
        |c| c + 1,
        cfg,
        &mut RngStream::derive(cfg.seed, STREAM_TRAIN),
    )?;
    let test_known = sample_clusters(
        known,
        |c| c + 1,
        cfg,
        &mut RngStream::derive(cfg.seed, STREAM_TEST_KNOWN),
    )?;
    let test_novel = sample_clusters(
        novel,
        |_| NOVEL_LABEL,
        cfg,
        &mut RngStream::derive(cfg.seed, STREAM_TEST_NOVEL),
    )?;
    Ok(SyntheticData {
        train,
        test_known,
        test_novel,
    })
}
