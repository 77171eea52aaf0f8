//! The five workflows, generic over the arithmetic type.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mnd_core::data::{
    compute_prototypes, generate_synthetic, load_feature_csv, load_prototypes, write_feature_csv,
    write_prototypes, DEFAULT_KMEANS_ITERS,
};
use mnd_core::evaluation::{
    choose_threshold, roc_from_labels, sweep, train_linear_probe, SweepKind, STREAM_PROBE,
    STREAM_PROTOTYPES,
};
use mnd_core::inference::{
    load_class_scores, load_scores, score_dataset, write_scores, ScoreRecord, TopN,
};
use mnd_core::network::{load_checkpoint, save_checkpoint};
use mnd_core::numerics::RngStream;
use mnd_core::training::train_with_observer;
use mnd_core::Scalar;

use crate::options::Effective;

/// `println!` that ignores a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}
use crate::output::{header, write_sidecar, OutDir};

/// Files consumed by `score`, and by `eval` when it scores internally.
#[derive(clap::Args, Clone, Debug, Default)]
pub struct ScoreInputs {
    /// Trained network written by `train`
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Prototype CSV written by `train`
    #[arg(long, value_name = "FILE")]
    pub prototypes: Option<PathBuf>,
    /// Feature CSV to score; label 0 marks novel rows
    #[arg(long, value_name = "FILE")]
    pub test: Option<PathBuf>,
    /// Per-row class scores (K columns) ranking classes for --top-n
    #[arg(long, value_name = "FILE")]
    pub base_scores: Option<PathBuf>,
    /// Training features; fits a linear probe for --top-n when no
    /// --base-scores file is given
    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,
}

impl ScoreInputs {
    fn paths(&self) -> Vec<&Path> {
        [
            &self.checkpoint,
            &self.prototypes,
            &self.test,
            &self.base_scores,
            &self.train,
        ]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path)
        .collect()
    }
}

fn required<'a>(p: &'a Option<PathBuf>, flag: &str, command: &str) -> Result<&'a Path> {
    p.as_deref()
        .with_context(|| format!("{command} needs --{flag}"))
}

pub fn synth<T: Scalar>(out: &Path, eff: &Effective) -> Result<()> {
    let cfg = &eff.bench.synth;
    let data = generate_synthetic::<T>(cfg)?;
    let out = OutDir::create(out, &[])?;
    let h = header("synth", cfg.seed);
    for (name, ds) in [("train.csv", data.train.clone()), ("test.csv", data.test())] {
        let path = out.file(name)?;
        write_feature_csv(&path, &ds, &h)?;
        write_sidecar(&path, &h, eff)?;
        say!("wrote {} ({} rows)", path.display(), ds.len());
    }
    Ok(())
}

pub fn train<T: Scalar>(train_path: &Path, out: &Path, eff: &Effective) -> Result<()> {
    let cfg = &eff.bench;
    let ds = load_feature_csv::<T>(train_path, cfg.synth.known_classes)?;
    let out = OutDir::create(out, &[train_path])?;
    let h = header("train", cfg.seed());
    let steps = cfg.train.steps;
    let every = (steps / 10).max(1);
    let outcome = train_with_observer(&ds, &cfg.train, |r| {
        if r.step % every == 0 || r.step == steps {
            eprintln!(
                "step {}/{steps} loss {:.6} zero-set {:.6} nonzero-set {:.6}",
                r.step, r.total, r.zero_set, r.nonzero_set
            );
        }
    })
    .with_context(|| format!("training on {}", train_path.display()))?;

    let mut rng = RngStream::derive(cfg.synth.seed, STREAM_PROTOTYPES);
    let protos = compute_prototypes(
        &ds,
        cfg.infer.prototypes_per_class,
        DEFAULT_KMEANS_ITERS,
        &mut rng,
    )?;

    let ckpt = out.file("checkpoint.txt")?;
    save_checkpoint(&outcome.params, &ckpt, &h)?;
    let hist = out.file("history.csv")?;
    outcome.history.write_csv(&hist, &h)?;
    let proto_path = out.file("prototypes.csv")?;
    write_prototypes(&proto_path, &protos, &h)?;
    for p in [&ckpt, &hist, &proto_path] {
        write_sidecar(p, &h, eff)?;
        say!("wrote {}", p.display());
    }
    Ok(())
}

/// Scores every row of the test file.
fn run_scoring<T: Scalar>(
    inputs: &ScoreInputs,
    eff: &Effective,
    command: &str,
) -> Result<Vec<ScoreRecord>> {
    let cfg = &eff.bench;
    let ckpt_path = required(&inputs.checkpoint, "checkpoint", command)?;
    let proto_path = required(&inputs.prototypes, "prototypes", command)?;
    let test_path = required(&inputs.test, "test", command)?;

    let params = load_checkpoint::<T>(ckpt_path)?;
    let arch = params.architecture();
    let k = arch.num_classes;
    let protos = load_prototypes::<T>(proto_path, k)?;
    let test = load_feature_csv::<T>(test_path, k)?;
    if test.dim() != arch.input_dim {
        bail!(
            "{} has {}-dimensional features but {} expects {}",
            test_path.display(),
            test.dim(),
            ckpt_path.display(),
            arch.input_dim
        );
    }
    if protos.dim() != arch.input_dim || protos.num_classes() != k {
        bail!(
            "{} holds {} classes of dimension {}, but {} expects {k} classes of dimension {}",
            proto_path.display(),
            protos.num_classes(),
            protos.dim(),
            ckpt_path.display(),
            arch.input_dim
        );
    }
    cfg.infer.validate(k)?;

    let restricts = matches!(cfg.infer.top_n, TopN::Count(n) if n < k);
    let class_scores = if !restricts {
        None
    } else if let Some(p) = &inputs.base_scores {
        let m = load_class_scores::<T>(p, k)?;
        if m.rows() != test.len() {
            bail!(
                "{} has {} rows but {} has {}",
                p.display(),
                m.rows(),
                test_path.display(),
                test.len()
            );
        }
        Some(m)
    } else if let Some(p) = &inputs.train {
        let train = load_feature_csv::<T>(p, k)?;
        let mut rng = RngStream::derive(cfg.seed(), STREAM_PROBE);
        let probe = train_linear_probe(&train, &cfg.probe, &mut rng)
            .with_context(|| format!("fitting probe on {}", p.display()))?;
        Some(probe.class_scores_matrix(test.features())?)
    } else {
        bail!(
            "--top-n {} needs --base-scores or --train to rank classes",
            cfg.infer.top_n
        );
    };

    Ok(score_dataset(
        &params,
        &protos,
        &test,
        class_scores.as_ref(),
        &cfg.infer,
        cfg.threads,
    )?)
}

pub fn score<T: Scalar>(inputs: &ScoreInputs, out: &Path, eff: &Effective) -> Result<()> {
    let scores = run_scoring::<T>(inputs, eff, "score")?;
    let out = OutDir::create(out, &inputs.paths())?;
    let h = header("score", eff.bench.seed());
    let path = out.file("scores.csv")?;
    write_scores(&path, &scores, &h)?;
    write_sidecar(&path, &h, eff)?;
    say!("wrote {} ({} rows)", path.display(), scores.len());
    Ok(())
}

pub fn eval<T: Scalar>(
    scores_path: Option<&Path>,
    inputs: &ScoreInputs,
    out_dir: &Path,
    eff: &Effective,
) -> Result<()> {
    let h = header("eval", eff.bench.seed());
    let mut protected = inputs.paths();
    protected.extend(scores_path);
    let out = OutDir::create(out_dir, &protected)?;
    let scores = match scores_path {
        Some(p) => load_scores(p)?,
        None => {
            let s = run_scoring::<T>(inputs, eff, "eval")?;
            let path = out.file("scores.csv")?;
            write_scores(&path, &s, &h)?;
            write_sidecar(&path, &h, eff)?;
            s
        }
    };
    let values: Vec<f64> = scores.iter().map(|s| s.membership_score).collect();
    let labels: Vec<usize> = scores.iter().map(|s| s.true_label).collect();
    let source = scores_path.map_or_else(
        || "scored test set".to_string(),
        |p| p.display().to_string(),
    );
    let roc = roc_from_labels(&values, &labels).with_context(|| format!("evaluating {source}"))?;
    let path = out.file("roc.csv")?;
    roc.write_csv(&path, &h)?;
    write_sidecar(&path, &h, eff)?;

    let (known, novel): (Vec<_>, Vec<_>) = values
        .iter()
        .copied()
        .zip(labels.iter().copied())
        .partition(|(_, l)| *l != 0);
    let known: Vec<f64> = known.into_iter().map(|(s, _)| s).collect();
    let novel: Vec<f64> = novel.into_iter().map(|(s, _)| s).collect();
    let t = choose_threshold(&known, &novel)?;
    say!("auc {}", roc.auc);
    say!("known {} novel {}", roc.n_known, roc.n_novel);
    say!("youden_threshold {t}");
    Ok(())
}

pub fn run_sweep<T: Scalar>(
    kind: SweepKind,
    values: &[f64],
    out: &Path,
    eff: &Effective,
) -> Result<()> {
    let report = sweep::<T>(kind, values, &eff.bench)?;
    let out = OutDir::create(out, &[])?;
    let h = header("sweep", report.seed);
    let path = out.file("sweep.csv")?;
    report.write(&path, &h)?;
    write_sidecar(&path, &h, eff)?;
    say!("{kind} auc baseline_auc");
    for p in &report.points {
        say!("{} {:.6} {:.6}", p.value, p.auc, p.baseline_auc);
    }
    say!("wrote {}", path.display());
    Ok(())
}
