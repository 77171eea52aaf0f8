//! Query scoring: mix with prototypes, predict, reduce to a membership score.

use crate::data::{LabeledDataset, PrototypeSet};
use crate::error::{Error, Result};
use crate::inference::config::InferenceConfig;
use crate::inference::io::ScoreRecord;
use crate::network::{NetworkParams, TripletBatch};
use crate::numerics::{Matrix, Vector};
use crate::scalar::Scalar;

/// `(1 - test_alpha) * q + test_alpha * mu`.
pub fn mix_with_prototype<T: Scalar>(q: &[T], mu: &[T], test_alpha: f64) -> Result<Vector<T>> {
    if q.len() != mu.len() {
        return Err(Error::shapes(
            "mix_with_prototype",
            format!("query len {}", q.len()),
            format!("prototype len {}", mu.len()),
        ));
    }
    check_alpha(test_alpha)?;
    let a = T::of(test_alpha);
    let b = T::one() - a;
    Ok(Vector::from_vec(
        q.iter().zip(mu).map(|(x, m)| b * *x + a * *m).collect(),
    ))
}

fn check_alpha(test_alpha: f64) -> Result<()> {
    if !(test_alpha > 0.0 && test_alpha < 1.0) {
        return Err(Error::contract(format!(
            "test alpha {test_alpha} is not in (0, 1)"
        )));
    }
    Ok(())
}

/// Network outputs for one query, one row per prototype compared.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionMatrix<T> {
    pub rows: Matrix<T>,
    /// Class (1-based) of the prototype behind each row.
    pub row_class: Vec<usize>,
}

impl<T: Scalar> PredictionMatrix<T> {
    pub fn num_rows(&self) -> usize {
        self.rows.rows()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoveltyVerdict<T> {
    /// Mean over rows of each row's largest entry.
    pub membership_score: T,
    /// Set only when a threshold was supplied.
    pub is_novel: Option<bool>,
    pub per_row_max: Vec<T>,
}

fn check_classes(classes: &[usize], num_classes: usize) -> Result<()> {
    if classes.is_empty() {
        return Err(Error::contract("empty class set"));
    }
    if let Some(c) = classes.iter().find(|&&c| c == 0 || c > num_classes) {
        return Err(Error::contract(format!(
            "class {c} is outside 1..={num_classes}"
        )));
    }
    Ok(())
}

/// Appends the triplets `(q, mu_r, x_r)` for every prototype of `classes`.
fn push_triplets<T: Scalar>(
    batch: &mut TripletBatch<T>,
    slot: &mut usize,
    q: &[T],
    protos: &PrototypeSet<T>,
    classes: &[usize],
    test_alpha: f64,
    row_class: &mut Vec<usize>,
) -> Result<()> {
    for &c in classes {
        for mu in protos.class(c) {
            let x = mix_with_prototype(q, mu, test_alpha)?;
            batch.set(*slot, q, mu, &x)?;
            row_class.push(c);
            *slot += 1;
        }
    }
    Ok(())
}

fn check_inputs<T: Scalar>(
    params: &NetworkParams<T>,
    q: &[T],
    protos: &PrototypeSet<T>,
) -> Result<()> {
    let arch = params.architecture();
    if q.len() != arch.input_dim {
        return Err(Error::shapes(
            "prediction_matrix",
            format!("network input dim {}", arch.input_dim),
            format!("query len {}", q.len()),
        ));
    }
    if protos.dim() != arch.input_dim {
        return Err(Error::shapes(
            "prediction_matrix",
            format!("network input dim {}", arch.input_dim),
            format!("prototype dim {}", protos.dim()),
        ));
    }
    if protos.num_classes() != arch.num_classes {
        return Err(Error::shapes(
            "prediction_matrix",
            format!("network classes {}", arch.num_classes),
            format!("prototype classes {}", protos.num_classes()),
        ));
    }
    Ok(())
}

/// Runs every triplet `(q, mu_r, x_r)` over the prototypes of `classes`
/// through the network without dropout.
///
/// The query takes the first slot, the one that carries the α-weighted
/// source during training.
pub fn prediction_matrix<T: Scalar>(
    params: &NetworkParams<T>,
    q: &[T],
    protos: &PrototypeSet<T>,
    classes: &[usize],
    cfg: &InferenceConfig,
) -> Result<PredictionMatrix<T>> {
    check_inputs(params, q, protos)?;
    check_classes(classes, protos.num_classes())?;
    check_alpha(cfg.test_alpha)?;
    let n = classes.len() * protos.per_class();
    let mut batch = TripletBatch::zeros(n, q.len());
    let mut row_class = Vec::with_capacity(n);
    push_triplets(
        &mut batch,
        &mut 0,
        q,
        protos,
        classes,
        cfg.test_alpha,
        &mut row_class,
    )?;
    let cache = params.forward_batch(&batch, None)?;
    Ok(PredictionMatrix {
        rows: cache.output().clone(),
        row_class,
    })
}

/// Reduces a prediction matrix to its membership score.
pub fn membership_score<T: Scalar>(m: &PredictionMatrix<T>) -> Result<NoveltyVerdict<T>> {
    if m.num_rows() == 0 || m.rows.cols() == 0 {
        return Err(Error::contract(
            "membership score of an empty prediction matrix",
        ));
    }
    let per_row_max: Vec<T> = m
        .rows
        .iter_rows()
        .map(|row| row.iter().copied().fold(T::neg_infinity(), T::max))
        .collect();
    let membership_score = per_row_max.iter().copied().sum::<T>() / T::of(per_row_max.len() as f64);
    Ok(NoveltyVerdict {
        membership_score,
        is_novel: None,
        per_row_max,
    })
}

/// The `n` classes (1-based) with the largest scores, returned in
/// increasing class order. Equal scores prefer the smaller class.
pub fn select_top_n<T: Scalar>(class_scores: &[T], n: usize) -> Result<Vec<usize>> {
    let k = class_scores.len();
    if n == 0 || n > k {
        return Err(Error::contract(format!("top-n {n} is not in 1..={k}")));
    }
    if class_scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("class score".into()));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        class_scores[b]
            .partial_cmp(&class_scores[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = order[..n].iter().map(|i| i + 1).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// `true` when the score is strictly below `threshold`; a score equal to
/// the threshold counts as known.
pub fn decide_novel<T: Scalar>(verdict: &NoveltyVerdict<T>, threshold: f64) -> bool {
    verdict.membership_score.to_f64_lossy() < threshold
}

/// Scores many queries against one network and prototype set.
///
/// Queries are processed in chunks so each network call sees a batch of
/// roughly `TRIPLETS_PER_CALL` triplets; results do not depend on the
/// chunking or on `threads`.
pub struct Scorer<'a, T> {
    params: &'a NetworkParams<T>,
    protos: &'a PrototypeSet<T>,
    cfg: &'a InferenceConfig,
}

const TRIPLETS_PER_CALL: usize = 512;

impl<'a, T: Scalar> Scorer<'a, T> {
    pub fn new(
        params: &'a NetworkParams<T>,
        protos: &'a PrototypeSet<T>,
        cfg: &'a InferenceConfig,
    ) -> Result<Self> {
        let arch = params.architecture();
        cfg.validate(arch.num_classes)?;
        if protos.dim() != arch.input_dim || protos.num_classes() != arch.num_classes {
            return Err(Error::shapes(
                "Scorer",
                format!("network d={} K={}", arch.input_dim, arch.num_classes),
                format!("prototypes d={} K={}", protos.dim(), protos.num_classes()),
            ));
        }
        Ok(Scorer {
            params,
            protos,
            cfg,
        })
    }

    /// Classes to compare each query against. Restricting to fewer than `K`
    /// needs a `queries x K` matrix of base-classifier scores.
    pub fn class_sets(
        &self,
        num_queries: usize,
        class_scores: Option<&Matrix<T>>,
    ) -> Result<Vec<Vec<usize>>> {
        let k = self.protos.num_classes();
        let n = self.cfg.top_n.resolve(k);
        if n == k {
            return Ok(vec![(1..=k).collect(); num_queries]);
        }
        let scores = class_scores.ok_or_else(|| {
            Error::contract(format!(
                "top-n {} needs base-classifier class scores",
                self.cfg.top_n
            ))
        })?;
        if scores.shape() != (num_queries, k) {
            return Err(Error::shapes(
                "class scores",
                format!("{num_queries}x{k}"),
                format!("{:?}", scores.shape()),
            ));
        }
        scores.iter_rows().map(|row| select_top_n(row, n)).collect()
    }

    fn score_chunk(
        &self,
        queries: &[&[T]],
        classes: &[Vec<usize>],
    ) -> Result<Vec<NoveltyVerdict<T>>> {
        let per = self.protos.per_class();
        let total: usize = classes.iter().map(|c| c.len() * per).sum();
        let dim = self.params.architecture().input_dim;
        let mut batch = TripletBatch::zeros(total, dim);
        let mut slot = 0;
        let mut row_class = Vec::with_capacity(total);
        for (q, cs) in queries.iter().zip(classes) {
            if q.len() != dim {
                return Err(Error::shapes(
                    "score",
                    format!("network input dim {dim}"),
                    format!("query len {}", q.len()),
                ));
            }
            check_classes(cs, self.protos.num_classes())?;
            push_triplets(
                &mut batch,
                &mut slot,
                q,
                self.protos,
                cs,
                self.cfg.test_alpha,
                &mut row_class,
            )?;
        }
        let cache = self.params.forward_batch(&batch, None)?;
        let out = cache.output();
        let mut start = 0;
        let mut verdicts = Vec::with_capacity(queries.len());
        for cs in classes {
            let rows = cs.len() * per;
            let idx: Vec<usize> = (start..start + rows).collect();
            let m = PredictionMatrix {
                rows: out.select_rows(&idx),
                row_class: row_class[start..start + rows].to_vec(),
            };
            let mut v = membership_score(&m)?;
            v.is_novel = self.cfg.threshold.map(|t| decide_novel(&v, t));
            verdicts.push(v);
            start += rows;
        }
        Ok(verdicts)
    }

    fn score_serial(
        &self,
        queries: &[&[T]],
        classes: &[Vec<usize>],
    ) -> Result<Vec<NoveltyVerdict<T>>> {
        let per_query = self.protos.per_class() * self.protos.num_classes();
        let chunk = (TRIPLETS_PER_CALL / per_query.max(1)).max(1);
        let mut out = Vec::with_capacity(queries.len());
        for (qs, cs) in queries.chunks(chunk).zip(classes.chunks(chunk)) {
            out.extend(self.score_chunk(qs, cs)?);
        }
        Ok(out)
    }

    /// Verdicts for every row of `queries`, in row order.
    pub fn score(
        &self,
        queries: &Matrix<T>,
        class_scores: Option<&Matrix<T>>,
        threads: usize,
    ) -> Result<Vec<NoveltyVerdict<T>>> {
        let classes = self.class_sets(queries.rows(), class_scores)?;
        let rows: Vec<&[T]> = queries.iter_rows().collect();
        let threads = threads.max(1).min(rows.len().max(1));
        if threads == 1 {
            return self.score_serial(&rows, &classes);
        }
        let chunk = rows.len().div_ceil(threads);
        let parts: Vec<Result<Vec<NoveltyVerdict<T>>>> = std::thread::scope(|s| {
            let handles: Vec<_> = rows
                .chunks(chunk)
                .zip(classes.chunks(chunk))
                .map(|(qs, cs)| s.spawn(move || self.score_serial(qs, cs)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scoring thread panicked"))
                .collect()
        });
        let mut out = Vec::with_capacity(rows.len());
        for part in parts {
            out.extend(part?);
        }
        Ok(out)
    }
}

/// Scores every row of `ds` and pairs each score with its row index and
/// label.
pub fn score_dataset<T: Scalar>(
    params: &NetworkParams<T>,
    protos: &PrototypeSet<T>,
    ds: &LabeledDataset<T>,
    class_scores: Option<&Matrix<T>>,
    cfg: &InferenceConfig,
    threads: usize,
) -> Result<Vec<ScoreRecord>> {
    let verdicts = Scorer::new(params, protos, cfg)?.score(ds.features(), class_scores, threads)?;
    Ok(verdicts
        .into_iter()
        .enumerate()
        .map(|(i, v)| ScoreRecord {
            sample_index: i,
            true_label: ds.label(i),
            membership_score: v.membership_score.to_f64_lossy(),
            is_novel: v.is_novel,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::TopN;
    use crate::network::Architecture;
    use crate::numerics::RngStream;

    fn net(d: usize, k: usize) -> NetworkParams<f64> {
        let arch = Architecture {
            input_dim: d,
            hidden1: 8,
            hidden2: 6,
            num_classes: k,
        };
        NetworkParams::init(arch, 0.5, &mut RngStream::new(3)).unwrap()
    }

    fn protos(d: usize, k: usize, p: usize, seed: u64) -> PrototypeSet<f64> {
        let mut rng = RngStream::new(seed);
        PrototypeSet::new(
            (0..k)
                .map(|_| {
                    (0..p)
                        .map(|_| Vector::new((0..d).map(|_| rng.normal()).collect()).unwrap())
                        .collect()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn mixing_examples() {
        assert_eq!(
            mix_with_prototype(&[1.0, 0.0], &[0.0, 1.0], 0.5)
                .unwrap()
                .as_slice(),
            &[0.5, 0.5]
        );
        let v = mix_with_prototype(&[1.0_f64, 0.0], &[0.0, 1.0], 0.1).unwrap();
        assert!((v[0] - 0.9).abs() < 1e-15 && (v[1] - 0.1).abs() < 1e-15);
        assert_eq!(
            mix_with_prototype(&[0.3, -0.7], &[0.3, -0.7], 0.37)
                .unwrap()
                .as_slice(),
            &[0.3, -0.7]
        );
        assert!(mix_with_prototype(&[1.0], &[1.0, 2.0], 0.5).is_err());
        assert!(mix_with_prototype(&[1.0], &[1.0], 1.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let single = PredictionMatrix {
            rows: Matrix::new(1, 3, vec![0.2, 0.8, 0.1]).unwrap(),
            row_class: vec![1],
        };
        assert_eq!(membership_score(&single).unwrap().membership_score, 0.8);
        let two = PredictionMatrix::<f64> {
            rows: Matrix::new(2, 2, vec![0.9, 0.1, 0.1, 0.5]).unwrap(),
            row_class: vec![1, 2],
        };
        let v = membership_score(&two).unwrap();
        assert!((v.membership_score - 0.7).abs() < 1e-15);
        assert_eq!(v.per_row_max, vec![0.9, 0.5]);
        let empty = PredictionMatrix::<f64> {
            rows: Matrix::zeros(0, 2),
            row_class: vec![],
        };
        assert!(membership_score(&empty).is_err());
    }

    #[test]
    fn top_n_examples() {
        assert_eq!(select_top_n(&[0.1, 0.7, 0.2], 1).unwrap(), vec![2]);
        assert_eq!(select_top_n(&[0.5, 0.5, 0.1], 1).unwrap(), vec![1]);
        assert_eq!(select_top_n(&[0.1, 0.7, 0.2], 3).unwrap(), vec![1, 2, 3]);
        assert_eq!(select_top_n(&[0.3, 0.1, 0.2, 0.9], 2).unwrap(), vec![1, 4]);
        assert!(select_top_n(&[0.1, 0.2], 0).is_err());
        assert!(select_top_n(&[0.1, 0.2], 3).is_err());
    }

    #[test]
    fn threshold_boundary() {
        let v = |s: f64| NoveltyVerdict {
            membership_score: s,
            is_novel: None,
            per_row_max: vec![s],
        };
        assert!(!decide_novel(&v(0.9), 0.5));
        assert!(decide_novel(&v(0.1), 0.5));
        assert!(!decide_novel(&v(0.5), 0.5));
    }

    #[test]
    fn matrix_shape_and_determinism() {
        let p = net(4, 3);
        let pr = protos(4, 3, 2, 9);
        let cfg = InferenceConfig::default();
        let q = [0.5, -0.5, 0.5, 0.5];
        let m = prediction_matrix(&p, &q, &pr, &[1, 2, 3], &cfg).unwrap();
        assert_eq!(m.rows.shape(), (6, 3));
        assert_eq!(m.row_class, vec![1, 1, 2, 2, 3, 3]);
        assert!(m.rows.as_slice().iter().all(|v| *v > 0.0 && *v < 1.0));
        assert_eq!(m, prediction_matrix(&p, &q, &pr, &[1, 2, 3], &cfg).unwrap());
        assert_eq!(
            prediction_matrix(&p, &q, &pr, &[2], &cfg)
                .unwrap()
                .num_rows(),
            2
        );
        assert!(prediction_matrix(&p, &q, &pr, &[], &cfg).is_err());
        assert!(prediction_matrix(&p, &q, &pr, &[4], &cfg).is_err());
        assert!(prediction_matrix(&p, &q[..3], &pr, &[1], &cfg).is_err());
    }

    #[test]
    fn square_matrix_with_one_prototype() {
        let p = net(5, 4);
        let pr = protos(5, 4, 1, 2);
        let m = prediction_matrix(
            &p,
            &[0.1, 0.2, 0.3, 0.4, 0.5],
            &pr,
            &[1, 2, 3, 4],
            &InferenceConfig::default(),
        )
        .unwrap();
        assert_eq!(m.rows.shape(), (4, 4));
    }

    #[test]
    fn degenerate_prototypes_give_identical_rows() {
        let p = net(3, 3);
        let q = [0.6, 0.0, -0.8];
        let pr = PrototypeSet::new(vec![vec![Vector::new(q.to_vec()).unwrap()]; 3]).unwrap();
        let m = prediction_matrix(&p, &q, &pr, &[1, 2, 3], &InferenceConfig::default()).unwrap();
        for r in 1..3 {
            assert_eq!(m.rows.row(r), m.rows.row(0));
        }
    }

    #[test]
    fn scorer_matches_single_query_path_for_any_threads() {
        let p = net(4, 3);
        let pr = protos(4, 3, 2, 5);
        let cfg = InferenceConfig {
            threshold: Some(0.5),
            ..Default::default()
        };
        let mut rng = RngStream::new(8);
        let queries = Matrix::new(37, 4, (0..148).map(|_| rng.normal()).collect()).unwrap();
        let scorer = Scorer::new(&p, &pr, &cfg).unwrap();
        let one = scorer.score(&queries, None, 1).unwrap();
        assert_eq!(one, scorer.score(&queries, None, 3).unwrap());
        for (i, v) in one.iter().enumerate() {
            let m = prediction_matrix(&p, queries.row(i), &pr, &[1, 2, 3], &cfg).unwrap();
            let direct = membership_score(&m).unwrap();
            assert_eq!(v.membership_score, direct.membership_score);
            assert_eq!(v.is_novel, Some(decide_novel(&direct, 0.5)));
        }
    }

    #[test]
    fn scorer_top_n_needs_class_scores() {
        let p = net(4, 3);
        let pr = protos(4, 3, 1, 5);
        let cfg = InferenceConfig {
            top_n: TopN::Count(2),
            ..Default::default()
        };
        let scorer = Scorer::new(&p, &pr, &cfg).unwrap();
        let queries = Matrix::new(2, 4, vec![0.5; 8]).unwrap();
        assert!(scorer.score(&queries, None, 1).is_err());
        let cs = Matrix::new(2, 3, vec![0.1, 0.5, 0.4, 0.9, 0.05, 0.05]).unwrap();
        let sets = scorer.class_sets(2, Some(&cs)).unwrap();
        assert_eq!(sets, vec![vec![2, 3], vec![1, 2]]);
        let v = scorer.score(&queries, Some(&cs), 1).unwrap();
        assert_eq!(v[0].per_row_max.len(), 2);
    }
}
