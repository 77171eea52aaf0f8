//! Per-class representative vectors: class means, or k-means centroids when
//! a class is summarized by several prototypes.

use crate::data::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::numerics::linalg::squared_distance;
use crate::numerics::{RngStream, Vector};
use crate::scalar::Scalar;

/// Lloyd iteration cap used when the caller does not choose one.
pub const DEFAULT_KMEANS_ITERS: usize = 25;

/// `P` prototypes for each of the classes `1..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeSet<T> {
    per_class: Vec<Vec<Vector<T>>>,
}

impl<T: Scalar> PrototypeSet<T> {
    /// `per_class[c - 1]` holds the prototypes of class `c`.
    pub fn new(per_class: Vec<Vec<Vector<T>>>) -> Result<Self> {
        let p = per_class.first().map(Vec::len).unwrap_or(0);
        if p == 0 {
            return Err(Error::contract(
                "prototype set needs at least one class with at least one prototype",
            ));
        }
        let dim = per_class[0][0].len();
        for (i, protos) in per_class.iter().enumerate() {
            if protos.len() != p {
                return Err(Error::contract(format!(
                    "class {} has {} prototypes, expected {p}",
                    i + 1,
                    protos.len()
                )));
            }
            if let Some(bad) = protos.iter().find(|v| v.len() != dim) {
                return Err(Error::shapes(
                    "PrototypeSet",
                    format!("dim {dim}"),
                    format!("class {} dim {}", i + 1, bad.len()),
                ));
            }
        }
        Ok(PrototypeSet { per_class })
    }

    pub fn num_classes(&self) -> usize {
        self.per_class.len()
    }

    pub fn per_class(&self) -> usize {
        self.per_class[0].len()
    }

    pub fn dim(&self) -> usize {
        self.per_class[0][0].len()
    }

    /// Prototypes of class `class` (1-based).
    pub fn class(&self, class: usize) -> &[Vector<T>] {
        &self.per_class[class - 1]
    }

    /// `(class, prototype)` pairs, class-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Vector<T>)> + '_ {
        self.per_class
            .iter()
            .enumerate()
            .flat_map(|(i, ps)| ps.iter().map(move |p| (i + 1, p)))
    }
}

/// Outcome of one k-means run.
#[derive(Clone, Debug)]
pub struct KMeans<T> {
    pub centroids: Vec<Vec<T>>,
    pub assignment: Vec<usize>,
    /// Sum of squared distances to the assigned centroid, recorded after
    /// every assignment step.
    pub objective: Vec<T>,
}

fn mean_of<T: Scalar>(points: &[&[T]]) -> Vec<T> {
    let dim = points[0].len();
    let mut acc = vec![T::zero(); dim];
    for p in points {
        for (a, v) in acc.iter_mut().zip(p.iter()) {
            *a += *v;
        }
    }
    let n = T::of(points.len() as f64);
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

fn nearest<T: Scalar>(point: &[T], centroids: &[Vec<T>]) -> (usize, T) {
    let mut best = (0, squared_distance(point, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Lloyd's k-means.
///
/// Seeding takes a uniformly random first center, then repeatedly the point
/// farthest from all chosen centers (lowest index on ties). Each iteration
/// assigns points to the nearest centroid (lowest index on ties), repairs
/// empty clusters by moving in the point farthest from its centroid, and
/// recomputes means. Stops after `max_iters` iterations or when the
/// assignment no longer changes.
pub fn kmeans<T: Scalar>(
    points: &[&[T]],
    k: usize,
    max_iters: usize,
    rng: &mut RngStream,
) -> Result<KMeans<T>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::contract(format!(
            "k-means needs 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let mut centroids: Vec<Vec<T>> = vec![points[rng.below(n)].to_vec()];
    let mut min_dist: Vec<T> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let mut far = 0;
        for i in 1..n {
            if min_dist[i] > min_dist[far] {
                far = i;
            }
        }
        let c = points[far].to_vec();
        for (d, p) in min_dist.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &c));
        }
        centroids.push(c);
    }

    let mut assignment = vec![usize::MAX; n];
    let mut objective = Vec::new();
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        let mut dist = vec![T::zero(); n];
        for (i, p) in points.iter().enumerate() {
            let (j, d) = nearest(p, &centroids);
            changed |= assignment[i] != j;
            assignment[i] = j;
            dist[i] = d;
        }

        let mut sizes = vec![0usize; k];
        assignment.iter().for_each(|&j| sizes[j] += 1);
        while let Some(empty) = sizes.iter().position(|&s| s == 0) {
            // Farthest point among clusters that can spare one.
            let donor = (0..n)
                .filter(|&i| sizes[assignment[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                })
                .expect("k <= n guarantees a cluster with two points");
            sizes[assignment[donor]] -= 1;
            assignment[donor] = empty;
            sizes[empty] = 1;
            dist[donor] = T::zero();
            centroids[empty] = points[donor].to_vec();
            changed = true;
        }
        objective.push(dist.iter().fold(T::zero(), |a, d| a + *d));

        if !changed {
            break;
        }
        for (j, c) in centroids.iter_mut().enumerate() {
            let members: Vec<&[T]> = (0..n)
                .filter(|&i| assignment[i] == j)
                .map(|i| points[i])
                .collect();
            *c = mean_of(&members);
        }
    }
    Ok(KMeans {
        centroids,
        assignment,
        objective,
    })
}

/// Builds `per_class` prototypes for every known class `1..=K`.
///
/// With one prototype per class this is the arithmetic mean of the class's
/// (unit-norm) rows; the mean is not re-normalized. With more, the k-means
/// centroids of the class.
pub fn compute_prototypes<T: Scalar>(
    ds: &LabeledDataset<T>,
    per_class: usize,
    kmeans_iters: usize,
    rng: &mut RngStream,
) -> Result<PrototypeSet<T>> {
    if per_class == 0 {
        return Err(Error::contract("prototypes per class must be at least 1"));
    }
    let groups = ds.rows_by_label();
    let mut out = Vec::with_capacity(ds.num_known_classes());
    for (class, rows) in groups.iter().enumerate().skip(1) {
        if rows.len() < per_class {
            return Err(Error::contract(format!(
                "class {class} has {} samples, fewer than the {per_class} prototypes requested",
                rows.len()
            )));
        }
        let points: Vec<&[T]> = rows.iter().map(|&i| ds.row(i)).collect();
        let protos = if per_class == 1 {
            vec![mean_of(&points)]
        } else {
            kmeans(&points, per_class, kmeans_iters, rng)?.centroids
        };
        out.push(
            protos
                .into_iter()
                .map(Vector::new)
                .collect::<Result<Vec<_>>>()?,
        );
    }
    PrototypeSet::new(out)
}
