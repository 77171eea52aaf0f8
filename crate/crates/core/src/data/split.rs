use crate::data::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::scalar::Scalar;

/// Stratified shuffle split.
///
/// Each label's rows are shuffled and `round(n * holdout_fraction)` of them
/// go to the holdout part, clamped so that both parts keep at least one row
/// of every label with two or more samples. Both parts preserve the original
/// row order.
pub fn split<T: Scalar>(
    ds: &LabeledDataset<T>,
    holdout_fraction: f64,
    rng: &mut RngStream,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
        return Err(Error::contract(format!(
            "holdout fraction {holdout_fraction} is not in (0, 1)"
        )));
    }
    let mut main = Vec::new();
    let mut holdout = Vec::new();
    for mut rows in ds.rows_by_label() {
        let n = rows.len();
        if n == 0 {
            continue;
        }
        rng.shuffle(&mut rows);
        let mut take = (n as f64 * holdout_fraction).round() as usize;
        if n >= 2 {
            take = take.clamp(1, n - 1);
        }
        holdout.extend_from_slice(&rows[..take]);
        main.extend_from_slice(&rows[take..]);
    }
    main.sort_unstable();
    holdout.sort_unstable();
    Ok((ds.subset(&main), ds.subset(&holdout)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;
    use proptest::prelude::*;

    fn dataset(counts: &[usize]) -> LabeledDataset<f64> {
        let mut labels = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            labels.extend(std::iter::repeat_n(c + 1, n));
        }
        let data = (0..labels.len()).flat_map(|i| [1.0, i as f64]).collect();
        let m = Matrix::new(labels.len(), 2, data).unwrap();
        LabeledDataset::new(m, labels, counts.len()).unwrap()
    }

    #[test]
    fn even_split() {
        let ds = dataset(&[10, 10, 10]);
        let (a, b) = split(&ds, 0.5, &mut RngStream::new(1)).unwrap();
        for c in 1..=3 {
            assert_eq!(a.class_rows(c).len(), 5);
            assert_eq!(b.class_rows(c).len(), 5);
        }
    }

    #[test]
    fn two_samples_split_one_each() {
        let ds = dataset(&[2, 2]);
        let (a, b) = split(&ds, 0.5, &mut RngStream::new(3)).unwrap();
        assert_eq!((a.len(), b.len()), (2, 2));
        assert_eq!(a.known_classes_present(), vec![1, 2]);
        assert_eq!(b.known_classes_present(), vec![1, 2]);
    }

    #[test]
    fn deterministic_and_validated() {
        let ds = dataset(&[7, 9]);
        let x = split(&ds, 0.3, &mut RngStream::new(5)).unwrap();
        let y = split(&ds, 0.3, &mut RngStream::new(5)).unwrap();
        assert_eq!(x, y);
        assert!(split(&ds, 0.0, &mut RngStream::new(5)).is_err());
        assert!(split(&ds, 1.0, &mut RngStream::new(5)).is_err());
    }

    proptest! {
        #[test]
        fn preserves_samples(counts in proptest::collection::vec(2usize..12, 1..5), frac in 0.05f64..0.95, seed: u64) {
            let ds = dataset(&counts);
            let (a, b) = split(&ds, frac, &mut RngStream::new(seed)).unwrap();
            prop_assert_eq!(a.len() + b.len(), ds.len());
            // Second column is the original row index, so it identifies rows.
            let mut ids: Vec<(usize, u64)> = a.features().iter_rows().zip(a.labels())
                .chain(b.features().iter_rows().zip(b.labels()))
                .map(|(r, l)| (*l, (r[1] / r[0]).round() as u64))
                .collect();
            ids.sort_unstable();
            let mut orig: Vec<(usize, u64)> = ds.features().iter_rows().zip(ds.labels())
                .map(|(r, l)| (*l, (r[1] / r[0]).round() as u64))
                .collect();
            orig.sort_unstable();
            prop_assert_eq!(ids, orig);
            prop_assert_eq!(a.known_classes_present().len(), counts.len());
            prop_assert_eq!(b.known_classes_present().len(), counts.len());
        }
    }
}
