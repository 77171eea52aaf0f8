use crate::error::{Error, Result};

/// Operating threshold maximizing Youden's `J = TPR - FPR`, with samples
/// scoring `>= t` called known.
///
/// Candidates are the distinct observed scores. Every threshold in
/// `(s_prev, s]` classifies like candidate `s`, so the midpoint of that
/// interval is returned; the lowest score has no lower neighbour and is
/// returned as is. Among equally good candidates the smallest wins.
pub fn choose_threshold(known: &[f64], novel: &[f64]) -> Result<f64> {
    if known.is_empty() || novel.is_empty() {
        return Err(Error::contract(
            "threshold selection needs known and novel scores",
        ));
    }
    if known.iter().chain(novel).any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("validation score".into()));
    }
    let mut candidates: Vec<f64> = known.iter().chain(novel).copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| a == b);

    let mut k_sorted = known.to_vec();
    let mut n_sorted = novel.to_vec();
    k_sorted.sort_by(f64::total_cmp);
    n_sorted.sort_by(f64::total_cmp);
    let nk = known.len() as i128;
    let nn = novel.len() as i128;

    // J scaled by nk * nn so comparisons are exact.
    let mut best: Option<(i128, usize)> = None;
    for (i, &t) in candidates.iter().enumerate() {
        let tp = (k_sorted.len() - k_sorted.partition_point(|&s| s < t)) as i128;
        let fp = (n_sorted.len() - n_sorted.partition_point(|&s| s < t)) as i128;
        let j = tp * nn - fp * nk;
        if best.is_none_or(|(bj, _)| j > bj) {
            best = Some((j, i));
        }
    }
    let (_, i) = best.expect("at least one candidate");
    Ok(if i == 0 {
        candidates[0]
    } else {
        0.5 * (candidates[i - 1] + candidates[i])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn youden(known: &[f64], novel: &[f64], t: f64) -> f64 {
        let tpr = known.iter().filter(|&&s| s >= t).count() as f64 / known.len() as f64;
        let fpr = novel.iter().filter(|&&s| s >= t).count() as f64 / novel.len() as f64;
        tpr - fpr
    }

    #[test]
    fn separated_scores_give_the_gap_midpoint() {
        assert_eq!(choose_threshold(&[0.9, 0.8], &[0.3]).unwrap(), 0.55);
        assert_eq!(choose_threshold(&[0.9, 0.7], &[0.1, 0.3]).unwrap(), 0.5);
    }

    #[test]
    fn identical_distributions_pick_the_smallest_candidate() {
        assert_eq!(
            choose_threshold(&[0.2, 0.5, 0.8], &[0.2, 0.5, 0.8]).unwrap(),
            0.2
        );
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        let mut rng = crate::numerics::RngStream::new(12);
        for _ in 0..200 {
            let known: Vec<f64> = (0..1 + rng.below(15))
                .map(|_| (rng.below(10) as f64) / 10.0 + 0.1)
                .collect();
            let novel: Vec<f64> = (0..1 + rng.below(15))
                .map(|_| (rng.below(10) as f64) / 10.0)
                .collect();
            let t = choose_threshold(&known, &novel).unwrap();
            let best = known
                .iter()
                .chain(&novel)
                .map(|&c| youden(&known, &novel, c))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((youden(&known, &novel, t) - best).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_empty() {
        assert!(choose_threshold(&[], &[0.1]).is_err());
        assert!(choose_threshold(&[0.1], &[]).is_err());
    }
}
