//! Evaluation metrics: micro-F1, mean imbalance ratio and average label
//! co-occurrence.

use crate::dataset::SignMatrix;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// One evaluated point of a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub seed: u64,
    pub iteration: usize,
    pub labeled_size: usize,
    pub micro_f1: f64,
    /// MeanIR of the batch selected at this iteration; `None` when no label
    /// in the batch has positive support.
    pub mean_ir_selected: Option<f64>,
    pub corr_avg: f64,
}

/// Micro-averaged F1 pooled over every (instance, label) cell.
///
/// Returns 0 when there are no true positives, false positives or false
/// negatives at all.
pub fn micro_f1(predictions: &SignMatrix, gold: &SignMatrix) -> Result<f64> {
    if predictions.cols() != gold.cols() {
        return Err(Error::dim(gold.cols(), predictions.cols()));
    }
    if predictions.rows() != gold.rows() {
        return Err(Error::dim(gold.rows(), predictions.rows()));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (p, g) in predictions.iter_rows().zip(gold.iter_rows()) {
        for (&pv, &gv) in p.iter().zip(g) {
            match (pv > 0, gv > 0) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
    }
    let denom = 2 * tp + fp + fn_;
    Ok(if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    })
}

/// Mean imbalance ratio with the labels that had to be skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanIr {
    /// `None` if no label has positive support.
    pub value: Option<f64>,
    /// Labels with zero positives, left out of the mean.
    pub excluded: Vec<usize>,
}

impl MeanIr {
    pub fn has_warning(&self) -> bool {
        !self.excluded.is_empty()
    }
}

/// MeanIR from per-label positive counts: the mean over labels of
/// `max_count / count(label)`. Zero-count labels are excluded.
pub fn mean_ir_from_counts(counts: &[usize]) -> MeanIr {
    let max = counts.iter().copied().max().unwrap_or(0);
    let excluded: Vec<usize> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(k, _)| k)
        .collect();
    let supported: Vec<f64> = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| max as f64 / c as f64)
        .collect();
    let value = if supported.is_empty() {
        None
    } else {
        Some(supported.iter().sum::<f64>() / supported.len() as f64)
    };
    MeanIr { value, excluded }
}

pub fn mean_ir(labels: &SignMatrix) -> MeanIr {
    let result = mean_ir_from_counts(&labels.positive_counts());
    if result.has_warning() {
        log::debug!(
            "MeanIR: labels {:?} have no positive instances; excluded",
            result.excluded
        );
    }
    result
}

/// Off-diagonal mass of the positive correlation matrix divided by K².
pub fn corr_avg(a: &SquareMatrix) -> f64 {
    let k = a.size();
    if k == 0 {
        return 0.0;
    }
    a.off_diagonal().sum::<f64>() / (k * k) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn signs(rows: &[&[i8]]) -> SignMatrix {
        SignMatrix::from_rows(rows[0].len(), rows).unwrap()
    }

    #[test]
    fn micro_f1_from_counts() {
        // TP=2, FP=1, FN=1
        let pred = signs(&[&[1, 1], &[1, -1]]);
        let gold = signs(&[&[1, -1], &[1, 1]]);
        assert!((micro_f1(&pred, &gold).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn micro_f1_perfect_and_degenerate() {
        let gold = signs(&[&[1, -1], &[-1, -1]]);
        assert_eq!(micro_f1(&gold, &gold).unwrap(), 1.0);
        let neg = signs(&[&[-1, -1], &[-1, -1]]);
        assert_eq!(micro_f1(&neg, &neg).unwrap(), 0.0);
    }

    #[test]
    fn micro_f1_shape_mismatch() {
        let a = signs(&[&[1, -1]]);
        let b = signs(&[&[1, -1, 1]]);
        assert!(matches!(micro_f1(&a, &b), Err(Error::Dimension { .. })));
        let c = signs(&[&[1, -1], &[1, 1]]);
        assert!(micro_f1(&a, &c).is_err());
    }

    /// Counts positives cell by cell, independent of `positive_counts`.
    fn brute_mean_ir(rows: &[Vec<i8>]) -> f64 {
        let k = rows[0].len();
        let counts: Vec<f64> = (0..k)
            .map(|l| rows.iter().filter(|r| r[l] == 1).count() as f64)
            .collect();
        let max = counts.iter().cloned().fold(0.0, f64::max);
        counts.iter().map(|c| max / c).sum::<f64>() / k as f64
    }

    fn matrix_with_counts(counts: &[usize], n: usize) -> Vec<Vec<i8>> {
        (0..n)
            .map(|i| counts.iter().map(|&c| if i < c { 1 } else { -1 }).collect())
            .collect()
    }

    #[test]
    fn mean_ir_examples() {
        let rows = matrix_with_counts(&[6, 3, 2], 6);
        let oracle = brute_mean_ir(&rows);
        assert!((oracle - 2.0).abs() < 1e-15);
        let m = SignMatrix::from_rows(3, &rows).unwrap();
        assert_eq!(mean_ir(&m).value, Some(2.0));

        let rows = matrix_with_counts(&[4, 1], 4);
        assert!((brute_mean_ir(&rows) - 2.5).abs() < 1e-15);
        assert_eq!(mean_ir(&SignMatrix::from_rows(2, &rows).unwrap()).value, Some(2.5));

        let rows = matrix_with_counts(&[3, 3, 3], 5);
        assert_eq!(mean_ir(&SignMatrix::from_rows(3, &rows).unwrap()).value, Some(1.0));
    }

    #[test]
    fn mean_ir_excludes_unsupported_labels() {
        let r = mean_ir_from_counts(&[4, 0, 2]);
        assert_eq!(r.excluded, vec![1]);
        assert!(r.has_warning());
        assert_eq!(r.value, Some(1.5));
        assert_eq!(mean_ir_from_counts(&[0, 0]).value, None);
    }

    #[test]
    fn corr_avg_examples() {
        let a = SquareMatrix::from_rows(&[vec![1.0, 2.0 / 3.0], vec![2.0 / 3.0, 1.0]]);
        // direct summation of the off-diagonal cells
        let oracle = (a.get(0, 1) + a.get(1, 0)) / 4.0;
        assert!((oracle - 1.0 / 3.0).abs() < 1e-15);
        assert!((corr_avg(&a) - oracle).abs() < 1e-15);
        assert_eq!(corr_avg(&SquareMatrix::identity(4)), 0.0);
    }

    proptest! {
        #[test]
        fn micro_f1_row_permutation_invariant(
            cells in prop::collection::vec((any::<bool>(), any::<bool>()), 3*4),
            perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle(),
        ) {
            let s = |b: bool| if b { 1i8 } else { -1 };
            let pred: Vec<Vec<i8>> = cells.chunks(3).map(|c| c.iter().map(|x| s(x.0)).collect()).collect();
            let gold: Vec<Vec<i8>> = cells.chunks(3).map(|c| c.iter().map(|x| s(x.1)).collect()).collect();
            let p = SignMatrix::from_rows(3, &pred).unwrap();
            let g = SignMatrix::from_rows(3, &gold).unwrap();
            let f = micro_f1(&p, &g).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert_eq!(f, micro_f1(&p.select(&perm), &g.select(&perm)).unwrap());
        }

        #[test]
        fn mean_ir_at_least_one(counts in prop::collection::vec(1usize..50, 2..8)) {
            let v = mean_ir_from_counts(&counts).value.unwrap();
            prop_assert!(v >= 1.0);
            let all_equal = counts.iter().all(|&c| c == counts[0]);
            prop_assert_eq!(v == 1.0, all_equal);
        }

        #[test]
        fn corr_avg_in_range(k in 2usize..7, entries in prop::collection::vec(0.0f64..=1.0, 49)) {
            let mut a = SquareMatrix::identity(k);
            for m in 0..k { for n in 0..k { if m != n { a.set(m, n, entries[m * 7 + n]); } } }
            let c = corr_avg(&a);
            prop_assert!(c >= 0.0 && c <= ((k * k - k) as f64) / (k * k) as f64 + 1e-15);
        }
    }
}
