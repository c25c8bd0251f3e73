//! Ranking and classification metrics: AUC (Mann–Whitney form), accuracy,
//! confusion matrix, and ROC points.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("metric requires both classes to be present")]
    SingleClass,
}

fn check_both_classes(labels: &[u8]) -> Result<(), MetricError> {
    if labels.iter().any(|&l| l == 1) && labels.iter().any(|&l| l == 0) {
        Ok(())
    } else {
        Err(MetricError::SingleClass)
    }
}

/// Mann–Whitney AUC: over all positive/negative pairs, credit 1 when the
/// positive scores higher, 0.5 on an exact tie. Computed via average ranks
/// rather than the O(n²) pair loop.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64, MetricError> {
    assert_eq!(scores.len(), labels.len());
    check_both_classes(labels)?;
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    // Average ranks within tie groups (1-based ranks).
    let mut rank = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            rank[idx] = avg;
        }
        i = j + 1;
    }

    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = n as f64 - n_pos;
    let rank_sum: f64 = (0..n).filter(|&i| labels[i] == 1).map(|i| rank[i]).sum();
    let u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    Ok(u / (n_pos * n_neg))
}

/// Fraction of predicted labels matching the truth.
pub fn accuracy(preds: &[u8], labels: &[u8]) -> f64 {
    assert_eq!(preds.len(), labels.len());
    assert!(!labels.is_empty());
    let hits = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / labels.len() as f64
}

/// Confusion matrix laid out [[tn, fp], [fn, tp]].
pub fn confusion(preds: &[u8], labels: &[u8]) -> [[usize; 2]; 2] {
    assert_eq!(preds.len(), labels.len());
    let mut m = [[0usize; 2]; 2];
    for (&p, &l) in preds.iter().zip(labels) {
        m[l as usize][p as usize] += 1;
    }
    m
}

/// ROC curve as (fpr, tpr) points from (0,0) to (1,1), one point per
/// distinct score threshold in descending order. Trapezoidal area under
/// these points equals the Mann–Whitney AUC.
pub fn roc_points(scores: &[f64], labels: &[u8]) -> Result<Vec<(f64, f64)>, MetricError> {
    assert_eq!(scores.len(), labels.len());
    check_both_classes(labels)?;
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n_neg = n as f64 - n_pos;

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < n {
        // Consume a whole tie group before emitting a point.
        let s = scores[order[i]];
        while i < n && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg, tp as f64 / n_pos));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Brute-force pairwise oracle with the tie credit written out.
    fn auc_oracle(scores: &[f64], labels: &[u8]) -> f64 {
        let mut credit = 0.0;
        let mut pairs = 0.0;
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] == 1 && labels[j] == 0 {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        credit += 1.0;
                    } else if scores[i] == scores[j] {
                        credit += 0.5;
                    }
                }
            }
        }
        credit / pairs
    }

    #[test]
    fn perfect_ranking_is_one() {
        assert_eq!(auc(&[0.9, 0.1], &[1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn all_equal_scores_give_half() {
        assert_eq!(auc(&[0.3; 6], &[1, 0, 1, 0, 0, 1]).unwrap(), 0.5);
    }

    #[test]
    fn single_class_is_an_error() {
        assert_eq!(auc(&[0.1, 0.2], &[1, 1]), Err(MetricError::SingleClass));
        assert!(roc_points(&[0.1, 0.2], &[0, 0]).is_err());
    }

    #[test]
    fn matches_pairwise_oracle_on_seeded_cases() {
        let mut rng = crate::rng::rng_from_seed(401);
        for _ in 0..200 {
            let n = rng.gen_range(4..40usize);
            // Quantized scores so exact ties actually occur.
            let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..8)) / 7.0).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect();
            labels[0] = 1;
            labels[1] = 0;
            let fast = auc(&scores, &labels).unwrap();
            let slow = auc_oracle(&scores, &labels);
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn invariant_under_strictly_increasing_transforms() {
        let mut rng = crate::rng::rng_from_seed(402);
        for _ in 0..50 {
            let n = rng.gen_range(4..30usize);
            let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(-5..6))).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.4))).collect();
            labels[0] = 1;
            labels[1] = 0;
            let base = auc(&scores, &labels).unwrap();
            let warped: Vec<f64> = scores.iter().map(|s| (s / 3.0).exp() + 2.0).collect();
            assert!((auc(&warped, &labels).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn trapezoid_area_under_roc_equals_auc() {
        let mut rng = crate::rng::rng_from_seed(403);
        for _ in 0..50 {
            let n = rng.gen_range(4..40usize);
            let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..6)) / 5.0).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect();
            labels[0] = 1;
            labels[1] = 0;
            let pts = roc_points(&scores, &labels).unwrap();
            assert_eq!(pts[0], (0.0, 0.0));
            assert_eq!(*pts.last().unwrap(), (1.0, 1.0));
            let mut area = 0.0;
            for w in pts.windows(2) {
                area += (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0;
            }
            let a = auc(&scores, &labels).unwrap();
            assert!((area - a).abs() < 1e-12, "{area} vs {a}");
        }
    }

    #[test]
    fn accuracy_and_confusion_agree() {
        let preds = [1, 0, 1, 1, 0];
        let labels = [1, 0, 0, 1, 1];
        assert!((accuracy(&preds, &labels) - 0.6).abs() < 1e-15);
        let m = confusion(&preds, &labels);
        assert_eq!(m, [[1, 1], [1, 2]]);
        assert_eq!(m.iter().flatten().sum::<usize>(), 5);
    }
}
