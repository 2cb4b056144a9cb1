use crate::error::{Error, Result};

/// Area under the ROC curve via the Mann–Whitney rank sum, with tied scores
/// sharing their average rank (each positive/negative tie counts one half).
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    if let Some(k) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::NonFinite(k));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of 1-based ranks over positives; ties get the mean rank of their run.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let mean_rank = (start + end + 1) as f64 / 2.0;
        let pos = order[start..end].iter().filter(|&&k| labels[k]).count();
        rank_sum += mean_rank * pos as f64;
        start = end;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_cases() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[true, true, false, false]).unwrap(), 0.0);
        assert_eq!(auc(&[3.0; 5], &[true, false, true, false, false]).unwrap(), 0.5);
        assert_eq!(auc(&[0.0, 1.0, 1.0], &[false, true, false]).unwrap(), 0.75);
    }

    #[test]
    fn errors() {
        assert!(matches!(auc(&[1.0, 2.0], &[true, true]), Err(Error::SingleClass)));
        assert!(matches!(auc(&[], &[]), Err(Error::SingleClass)));
        assert!(matches!(auc(&[1.0], &[true, false]), Err(Error::LengthMismatch { .. })));
        assert!(auc(&[f64::NAN, 1.0], &[true, false]).is_err());
    }
}
