//! Classification scores.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::ClassId;

fn check_lengths(truth: &[ClassId], predicted: &[ClassId]) -> Result<()> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// Per-class F1 averaged with weights proportional to true-class support.
pub fn weighted_f1<T: Scalar>(truth: &[ClassId], predicted: &[ClassId]) -> Result<T> {
    check_lengths(truth, predicted)?;
    let width = truth.iter().chain(predicted).max().map_or(0, |&c| c + 1);
    let mut tp = vec![0usize; width];
    let mut support = vec![0usize; width];
    let mut predicted_count = vec![0usize; width];
    for (&t, &p) in truth.iter().zip(predicted) {
        support[t] += 1;
        predicted_count[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    let n = T::from_count(truth.len());
    let mut total = T::zero();
    for c in 0..width {
        if support[c] == 0 || tp[c] == 0 {
            continue;
        }
        // 2PR/(P+R) with P = tp/pred, R = tp/support reduces to 2tp/(pred+support)
        let f1 = T::from_count(2 * tp[c]) / T::from_count(predicted_count[c] + support[c]);
        total += T::from_count(support[c]) / n * f1;
    }
    Ok(total)
}

pub fn accuracy<T: Scalar>(truth: &[ClassId], predicted: &[ClassId]) -> Result<T> {
    check_lengths(truth, predicted)?;
    let hits = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    Ok(T::from_count(hits) / T::from_count(truth.len()))
}

/// `1 - accuracy`, counted from mismatches.
pub fn error_rate<T: Scalar>(truth: &[ClassId], predicted: &[ClassId]) -> Result<T> {
    check_lengths(truth, predicted)?;
    let misses = truth.iter().zip(predicted).filter(|(t, p)| t != p).count();
    Ok(T::from_count(misses) / T::from_count(truth.len()))
}

/// Sample mean and standard deviation (`n - 1` denominator; 0 for a single value).
pub fn mean_std<T: Scalar>(values: &[T]) -> (T, T) {
    if values.is_empty() {
        return (T::nan(), T::nan());
    }
    let n = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    if values.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (mean, (ss / T::from_count(values.len() - 1)).sqrt())
}

pub fn sample_variance<T: Scalar>(values: &[T]) -> T {
    let (_, sd) = mean_std(values);
    sd * sd
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_examples() {
        assert_eq!(weighted_f1::<f64>(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        let f = weighted_f1::<f64>(&[0, 0, 1, 1], &[0, 0, 0, 1]).unwrap();
        assert!((f - (0.5 * 0.8 + 0.5 * 2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(weighted_f1::<f64>(&[1, 1, 1], &[1, 1, 1]).unwrap(), 1.0);
        let constant = weighted_f1::<f64>(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap();
        assert!((constant - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(accuracy::<f64>(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap(), 0.5);
    }

    #[test]
    fn predicted_only_classes_carry_no_weight() {
        let f = weighted_f1::<f64>(&[0, 0], &[0, 5]).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn length_errors() {
        assert!(weighted_f1::<f64>(&[0], &[0, 1]).is_err());
        assert!(weighted_f1::<f64>(&[], &[]).is_err());
        assert!(accuracy::<f64>(&[0], &[]).is_err());
    }

    #[test]
    fn std_uses_sample_denominator() {
        let (m, s) = mean_std(&[1.0f64, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s * s - 5.0 / 3.0).abs() < 1e-15);
    }
}
