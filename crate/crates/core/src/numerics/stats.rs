//! Scalar statistics: Pearson correlation, cosine similarity, binary F1,
//! medians and interpolated quantiles.

use crate::{Error, Result};

/// Pearson correlation coefficient of two equal-length vectors.
///
/// Computed as the cosine similarity of the mean-centered vectors. Errors on
/// length mismatch, fewer than two points, or a constant argument (undefined
/// correlation).
pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "pearson arguments differ in length: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if u.len() < 2 {
        return Err(Error::InvalidInput(
            "pearson needs at least two points".into(),
        ));
    }
    let n = u.len() as f64;
    let mean_u = u.iter().sum::<f64>() / n;
    let mean_v = v.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_u = 0.0;
    let mut var_v = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        let da = a - mean_u;
        let db = b - mean_v;
        cov += da * db;
        var_u += da * da;
        var_v += db * db;
    }
    if var_u == 0.0 || var_v == 0.0 {
        return Err(Error::Degenerate(
            "pearson is undefined for a constant vector".into(),
        ));
    }
    // single square root keeps the identity case exactly 1.0
    Ok((cov / (var_u * var_v).sqrt()).clamp(-1.0, 1.0))
}

/// Cosine similarity of two nonzero vectors.
pub fn cosine_sim(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "cosine arguments differ in length: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidInput(
            "cosine similarity is undefined for a zero vector".into(),
        ));
    }
    Ok((dot / (nu * nv).sqrt()).clamp(-1.0, 1.0))
}

/// Binary F1 score on the positive class.
///
/// Returns 0 when there are no true positives. Errors when `gold` contains no
/// positives at all (recall undefined).
pub fn binary_f1(predicted: &[bool], gold: &[bool]) -> Result<f64> {
    if predicted.len() != gold.len() {
        return Err(Error::InvalidInput(format!(
            "f1 arguments differ in length: {} vs {}",
            predicted.len(),
            gold.len()
        )));
    }
    if !gold.iter().any(|&g| g) {
        return Err(Error::Degenerate(
            "binary F1 is undefined when gold labels have no positives".into(),
        ));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&p, &g) in predicted.iter().zip(gold) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * tp as f64 / (2.0 * tp as f64 + fp as f64 + fn_ as f64))
}

/// Median of a sample. Panics on empty input.
pub fn median(sample: &[f64]) -> f64 {
    assert!(!sample.is_empty(), "median of empty sample");
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in median input"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Linearly interpolated quantile of an already-sorted sample (R type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&q), "quantile level out of range");
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pearson_identity_and_antisymmetry() {
        assert_relative_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_relative_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn pearson_rejects_constant_vector() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn cosine_hand_values() {
        assert_relative_eq!(cosine_sim(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_relative_eq!(cosine_sim(&[1.0, 1.0], &[2.0, 2.0]).unwrap(), 1.0);
        // (3,4)·(4,3) = 24, norms 5 and 5
        assert_relative_eq!(cosine_sim(&[3.0, 4.0], &[4.0, 3.0]).unwrap(), 24.0 / 25.0);
        assert_relative_eq!(cosine_sim(&[1.0, -2.0], &[-1.0, 2.0]).unwrap(), -1.0);
    }

    #[test]
    fn cosine_rejects_zero_vector() {
        assert!(cosine_sim(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn f1_hand_counts() {
        let gold = [true, true, false, false];
        assert_relative_eq!(binary_f1(&gold, &gold).unwrap(), 1.0);
        assert_relative_eq!(binary_f1(&[false; 4], &gold).unwrap(), 0.0);
        // P = 0.5, R = 0.5 -> F1 = 0.5
        let pred = [true, false, true, false];
        assert_relative_eq!(binary_f1(&pred, &gold).unwrap(), 0.5);
    }

    #[test]
    fn f1_rejects_all_negative_gold() {
        assert!(matches!(
            binary_f1(&[true, false], &[false, false]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn median_even_odd() {
        assert_relative_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_relative_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn quantile_interpolates() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_relative_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert_relative_eq!(quantile_sorted(&s, 0.5), 2.5);
    }
}
