//! Seeded percentile-bootstrap confidence intervals for median differences.
//!
//! Every resample draws from its own counter-derived ChaCha stream, so the
//! result is a pure function of `(samples, resamples, level, seed)` no matter
//! how many worker threads rayon schedules.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::stats::{median, quantile_sorted};
use crate::{Error, Result};

/// Percentile interval over bootstrap resamples, with the parameters that
/// reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub low: f64,
    pub high: f64,
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl ConfidenceInterval {
    pub fn straddles_zero(&self) -> bool {
        self.low <= 0.0 && self.high >= 0.0
    }
}

/// Percentile bootstrap interval for `median(a) - median(b)`.
///
/// Errors when either sample is empty, `level` is not in (0, 1), or
/// `resamples < 100` (too few for a meaningful percentile interval).
pub fn bootstrap_median_diff(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<ConfidenceInterval> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "bootstrap samples must be nonempty".into(),
        ));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    if resamples < 100 {
        return Err(Error::InvalidInput(format!(
            "at least 100 resamples required, got {resamples}"
        )));
    }

    let mut stats: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            median(&resample(a, &mut rng)) - median(&resample(b, &mut rng))
        })
        .collect();
    stats.sort_by(|x, y| x.partial_cmp(y).expect("finite bootstrap statistics"));

    let tail = (1.0 - level) / 2.0;
    Ok(ConfidenceInterval {
        low: quantile_sorted(&stats, tail),
        high: quantile_sorted(&stats, 1.0 - tail),
        level,
        resamples,
        seed,
    })
}

fn resample(sample: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..sample.len())
        .map(|_| sample[rng.gen_range(0..sample.len())])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_give_degenerate_exact_interval() {
        let a = [5.0; 5];
        let b = [3.0; 5];
        let ci = bootstrap_median_diff(&a, &b, 200, 0.95, 1).unwrap();
        assert_eq!(ci.low, 2.0);
        assert_eq!(ci.high, 2.0);
    }

    #[test]
    fn identical_samples_contain_zero() {
        let a = [1.0, 4.0, 2.0, 8.0, 3.0, 5.0];
        let ci = bootstrap_median_diff(&a, &a, 1000, 0.95, 42).unwrap();
        assert!(ci.straddles_zero(), "interval ({}, {})", ci.low, ci.high);
    }

    #[test]
    fn same_seed_reproduces_bounds() {
        let a = [1.0, 2.0, 3.0, 10.0, 4.0];
        let b = [0.5, 2.5, 1.5, 3.5, 0.0];
        let x = bootstrap_median_diff(&a, &b, 500, 0.9, 7).unwrap();
        let y = bootstrap_median_diff(&a, &b, 500, 0.9, 7).unwrap();
        assert_eq!(x.low.to_bits(), y.low.to_bits());
        assert_eq!(x.high.to_bits(), y.high.to_bits());
    }

    #[test]
    fn intervals_widen_with_level() {
        let a = [1.0, 5.0, 2.0, 9.0, 3.0, 7.0, 4.0];
        let b = [2.0, 3.0, 1.0, 6.0, 0.0, 4.0, 5.0];
        let narrow = bootstrap_median_diff(&a, &b, 2000, 0.5, 3).unwrap();
        let wide = bootstrap_median_diff(&a, &b, 2000, 0.99, 3).unwrap();
        assert!(wide.low <= narrow.low);
        assert!(wide.high >= narrow.high);
    }

    #[test]
    fn too_few_resamples_rejected() {
        assert!(bootstrap_median_diff(&[1.0], &[1.0], 99, 0.95, 1).is_err());
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(bootstrap_median_diff(&[], &[1.0], 100, 0.95, 1).is_err());
    }
}
