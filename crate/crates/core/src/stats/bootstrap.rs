use rand::{Rng, RngCore};
use serde::Serialize;

use super::{check_finite, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapCi {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Quantile `q` in [0, 1] of sorted data, interpolating linearly between order statistics.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty slice");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Percentile bootstrap interval of the mean: `resamples` draws of size `m`
/// with replacement, bounds at the `(1 - level)/2` tails of the draw means.
///
/// `mean` is the plain sample mean.
pub fn bootstrap_ci(
    values: &[f64],
    resamples: usize,
    m: usize,
    level: f64,
    rng: &mut dyn RngCore,
) -> Result<BootstrapCi, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if m == 0 || resamples == 0 {
        return Err(StatsError::Invalid("resample count and size must be positive".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::Invalid(format!("level {level} outside (0, 1)")));
    }
    check_finite(values)?;
    if values.iter().all(|v| *v == values[0]) {
        // summation rounding would otherwise smear a point mass
        let c = values[0];
        return Ok(BootstrapCi { mean: c, lo: c, hi: c });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..m).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / m as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let lo = percentile(&means, tail).min(mean);
    let hi = percentile(&means, 1.0 - tail).max(mean);
    Ok(BootstrapCi { mean, lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_is_a_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ci = bootstrap_ci(&[0.3; 17], 200, 50, 0.95, &mut rng).unwrap();
        assert_eq!((ci.mean, ci.lo, ci.hi), (0.3, 0.3, 0.3));
    }

    #[test]
    fn coin_interval_width_matches_normal_theory() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vals: Vec<f64> = (0..10_000).map(|i| (i % 2) as f64).collect();
        let m = 10_000;
        let ci = bootstrap_ci(&vals, 10_000, m, 0.95, &mut rng).unwrap();
        assert!(ci.lo < 0.5 && ci.hi > 0.5);
        let expected = 2.0 * 1.959964 * (0.25 / m as f64).sqrt();
        assert!(((ci.hi - ci.lo) - expected).abs() < 0.1 * expected, "{ci:?}");
    }

    #[test]
    fn percentile_interpolates() {
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 0.0), 1.0);
        assert!((percentile(&[0.0, 10.0], 0.025) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(bootstrap_ci(&[], 10, 10, 0.95, &mut rng), Err(StatsError::Empty));
    }
}
