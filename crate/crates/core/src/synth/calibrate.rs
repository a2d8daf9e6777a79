use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{SynthConfig, SynthError};
use crate::data::{Category, Sentiment};
use crate::seed::rng_for;
use crate::stats::pearson;

const MAX_PROBES: usize = 50;
const MC_ITEMS: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    /// Mean accuracy `1 - |p - y|` per category (gender, ethnicity, age).
    pub accuracy: [f64; 3],
    /// Mean pairwise Pearson correlation between raters' mapped responses.
    pub correlation: f64,
}

/// Mean mapped probability of a rating whose latent score is `N(mu, 1)`.
fn mean_probability(mu: f64, thresholds: &[f64; 4]) -> f64 {
    let phi = Normal::new(0.0, 1.0).expect("valid parameters");
    // E[(L - 1) / 4] = sum over cut points of P(z > t) / 4
    thresholds.iter().map(|t| phi.sf(t - mu)).sum::<f64>() / 4.0
}

/// Exact expected accuracy on one category, averaged over profiles, truth and sentiment.
pub fn expected_accuracy(config: &SynthConfig, category: Category) -> f64 {
    let mut total = 0.0;
    let mut count = 0.0;
    for k in 0..config.profiles.len() {
        let d = config.competence(k, category);
        for s in Sentiment::ALL {
            let b = config.shift(category, s);
            total += mean_probability(d + b, &config.thresholds);
            total += 1.0 - mean_probability(-d + b, &config.thresholds);
            count += 2.0;
        }
    }
    total / count
}

/// Mean Pearson correlation over all pairs of rows; pairs involving a constant row are skipped.
pub fn mean_pairwise_correlation(rows: &[Vec<f64>]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            if let Some(r) = pearson(&rows[i], &rows[j]) {
                sum += r;
                n += 1;
            }
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Common random numbers for the correlation search, so the estimate is a smooth function of rho.
struct Draws {
    shared: Vec<f64>,
    own: Vec<Vec<f64>>,
}

impl Draws {
    /// One row per rater of a treatment, so profiles cycle exactly as in `generate`.
    fn new(seed: u64, raters: usize) -> Self {
        let mut rng = rng_for("synth-calibrate", &[seed]);
        let shared = (0..MC_ITEMS).map(|_| rng.sample(StandardNormal)).collect();
        let own = (0..raters.max(2))
            .map(|_| (0..MC_ITEMS).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        Self { shared, own }
    }

    fn correlation(&self, config: &SynthConfig, rho: f64) -> f64 {
        let rows: Vec<Vec<f64>> = self
            .own
            .iter()
            .enumerate()
            .map(|(e, v)| {
                (0..MC_ITEMS)
                    .map(|j| {
                        let category = Category::ALL[j % 3];
                        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                        let sentiment = Sentiment::ALL[(j / 2) % 2];
                        let z = s * config.competence(e, category)
                            + config.shift(category, sentiment)
                            + rho.sqrt() * self.shared[j]
                            + (1.0 - rho).sqrt() * v[j];
                        f64::from(config.quantize(z) - 1) / 4.0
                    })
                    .collect()
            })
            .collect();
        mean_pairwise_correlation(&rows)
    }
}

/// Fits the per-category competence scales and the shared-noise weight of
/// `base` to the targets. Competence is solved on the exact accuracy
/// expectation (it does not depend on `rho`), then `rho` by bisection on a
/// Monte-Carlo correlation estimate over one simulated treatment of raters
/// answering 3000 items.
pub fn calibrate(targets: &CalibrationTargets, base: &SynthConfig) -> Result<SynthConfig, SynthError> {
    base.validate()?;
    if !(0.0..=0.95).contains(&targets.correlation) {
        return Err(SynthError::Config(format!(
            "correlation target {} outside [0, 0.95]",
            targets.correlation
        )));
    }
    let mut config = base.clone();
    for category in Category::ALL {
        let target = targets.accuracy[category.index()];
        if !(0.5..1.0).contains(&target) {
            return Err(SynthError::Config(format!("accuracy target {target} outside [0.5, 1)")));
        }
        let c = category.index();
        let at = |scale: f64, cfg: &mut SynthConfig| {
            cfg.delta[c] = scale;
            expected_accuracy(cfg, category)
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut probes = 0;
        let mut acc = at(hi, &mut config);
        while acc < target && probes < MAX_PROBES {
            lo = hi;
            hi *= 2.0;
            acc = at(hi, &mut config);
            probes += 1;
        }
        let mut mid = hi;
        while (acc - target).abs() >= 1e-6 && probes < MAX_PROBES {
            mid = 0.5 * (lo + hi);
            acc = at(mid, &mut config);
            if acc < target {
                lo = mid;
            } else {
                hi = mid;
            }
            probes += 1;
        }
        if (acc - target).abs() >= 0.01 {
            return Err(SynthError::Unachievable {
                what: "accuracy",
                target,
                achieved: acc,
                probes,
            });
        }
        config.delta[c] = if target == 0.5 { 0.0 } else { mid };
    }

    let draws = Draws::new(base.seed, base.participants_per_treatment);
    let target = targets.correlation;
    let (mut lo, mut hi) = (0.0, 0.99);
    let floor = draws.correlation(&config, lo);
    let ceiling = draws.correlation(&config, hi);
    let mut probes = 2;
    if floor > target + 0.01 || ceiling < target - 0.01 {
        return Err(SynthError::Unachievable {
            what: "correlation",
            target,
            achieved: if floor > target { floor } else { ceiling },
            probes,
        });
    }
    let (mut best_rho, mut best) = if (floor - target).abs() < (ceiling - target).abs() {
        (lo, floor)
    } else {
        (hi, ceiling)
    };
    while (best - target).abs() >= 0.002 && probes < MAX_PROBES {
        let mid = 0.5 * (lo + hi);
        let r = draws.correlation(&config, mid);
        probes += 1;
        if (r - target).abs() < (best - target).abs() {
            best_rho = mid;
            best = r;
        }
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (best - target).abs() >= 0.01 {
        return Err(SynthError::Unachievable {
            what: "correlation",
            target,
            achieved: best,
            probes,
        });
    }
    config.rho = best_rho;
    Ok(config)
}
