//! Statistical kernels: bootstrap intervals, rank tests and GEE.

mod bootstrap;
mod exact;
mod gee;
mod rank;
mod nonparam;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

pub use bootstrap::{bootstrap_ci, percentile, BootstrapCi};
pub use gee::{gee_fit, GeeModel, WorkingCorrelation};
pub use rank::{midranks, tie_sizes};
pub use nonparam::{
    adjust_p_values, dunn_posthoc, kruskal_wallis, mann_whitney_u, mann_whitney_u_with, wilcoxon_signed_rank,
    wilcoxon_signed_rank_with, Adjustment, DunnPair, PMethod,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty input")]
    Empty,
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("need at least 2 clusters, got {0}")]
    TooFewClusters(usize),
    #[error("GEE did not converge after {iterations} iterations (last max step {last_step:e})")]
    NoConvergence {
        iterations: usize,
        last_step: f64,
        last: Box<GeeModel>,
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df: Option<usize>,
    /// Eta squared for Kruskal-Wallis, `None` elsewhere.
    pub effect_size: Option<f64>,
    pub n: Vec<usize>,
    /// Set when the result is a convention rather than a computed value.
    pub warning: Option<String>,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid parameters")
}

/// Two-sided normal p-value of a z statistic.
pub fn two_sided_normal_p(z: f64) -> f64 {
    (2.0 * std_normal().sf(z.abs())).clamp(0.0, 1.0)
}

pub fn chi2_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).expect("df >= 1").sf(x).clamp(0.0, 1.0)
}

/// Pearson correlation; `None` when either input is constant. Identical inputs give exactly 1.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "pearson inputs differ in length");
    let n = a.len() as f64;
    if a.len() < 2 {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    if a == b {
        return Some(1.0);
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    if xs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}
