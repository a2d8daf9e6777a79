//! Bias analyses over raw responses or aggregator predictions: framing
//! quadrants, per-group error tables, demographic accuracy splits,
//! confidence calibration, response-time curves and group diversity.

mod calibration;
mod demographics;
mod diversity;
mod framing;
mod groups;
mod output;

use thiserror::Error;

use crate::data::{Dataset, PairId};
use crate::stats::StatsError;

pub use calibration::{
    confidence_calibration, crowd_vote, response_time_curve, CalibrationReport, ConfidenceBucket, ConfidenceFrequency,
    CrowdVote, TimePoint,
    DEFAULT_WINDOW,
};
pub use demographics::{demographic_performance, DemographicCell, DemographicReport, Split, SplitTest};
pub use diversity::{diversity_analysis, CorrelationSummary, DiversityReport, GroupVote};
pub use framing::{framing_analysis, FramingPoint, FramingReport, FramingSummary, Quadrant};
pub use groups::{group_error_table, headline_errors, CategoryTest, DunnComparison, GroupErrorCell, GroupErrorReport};
pub use output::{
    write_calibration_csv, write_demographics_csv, write_framing_csv, write_group_errors_csv, write_group_tests_csv,
    write_timing_csv,
};

#[derive(Debug, Error)]
pub enum BiasError {
    #[error("pair {0} lacks its {1} member")]
    MissingPairMember(PairId, &'static str),
    #[error("headline {0} has no observations in this source")]
    NoObservations(String),
    #[error("prediction vector has {got} entries for {expected} headlines")]
    PredictionLength { expected: usize, got: usize },
    #[error("window of {window} exceeds the {available} available responses")]
    WindowTooLarge { window: usize, available: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// What an analysis reads: every participant rating, or one prediction per headline.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Responses,
    /// Indexed like [`Dataset::headlines`]; `None` where no prediction exists.
    Predictions(&'a [Option<f64>]),
}

impl Source<'_> {
    /// Probabilities observed for one headline under this source.
    pub(crate) fn values(&self, dataset: &Dataset, headline: usize) -> Vec<f64> {
        match self {
            Source::Responses => dataset.ratings_for(headline).into_iter().map(|(_, p)| p).collect(),
            Source::Predictions(p) => p[headline].into_iter().collect(),
        }
    }

    pub(crate) fn check(&self, dataset: &Dataset) -> Result<(), BiasError> {
        if let Source::Predictions(p) = self {
            if p.len() != dataset.headlines().len() {
                return Err(BiasError::PredictionLength {
                    expected: dataset.headlines().len(),
                    got: p.len(),
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Source::Responses => "raw",
            Source::Predictions(_) => "predictions",
        }
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub(crate) fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
