use serde::Serialize;

use super::{mean, BiasError, Source};
use crate::data::{Category, Dataset, PairId, Sentiment};
use crate::stats::mann_whitney_u;

/// Position of a pair on the (original, altered) mean-response plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Quadrant {
    /// Original judged false, altered judged true: false stereotype.
    Q1,
    /// Both judged true: positive framing.
    Q2,
    /// Original true, altered false: common knowledge.
    Q3,
    /// Both judged false: negative framing.
    Q4,
    /// A mean of exactly 0.5 on either axis.
    Boundary,
}

impl Quadrant {
    pub const ALL: [Quadrant; 5] = [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4, Quadrant::Boundary];

    pub fn of(original: f64, altered: f64) -> Self {
        if original == 0.5 || altered == 0.5 {
            return Quadrant::Boundary;
        }
        match (original > 0.5, altered > 0.5) {
            (false, true) => Quadrant::Q1,
            (true, true) => Quadrant::Q2,
            (true, false) => Quadrant::Q3,
            (false, false) => Quadrant::Q4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::Q1 => "Q1",
            Quadrant::Q2 => "Q2",
            Quadrant::Q3 => "Q3",
            Quadrant::Q4 => "Q4",
            Quadrant::Boundary => "boundary",
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|q| *q == self).expect("listed")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramingPoint {
    pub pair_id: PairId,
    pub category: Category,
    /// Sentiment of the original headline.
    pub sentiment: Sentiment,
    pub mean_original: f64,
    pub mean_altered: f64,
    pub n_original: usize,
    pub n_altered: usize,
    pub quadrant: Quadrant,
    /// Mann-Whitney U p-value between the two rating samples; `None` for predictions.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramingSummary {
    /// Counts in [`Quadrant::ALL`] order.
    pub counts: [usize; 5],
    pub tested: usize,
    pub significant: usize,
    /// Share of tested pairs with p < 0.05.
    pub framing_fraction: Option<f64>,
}

impl FramingSummary {
    pub fn count(&self, q: Quadrant) -> usize {
        self.counts[q.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramingReport {
    pub source: &'static str,
    pub points: Vec<FramingPoint>,
    pub summary: FramingSummary,
}

/// Places every pair in a quadrant by the mean response to its two versions.
pub fn framing_analysis(dataset: &Dataset, source: Source<'_>) -> Result<FramingReport, BiasError> {
    source.check(dataset)?;
    let mut points = Vec::new();
    for (pair, members) in dataset.pairs() {
        let g = members.genuine.ok_or_else(|| BiasError::MissingPairMember(pair.clone(), "genuine"))?;
        let a = members.altered.ok_or_else(|| BiasError::MissingPairMember(pair.clone(), "altered"))?;
        let (xs, ys) = (source.values(dataset, g), source.values(dataset, a));
        for (h, v) in [(g, &xs), (a, &ys)] {
            if v.is_empty() {
                return Err(BiasError::NoObservations(dataset.headlines()[h].id.to_string()));
            }
        }
        let p_value = match source {
            Source::Responses => Some(mann_whitney_u(&xs, &ys)?.p_value),
            Source::Predictions(_) => None,
        };
        let (mo, ma) = (mean(&xs), mean(&ys));
        let head = &dataset.headlines()[g];
        points.push(FramingPoint {
            pair_id: pair,
            category: head.category,
            sentiment: head.sentiment,
            mean_original: mo,
            mean_altered: ma,
            n_original: xs.len(),
            n_altered: ys.len(),
            quadrant: Quadrant::of(mo, ma),
            p_value,
        });
    }
    let mut counts = [0; 5];
    for p in &points {
        counts[p.quadrant.index()] += 1;
    }
    let tested = points.iter().filter(|p| p.p_value.is_some()).count();
    let significant = points.iter().filter(|p| p.p_value.is_some_and(|v| v < 0.05)).count();
    Ok(FramingReport {
        source: source.name(),
        points,
        summary: FramingSummary {
            counts,
            tested,
            significant,
            framing_fraction: (tested > 0).then(|| significant as f64 / tested as f64),
        },
    })
}
