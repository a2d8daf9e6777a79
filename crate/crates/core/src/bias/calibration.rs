use std::collections::BTreeMap;

use serde::Serialize;

use super::{mean, BiasError};
use crate::data::{decision_credit, response_accuracy, Dataset};
use crate::stats::{wilcoxon_signed_rank, TestResult};

pub const DEFAULT_WINDOW: usize = 100;
const LEVELS: [f64; 3] = [0.0, 0.25, 0.5];

/// Thresholded accuracy of all responses at one confidence `|p - 0.5|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceBucket {
    pub confidence: f64,
    pub responses: usize,
    /// Mean decision credit; undecided responses score 0.5.
    pub accuracy: Option<f64>,
}

/// How often a demographic group answers at one confidence level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceFrequency {
    /// `all`, `gender`, `age`, `ethnicity` or `gender_ethnicity`.
    pub grouping: &'static str,
    pub group: String,
    pub confidence: f64,
    pub count: usize,
    pub share: f64,
}

/// Every rater of a headline voting at once, scored with decision credit per headline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrowdVote {
    pub headlines: usize,
    /// One vote per decided rating.
    pub majority: f64,
    /// Votes weighted by `p - 0.5`.
    pub confidence_weighted: f64,
    /// Signed-rank test on the paired per-headline credits.
    pub comparison: Option<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub buckets: Vec<ConfidenceBucket>,
    pub frequencies: Vec<ConfidenceFrequency>,
    pub crowd_vote: Option<CrowdVote>,
}

impl CalibrationReport {
    pub fn accuracy_at(&self, confidence: f64) -> Option<f64> {
        self.buckets.iter().find(|b| b.confidence == confidence).and_then(|b| b.accuracy)
    }
}

fn level_index(p: f64) -> usize {
    let c = (p - 0.5).abs();
    LEVELS
        .iter()
        .position(|l| (c - l).abs() < 1e-9)
        .unwrap_or(if c < 0.125 { 0 } else if c < 0.375 { 1 } else { 2 })
}

/// Accuracy by confidence level, and confidence-level histograms per demographic group.
pub fn confidence_calibration(dataset: &Dataset) -> CalibrationReport {
    let mut credit: [Vec<f64>; 3] = Default::default();
    let mut hist: BTreeMap<(&'static str, String), [usize; 3]> = BTreeMap::new();
    for r in dataset.responses() {
        let pi = dataset.participant_idx(&r.participant).expect("validated");
        let h = &dataset.headlines()[dataset.headline_idx(&r.headline).expect("validated")];
        let p = r.probability();
        let k = level_index(p);
        credit[k].push(decision_credit(p, h.genuine));

        let who = &dataset.participants()[pi];
        let na = || "NA".to_string();
        let gender = who.gender.map_or_else(na, |g| g.as_str().to_string());
        let eth = who.ethnicity.clone().unwrap_or_else(na);
        let age = who.age_group().map_or_else(na, |a| a.as_str().to_string());
        for key in [
            ("all", "all".to_string()),
            ("gender", gender.clone()),
            ("age", age),
            ("ethnicity", eth.clone()),
            ("gender_ethnicity", format!("{gender}/{eth}")),
        ] {
            hist.entry(key).or_default()[k] += 1;
        }
    }
    let buckets = LEVELS
        .iter()
        .zip(&credit)
        .map(|(&confidence, v)| ConfidenceBucket {
            confidence,
            responses: v.len(),
            accuracy: (!v.is_empty()).then(|| mean(v)),
        })
        .collect();
    let mut frequencies = Vec::new();
    for ((grouping, group), counts) in hist {
        let total: usize = counts.iter().sum();
        for (&confidence, &count) in LEVELS.iter().zip(&counts) {
            frequencies.push(ConfidenceFrequency {
                grouping,
                group: group.clone(),
                confidence,
                count,
                share: count as f64 / total as f64,
            });
        }
    }
    CalibrationReport {
        buckets,
        frequencies,
        crowd_vote: crowd_vote(dataset),
    }
}

fn vote_credit(score: f64, genuine: bool) -> f64 {
    if score == 0.0 {
        0.5
    } else if (score > 0.0) == genuine {
        1.0
    } else {
        0.0
    }
}

/// Majority and confidence-weighted votes of all raters on each headline.
pub fn crowd_vote(dataset: &Dataset) -> Option<CrowdVote> {
    let (mut mv, mut cw) = (Vec::new(), Vec::new());
    for (h, head) in dataset.headlines().iter().enumerate() {
        let ratings = dataset.ratings_for(h);
        if ratings.is_empty() {
            continue;
        }
        let votes: f64 = ratings.iter().map(|(_, p)| (p - 0.5).signum() * f64::from(*p != 0.5)).sum();
        let weighted: f64 = ratings.iter().map(|(_, p)| p - 0.5).sum();
        mv.push(vote_credit(votes, head.genuine));
        cw.push(vote_credit(weighted, head.genuine));
    }
    if mv.is_empty() {
        return None;
    }
    Some(CrowdVote {
        headlines: mv.len(),
        majority: mean(&mv),
        confidence_weighted: mean(&cw),
        comparison: wilcoxon_signed_rank(&cw, &mv).ok(),
    })
}

/// One window of the response-time curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimePoint {
    /// Mean response time inside the window.
    pub response_time_ms: f64,
    /// Mean `1 - |p - y|` inside the window.
    pub accuracy: f64,
}

/// Moving-average accuracy over responses sorted by response time.
pub fn response_time_curve(dataset: &Dataset, window: usize) -> Result<Vec<TimePoint>, BiasError> {
    let n = dataset.responses().len();
    if window == 0 || window > n {
        return Err(BiasError::WindowTooLarge { window, available: n });
    }
    let mut rows: Vec<(u64, f64)> = dataset
        .responses()
        .iter()
        .map(|r| {
            let h = &dataset.headlines()[dataset.headline_idx(&r.headline).expect("validated")];
            (r.response_time_ms, response_accuracy(r.probability(), h.genuine))
        })
        .collect();
    // stable sort keeps file order among equal times
    rows.sort_by_key(|r| r.0);
    let (mut t, mut a) = (0.0, 0.0);
    for r in &rows[..window] {
        t += r.0 as f64;
        a += r.1;
    }
    let w = window as f64;
    let mut out = vec![TimePoint {
        response_time_ms: t / w,
        accuracy: a / w,
    }];
    for i in window..n {
        t += rows[i].0 as f64 - rows[i - window].0 as f64;
        a += rows[i].1 - rows[i - window].1;
        out.push(TimePoint {
            response_time_ms: t / w,
            accuracy: a / w,
        });
    }
    Ok(out)
}
