//! Online expert-advice aggregators.
//!
//! Each round an aggregator sees an [`AdviceMatrix`] (experts x arms of
//! probabilities that the arm's headline is genuine), scores the arms, picks
//! one, and is then told the reward of the arm it picked.

mod etree;
mod exp4;
mod harness;
mod metacmab;
mod spec;
mod vote;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Category;

pub use etree::{ExpertiseTree, Leaf, Penalty, TreeStructure};
pub use exp4::{Exp4, WEIGHT_CEILING};
pub use harness::{FollowMember, Oracle};
pub use metacmab::{Exploration, MetaCmab, RidgeModel};
pub use spec::AlgorithmSpec;
pub use vote::{cwmv_scores, mv_scores, random_expert_choose, Cwmv, MajorityVote, RandomExpert};

#[derive(Debug, Error, PartialEq)]
pub enum AggregatorError {
    #[error("advice matrix needs at least one expert and two arms (got {experts}x{arms})")]
    Shape { experts: usize, arms: usize },
    #[error("advice entry ({expert}, {arm}) = {value} is not a probability")]
    Entry { expert: usize, arm: usize, value: f64 },
    #[error("feature vector has length {got}, model expects {expected}")]
    FeatureLength { expected: usize, got: usize },
    #[error("non-finite feature value")]
    NonFinite,
    #[error("design matrix lost positive definiteness and could not be rebuilt")]
    Factorization,
    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),
    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),
}

/// Experts x arms matrix of advice probabilities, plus the category of each arm's headline.
#[derive(Debug, Clone, PartialEq)]
pub struct AdviceMatrix {
    experts: usize,
    arms: usize,
    entries: Vec<f64>,
    categories: Vec<Category>,
}

impl AdviceMatrix {
    pub fn new(
        experts: usize,
        arms: usize,
        entries: Vec<f64>,
        categories: Vec<Category>,
    ) -> Result<Self, AggregatorError> {
        if experts == 0 || arms < 2 || entries.len() != experts * arms || categories.len() != arms {
            return Err(AggregatorError::Shape { experts, arms });
        }
        for (i, &v) in entries.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(AggregatorError::Entry {
                    expert: i / arms,
                    arm: i % arms,
                    value: v,
                });
            }
        }
        Ok(Self {
            experts,
            arms,
            entries,
            categories,
        })
    }

    /// Builds from one row per expert.
    pub fn from_rows(rows: &[Vec<f64>], categories: Vec<Category>) -> Result<Self, AggregatorError> {
        let arms = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != arms) {
            return Err(AggregatorError::Shape {
                experts: rows.len(),
                arms,
            });
        }
        Self::new(rows.len(), arms, rows.concat(), categories)
    }

    /// Two virtual arms for a single headline: "genuine" with advice `p`, "altered" with `1 - p`.
    pub fn label_arms(ratings: &[f64], category: Category) -> Result<Self, AggregatorError> {
        let mut entries = Vec::with_capacity(ratings.len() * 2);
        for &p in ratings {
            entries.push(p);
            entries.push(1.0 - p);
        }
        Self::new(ratings.len(), 2, entries, vec![category; 2])
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn get(&self, expert: usize, arm: usize) -> f64 {
        self.entries[expert * self.arms + arm]
    }

    pub fn row(&self, expert: usize) -> &[f64] {
        &self.entries[expert * self.arms..(expert + 1) * self.arms]
    }

    pub fn column(&self, arm: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.experts).map(move |n| self.get(n, arm))
    }

    pub fn category(&self, arm: usize) -> Category {
        self.categories[arm]
    }

    /// Regression features of an arm: an intercept followed by every expert's advice.
    pub fn feature(&self, arm: usize) -> Vec<f64> {
        std::iter::once(1.0).chain(self.column(arm)).collect()
    }

    pub fn column_mean(&self, arm: usize) -> f64 {
        self.column(arm).sum::<f64>() / self.experts as f64
    }

    /// Reorders experts so that row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_experts(&self, perm: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for &p in perm {
            entries.extend_from_slice(self.row(p));
        }
        Self {
            experts: self.experts,
            arms: self.arms,
            entries,
            categories: self.categories.clone(),
        }
    }
}

/// What an aggregator decided in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub scores: Vec<f64>,
    pub chosen: usize,
    /// Estimated probability that each arm's headline is genuine.
    pub predictions: Vec<f64>,
}

/// Per-round internal state worth recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Diagnostics {
    None,
    Weights(Vec<f64>),
    Structure(TreeStructure),
}

/// Common interface of every aggregation strategy.
pub trait Aggregator: Send {
    fn name(&self) -> &'static str;

    fn decide(&mut self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> Decision;

    /// Feedback for the arm chosen in the preceding [`Aggregator::decide`].
    fn update(&mut self, advice: &AdviceMatrix, chosen: usize, reward: f64);

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics::None
    }

    /// Harness hook; only the truth-reading oracle uses it.
    fn reveal_truth(&mut self, _truth: &[f64]) {}
}

/// One round of a replay.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub scores: Vec<f64>,
    pub chosen: usize,
    pub predictions: Vec<f64>,
    pub reward: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecisionTrace {
    pub rounds: Vec<RoundRecord>,
}

/// Index of the largest score; exact ties are broken uniformly with `rng`.
///
/// No random number is drawn when the maximum is unique.
pub fn argmax_tie_break(scores: &[f64], rng: &mut dyn RngCore) -> usize {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == best)
        .map(|(i, _)| i)
        .collect();
    match ties.len() {
        0 => 0,
        1 => ties[0],
        n => ties[rng.random_range(0..n)],
    }
}
