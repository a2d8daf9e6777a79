use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{argmax_tie_break, AdviceMatrix, Aggregator, AggregatorError, Decision, Diagnostics, MetaCmab};
use crate::data::Category;

/// A region of the category space with its own regression model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leaf {
    Global,
    Gender,
    Ethnicity,
    Age,
    GenderAge,
    EthnicityAge,
    GenderEthnicity,
}

impl Leaf {
    pub const ALL: [Leaf; 7] = [
        Leaf::Global,
        Leaf::Gender,
        Leaf::Ethnicity,
        Leaf::Age,
        Leaf::GenderAge,
        Leaf::EthnicityAge,
        Leaf::GenderEthnicity,
    ];

    fn index(self) -> usize {
        Self::ALL.iter().position(|l| *l == self).expect("listed")
    }

    pub fn contains(self, c: Category) -> bool {
        use Category::*;
        match self {
            Leaf::Global => true,
            Leaf::Gender => c == Gender,
            Leaf::Ethnicity => c == Ethnicity,
            Leaf::Age => c == Age,
            Leaf::GenderAge => c != Ethnicity,
            Leaf::EthnicityAge => c != Gender,
            Leaf::GenderEthnicity => c != Age,
        }
    }
}

/// The candidate partitions of {gender, ethnicity, age}, shallowest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeStructure {
    NoSplit,
    SplitEthnicity,
    SplitGender,
    SplitAge,
    SplitAll,
}

impl TreeStructure {
    pub const ALL: [TreeStructure; 5] = [
        TreeStructure::NoSplit,
        TreeStructure::SplitEthnicity,
        TreeStructure::SplitGender,
        TreeStructure::SplitAge,
        TreeStructure::SplitAll,
    ];

    pub fn leaves(self) -> &'static [Leaf] {
        match self {
            TreeStructure::NoSplit => &[Leaf::Global],
            TreeStructure::SplitEthnicity => &[Leaf::Ethnicity, Leaf::GenderAge],
            TreeStructure::SplitGender => &[Leaf::Gender, Leaf::EthnicityAge],
            TreeStructure::SplitAge => &[Leaf::Age, Leaf::GenderEthnicity],
            TreeStructure::SplitAll => &[Leaf::Gender, Leaf::Ethnicity, Leaf::Age],
        }
    }

    pub fn leaf_for(self, c: Category) -> Leaf {
        *self
            .leaves()
            .iter()
            .find(|l| l.contains(c))
            .expect("structures partition the categories")
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TreeStructure::NoSplit => "no_split",
            TreeStructure::SplitEthnicity => "split_ethnicity",
            TreeStructure::SplitGender => "split_gender",
            TreeStructure::SplitAge => "split_age",
            TreeStructure::SplitAll => "split_all",
        }
    }
}

/// Complexity charge per leaf when comparing structures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    /// Constant charge per leaf; `f64::INFINITY` pins the tree to a single model.
    Fixed(f64),
    /// Charge per leaf equal to this factor times the running mean per-round loss.
    RelativeToMeanLoss(f64),
}

impl Default for Penalty {
    fn default() -> Self {
        Penalty::RelativeToMeanLoss(0.05)
    }
}

/// Context-partitioned aggregation: seven regression leaves are trained in
/// parallel and the partition with the lowest penalized prequential loss is used.
#[derive(Debug, Clone)]
pub struct ExpertiseTree {
    leaves: Vec<MetaCmab>,
    losses: [f64; 7],
    rounds: usize,
    penalty: Penalty,
    active: TreeStructure,
}

impl ExpertiseTree {
    pub fn new(experts: usize, lambda: f64, alpha: f64, penalty: Penalty) -> Result<Self, AggregatorError> {
        match penalty {
            Penalty::Fixed(c) | Penalty::RelativeToMeanLoss(c) if c.is_nan() || c < 0.0 => {
                return Err(AggregatorError::Hyperparameter(format!(
                    "tree penalty must be non-negative, got {c}"
                )))
            }
            _ => {}
        }
        let leaf = MetaCmab::new(experts, lambda, alpha)?;
        Ok(Self {
            leaves: vec![leaf; 7],
            losses: [0.0; 7],
            rounds: 0,
            penalty,
            active: TreeStructure::NoSplit,
        })
    }

    pub fn structure(&self) -> TreeStructure {
        self.active
    }

    pub fn leaf(&self, leaf: Leaf) -> &MetaCmab {
        &self.leaves[leaf.index()]
    }

    /// Accumulated prequential squared error of a leaf.
    pub fn leaf_loss(&self, leaf: Leaf) -> f64 {
        self.losses[leaf.index()]
    }

    fn per_leaf_charge(&self) -> f64 {
        match self.penalty {
            Penalty::Fixed(c) => c,
            Penalty::RelativeToMeanLoss(f) if self.rounds > 0 => {
                f * self.losses[Leaf::Global.index()] / self.rounds as f64
            }
            Penalty::RelativeToMeanLoss(_) => 0.0,
        }
    }

    /// Penalized prequential loss of a structure.
    pub fn structure_cost(&self, s: TreeStructure) -> f64 {
        let leaves = s.leaves();
        let loss: f64 = leaves.iter().map(|l| self.losses[l.index()]).sum();
        loss + self.per_leaf_charge() * leaves.len() as f64
    }

    fn select(&self) -> TreeStructure {
        let mut best = TreeStructure::NoSplit;
        let mut best_cost = self.structure_cost(best);
        for s in TreeStructure::ALL.into_iter().skip(1) {
            let c = self.structure_cost(s);
            // ties keep the earlier (shallower) structure
            if c < best_cost {
                best = s;
                best_cost = c;
            }
        }
        best
    }

    fn model_for(&self, c: Category) -> &MetaCmab {
        self.leaf(self.active.leaf_for(c))
    }

    pub fn step(&self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> (Vec<f64>, usize) {
        let scores: Vec<f64> = (0..advice.arms())
            .map(|a| self.model_for(advice.category(a)).score(&advice.feature(a)))
            .collect();
        let chosen = argmax_tie_break(&scores, rng);
        (scores, chosen)
    }

    pub fn predict(&self, x: &[f64], category: Category) -> f64 {
        self.model_for(category).predict(x)
    }

    /// Scores the prediction of every leaf covering `category`, trains them, and re-selects the structure.
    pub fn update(&mut self, x: &[f64], category: Category, reward: f64) -> Result<(), AggregatorError> {
        for leaf in Leaf::ALL {
            if leaf.contains(category) {
                let i = leaf.index();
                let err = self.leaves[i].predict(x) - reward;
                self.leaves[i].update(x, reward)?;
                self.losses[i] += err * err;
            }
        }
        self.rounds += 1;
        self.active = self.select();
        Ok(())
    }
}

impl Aggregator for ExpertiseTree {
    fn name(&self) -> &'static str {
        "etree"
    }

    fn decide(&mut self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> Decision {
        let (scores, chosen) = self.step(advice, rng);
        let predictions = (0..advice.arms())
            .map(|a| self.predict(&advice.feature(a), advice.category(a)))
            .collect();
        Decision {
            scores,
            chosen,
            predictions,
        }
    }

    fn update(&mut self, advice: &AdviceMatrix, chosen: usize, reward: f64) {
        ExpertiseTree::update(self, &advice.feature(chosen), advice.category(chosen), reward)
            .expect("advice matrices hold finite probabilities");
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics::Structure(self.active)
    }
}
