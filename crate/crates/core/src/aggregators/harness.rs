use rand::RngCore;

use super::{argmax_tie_break, AdviceMatrix, Aggregator, Decision};

/// Always plays the arm a fixed member rates highest.
#[derive(Debug, Clone)]
pub struct FollowMember {
    member: usize,
}

impl FollowMember {
    pub fn new(member: usize) -> Self {
        Self { member }
    }

    pub fn member(&self) -> usize {
        self.member
    }
}

impl Aggregator for FollowMember {
    fn name(&self) -> &'static str {
        "follow"
    }

    fn decide(&mut self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> Decision {
        let row = advice.row(self.member.min(advice.experts() - 1)).to_vec();
        let chosen = argmax_tie_break(&row, rng);
        Decision {
            scores: row.clone(),
            chosen,
            predictions: row,
        }
    }

    fn update(&mut self, _: &AdviceMatrix, _: usize, _: f64) {}
}

/// Reads the ground truth the harness reveals before each decision.
#[derive(Debug, Clone, Default)]
pub struct Oracle {
    truth: Vec<f64>,
}

impl Aggregator for Oracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn decide(&mut self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> Decision {
        let scores = if self.truth.len() == advice.arms() {
            self.truth.clone()
        } else {
            vec![0.0; advice.arms()]
        };
        let chosen = argmax_tie_break(&scores, rng);
        Decision {
            predictions: scores.clone(),
            scores,
            chosen,
        }
    }

    fn update(&mut self, _: &AdviceMatrix, _: usize, _: f64) {}

    fn reveal_truth(&mut self, truth: &[f64]) {
        self.truth = truth.to_vec();
    }
}
