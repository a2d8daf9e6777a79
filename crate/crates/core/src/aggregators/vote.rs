use rand::{Rng, RngCore};

use super::{argmax_tie_break, AdviceMatrix, Aggregator, Decision};

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Unweighted vote count per arm: each expert votes +1 above 0.5, -1 below, abstains at 0.5.
pub fn mv_scores(advice: &AdviceMatrix) -> Vec<f64> {
    (0..advice.arms())
        .map(|a| advice.column(a).map(|p| sign(p - 0.5)).sum())
        .collect()
}

/// Confidence-weighted vote per arm, `sum_n (p_n(a) - 0.5)`.
pub fn cwmv_scores(advice: &AdviceMatrix) -> Vec<f64> {
    (0..advice.arms())
        .map(|a| advice.column(a).map(|p| p - 0.5).sum())
        .collect()
}

fn column_means(advice: &AdviceMatrix) -> Vec<f64> {
    (0..advice.arms()).map(|a| advice.column_mean(a)).collect()
}

/// Draws one expert uniformly and returns the arm they rate highest.
pub fn random_expert_choose(advice: &AdviceMatrix, rng: &mut dyn RngCore) -> usize {
    random_expert_pick(advice, rng).1
}

fn random_expert_pick(advice: &AdviceMatrix, rng: &mut dyn RngCore) -> (usize, usize) {
    let expert = rng.random_range(0..advice.experts());
    let arm = argmax_tie_break(advice.row(expert), rng);
    (expert, arm)
}

#[derive(Debug, Clone, Default)]
pub struct MajorityVote;

impl Aggregator for MajorityVote {
    fn name(&self) -> &'static str {
        "mv"
    }

    fn decide(&mut self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> Decision {
        let scores = mv_scores(advice);
        let chosen = argmax_tie_break(&scores, rng);
        Decision {
            scores,
            chosen,
            predictions: column_means(advice),
        }
    }

    fn update(&mut self, _: &AdviceMatrix, _: usize, _: f64) {}
}

/// Confidence-weighted majority vote; the truth prediction is the plain advice mean.
#[derive(Debug, Clone, Default)]
pub struct Cwmv;

impl Aggregator for Cwmv {
    fn name(&self) -> &'static str {
        "cwmv"
    }

    fn decide(&mut self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> Decision {
        let scores = cwmv_scores(advice);
        let chosen = argmax_tie_break(&scores, rng);
        Decision {
            scores,
            chosen,
            predictions: column_means(advice),
        }
    }

    fn update(&mut self, _: &AdviceMatrix, _: usize, _: f64) {}
}

#[derive(Debug, Clone, Default)]
pub struct RandomExpert;

impl Aggregator for RandomExpert {
    fn name(&self) -> &'static str {
        "random"
    }

    fn decide(&mut self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> Decision {
        let (expert, chosen) = random_expert_pick(advice, rng);
        let row = advice.row(expert).to_vec();
        Decision {
            scores: row.clone(),
            chosen,
            predictions: row,
        }
    }

    fn update(&mut self, _: &AdviceMatrix, _: usize, _: f64) {}
}
