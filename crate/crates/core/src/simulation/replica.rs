use rand::RngCore;

use super::{MemberRanking, RoundPlan, SimError};
use crate::aggregators::{AdviceMatrix, Aggregator, DecisionTrace, Diagnostics, RoundRecord};
use crate::data::{response_accuracy, Dataset};

/// Reward of following one member's advice row: the truth of their top-rated
/// arm, or 0.5 when they rate arms of different truth equally high.
pub fn member_reward(row: &[f64], truth: &[f64]) -> f64 {
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut tied = row.iter().zip(truth).filter(|(v, _)| **v == best).map(|(_, t)| *t);
    let first = tied.next().unwrap_or(0.0);
    if tied.all(|t| t == first) {
        first
    } else {
        0.5
    }
}

/// Everything about a replica that does not depend on the algorithm.
#[derive(Debug, Clone)]
pub struct ReplicaInputs {
    pub treatment: u8,
    /// Dataset participant indices, ascending.
    pub group: Vec<usize>,
    pub headlines: Vec<Vec<usize>>,
    pub advice: Vec<AdviceMatrix>,
    pub truth: Vec<Vec<f64>>,
    /// `member_rewards[n][t]`.
    pub member_rewards: Vec<Vec<f64>>,
    /// Value members are ranked by.
    pub member_scores: Vec<f64>,
    /// Best member in hindsight by mean reward, ties to the lower index.
    pub best: usize,
    pub best_tied: bool,
}

impl ReplicaInputs {
    pub fn new(
        dataset: &Dataset,
        group: &[usize],
        plan: &RoundPlan,
        horizon: usize,
        ranking: MemberRanking,
    ) -> Result<Self, SimError> {
        let mut group = group.to_vec();
        group.sort_unstable();
        let treatment = dataset.participants()[group[0]].treatment;
        let n = group.len();
        let rounds = &plan.rounds[..horizon.min(plan.rounds.len())];
        let label = plan.mode.headlines_per_round() == 1;

        let mut headlines = Vec::with_capacity(rounds.len());
        let mut advice = Vec::with_capacity(rounds.len());
        let mut truth = Vec::with_capacity(rounds.len());
        let mut member_rewards = vec![Vec::with_capacity(rounds.len()); n];
        let mut continuous = vec![0.0; n];
        for round in rounds {
            let mut rows = Vec::with_capacity(n);
            for &p in &group {
                let row: Vec<f64> = round
                    .headlines
                    .iter()
                    .map(|&h| {
                        dataset.probability(p, h).ok_or_else(|| SimError::MissingResponse {
                            participant: dataset.participants()[p].id.to_string(),
                            headline: dataset.headlines()[h].id.to_string(),
                        })
                    })
                    .collect::<Result<_, _>>()?;
                rows.push(row);
            }
            let hs: Vec<_> = round.headlines.iter().map(|&h| &dataset.headlines()[h]).collect();
            let (matrix, t) = if label {
                let ratings: Vec<f64> = rows.iter().map(|r| r[0]).collect();
                let y = hs[0].truth();
                (AdviceMatrix::label_arms(&ratings, hs[0].category)?, vec![y, 1.0 - y])
            } else {
                (
                    AdviceMatrix::from_rows(&rows, hs.iter().map(|h| h.category).collect())?,
                    hs.iter().map(|h| h.truth()).collect(),
                )
            };
            for (m, row) in rows.iter().enumerate() {
                member_rewards[m].push(member_reward(matrix.row(m), &t));
                continuous[m] += row
                    .iter()
                    .zip(&hs)
                    .map(|(p, h)| response_accuracy(*p, h.genuine))
                    .sum::<f64>()
                    / row.len() as f64;
            }
            headlines.push(round.headlines.clone());
            advice.push(matrix);
            truth.push(t);
        }

        let t = rounds.len() as f64;
        let means: Vec<f64> = member_rewards.iter().map(|r| r.iter().sum::<f64>() / t).collect();
        let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let best = means.iter().position(|m| *m == top).expect("non-empty group");
        let best_tied = means.iter().filter(|m| **m == top).count() > 1;
        let member_scores = match ranking {
            MemberRanking::Binary => means,
            MemberRanking::Continuous => continuous.iter().map(|c| c / t).collect(),
        };
        Ok(Self {
            treatment,
            group,
            headlines,
            advice,
            truth,
            member_rewards,
            member_scores,
            best,
            best_tied,
        })
    }

    pub fn rounds(&self) -> usize {
        self.advice.len()
    }

    /// Members ordered best first by their score, ties to the lower index.
    pub fn ranked_members(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.group.len()).collect();
        order.sort_by(|&a, &b| self.member_scores[b].total_cmp(&self.member_scores[a]).then(a.cmp(&b)));
        order
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaResult {
    pub trace: DecisionTrace,
    pub rewards: Vec<f64>,
    /// `R_t = r^{n*}_t - r_t`.
    pub regret: Vec<f64>,
    pub accuracy: f64,
    pub best_accuracy: f64,
    pub terminal_regret: f64,
    /// Whether the algorithm's total reward beats each member, best-ranked first.
    pub wins: Vec<bool>,
    pub final_diagnostics: Diagnostics,
}

/// Plays one replica: each round the aggregator decides, is paid the truth of
/// its chosen arm, and learns from it.
pub fn run_replica(inputs: &ReplicaInputs, algorithm: &mut dyn Aggregator, rng: &mut dyn RngCore) -> ReplicaResult {
    let mut trace = DecisionTrace::default();
    let mut rewards = Vec::with_capacity(inputs.rounds());
    for (advice, truth) in inputs.advice.iter().zip(&inputs.truth) {
        algorithm.reveal_truth(truth);
        let d = algorithm.decide(advice, rng);
        let reward = truth[d.chosen];
        algorithm.update(advice, d.chosen, reward);
        rewards.push(reward);
        trace.rounds.push(RoundRecord {
            scores: d.scores,
            chosen: d.chosen,
            predictions: d.predictions,
            reward,
            diagnostics: algorithm.diagnostics(),
        });
    }
    let best = &inputs.member_rewards[inputs.best];
    let regret: Vec<f64> = best.iter().zip(&rewards).map(|(b, r)| b - r).collect();
    let t = rewards.len() as f64;
    let total: f64 = rewards.iter().sum();
    let wins = inputs
        .ranked_members()
        .into_iter()
        .map(|m| total > inputs.member_rewards[m].iter().sum::<f64>())
        .collect();
    ReplicaResult {
        accuracy: total / t,
        best_accuracy: best.iter().sum::<f64>() / t,
        terminal_regret: *regret.last().expect("at least one round"),
        final_diagnostics: algorithm.diagnostics(),
        trace,
        rewards,
        regret,
        wins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn member_reward_ties() {
        assert_eq!(member_reward(&[0.75, 0.25], &[1.0, 0.0]), 1.0);
        assert_eq!(member_reward(&[0.5, 0.5], &[1.0, 0.0]), 0.5);
        assert_eq!(member_reward(&[0.5, 0.5, 0.0], &[1.0, 1.0, 0.0]), 1.0);
        assert_eq!(member_reward(&[0.25, 0.75], &[1.0, 0.0]), 0.0);
    }
}
