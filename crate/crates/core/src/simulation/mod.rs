//! Bootstrap harness: sample participant groups, replay their ratings
//! round by round through each aggregator, and score accuracy and regret
//! against the best group member in hindsight.

mod campaign;
mod output;
mod replica;
mod rounds;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregators::{AggregatorError, AlgorithmSpec};
use crate::data::{DataError, HEADLINES_PER_TREATMENT};

pub use campaign::{collect_predictions, run_campaign, CampaignOutput, MetricsRow, MetricsTable, ReplicaTrace};
pub use output::{config_hash, write_metrics_csv, write_metrics_meta, write_trace_csv, MetricsMeta};
pub use replica::{member_reward, run_replica, ReplicaInputs, ReplicaResult};
pub use rounds::{build_rounds, Round, RoundPlan};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Aggregator(#[from] AggregatorError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("participant {participant} has no response for headline {headline}")]
    MissingResponse { participant: String, headline: String },
    #[error("replica failed (treatment {treatment}, N = {size}, replica {replica}, seed {seed}): {source}")]
    Replica {
        treatment: u8,
        size: usize,
        replica: usize,
        seed: u64,
        #[source]
        source: Box<SimError>,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    /// True for errors caused by the configuration rather than by the run.
    pub fn is_validation(&self) -> bool {
        matches!(self, SimError::Config(_))
    }
}

/// How arms are formed each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    /// One headline per round with a "genuine" and an "altered" claim arm.
    #[default]
    Label,
    /// `arms` distinct headlines per round; the learner tries to pick a genuine one.
    HeadlineSelection { arms: usize },
}

impl Mode {
    pub fn arms(self) -> usize {
        match self {
            Mode::Label => 2,
            Mode::HeadlineSelection { arms } => arms,
        }
    }

    pub fn headlines_per_round(self) -> usize {
        match self {
            Mode::Label => 1,
            Mode::HeadlineSelection { arms } => arms,
        }
    }
}

/// What ranks group members in the win-percentage table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberRanking {
    /// Mean decision reward.
    #[default]
    Binary,
    /// Mean `1 - |p - y|` over the advice the member gave.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CiSettings {
    pub resamples: usize,
    /// Resample size; `None` uses `min(1000, replicas)`.
    pub size: Option<usize>,
    pub level: f64,
    /// Also bootstrap every point of the per-round curves.
    pub curves: bool,
}

impl Default for CiSettings {
    fn default() -> Self {
        Self {
            resamples: 1000,
            size: None,
            level: 0.95,
            curves: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub sizes: Vec<usize>,
    pub replicas: usize,
    /// `None` runs every treatment that has participants.
    pub treatments: Option<Vec<u8>>,
    pub mode: Mode,
    /// Rounds per replica; `None` plays every headline of the treatment once.
    pub horizon: Option<usize>,
    pub seed: u64,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Worker threads; 0 uses all cores. Never affects results.
    pub workers: usize,
    pub member_ranking: MemberRanking,
    pub ci: CiSettings,
    pub keep_traces: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            sizes: (1..=18).map(|k| 2 * k).collect(),
            replicas: 1000,
            treatments: None,
            mode: Mode::Label,
            horizon: None,
            seed: 0,
            algorithms: vec![
                AlgorithmSpec::Random,
                AlgorithmSpec::Cwmv,
                AlgorithmSpec::Exp4 { gamma: None },
                AlgorithmSpec::metacmab(),
                AlgorithmSpec::etree(),
            ],
            workers: 0,
            member_ranking: MemberRanking::Binary,
            ci: CiSettings::default(),
            keep_traces: false,
        }
    }
}

impl SimulationConfig {
    /// Rounds a full treatment yields in this mode.
    pub fn rounds_available(&self) -> usize {
        HEADLINES_PER_TREATMENT / self.mode.headlines_per_round()
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or_else(|| self.rounds_available())
    }

    /// Checks everything that does not depend on the dataset.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("group sizes must be non-empty and positive".into());
        }
        if self.replicas == 0 {
            return bad("replicas must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required".into());
        }
        let mut labels: Vec<String> = self.algorithms.iter().map(|a| a.label()).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("algorithm label `{}` appears twice", w[0]));
        }
        if let Mode::HeadlineSelection { arms } = self.mode {
            if arms < 2 || !HEADLINES_PER_TREATMENT.is_multiple_of(arms) {
                return bad(format!(
                    "arms per round must be at least 2 and divide {HEADLINES_PER_TREATMENT}, got {arms}"
                ));
            }
        }
        let h = self.horizon();
        if h == 0 || h > self.rounds_available() {
            return bad(format!(
                "horizon {h} outside 1..={} for this mode",
                self.rounds_available()
            ));
        }
        if self.ci.resamples == 0 || self.ci.size == Some(0) || !(self.ci.level > 0.0 && self.ci.level < 1.0) {
            return bad("bootstrap settings need positive counts and a level in (0, 1)".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes() {
        let c = SimulationConfig::default();
        assert_eq!(c.sizes.first(), Some(&2));
        assert_eq!(c.sizes.last(), Some(&36));
        assert_eq!(c.sizes.len(), 18);
        c.validate().unwrap();
    }

    #[test]
    fn validation_names_problem() {
        let c = SimulationConfig {
            mode: Mode::HeadlineSelection { arms: 5 },
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(SimError::Config(m)) if m.contains("divide 48")));
        let c = SimulationConfig {
            algorithms: vec![AlgorithmSpec::Cwmv, AlgorithmSpec::Cwmv],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = SimulationConfig {
            horizon: Some(49),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let c: SimulationConfig = serde_json::from_str(r#"{"sizes":[4],"mode":{"kind":"headline_selection","arms":4}}"#).unwrap();
        assert_eq!(c.replicas, 1000);
        assert_eq!(c.rounds_available(), 12);
    }
}
