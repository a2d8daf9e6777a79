use serde::{Deserialize, Serialize};

use super::{calibrate, CalibrationTargets, SynthConfig, SynthError};

/// Named competence layouts for a 40-rater treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    /// Everyone equally competent everywhere.
    Uniform,
    /// One rater in five is competent on every category, the rest guess.
    FewExperts,
    /// One in five is competent on ethnicity headlines only, one in five on
    /// everything but ethnicity, and the rest guess.
    EthnicitySpecialists,
}

impl Population {
    pub fn profiles(self) -> Vec<[f64; 3]> {
        let block = |n: usize, p: [f64; 3]| std::iter::repeat_n(p, n);
        match self {
            Population::Uniform => vec![[1.0; 3]],
            Population::FewExperts => block(8, [1.0; 3]).chain(block(32, [0.0; 3])).collect(),
            Population::EthnicitySpecialists => block(8, [0.0, 1.0, 0.0])
                .chain(block(8, [1.0, 0.0, 1.0]))
                .chain(block(24, [0.0; 3]))
                .collect(),
        }
    }

    /// Calibrates this layout to `targets` with 40 raters per treatment.
    pub fn config(self, targets: &CalibrationTargets, seed: u64) -> Result<SynthConfig, SynthError> {
        let base = SynthConfig {
            participants_per_treatment: 40,
            profiles: self.profiles(),
            seed,
            ..SynthConfig::default()
        };
        calibrate(targets, &base)
    }
}

impl Default for CalibrationTargets {
    /// Mean accuracy 0.55 on every category and mean pairwise correlation 0.18.
    fn default() -> Self {
        Self {
            accuracy: [0.55; 3],
            correlation: 0.18,
        }
    }
}
