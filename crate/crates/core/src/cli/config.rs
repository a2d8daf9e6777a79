use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::simulation::SimulationConfig;
use crate::stats::{Adjustment, PMethod, WorkingCorrelation};
use crate::synth::{CalibrationTargets, Population, SynthConfig};

/// Where the dataset comes from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Directory holding `headlines.csv` and `responses.csv`.
    pub dir: Option<PathBuf>,
    pub headlines: Option<PathBuf>,
    pub responses: Option<PathBuf>,
    /// Use the bundled synthetic study.
    pub fixture: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub config: SynthConfig,
    /// Replaces `config.profiles` when set.
    pub population: Option<Population>,
    /// Calibrates `delta` and `rho` to these targets when set.
    pub targets: Option<CalibrationTargets>,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            config: SynthConfig::default(),
            population: Some(Population::FewExperts),
            targets: Some(CalibrationTargets::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// `raw`, or an algorithm whose averaged predictions replace the responses.
    pub source: String,
    /// Group size and replicas per treatment used to collect predictions.
    pub prediction_size: usize,
    pub prediction_replicas: usize,
    /// Moving-average window of the response-time curve.
    pub window: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            source: "raw".into(),
            prediction_size: 36,
            prediction_replicas: 100,
            window: crate::bias::DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub file: Option<PathBuf>,
    /// Columns compared directly (paired tests, Pearson, bootstrap).
    pub columns: Vec<String>,
    pub value: Option<String>,
    pub group: Option<String>,
    pub cluster: Option<String>,
    pub predictors: Vec<String>,
    pub p_method: PMethod,
    pub adjustment: Adjustment,
    pub correlation: WorkingCorrelation,
    pub resamples: usize,
    pub level: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            file: None,
            columns: Vec::new(),
            value: None,
            group: None,
            cluster: None,
            predictors: Vec::new(),
            p_method: PMethod::Auto,
            adjustment: Adjustment::Holm,
            correlation: WorkingCorrelation::Exchangeable,
            resamples: 10_000,
            level: 0.95,
        }
    }
}

/// Everything a run needs; loaded from JSON and then overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub output: Option<PathBuf>,
    /// Master seed; overrides the simulation and synth seeds when set.
    pub seed: Option<u64>,
    /// Worker threads; overrides `simulation.workers` when set.
    pub workers: Option<usize>,
    pub simulation: SimulationConfig,
    pub synth: SynthSection,
    pub analysis: AnalysisConfig,
    pub stats: StatsConfig,
    /// Directory `report` reads; defaults to the output directory.
    pub report_input: Option<PathBuf>,
}

impl RunConfig {
    /// Pushes the master seed and worker count down into the sections.
    pub fn resolve(&mut self) {
        if let Some(s) = self.seed {
            self.simulation.seed = s;
            self.synth.config.seed = s;
        }
        if let Some(w) = self.workers {
            self.simulation.workers = w;
        }
    }

    /// Hash of the settings that can change results; the worker count is left out.
    pub fn result_hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        c.simulation.workers = 0;
        crate::simulation::config_hash(&c)
    }
}
