//! Synthetic expert populations on the study's balanced headline layout.
//!
//! Each rating comes from a latent score
//! `z = s(y) delta + beta + sqrt(rho) u_h + sqrt(1 - rho) v`
//! cut into five levels, where `u_h` is shared by everyone rating headline `h`.

mod calibrate;
mod presets;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    Category, DataError, Dataset, Gender, Headline, HeadlineId, Level, PairId, Participant, ParticipantId,
    Provenance, ResponseRecord, Sentiment, HEADLINES_PER_CELL,
};
use crate::seed::rng_for;

pub use calibrate::{calibrate, expected_accuracy, mean_pairwise_correlation, CalibrationTargets};
pub use presets::Population;

pub const DEFAULT_THRESHOLDS: [f64; 4] = [-0.8, -0.25, 0.25, 0.8];
const PAIRS_PER_CATEGORY: usize = 40;
const TREATMENTS: u8 = 5;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    Config(String),
    #[error("could not reach {what} target {target} (closest {achieved}) within {probes} probes")]
    Unachievable {
        what: &'static str,
        target: f64,
        achieved: f64,
        probes: usize,
    },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Marginal distributions of the synthetic demographics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemographicMix {
    pub female_share: f64,
    pub other_gender_share: f64,
    /// Ethnicity labels with relative weights; the label `NA` yields a missing value.
    pub ethnicities: Vec<(String, f64)>,
    pub median_age: f64,
}

impl Default for DemographicMix {
    fn default() -> Self {
        Self {
            female_share: 0.49,
            other_gender_share: 0.02,
            ethnicities: vec![
                ("White".into(), 0.61),
                ("Black".into(), 0.13),
                ("Asian".into(), 0.1),
                ("Mixed".into(), 0.08),
                ("Other".into(), 0.05),
                ("NA".into(), 0.03),
            ],
            median_age: 35.0,
        }
    }
}

/// Parameters of the latent rating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub participants_per_treatment: usize,
    /// Competence scale per category (gender, ethnicity, age).
    pub delta: [f64; 3],
    /// Per-participant competence multipliers, assigned cyclically by index within a treatment.
    pub profiles: Vec<[f64; 3]>,
    /// Weight of the headline-level noise shared by all raters.
    pub rho: f64,
    /// Additive latent shift per category and sentiment (positive, negative);
    /// negative values make raters more sceptical.
    pub bias: [[f64; 2]; 3],
    pub thresholds: [f64; 4],
    pub demographics: DemographicMix,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            participants_per_treatment: 40,
            delta: [0.15; 3],
            profiles: vec![[1.0; 3]],
            rho: 0.15,
            bias: [[0.0; 2]; 3],
            thresholds: DEFAULT_THRESHOLDS,
            demographics: DemographicMix::default(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.participants_per_treatment == 0 {
            return bad("participants_per_treatment must be positive".into());
        }
        if self.thresholds.windows(2).any(|w| !(w[0] < w[1])) || self.thresholds.iter().any(|t| !t.is_finite()) {
            return bad(format!("thresholds must be finite and strictly increasing: {:?}", self.thresholds));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho {} outside [0, 1)", self.rho));
        }
        if self.profiles.is_empty() {
            return bad("at least one competence profile is required".into());
        }
        for d in self.delta.iter().chain(self.profiles.iter().flatten()) {
            if !(d.is_finite() && *d >= 0.0) {
                return bad(format!("competence values must be finite and >= 0, got {d}"));
            }
        }
        if self.bias.iter().flatten().any(|b| !b.is_finite()) {
            return bad("bias offsets must be finite".into());
        }
        let m = &self.demographics;
        if !(0.0..=1.0).contains(&m.female_share)
            || !(0.0..=1.0).contains(&m.other_gender_share)
            || m.female_share + m.other_gender_share > 1.0
        {
            return bad("gender shares must lie in [0, 1] and sum to at most 1".into());
        }
        if m.ethnicities.is_empty() || m.ethnicities.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return bad("ethnicity weights must be non-negative".into());
        }
        if !(m.median_age >= 18.0) {
            return bad("median age must be at least 18".into());
        }
        Ok(())
    }

    /// Competence `delta_{n,c}` of the participant at `index` within its treatment.
    pub fn competence(&self, index: usize, category: Category) -> f64 {
        let c = category.index();
        self.delta[c] * self.profiles[index % self.profiles.len()][c]
    }

    pub fn shift(&self, category: Category, sentiment: Sentiment) -> f64 {
        self.bias[category.index()][sentiment.index()]
    }

    /// Level of a latent score under the configured thresholds.
    pub fn quantize(&self, z: f64) -> u8 {
        1 + self.thresholds.iter().filter(|t| z > **t).count() as u8
    }
}

/// The fixed 240-headline layout: 40 pairs per category; pair `i`'s genuine
/// member sits in treatment `i mod 5 + 1`, its altered member in the next one.
pub fn headline_layout() -> Vec<Headline> {
    let mut out = Vec::with_capacity(2 * PAIRS_PER_CATEGORY * 3);
    for category in Category::ALL {
        for i in 0..PAIRS_PER_CATEGORY {
            let t = (i % TREATMENTS as usize) as u8 + 1;
            let sentiment = if i / (TREATMENTS as usize) < HEADLINES_PER_CELL / 2 {
                Sentiment::Positive
            } else {
                Sentiment::Negative
            };
            let pair = PairId(format!("{}-{i:02}", category.as_str()));
            for genuine in [true, false] {
                let treatment = if genuine { t } else { t % TREATMENTS + 1 };
                let tag = if genuine { "g" } else { "a" };
                out.push(Headline {
                    id: HeadlineId(format!("{pair}-{tag}")),
                    treatment,
                    pair_id: pair.clone(),
                    text: format!(
                        "{} {} headline {i}{}",
                        sentiment.as_str(),
                        category.as_str(),
                        if genuine { "" } else { " (altered)" }
                    ),
                    category,
                    sentiment,
                    genuine,
                });
            }
        }
    }
    out
}

fn draw_demographics(mix: &DemographicMix, rng: &mut ChaCha8Rng) -> (Option<u32>, Option<Gender>, Option<String>) {
    let g: f64 = rng.random();
    let gender = if g < mix.female_share {
        Gender::Female
    } else if g < mix.female_share + mix.other_gender_share {
        Gender::Other
    } else {
        Gender::Male
    };
    let total: f64 = mix.ethnicities.iter().map(|(_, w)| w).sum();
    let mut e = rng.random::<f64>() * total;
    let mut ethnicity = mix.ethnicities.last().map(|(n, _)| n.clone());
    for (name, w) in &mix.ethnicities {
        if e < *w {
            ethnicity = Some(name.clone());
            break;
        }
        e -= w;
    }
    let ethnicity = ethnicity.filter(|n| n != "NA");
    // log-normal spread above 18 with the configured median
    let spread: f64 = rng.sample(StandardNormal);
    let age = 18.0 + (mix.median_age - 18.0) * (0.45 * spread).exp();
    let age = age.round().clamp(18.0, 85.0) as u32;
    (Some(age), Some(gender), ethnicity)
}

/// Generates a full balanced dataset: all 240 headlines and
/// `participants_per_treatment` raters in each of the five treatments.
pub fn generate(config: &SynthConfig) -> Result<Dataset, SynthError> {
    config.validate()?;
    let headlines = headline_layout();
    let shared: Vec<f64> = headlines
        .iter()
        .enumerate()
        .map(|(i, _)| rng_for("synth-headline", &[config.seed, i as u64]).sample(StandardNormal))
        .collect();

    let jobs: Vec<(u8, usize)> = (1..=TREATMENTS)
        .flat_map(|t| (0..config.participants_per_treatment).map(move |k| (t, k)))
        .collect();
    let generated: Vec<(Participant, Vec<ResponseRecord>)> = jobs
        .par_iter()
        .map(|&(t, k)| {
            let mut rng = rng_for("synth-participant", &[config.seed, u64::from(t), k as u64]);
            let (age, gender, ethnicity) = draw_demographics(&config.demographics, &mut rng);
            let id = ParticipantId(format!("t{t}-{k:03}"));
            let mut order: Vec<usize> = headlines
                .iter()
                .enumerate()
                .filter(|(_, h)| h.treatment == t)
                .map(|(i, _)| i)
                .collect();
            order.shuffle(&mut rng);
            let rho = config.rho;
            let responses = order
                .iter()
                .enumerate()
                .map(|(pos, &hi)| {
                    let h = &headlines[hi];
                    let s = if h.genuine { 1.0 } else { -1.0 };
                    let v: f64 = rng.sample(StandardNormal);
                    let z = s * config.competence(k, h.category)
                        + config.shift(h.category, h.sentiment)
                        + rho.sqrt() * shared[hi]
                        + (1.0 - rho).sqrt() * v;
                    let log_ms: f64 = rng.sample(StandardNormal);
                    ResponseRecord {
                        participant: id.clone(),
                        headline: h.id.clone(),
                        level: Level::new(config.quantize(z)).expect("quantize yields 1..=5"),
                        position: pos as u32 + 1,
                        response_time_ms: (8000.0 * (0.6 * log_ms).exp()).round() as u64,
                    }
                })
                .collect();
            let p = Participant {
                id,
                treatment: t,
                age,
                gender,
                ethnicity,
            };
            (p, responses)
        })
        .collect();

    let mut participants = Vec::with_capacity(generated.len());
    let mut responses = Vec::with_capacity(generated.len() * 48);
    for (p, r) in generated {
        participants.push(p);
        responses.extend(r);
    }
    let note = serde_json::to_string(config).expect("config serializes");
    let provenance = Provenance {
        headlines_sha256: None,
        responses_sha256: None,
        note: Some(format!("synthetic: {note}")),
    };
    Ok(Dataset::new(headlines, participants, responses, provenance)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{response_accuracy, validate_balance};

    fn mean_accuracy(d: &Dataset) -> f64 {
        let total: f64 = d
            .responses()
            .iter()
            .map(|r| {
                let h = &d.headlines()[d.headline_idx(&r.headline).unwrap()];
                response_accuracy(r.probability(), h.genuine)
            })
            .sum();
        total / d.responses().len() as f64
    }

    #[test]
    fn layout_is_balanced_and_paired() {
        let h = headline_layout();
        assert_eq!(h.len(), 240);
        validate_balance(&h).unwrap();
    }

    #[test]
    fn generated_dataset_validates_and_is_deterministic() {
        let cfg = SynthConfig {
            participants_per_treatment: 4,
            seed: 3,
            ..SynthConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.responses().len(), 5 * 4 * 48);
        assert_eq!(a, b);
        let c = generate(&SynthConfig { seed: 4, ..cfg }).unwrap();
        assert_ne!(a.responses(), c.responses());
    }

    #[test]
    fn chance_population_is_at_chance() {
        let cfg = SynthConfig {
            participants_per_treatment: 42,
            delta: [0.0; 3],
            rho: 0.0,
            seed: 11,
            ..SynthConfig::default()
        };
        // 5 x 42 x 48 = 10080 responses
        let acc = mean_accuracy(&generate(&cfg).unwrap());
        assert!((acc - 0.5).abs() < 0.02, "{acc}");
    }

    #[test]
    fn huge_competence_is_always_right() {
        let cfg = SynthConfig {
            participants_per_treatment: 3,
            delta: [50.0; 3],
            ..SynthConfig::default()
        };
        let d = generate(&cfg).unwrap();
        assert_eq!(mean_accuracy(&d), 1.0);
        assert!(d.responses().iter().all(|r| matches!(r.level.get(), 1 | 5)));
    }

    #[test]
    fn quantize_respects_thresholds() {
        let c = SynthConfig::default();
        assert_eq!(c.quantize(-5.0), 1);
        assert_eq!(c.quantize(-0.5), 2);
        assert_eq!(c.quantize(0.0), 3);
        assert_eq!(c.quantize(0.5), 4);
        assert_eq!(c.quantize(0.8), 4);
        assert_eq!(c.quantize(0.81), 5);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |c: SynthConfig| assert!(matches!(c.validate(), Err(SynthError::Config(_))));
        bad(SynthConfig { thresholds: [0.0, 0.0, 1.0, 2.0], ..Default::default() });
        bad(SynthConfig { rho: 1.0, ..Default::default() });
        bad(SynthConfig { delta: [-0.1, 0.0, 0.0], ..Default::default() });
        bad(SynthConfig { profiles: vec![], ..Default::default() });
    }
}
