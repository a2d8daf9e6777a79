use serde::Serialize;

use super::{mean, BiasError};
use crate::data::{decision_credit, Dataset, Gender};
use crate::stats::{pearson, wilcoxon_signed_rank, TestResult};

/// Mean of pairwise Pearson correlations, each pair taken within one treatment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    pub mean: Option<f64>,
    pub pairs: usize,
    /// Pairs skipped because one member answered constantly.
    pub skipped: usize,
}

/// Decision accuracy of averaging a group's ratings on every headline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupVote {
    pub group: &'static str,
    pub headlines: usize,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityReport {
    pub men: CorrelationSummary,
    pub women: CorrelationSummary,
    /// Man-woman pairs.
    pub between: CorrelationSummary,
    /// Expected mean correlation of a group with equally many men and women,
    /// using the largest balanced group each treatment allows.
    pub balanced_mix: Option<f64>,
    pub votes: Vec<GroupVote>,
    /// Paired test of male against female vote credit over headlines.
    pub male_vs_female: Option<TestResult>,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Acc {
    sum: f64,
    pairs: usize,
    skipped: usize,
}

impl Acc {
    fn add(&mut self, r: Option<f64>) {
        match r {
            Some(r) => {
                self.sum += r;
                self.pairs += 1;
            }
            None => self.skipped += 1,
        }
    }

    fn mean(&self) -> Option<f64> {
        (self.pairs > 0).then(|| self.sum / self.pairs as f64)
    }

    fn summary(&self) -> CorrelationSummary {
        CorrelationSummary {
            mean: self.mean(),
            pairs: self.pairs,
            skipped: self.skipped,
        }
    }
}

/// Correlation of two participants over the headlines both answered.
fn pair_correlation(dataset: &Dataset, headlines: &[usize], a: usize, b: usize) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = headlines
        .iter()
        .filter_map(|&h| Some((dataset.probability(a, h)?, dataset.probability(b, h)?)))
        .unzip();
    pearson(&xs, &ys)
}

fn within(dataset: &Dataset, headlines: &[usize], who: &[usize], acc: &mut Acc) {
    for (i, &a) in who.iter().enumerate() {
        for &b in &who[i + 1..] {
            acc.add(pair_correlation(dataset, headlines, a, b));
        }
    }
}

/// Within- and between-gender rating correlations, and how well each
/// gender's averaged ratings decide the headlines compared with a balanced mix.
pub fn diversity_analysis(dataset: &Dataset) -> Result<DiversityReport, BiasError> {
    let (mut men, mut women, mut between) = (Acc::default(), Acc::default(), Acc::default());
    let (mut mix_sum, mut mix_weight) = (0.0, 0.0);
    let mut credit: [Vec<f64>; 3] = Default::default();
    let mut paired: (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    for t in dataset.treatments() {
        let hs = dataset.headlines_in(t);
        let of = |g: Gender| -> Vec<usize> {
            dataset
                .participants_in(t)
                .iter()
                .copied()
                .filter(|&p| dataset.participants()[p].gender == Some(g))
                .collect()
        };
        let (m, f) = (of(Gender::Male), of(Gender::Female));
        let (mut tm, mut tf, mut tb) = (Acc::default(), Acc::default(), Acc::default());
        within(dataset, hs, &m, &mut tm);
        within(dataset, hs, &f, &mut tf);
        for &a in &m {
            for &b in &f {
                tb.add(pair_correlation(dataset, hs, a, b));
            }
        }
        let k = m.len().min(f.len());
        if let (Some(rm), Some(rf), Some(rb)) = (tm.mean(), tf.mean(), tb.mean()) {
            let same = (k * (k - 1) / 2) as f64;
            let cross = (k * k) as f64;
            let w = 2.0 * same + cross;
            mix_sum += same * (rm + rf) + cross * rb;
            mix_weight += w;
        }
        for (acc, part) in [(&mut men, tm), (&mut women, tf), (&mut between, tb)] {
            acc.sum += part.sum;
            acc.pairs += part.pairs;
            acc.skipped += part.skipped;
        }

        let mix: Vec<usize> = m[..k].iter().chain(&f[..k]).copied().collect();
        for &h in hs {
            let genuine = dataset.headlines()[h].genuine;
            let vote = |who: &[usize]| -> Option<f64> {
                let ps: Vec<f64> = who.iter().filter_map(|&p| dataset.probability(p, h)).collect();
                (!ps.is_empty()).then(|| decision_credit(mean(&ps), genuine))
            };
            let votes = [vote(&m), vote(&f), vote(&mix)];
            for (c, v) in credit.iter_mut().zip(votes) {
                c.extend(v);
            }
            if let (Some(a), Some(b)) = (votes[0], votes[1]) {
                paired.0.push(a);
                paired.1.push(b);
            }
        }
    }

    let mut warnings = Vec::new();
    let male_vs_female = match wilcoxon_signed_rank(&paired.0, &paired.1) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("male vs female vote test not computed: {e}"));
            None
        }
    };
    let votes = ["male", "female", "balanced_mix"]
        .into_iter()
        .zip(&credit)
        .map(|(group, c)| GroupVote {
            group,
            headlines: c.len(),
            accuracy: (!c.is_empty()).then(|| mean(c)),
        })
        .collect();
    Ok(DiversityReport {
        men: men.summary(),
        women: women.summary(),
        between: between.summary(),
        balanced_mix: (mix_weight > 0.0).then(|| mix_sum / mix_weight),
        votes,
        male_vs_female,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Participant, ParticipantId, ResponseRecord};
    use crate::synth::{generate, SynthConfig};

    #[test]
    fn clones_correlate_perfectly() {
        let d = generate(&SynthConfig {
            participants_per_treatment: 1,
            delta: [0.5; 3],
            ..Default::default()
        })
        .unwrap();
        // three identical men per treatment
        let mut people = Vec::new();
        let mut responses = Vec::new();
        for p in d.participants() {
            for k in 0..3 {
                let id = ParticipantId(format!("{}-{k}", p.id));
                people.push(Participant {
                    id: id.clone(),
                    gender: Some(Gender::Male),
                    ..p.clone()
                });
                responses.extend(d.responses().iter().filter(|r| r.participant == p.id).map(|r| ResponseRecord {
                    participant: id.clone(),
                    ..r.clone()
                }));
            }
        }
        let d = Dataset::new(d.headlines().to_vec(), people, responses, Default::default()).unwrap();
        let r = diversity_analysis(&d).unwrap();
        assert_eq!(r.men.mean, Some(1.0));
        assert_eq!(r.men.pairs, 5 * 3);
        assert!(r.women.mean.is_none());
        assert!(r.balanced_mix.is_none());
    }

    #[test]
    fn independent_raters_are_uncorrelated() {
        let d = generate(&SynthConfig {
            participants_per_treatment: 30,
            delta: [0.0; 3],
            rho: 0.0,
            ..Default::default()
        })
        .unwrap();
        let r = diversity_analysis(&d).unwrap();
        for s in [&r.men, &r.women, &r.between] {
            assert!(s.mean.unwrap().abs() < 0.03, "{s:?}");
        }
        assert!(r.balanced_mix.unwrap().abs() < 0.03);
        assert_eq!(r.votes.len(), 3);
    }

    #[test]
    fn shared_noise_shows_up_in_every_group() {
        let d = generate(&SynthConfig {
            participants_per_treatment: 30,
            delta: [0.0; 3],
            rho: 0.4,
            ..Default::default()
        })
        .unwrap();
        let r = diversity_analysis(&d).unwrap();
        let (m, w, b) = (r.men.mean.unwrap(), r.women.mean.unwrap(), r.between.mean.unwrap());
        assert!(m > 0.15 && w > 0.15 && b > 0.15);
        let mix = r.balanced_mix.unwrap();
        assert!(mix > m.min(w).min(b) - 1e-12 && mix < m.max(w).max(b) + 1e-12);
    }
}
