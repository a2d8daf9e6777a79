//! Domain model of the headline fact-checking study and its CSV ingestion.
//!
//! A [`Dataset`] holds the curated headlines, the participants and one
//! [`ResponseRecord`] per (participant, headline of their treatment). It is
//! validated on construction and immutable afterwards, so it can be shared
//! read-only across simulation workers.

mod load;
mod model;
mod write;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use load::{load_dataset, load_dataset_from_readers, load_dataset_with, ColumnMap};
pub use model::{
    decision_credit, map_response, response_accuracy, response_error, AgeGroup, Category, Gender,
    Headline, HeadlineId, Level, PairId, Participant, ParticipantId, ResponseRecord, Sentiment,
    AGE_SPLIT, HEADLINES_PER_CELL, HEADLINES_PER_TREATMENT,
};
pub use write::{write_headlines, write_responses};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: csv error: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("{file} row {row}: column `{column}` has invalid value `{value}`: {reason}")]
    InvalidValue {
        file: String,
        row: u64,
        column: String,
        value: String,
        reason: String,
    },
    #[error("{file} row {row}: unknown {column} token `{token}`")]
    UnknownToken {
        file: String,
        row: u64,
        column: String,
        token: String,
    },
    #[error("{file} row {row}: reference to unknown {kind} `{id}`")]
    Orphan {
        file: String,
        row: u64,
        kind: &'static str,
        id: String,
    },
    #[error("{file} row {row}: duplicate {what}")]
    Duplicate { file: String, row: u64, what: String },
    #[error("response level {0} outside 1..=5")]
    LevelOutOfRange(i64),
    #[error("dataset invariant violated: {0}")]
    Invariant(String),
}

/// Where a dataset came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub headlines_sha256: Option<String>,
    pub responses_sha256: Option<String>,
    pub note: Option<String>,
}

/// The two headlines of a genuine/altered pair, as indices into [`Dataset::headlines`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairMembers {
    pub genuine: Option<usize>,
    pub altered: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    headlines: Vec<Headline>,
    participants: Vec<Participant>,
    responses: Vec<ResponseRecord>,
    provenance: Provenance,
    headline_index: HashMap<HeadlineId, usize>,
    participant_index: HashMap<ParticipantId, usize>,
    // dense participants x headlines table of response indices
    response_table: Vec<Option<u32>>,
    treatment_headlines: BTreeMap<u8, Vec<usize>>,
    treatment_participants: BTreeMap<u8, Vec<usize>>,
    majority_ethnicity: Option<String>,
}

impl Dataset {
    /// Validates and indexes the three collections.
    pub fn new(
        headlines: Vec<Headline>,
        participants: Vec<Participant>,
        responses: Vec<ResponseRecord>,
        provenance: Provenance,
    ) -> Result<Self, DataError> {
        let mut headline_index = HashMap::with_capacity(headlines.len());
        for (i, h) in headlines.iter().enumerate() {
            if !(1..=5).contains(&h.treatment) {
                return Err(DataError::Invariant(format!(
                    "headline {} has treatment {} outside 1..=5",
                    h.id, h.treatment
                )));
            }
            if headline_index.insert(h.id.clone(), i).is_some() {
                return Err(DataError::Invariant(format!("duplicate headline id {}", h.id)));
            }
        }
        validate_balance(&headlines)?;

        let mut participant_index = HashMap::with_capacity(participants.len());
        for (i, p) in participants.iter().enumerate() {
            if let Some(age) = p.age {
                if age < 18 {
                    return Err(DataError::Invariant(format!(
                        "participant {} has age {age} < 18",
                        p.id
                    )));
                }
            }
            if participant_index.insert(p.id.clone(), i).is_some() {
                return Err(DataError::Invariant(format!("duplicate participant id {}", p.id)));
            }
        }

        let mut treatment_headlines: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
        for (i, h) in headlines.iter().enumerate() {
            treatment_headlines.entry(h.treatment).or_default().push(i);
        }
        let mut treatment_participants: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
        for (i, p) in participants.iter().enumerate() {
            if !treatment_headlines.contains_key(&p.treatment) {
                return Err(DataError::Invariant(format!(
                    "participant {} assigned to treatment {} which has no headlines",
                    p.id, p.treatment
                )));
            }
            treatment_participants.entry(p.treatment).or_default().push(i);
        }

        let n_h = headlines.len();
        let mut response_table = vec![None; participants.len() * n_h];
        for (r_idx, r) in responses.iter().enumerate() {
            let p = *participant_index.get(&r.participant).ok_or_else(|| {
                DataError::Invariant(format!("response references unknown participant {}", r.participant))
            })?;
            let h = *headline_index.get(&r.headline).ok_or_else(|| {
                DataError::Invariant(format!("response references unknown headline {}", r.headline))
            })?;
            if headlines[h].treatment != participants[p].treatment {
                return Err(DataError::Invariant(format!(
                    "participant {} (treatment {}) answered headline {} of treatment {}",
                    r.participant, participants[p].treatment, r.headline, headlines[h].treatment
                )));
            }
            let slot = &mut response_table[p * n_h + h];
            if slot.is_some() {
                return Err(DataError::Invariant(format!(
                    "duplicate response for ({}, {})",
                    r.participant, r.headline
                )));
            }
            *slot = Some(r_idx as u32);
        }
        for (p_idx, p) in participants.iter().enumerate() {
            for &h in &treatment_headlines[&p.treatment] {
                if response_table[p_idx * n_h + h].is_none() {
                    return Err(DataError::Invariant(format!(
                        "participant {} has no response to headline {}",
                        p.id, headlines[h].id
                    )));
                }
            }
        }

        let majority_ethnicity = modal_ethnicity(&participants);

        Ok(Self {
            headlines,
            participants,
            responses,
            provenance,
            headline_index,
            participant_index,
            response_table,
            treatment_headlines,
            treatment_participants,
            majority_ethnicity,
        })
    }

    pub fn headlines(&self) -> &[Headline] {
        &self.headlines
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn responses(&self) -> &[ResponseRecord] {
        &self.responses
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn headline_idx(&self, id: &HeadlineId) -> Option<usize> {
        self.headline_index.get(id).copied()
    }

    pub fn participant_idx(&self, id: &ParticipantId) -> Option<usize> {
        self.participant_index.get(id).copied()
    }

    pub fn treatments(&self) -> Vec<u8> {
        self.treatment_headlines.keys().copied().collect()
    }

    /// Treatments that have at least one participant.
    pub fn answered_treatments(&self) -> Vec<u8> {
        self.treatment_participants.keys().copied().collect()
    }

    pub fn headlines_in(&self, treatment: u8) -> &[usize] {
        self.treatment_headlines
            .get(&treatment)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn participants_in(&self, treatment: u8) -> &[usize] {
        self.treatment_participants
            .get(&treatment)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn response(&self, participant: usize, headline: usize) -> Option<&ResponseRecord> {
        self.response_table
            .get(participant * self.headlines.len() + headline)
            .copied()
            .flatten()
            .map(|r| &self.responses[r as usize])
    }

    /// Mapped probability participant `participant` gave headline `headline`.
    pub fn probability(&self, participant: usize, headline: usize) -> Option<f64> {
        self.response(participant, headline).map(ResponseRecord::probability)
    }

    /// Indices of the participants who answered a headline, with their mapped ratings.
    pub fn ratings_for(&self, headline: usize) -> Vec<(usize, f64)> {
        let t = self.headlines[headline].treatment;
        self.participants_in(t)
            .iter()
            .filter_map(|&p| self.probability(p, headline).map(|x| (p, x)))
            .collect()
    }

    /// Most frequent ethnicity among participants (ties go to the lexicographically smallest).
    pub fn majority_ethnicity(&self) -> Option<&str> {
        self.majority_ethnicity.as_deref()
    }

    /// Whether a participant belongs to the modal ethnicity; `None` when NA.
    pub fn is_majority(&self, participant: usize) -> Option<bool> {
        let eth = self.participants[participant].ethnicity.as_deref()?;
        Some(Some(eth) == self.majority_ethnicity())
    }

    /// Pairs keyed by id, with the index of each present member.
    pub fn pairs(&self) -> BTreeMap<PairId, PairMembers> {
        let mut out: BTreeMap<PairId, PairMembers> = BTreeMap::new();
        for (i, h) in self.headlines.iter().enumerate() {
            let e = out.entry(h.pair_id.clone()).or_insert(PairMembers {
                genuine: None,
                altered: None,
            });
            if h.genuine {
                e.genuine = Some(i);
            } else {
                e.altered = Some(i);
            }
        }
        out
    }
}

fn modal_ethnicity(participants: &[Participant]) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in participants {
        if let Some(e) = p.ethnicity.as_deref() {
            *counts.entry(e).or_default() += 1;
        }
    }
    // strict > keeps the smallest key on ties
    let mut best: Option<(&str, usize)> = None;
    for (k, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k.to_owned())
}

/// Checks the per-treatment balance rules and the pairing structure.
///
/// Every treatment that appears must hold exactly 48 headlines with 8 per
/// (category, genuine) cell and 24 per sentiment. Each pair id may appear at
/// most twice, and when it does its two members must differ in truth value
/// and in treatment.
pub fn validate_balance(headlines: &[Headline]) -> Result<(), DataError> {
    let mut per_treatment: BTreeMap<u8, Vec<&Headline>> = BTreeMap::new();
    for h in headlines {
        per_treatment.entry(h.treatment).or_default().push(h);
    }
    for (t, hs) in &per_treatment {
        if hs.len() != HEADLINES_PER_TREATMENT {
            return Err(DataError::Invariant(format!(
                "treatment {t} has {} headlines, expected {HEADLINES_PER_TREATMENT}",
                hs.len()
            )));
        }
        for c in Category::ALL {
            for g in [true, false] {
                let n = hs.iter().filter(|h| h.category == c && h.genuine == g).count();
                if n != HEADLINES_PER_CELL {
                    return Err(DataError::Invariant(format!(
                        "treatment {t} has {n} {} {c} headlines, expected {HEADLINES_PER_CELL}",
                        if g { "genuine" } else { "altered" }
                    )));
                }
            }
        }
        let positive = hs.iter().filter(|h| h.sentiment == Sentiment::Positive).count();
        if positive * 2 != HEADLINES_PER_TREATMENT {
            return Err(DataError::Invariant(format!(
                "treatment {t} has {positive} positive headlines, expected {}",
                HEADLINES_PER_TREATMENT / 2
            )));
        }
    }

    let mut pairs: BTreeMap<&PairId, Vec<&Headline>> = BTreeMap::new();
    for h in headlines {
        pairs.entry(&h.pair_id).or_default().push(h);
    }
    for (id, members) in pairs {
        match members.as_slice() {
            [_] => {}
            [a, b] => {
                if a.genuine == b.genuine {
                    return Err(DataError::Invariant(format!(
                        "pair {id} has two {} headlines",
                        if a.genuine { "genuine" } else { "altered" }
                    )));
                }
                if a.treatment == b.treatment {
                    return Err(DataError::Invariant(format!(
                        "pair {id} shows both versions in treatment {}",
                        a.treatment
                    )));
                }
            }
            more => {
                return Err(DataError::Invariant(format!(
                    "pair {id} has {} headlines, expected 2",
                    more.len()
                )))
            }
        }
    }
    Ok(())
}

/// Pair ids that are missing either version.
pub fn incomplete_pairs(dataset: &Dataset) -> BTreeSet<PairId> {
    dataset
        .pairs()
        .into_iter()
        .filter(|(_, m)| m.genuine.is_none() || m.altered.is_none())
        .map(|(id, _)| id)
        .collect()
}
