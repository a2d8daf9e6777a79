use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Number of headlines every treatment presents to its participants.
pub const HEADLINES_PER_TREATMENT: usize = 48;
/// Headlines per (category, genuine) cell of one treatment.
pub const HEADLINES_PER_CELL: usize = 8;
/// Age at which participants move into the older age group.
pub const AGE_SPLIT: u32 = 35;

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(HeadlineId);
string_id!(ParticipantId);
string_id!(PairId);

/// Sensitive attribute a headline is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Gender,
    Ethnicity,
    Age,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Gender, Category::Ethnicity, Category::Age];

    pub fn index(self) -> usize {
        match self {
            Category::Gender => 0,
            Category::Ethnicity => 1,
            Category::Age => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Gender => "gender",
            Category::Ethnicity => "ethnicity",
            Category::Age => "age",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gender" => Ok(Category::Gender),
            "ethnicity" => Ok(Category::Ethnicity),
            "age" => Ok(Category::Age),
            other => Err(other.to_owned()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
}

impl Sentiment {
    pub const ALL: [Sentiment; 2] = [Sentiment::Positive, Sentiment::Negative];

    pub fn index(self) -> usize {
        match self {
            Sentiment::Positive => 0,
            Sentiment::Negative => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(Sentiment::Positive),
            "negative" => Ok(Sentiment::Negative),
            other => Err(other.to_owned()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Other,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Other => "other",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "man" | "m" => Ok(Gender::Male),
            "female" | "woman" | "f" => Ok(Gender::Female),
            "other" | "non-binary" | "nonbinary" => Ok(Gender::Other),
            other => Err(other.to_owned()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgeGroup {
    Younger,
    Older,
}

impl AgeGroup {
    pub fn of(age: u32) -> Self {
        if age < AGE_SPLIT {
            AgeGroup::Younger
        } else {
            AgeGroup::Older
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgeGroup::Younger => "<35",
            AgeGroup::Older => ">=35",
        }
    }
}

/// A five-point likelihood rating, from "very unlikely" (1) to "very likely" (5).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Level(u8);

impl Level {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 5;

    pub fn new(raw: u8) -> Result<Self, DataError> {
        if (Self::MIN..=Self::MAX).contains(&raw) {
            Ok(Self(raw))
        } else {
            Err(DataError::LevelOutOfRange(i64::from(raw)))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Mapped probability that the headline is genuine.
    pub fn probability(self) -> f64 {
        f64::from(self.0 - 1) * 0.25
    }
}

/// Maps a raw five-point rating onto the probability grid {0, 0.25, 0.5, 0.75, 1}.
pub fn map_response(raw_level: i64) -> Result<f64, DataError> {
    if !(1..=5).contains(&raw_level) {
        return Err(DataError::LevelOutOfRange(raw_level));
    }
    Ok(Level(raw_level as u8).probability())
}

/// Absolute error `|p - y|` of a probability against a binary truth.
pub fn response_error(p: f64, genuine: bool) -> f64 {
    let y = if genuine { 1.0 } else { 0.0 };
    (p - y).abs()
}

/// Complement of [`response_error`].
pub fn response_accuracy(p: f64, genuine: bool) -> f64 {
    1.0 - response_error(p, genuine)
}

/// Credit for a thresholded decision: 1 if the rating leans the right way,
/// 0 if it leans the wrong way, 0.5 when undecided.
pub fn decision_credit(p: f64, genuine: bool) -> f64 {
    if p == 0.5 {
        0.5
    } else if (p > 0.5) == genuine {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub id: HeadlineId,
    pub treatment: u8,
    pub pair_id: PairId,
    pub text: String,
    pub category: Category,
    pub sentiment: Sentiment,
    pub genuine: bool,
}

impl Headline {
    pub fn truth(&self) -> f64 {
        if self.genuine {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub id: ParticipantId,
    pub treatment: u8,
    pub age: Option<u32>,
    pub gender: Option<Gender>,
    pub ethnicity: Option<String>,
}

impl Participant {
    pub fn age_group(&self) -> Option<AgeGroup> {
        self.age.map(AgeGroup::of)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub participant: ParticipantId,
    pub headline: HeadlineId,
    pub level: Level,
    pub position: u32,
    pub response_time_ms: u64,
}

impl ResponseRecord {
    pub fn probability(&self) -> f64 {
        self.level.probability()
    }
}
