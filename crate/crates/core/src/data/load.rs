use std::collections::{HashMap, HashSet};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::model::{Category, Gender, Headline, Level, Participant, ResponseRecord, Sentiment};
use super::{DataError, Dataset, HeadlineId, PairId, ParticipantId, Provenance};

/// Header names used for each logical column.
///
/// The defaults are the documented schema; archived files with a different
/// layout can be read by renaming columns here instead of rewriting the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub headline_id: String,
    pub treatment: String,
    pub pair_id: String,
    pub text: String,
    pub category: String,
    pub sentiment: String,
    pub genuine: String,
    pub participant_id: String,
    pub position: String,
    pub raw_level: String,
    pub response_time_ms: String,
    pub age: String,
    pub gender: String,
    pub ethnicity: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            headline_id: "headline_id".into(),
            treatment: "treatment".into(),
            pair_id: "pair_id".into(),
            text: "text".into(),
            category: "category".into(),
            sentiment: "sentiment".into(),
            genuine: "genuine".into(),
            participant_id: "participant_id".into(),
            position: "position".into(),
            raw_level: "raw_level".into(),
            response_time_ms: "response_time_ms".into(),
            age: "age".into(),
            gender: "gender".into(),
            ethnicity: "ethnicity".into(),
        }
    }
}

/// Loads and validates `headlines.csv` and `responses.csv`.
pub fn load_dataset(headline_path: &Path, response_path: &Path) -> Result<Dataset, DataError> {
    load_dataset_with(headline_path, response_path, &ColumnMap::default())
}

pub fn load_dataset_with(
    headline_path: &Path,
    response_path: &Path,
    columns: &ColumnMap,
) -> Result<Dataset, DataError> {
    let read = |p: &Path| {
        std::fs::read(p).map_err(|source| DataError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    let hbytes = read(headline_path)?;
    let rbytes = read(response_path)?;
    let mut ds = parse(
        &hbytes,
        &rbytes,
        &file_label(headline_path),
        &file_label(response_path),
        columns,
    )?;
    ds.provenance = Provenance {
        headlines_sha256: Some(sha256_hex(&hbytes)),
        responses_sha256: Some(sha256_hex(&rbytes)),
        note: None,
    };
    Ok(ds)
}

/// Parses a dataset from in-memory CSV text (used for the bundled fixture).
pub fn load_dataset_from_readers(
    headlines_csv: &[u8],
    responses_csv: &[u8],
) -> Result<Dataset, DataError> {
    let mut ds = parse(
        headlines_csv,
        responses_csv,
        "headlines.csv",
        "responses.csv",
        &ColumnMap::default(),
    )?;
    ds.provenance = Provenance {
        headlines_sha256: Some(sha256_hex(headlines_csv)),
        responses_sha256: Some(sha256_hex(responses_csv)),
        note: None,
    };
    Ok(ds)
}

fn file_label(p: &Path) -> String {
    p.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Table<'a> {
    file: &'a str,
    index: HashMap<String, usize>,
}

impl<'a> Table<'a> {
    fn new(file: &'a str, headers: &csv::StringRecord) -> Self {
        let index = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().trim_start_matches('\u{feff}').to_owned(), i))
            .collect();
        Self { file, index }
    }

    fn col(&self, name: &str) -> Result<usize, DataError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| DataError::MissingColumn {
                file: self.file.to_owned(),
                column: name.to_owned(),
            })
    }

    fn invalid(&self, row: u64, column: &str, value: &str, reason: impl Into<String>) -> DataError {
        DataError::InvalidValue {
            file: self.file.to_owned(),
            row,
            column: column.to_owned(),
            value: value.to_owned(),
            reason: reason.into(),
        }
    }

    fn unknown(&self, row: u64, column: &str, token: &str) -> DataError {
        DataError::UnknownToken {
            file: self.file.to_owned(),
            row,
            column: column.to_owned(),
            token: token.to_owned(),
        }
    }
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes)
}

fn is_na(s: &str) -> bool {
    matches!(
        s.trim().to_ascii_lowercase().as_str(),
        "" | "na" | "n/a" | "nan" | "none" | "prefer not to say" | "data_expired" | "consent_revoked"
    )
}

fn parse(
    hbytes: &[u8],
    rbytes: &[u8],
    hfile: &str,
    rfile: &str,
    cols: &ColumnMap,
) -> Result<Dataset, DataError> {
    let headlines = parse_headlines(hbytes, hfile, cols)?;
    let by_id: HashMap<&HeadlineId, &Headline> = headlines.iter().map(|h| (&h.id, h)).collect();

    let csv_err = |source| DataError::Csv {
        file: rfile.to_owned(),
        source,
    };
    let mut rdr = reader(rbytes);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let table = Table::new(rfile, &headers);
    let c_pid = table.col(&cols.participant_id)?;
    let c_treat = table.col(&cols.treatment)?;
    let c_hid = table.col(&cols.headline_id)?;
    let c_pos = table.col(&cols.position)?;
    let c_level = table.col(&cols.raw_level)?;
    let c_rt = table.col(&cols.response_time_ms)?;
    let c_age = table.col(&cols.age)?;
    let c_gender = table.col(&cols.gender)?;
    let c_eth = table.col(&cols.ethnicity)?;

    let mut participants: Vec<Participant> = Vec::new();
    let mut p_index: HashMap<ParticipantId, usize> = HashMap::new();
    let mut seen: HashSet<(ParticipantId, HeadlineId)> = HashSet::new();
    let mut responses = Vec::new();

    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let get = |c: usize| rec.get(c).unwrap_or("");

        let pid = ParticipantId::from(get(c_pid));
        let hid = HeadlineId::from(get(c_hid));
        let treatment: u8 = get(c_treat)
            .parse()
            .map_err(|_| table.invalid(row, &cols.treatment, get(c_treat), "expected integer 1..5"))?;
        let headline = by_id.get(&hid).ok_or_else(|| DataError::Orphan {
            file: rfile.to_owned(),
            row,
            kind: "headline",
            id: hid.to_string(),
        })?;
        if headline.treatment != treatment {
            return Err(table.invalid(
                row,
                &cols.treatment,
                get(c_treat),
                format!("headline {hid} belongs to treatment {}", headline.treatment),
            ));
        }
        let raw: i64 = get(c_level)
            .parse()
            .map_err(|_| table.invalid(row, &cols.raw_level, get(c_level), "expected integer 1..5"))?;
        let level = u8::try_from(raw)
            .ok()
            .and_then(|r| Level::new(r).ok())
            .ok_or_else(|| table.invalid(row, &cols.raw_level, get(c_level), "outside 1..5"))?;
        let position: u32 = get(c_pos)
            .parse()
            .map_err(|_| table.invalid(row, &cols.position, get(c_pos), "expected non-negative integer"))?;
        let response_time_ms = parse_millis(get(c_rt))
            .ok_or_else(|| table.invalid(row, &cols.response_time_ms, get(c_rt), "expected non-negative milliseconds"))?;

        let age = if is_na(get(c_age)) {
            None
        } else {
            let a: f64 = get(c_age)
                .parse()
                .map_err(|_| table.invalid(row, &cols.age, get(c_age), "expected years"))?;
            if !(18.0..=130.0).contains(&a) {
                return Err(table.invalid(row, &cols.age, get(c_age), "participants are adults"));
            }
            Some(a as u32)
        };
        let gender = if is_na(get(c_gender)) {
            None
        } else {
            Some(
                get(c_gender)
                    .parse::<Gender>()
                    .map_err(|t| table.unknown(row, &cols.gender, &t))?,
            )
        };
        let ethnicity = (!is_na(get(c_eth))).then(|| get(c_eth).to_owned());

        let candidate = Participant {
            id: pid.clone(),
            treatment,
            age,
            gender,
            ethnicity,
        };
        match p_index.get(&pid) {
            Some(&i) => {
                if participants[i] != candidate {
                    return Err(table.invalid(
                        row,
                        &cols.participant_id,
                        pid.as_str(),
                        "treatment or demographics conflict with an earlier row",
                    ));
                }
            }
            None => {
                p_index.insert(pid.clone(), participants.len());
                participants.push(candidate);
            }
        }

        if !seen.insert((pid.clone(), hid.clone())) {
            return Err(DataError::Duplicate {
                file: rfile.to_owned(),
                row,
                what: format!("response of {pid} to {hid}"),
            });
        }
        responses.push(ResponseRecord {
            participant: pid,
            headline: hid,
            level,
            position,
            response_time_ms,
        });
    }

    Dataset::new(headlines, participants, responses, Provenance::default())
}

fn parse_millis(s: &str) -> Option<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    let f: f64 = s.parse().ok()?;
    (f.is_finite() && f >= 0.0).then(|| f.round() as u64)
}

fn parse_headlines(bytes: &[u8], file: &str, cols: &ColumnMap) -> Result<Vec<Headline>, DataError> {
    let csv_err = |source| DataError::Csv {
        file: file.to_owned(),
        source,
    };
    let mut rdr = reader(bytes);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let table = Table::new(file, &headers);
    let c_id = table.col(&cols.headline_id)?;
    let c_treat = table.col(&cols.treatment)?;
    let c_pair = table.col(&cols.pair_id)?;
    let c_text = table.col(&cols.text)?;
    let c_cat = table.col(&cols.category)?;
    let c_sent = table.col(&cols.sentiment)?;
    let c_gen = table.col(&cols.genuine)?;

    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let get = |c: usize| rec.get(c).unwrap_or("");
        let id = HeadlineId::from(get(c_id));
        if !ids.insert(id.clone()) {
            return Err(DataError::Duplicate {
                file: file.to_owned(),
                row,
                what: format!("headline id {id}"),
            });
        }
        let treatment: u8 = get(c_treat)
            .parse()
            .ok()
            .filter(|t| (1..=5).contains(t))
            .ok_or_else(|| table.invalid(row, &cols.treatment, get(c_treat), "expected integer 1..5"))?;
        let category: Category = get(c_cat)
            .parse()
            .map_err(|t: String| table.unknown(row, &cols.category, &t))?;
        let sentiment: Sentiment = get(c_sent)
            .parse()
            .map_err(|t: String| table.unknown(row, &cols.sentiment, &t))?;
        let genuine = match get(c_gen) {
            "1" => true,
            "0" => false,
            other => return Err(table.invalid(row, &cols.genuine, other, "expected 0 or 1")),
        };
        out.push(Headline {
            id,
            treatment,
            pair_id: PairId::from(get(c_pair)),
            text: get(c_text).to_owned(),
            category,
            sentiment,
            genuine,
        });
    }
    Ok(out)
}
