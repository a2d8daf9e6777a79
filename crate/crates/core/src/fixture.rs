//! A bundled synthetic study so every pipeline runs offline.
//!
//! Five treatments of 40 raters on the full 240-headline layout, calibrated to
//! mean accuracy 0.55 and mean pairwise correlation 0.18; one rater in five is
//! competent and the rest guess.

use crate::data::{load_dataset_from_readers, Dataset, Provenance};
use crate::synth::SynthConfig;

pub const HEADLINES_CSV: &str = include_str!("../fixtures/headlines.csv");
pub const RESPONSES_CSV: &str = include_str!("../fixtures/responses.csv");
/// Generator settings that reproduce the two CSV files.
pub const CONFIG_JSON: &str = include_str!("../fixtures/synth_config.json");

pub fn config() -> SynthConfig {
    serde_json::from_str(CONFIG_JSON).expect("bundled config parses")
}

pub fn dataset() -> Dataset {
    let d = load_dataset_from_readers(HEADLINES_CSV.as_bytes(), RESPONSES_CSV.as_bytes()).expect("bundled fixture loads");
    let p = d.provenance().clone();
    d.with_provenance(Provenance {
        note: Some("bundled fixture".into()),
        ..p
    })
}
