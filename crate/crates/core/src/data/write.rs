use std::io::Write;

use super::{DataError, Dataset};

fn csv_err(file: &str) -> impl Fn(csv::Error) -> DataError + '_ {
    move |source| DataError::Csv {
        file: file.to_owned(),
        source,
    }
}

/// Writes the headline table in the documented `headlines.csv` layout.
pub fn write_headlines<W: Write>(dataset: &Dataset, out: W) -> Result<(), DataError> {
    let err = csv_err("headlines.csv");
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "headline_id",
        "treatment",
        "pair_id",
        "text",
        "category",
        "sentiment",
        "genuine",
    ])
    .map_err(&err)?;
    for h in dataset.headlines() {
        w.write_record([
            h.id.as_str(),
            &h.treatment.to_string(),
            h.pair_id.as_str(),
            &h.text,
            h.category.as_str(),
            h.sentiment.as_str(),
            if h.genuine { "1" } else { "0" },
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| err(e.into()))?;
    Ok(())
}

/// Writes responses in the documented `responses.csv` layout, demographics repeated per row.
pub fn write_responses<W: Write>(dataset: &Dataset, out: W) -> Result<(), DataError> {
    let err = csv_err("responses.csv");
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "participant_id",
        "treatment",
        "headline_id",
        "position",
        "raw_level",
        "response_time_ms",
        "age",
        "gender",
        "ethnicity",
    ])
    .map_err(&err)?;
    for r in dataset.responses() {
        let p = &dataset.participants()[dataset
            .participant_idx(&r.participant)
            .expect("validated dataset")];
        w.write_record([
            r.participant.as_str(),
            &p.treatment.to_string(),
            r.headline.as_str(),
            &r.position.to_string(),
            &r.level.get().to_string(),
            &r.response_time_ms.to_string(),
            &p.age.map(|a| a.to_string()).unwrap_or_default(),
            p.gender.map(|g| g.as_str()).unwrap_or(""),
            p.ethnicity.as_deref().unwrap_or(""),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| err(e.into()))?;
    Ok(())
}
