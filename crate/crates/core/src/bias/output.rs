use std::io::Write;

use super::{BiasError, CalibrationReport, DemographicReport, FramingReport, GroupErrorReport, TimePoint};

fn csv_err(file: &'static str) -> impl Fn(csv::Error) -> BiasError {
    move |e| BiasError::Io {
        path: file.into(),
        source: std::io::Error::other(e),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

macro_rules! writer {
    ($out:expr, $file:literal, $header:expr, $rows:expr) => {{
        let err = csv_err($file);
        let mut w = csv::Writer::from_writer($out);
        w.write_record($header).map_err(&err)?;
        for row in $rows {
            w.write_record(&row).map_err(&err)?;
        }
        w.flush().map_err(|source| BiasError::Io {
            path: $file.into(),
            source,
        })
    }};
}

pub fn write_framing_csv<W: Write>(report: &FramingReport, out: W) -> Result<(), BiasError> {
    writer!(
        out,
        "framing.csv",
        ["pair_id", "category", "sentiment", "mean_original", "mean_altered", "n_original", "n_altered", "quadrant", "p_value"],
        report.points.iter().map(|p| {
            [
                p.pair_id.to_string(),
                p.category.to_string(),
                p.sentiment.to_string(),
                p.mean_original.to_string(),
                p.mean_altered.to_string(),
                p.n_original.to_string(),
                p.n_altered.to_string(),
                p.quadrant.as_str().to_string(),
                opt(p.p_value),
            ]
        })
    )
}

pub fn write_group_errors_csv<W: Write>(report: &GroupErrorReport, out: W) -> Result<(), BiasError> {
    writer!(
        out,
        "group_errors.csv",
        ["category", "sentiment", "genuine", "headlines", "mean_error", "sd_error", "median_error"],
        report.cells.iter().map(|c| {
            [
                c.category.to_string(),
                c.sentiment.to_string(),
                c.genuine.to_string(),
                c.headlines.to_string(),
                opt(c.mean_error),
                opt(c.sd_error),
                opt(c.median_error),
            ]
        })
    )
}

/// Kruskal-Wallis, Dunn and headline-GEE rows in one long table.
pub fn write_group_tests_csv<W: Write>(report: &GroupErrorReport, out: W) -> Result<(), BiasError> {
    let mut rows: Vec<[String; 8]> = Vec::new();
    for t in &report.tests {
        if let Some(kw) = &t.kruskal_wallis {
            rows.push([
                "kruskal_wallis".into(),
                t.category.to_string(),
                String::new(),
                kw.statistic.to_string(),
                kw.df.map(|d| d.to_string()).unwrap_or_default(),
                kw.p_value.to_string(),
                String::new(),
                opt(kw.effect_size),
            ]);
        }
        for d in &t.dunn {
            rows.push([
                "dunn".into(),
                t.category.to_string(),
                format!("{} vs {}", d.a, d.b),
                d.z.to_string(),
                String::new(),
                d.p_value.to_string(),
                d.p_adjusted.to_string(),
                String::new(),
            ]);
        }
    }
    if let Some(m) = &report.headline_gee {
        for (i, name) in m.names.iter().enumerate() {
            rows.push([
                "gee".into(),
                String::new(),
                name.clone(),
                m.coefficients[i].to_string(),
                String::new(),
                m.p_values[i].to_string(),
                String::new(),
                m.std_errors[i].to_string(),
            ]);
        }
    }
    writer!(
        out,
        "group_tests.csv",
        ["test", "category", "term", "statistic", "df", "p_value", "p_adjusted", "extra"],
        rows
    )
}

pub fn write_demographics_csv<W: Write>(report: &DemographicReport, out: W) -> Result<(), BiasError> {
    let mut rows: Vec<[String; 10]> = Vec::new();
    for c in &report.cells {
        rows.push([
            "accuracy".into(),
            c.split.as_str().into(),
            c.category.to_string(),
            c.group.into(),
            c.accuracy.to_string(),
            c.participants.to_string(),
            c.responses.to_string(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    for t in &report.tests {
        let m = &t.model;
        rows.push([
            "gee".into(),
            t.split.as_str().into(),
            t.category.to_string(),
            m.names[1].clone(),
            t.effect().to_string(),
            m.clusters.to_string(),
            m.observations.to_string(),
            m.std_errors[1].to_string(),
            m.p_values[1].to_string(),
            t.p_adjusted().to_string(),
        ]);
    }
    writer!(
        out,
        "demographics.csv",
        ["row", "split", "category", "group", "value", "participants", "responses", "std_error", "p_value", "p_adjusted"],
        rows
    )
}

pub fn write_calibration_csv<W: Write>(report: &CalibrationReport, out: W) -> Result<(), BiasError> {
    let mut rows: Vec<[String; 6]> = Vec::new();
    for b in &report.buckets {
        rows.push([
            "accuracy".into(),
            "all".into(),
            "all".into(),
            b.confidence.to_string(),
            b.responses.to_string(),
            opt(b.accuracy),
        ]);
    }
    for f in &report.frequencies {
        rows.push([
            "frequency".into(),
            f.grouping.into(),
            f.group.clone(),
            f.confidence.to_string(),
            f.count.to_string(),
            f.share.to_string(),
        ]);
    }
    if let Some(v) = &report.crowd_vote {
        for (name, acc) in [("majority", v.majority), ("confidence_weighted", v.confidence_weighted)] {
            rows.push([
                "vote".into(),
                "all".into(),
                name.into(),
                String::new(),
                v.headlines.to_string(),
                acc.to_string(),
            ]);
        }
    }
    writer!(
        out,
        "calibration.csv",
        ["row", "grouping", "group", "confidence", "count", "value"],
        rows
    )
}

pub fn write_timing_csv<W: Write>(curve: &[TimePoint], out: W) -> Result<(), BiasError> {
    writer!(
        out,
        "timing.csv",
        ["window", "response_time_ms", "accuracy"],
        curve
            .iter()
            .enumerate()
            .map(|(i, p)| [(i + 1).to_string(), p.response_time_ms.to_string(), p.accuracy.to_string()])
    )
}
