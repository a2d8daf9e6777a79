//! Charts and summary tables rendered from the CSV files the simulation and
//! bias analyses write.

pub mod svg;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use svg::{Plot, Series};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no known outputs (metrics.csv, framing.csv, group_errors.csv, demographics.csv) in {0}")]
    NothingToRender(String),
    #[error("{file}: {reason}")]
    Schema { file: String, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A CSV loaded as header-keyed rows.
struct Table {
    file: String,
    rows: Vec<BTreeMap<String, String>>,
}

impl Table {
    fn read(path: &Path, required: &[&str]) -> Result<Option<Self>, ReportError> {
        if !path.exists() {
            return Ok(None);
        }
        let file = path.display().to_string();
        let schema = |reason: String| ReportError::Schema {
            file: file.clone(),
            reason,
        };
        let mut r = csv::Reader::from_path(path).map_err(|e| schema(e.to_string()))?;
        let header: Vec<String> = r
            .headers()
            .map_err(|e| schema(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        for col in required {
            if !header.iter().any(|h| h == col) {
                return Err(schema(format!("missing column `{col}`")));
            }
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| schema(e.to_string()))?;
            rows.push(header.iter().cloned().zip(rec.iter().map(str::to_string)).collect());
        }
        Ok(Some(Self { file, rows }))
    }

    fn num(&self, row: &BTreeMap<String, String>, col: &str) -> Result<Option<f64>, ReportError> {
        let v = row.get(col).map(String::as_str).unwrap_or("");
        if v.is_empty() {
            return Ok(None);
        }
        v.parse().map(Some).map_err(|_| ReportError::Schema {
            file: self.file.clone(),
            reason: format!("column `{col}` holds non-numeric `{v}`"),
        })
    }
}

fn get<'a>(row: &'a BTreeMap<String, String>, col: &str) -> &'a str {
    row.get(col).map(String::as_str).unwrap_or("")
}

/// Files written by [`render_report`].
#[derive(Debug, Clone, Default)]
pub struct ReportOutput {
    pub files: Vec<PathBuf>,
}

/// Renders every chart whose source CSV exists in `input` into `output`,
/// plus a markdown summary.
pub fn render_report(input: &Path, output: &Path) -> Result<ReportOutput, ReportError> {
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| ReportError::Io { path, source }
    };
    fs::create_dir_all(output).map_err(io(output))?;
    let mut charts: Vec<(&str, String)> = Vec::new();
    let mut summary = String::from("# Report\n");

    if let Some(t) = Table::read(
        &input.join("metrics.csv"),
        &["algorithm", "N", "metric", "round", "value", "ci_lo", "ci_hi"],
    )? {
        metrics_charts(&t, &mut charts, &mut summary)?;
    }
    if let Some(t) = Table::read(&input.join("framing.csv"), &["pair_id", "mean_original", "mean_altered", "quadrant", "category"])? {
        charts.push(("framing.svg", framing_chart(&t, &mut summary)?));
    }
    if let Some(t) = Table::read(
        &input.join("group_errors.csv"),
        &["category", "sentiment", "genuine", "mean_error", "sd_error"],
    )? {
        charts.push(("group_errors.svg", group_error_chart(&t)?));
    }
    if let Some(t) = Table::read(&input.join("demographics.csv"), &["row", "split", "category", "group", "value"])? {
        for (name, svg) in demographic_charts(&t)? {
            charts.push((name, svg));
        }
    }
    if charts.is_empty() {
        return Err(ReportError::NothingToRender(input.display().to_string()));
    }
    let mut out = ReportOutput::default();
    for (name, svg) in charts {
        let p = output.join(name);
        fs::write(&p, svg).map_err(io(&p))?;
        out.files.push(p);
    }
    let p = output.join("report.md");
    fs::write(&p, summary).map_err(io(&p))?;
    out.files.push(p);
    Ok(out)
}

fn metrics_charts(t: &Table, charts: &mut Vec<(&'static str, String)>, summary: &mut String) -> Result<(), ReportError> {
    // (algorithm, N) -> metric rows
    let mut by: BTreeMap<(String, usize), Vec<&BTreeMap<String, String>>> = BTreeMap::new();
    for row in &t.rows {
        let n: usize = get(row, "N").parse().map_err(|_| ReportError::Schema {
            file: t.file.clone(),
            reason: format!("bad group size `{}`", get(row, "N")),
        })?;
        by.entry((get(row, "algorithm").to_string(), n)).or_default().push(row);
    }
    let algorithms: Vec<String> = {
        let mut a: Vec<String> = by.keys().map(|k| k.0.clone()).collect();
        a.dedup();
        a
    };
    let largest = by.keys().map(|k| k.1).max().unwrap_or(0);

    let _ = writeln!(summary, "\n## Simulation\n\n| algorithm | N | accuracy | best member | terminal regret | 95% CI |\n|---|---|---|---|---|---|");
    let mut terminal = Vec::new();
    let mut curves = Vec::new();
    let mut shares: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for alg in &algorithms {
        let mut term_pts = Vec::new();
        let mut term_band = Vec::new();
        for ((a, n), rows) in by.iter().filter(|(k, _)| &k.0 == alg) {
            let scalar = |m: &str| rows.iter().find(|r| get(r, "metric") == m).copied();
            let term = scalar("terminal_regret");
            if let Some(r) = term {
                let (v, lo, hi) = (t.num(r, "value")?, t.num(r, "ci_lo")?, t.num(r, "ci_hi")?);
                if let Some(v) = v {
                    term_pts.push((*n as f64, v));
                    if let (Some(lo), Some(hi)) = (lo, hi) {
                        term_band.push((*n as f64, lo, hi));
                    }
                }
                let acc = scalar("accuracy").map(|r| get(r, "value")).unwrap_or("");
                let best = scalar("best_member_accuracy").map(|r| get(r, "value")).unwrap_or("");
                let _ = writeln!(
                    summary,
                    "| {a} | {n} | {} | {} | {} | [{}, {}] |",
                    short(acc),
                    short(best),
                    short(get(r, "value")),
                    short(get(r, "ci_lo")),
                    short(get(r, "ci_hi"))
                );
            }
            if *n == largest {
                let mut pts = Vec::new();
                for r in rows.iter().filter(|r| get(r, "metric") == "regret") {
                    if let (Ok(round), Some(v)) = (get(r, "round").parse::<f64>(), t.num(r, "value")?) {
                        pts.push((round, v));
                    }
                }
                if !pts.is_empty() {
                    curves.push(Series::Line {
                        name: a.clone(),
                        points: pts,
                        band: Vec::new(),
                    });
                }
            }
            for r in rows {
                if let Some(s) = get(r, "metric").strip_prefix("structure_share_") {
                    if let Some(v) = t.num(r, "value")? {
                        shares.entry(s.to_string()).or_default().push((*n, v));
                    }
                }
            }
        }
        if !term_pts.is_empty() {
            terminal.push(Series::Line {
                name: alg.clone(),
                points: term_pts,
                band: term_band,
            });
        }
    }
    if !curves.is_empty() {
        charts.push((
            "regret_curves.svg",
            Plot {
                title: format!("Instantaneous regret per round, N = {largest}"),
                x_label: "round".into(),
                y_label: "regret".into(),
                series: curves,
                h_lines: vec![0.0],
                ..Default::default()
            }
            .render(),
        ));
    }
    if !terminal.is_empty() {
        charts.push((
            "terminal_regret.svg",
            Plot {
                title: "Terminal regret by group size".into(),
                x_label: "group size N".into(),
                y_label: "terminal regret".into(),
                series: terminal,
                h_lines: vec![0.0],
                ..Default::default()
            }
            .render(),
        ));
    }
    if !shares.is_empty() {
        let sizes: Vec<usize> = {
            let mut s: Vec<usize> = shares.values().flatten().map(|p| p.0).collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        let series = shares
            .into_iter()
            .map(|(name, pts)| Series::Bars {
                values: sizes.iter().map(|n| pts.iter().find(|p| p.0 == *n).map(|p| p.1)).collect(),
                whiskers: Vec::new(),
                name,
            })
            .collect();
        charts.push((
            "tree_structures.svg",
            Plot {
                title: "Final tree structure share".into(),
                x_label: "group size N".into(),
                y_label: "share of replicas".into(),
                categories: sizes.iter().map(|n| n.to_string()).collect(),
                y_range: Some((0.0, 1.0)),
                series,
                ..Default::default()
            }
            .render(),
        ));
    }
    Ok(())
}

fn short(v: &str) -> String {
    v.parse::<f64>().map(|x| format!("{x:.4}")).unwrap_or_else(|_| v.to_string())
}

fn framing_chart(t: &Table, summary: &mut String) -> Result<String, ReportError> {
    let mut by_cat: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for row in &t.rows {
        if let (Some(x), Some(y)) = (t.num(row, "mean_original")?, t.num(row, "mean_altered")?) {
            by_cat.entry(get(row, "category").to_string()).or_default().push((x, y));
        }
        *counts.entry(get(row, "quadrant").to_string()).or_default() += 1;
    }
    let _ = writeln!(summary, "\n## Framing\n\n| quadrant | pairs |\n|---|---|");
    for (q, n) in &counts {
        let _ = writeln!(summary, "| {q} | {n} |");
    }
    Ok(Plot {
        title: "Mean response, original vs altered".into(),
        x_label: "original".into(),
        y_label: "altered".into(),
        x_range: Some((0.0, 1.0)),
        y_range: Some((0.0, 1.0)),
        series: by_cat
            .into_iter()
            .map(|(name, points)| Series::Scatter { name, points })
            .collect(),
        h_lines: vec![0.5],
        v_lines: vec![0.5],
        ..Default::default()
    }
    .render())
}

fn group_error_chart(t: &Table) -> Result<String, ReportError> {
    let cats: Vec<String> = {
        let mut c: Vec<String> = t.rows.iter().map(|r| get(r, "category").to_string()).collect();
        c.dedup();
        c
    };
    let mut series = Vec::new();
    for sent in ["positive", "negative"] {
        for (genuine, label) in [("true", "genuine"), ("false", "altered")] {
            let mut values = Vec::new();
            let mut whiskers = Vec::new();
            for c in &cats {
                let row = t
                    .rows
                    .iter()
                    .find(|r| get(r, "category") == c && get(r, "sentiment") == sent && get(r, "genuine") == genuine);
                let (m, s) = match row {
                    Some(r) => (t.num(r, "mean_error")?, t.num(r, "sd_error")?),
                    None => (None, None),
                };
                values.push(m);
                whiskers.push(m.zip(s).map(|(m, s)| (m - s, m + s)));
            }
            series.push(Series::Bars {
                name: format!("{sent}/{label}"),
                values,
                whiskers,
            });
        }
    }
    Ok(Plot {
        title: "Headline error by category, sentiment and truth".into(),
        x_label: "category".into(),
        y_label: "mean error (+/- sd)".into(),
        categories: cats,
        series,
        ..Default::default()
    }
    .render())
}

fn demographic_charts(t: &Table) -> Result<Vec<(&'static str, String)>, ReportError> {
    let mut out = Vec::new();
    for (split, name) in [
        ("gender", "demographics_gender.svg"),
        ("age", "demographics_age.svg"),
        ("ethnicity", "demographics_ethnicity.svg"),
    ] {
        let rows: Vec<_> = t
            .rows
            .iter()
            .filter(|r| get(r, "row") == "accuracy" && get(r, "split") == split)
            .collect();
        if rows.is_empty() {
            continue;
        }
        let mut cats: Vec<String> = rows.iter().map(|r| get(r, "category").to_string()).collect();
        cats.dedup();
        let mut groups: Vec<String> = rows.iter().map(|r| get(r, "group").to_string()).collect();
        groups.sort();
        groups.dedup();
        let mut series = Vec::new();
        for g in groups {
            let mut values = Vec::new();
            for c in &cats {
                let v = match rows.iter().find(|r| get(r, "category") == c && get(r, "group") == g) {
                    Some(r) => t.num(r, "value")?,
                    None => None,
                };
                values.push(v);
            }
            series.push(Series::Bars {
                name: g,
                values,
                whiskers: Vec::new(),
            });
        }
        out.push((
            name,
            Plot {
                title: format!("Accuracy by {split} and headline category"),
                x_label: "headline category".into(),
                y_label: "accuracy".into(),
                categories: cats,
                series,
                ..Default::default()
            }
            .render(),
        ));
    }
    Ok(out)
}
