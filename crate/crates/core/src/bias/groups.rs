use serde::Serialize;

use super::{mean, sd, BiasError, Source};
use crate::data::{response_error, Category, Dataset, Sentiment};
use crate::stats::{
    dunn_posthoc, gee_fit, kruskal_wallis, percentile, Adjustment, GeeModel, StatsError, TestResult,
    WorkingCorrelation,
};

/// Mean error of one (category, sentiment, genuine) cell, over headlines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupErrorCell {
    pub category: Category,
    pub sentiment: Sentiment,
    pub genuine: bool,
    pub headlines: usize,
    pub mean_error: Option<f64>,
    pub sd_error: Option<f64>,
    pub median_error: Option<f64>,
}

impl GroupErrorCell {
    pub fn label(&self) -> String {
        format!(
            "{}/{}",
            self.sentiment.as_str(),
            if self.genuine { "genuine" } else { "altered" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DunnComparison {
    pub a: String,
    pub b: String,
    pub z: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
}

/// Omnibus test across the non-empty cells of one category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryTest {
    pub category: Category,
    pub kruskal_wallis: Option<TestResult>,
    /// Holm-adjusted pairwise tests, run only when the omnibus p is below 0.05.
    pub dunn: Vec<DunnComparison>,
    pub excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupErrorReport {
    pub source: &'static str,
    pub cells: Vec<GroupErrorCell>,
    pub tests: Vec<CategoryTest>,
    /// Headline error on class, genuine and their interactions (age and altered as reference),
    /// clustered by pair.
    pub headline_gee: Option<GeeModel>,
    pub warnings: Vec<String>,
}

pub const GEE_TERMS: [&str; 6] = [
    "intercept",
    "ethnicity",
    "gender",
    "genuine",
    "ethnicity:genuine",
    "gender:genuine",
];

/// Mean `|p - y|` per headline; `None` where the source has no observation.
pub fn headline_errors(dataset: &Dataset, source: Source<'_>) -> Result<Vec<Option<f64>>, BiasError> {
    source.check(dataset)?;
    Ok(dataset
        .headlines()
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let v = source.values(dataset, i);
            (!v.is_empty()).then(|| mean(&v.iter().map(|p| response_error(*p, h.genuine)).collect::<Vec<_>>()))
        })
        .collect())
}

/// Per-cell headline error with Kruskal-Wallis across the cells of each
/// category and Dunn's test where that is significant.
pub fn group_error_table(dataset: &Dataset, source: Source<'_>) -> Result<GroupErrorReport, BiasError> {
    let errors = headline_errors(dataset, source)?;
    let mut cells = Vec::new();
    let mut tests = Vec::new();
    let mut warnings = Vec::new();
    for c in Category::ALL {
        let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
        let mut excluded = Vec::new();
        for s in Sentiment::ALL {
            for g in [true, false] {
                let mut v: Vec<f64> = dataset
                    .headlines()
                    .iter()
                    .zip(&errors)
                    .filter(|(h, _)| h.category == c && h.sentiment == s && h.genuine == g)
                    .filter_map(|(_, e)| *e)
                    .collect();
                v.sort_by(f64::total_cmp);
                let cell = GroupErrorCell {
                    category: c,
                    sentiment: s,
                    genuine: g,
                    headlines: v.len(),
                    mean_error: (!v.is_empty()).then(|| mean(&v)),
                    sd_error: (!v.is_empty()).then(|| sd(&v)),
                    median_error: (!v.is_empty()).then(|| percentile(&v, 50.0)),
                };
                if v.is_empty() {
                    warnings.push(format!("{c} {} cell is empty and left out of tests", cell.label()));
                    excluded.push(cell.label());
                } else {
                    groups.push((cell.label(), v));
                }
                cells.push(cell);
            }
        }
        let samples: Vec<&[f64]> = groups.iter().map(|(_, v)| v.as_slice()).collect();
        let kw = if samples.len() >= 2 {
            match kruskal_wallis(&samples) {
                Ok(r) => Some(r),
                Err(e) => {
                    warnings.push(format!("{c}: Kruskal-Wallis not computed: {e}"));
                    None
                }
            }
        } else {
            None
        };
        let dunn = match &kw {
            Some(r) if r.p_value < 0.05 => dunn_posthoc(&samples, Adjustment::Holm)?
                .into_iter()
                .map(|d| DunnComparison {
                    a: groups[d.i].0.clone(),
                    b: groups[d.j].0.clone(),
                    z: d.z,
                    p_value: d.p_value,
                    p_adjusted: d.p_adjusted,
                })
                .collect(),
            _ => Vec::new(),
        };
        tests.push(CategoryTest {
            category: c,
            kruskal_wallis: kw,
            dunn,
            excluded,
        });
    }

    let headline_gee = match headline_model(dataset, &errors) {
        Ok(m) => Some(m),
        Err(e) => {
            warnings.push(format!("headline GEE not fitted: {e}"));
            None
        }
    };
    Ok(GroupErrorReport {
        source: source.name(),
        cells,
        tests,
        headline_gee,
        warnings,
    })
}

fn headline_model(dataset: &Dataset, errors: &[Option<f64>]) -> Result<GeeModel, StatsError> {
    let pairs: Vec<_> = dataset.pairs().into_keys().collect();
    let (mut y, mut x, mut cl) = (Vec::new(), Vec::new(), Vec::new());
    for (h, e) in dataset.headlines().iter().zip(errors) {
        let Some(e) = e else { continue };
        let eth = f64::from(h.category == Category::Ethnicity);
        let gen = f64::from(h.category == Category::Gender);
        let g = f64::from(h.genuine);
        y.push(*e);
        x.push(vec![1.0, eth, gen, g, eth * g, gen * g]);
        cl.push(pairs.binary_search(&h.pair_id).expect("pair listed"));
    }
    gee_fit(&y, &x, &cl, &GEE_TERMS, WorkingCorrelation::Exchangeable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    #[test]
    fn perfect_predictions_are_degenerate() {
        let d = generate(&SynthConfig {
            participants_per_treatment: 3,
            ..Default::default()
        })
        .unwrap();
        let preds: Vec<_> = d.headlines().iter().map(|h| Some(h.truth())).collect();
        let r = group_error_table(&d, Source::Predictions(&preds)).unwrap();
        assert_eq!(r.cells.len(), 12);
        assert!(r.cells.iter().all(|c| c.mean_error == Some(0.0) && c.headlines == 20));
        for t in &r.tests {
            let kw = t.kruskal_wallis.as_ref().unwrap();
            assert_eq!(kw.p_value, 1.0);
            assert!(kw.warning.is_some());
            assert!(t.dunn.is_empty());
        }
    }

    #[test]
    fn injected_bias_raises_the_biased_cell() {
        let mut cfg = SynthConfig {
            participants_per_treatment: 20,
            ..Default::default()
        };
        // everyone leans towards "genuine" on positive ethnicity headlines
        cfg.bias[Category::Ethnicity.index()][Sentiment::Positive.index()] = 0.8;
        let d = generate(&cfg).unwrap();
        let r = group_error_table(&d, Source::Responses).unwrap();
        let cell = |s, g| {
            r.cells
                .iter()
                .find(|c| c.category == Category::Ethnicity && c.sentiment == s && c.genuine == g)
                .unwrap()
                .mean_error
                .unwrap()
        };
        assert!(cell(Sentiment::Positive, false) > cell(Sentiment::Negative, false) + 0.1);
        assert!(cell(Sentiment::Positive, true) < cell(Sentiment::Negative, true));
        let eth = r.tests.iter().find(|t| t.category == Category::Ethnicity).unwrap();
        assert!(eth.kruskal_wallis.as_ref().unwrap().p_value < 0.05);
        assert!(!eth.dunn.is_empty());
    }

    #[test]
    fn headline_gee_has_the_six_terms() {
        let d = generate(&SynthConfig {
            participants_per_treatment: 5,
            ..Default::default()
        })
        .unwrap();
        let r = group_error_table(&d, Source::Responses).unwrap();
        let m = r.headline_gee.unwrap();
        assert_eq!(m.names, GEE_TERMS);
        assert_eq!(m.observations, 240);
        assert_eq!(m.clusters, 120);
    }
}
