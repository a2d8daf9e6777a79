use serde::Serialize;

use super::{mean, BiasError};
use crate::data::{response_accuracy, AgeGroup, Category, Dataset, Gender, Participant};
use crate::stats::{gee_fit, GeeModel, WorkingCorrelation};

/// A two-way demographic partition of participants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// Men (reference) vs women; other genders are left out.
    Gender,
    /// 35 and over (reference) vs under 35.
    Age,
    /// Modal ethnicity (reference) vs everyone else.
    Ethnicity,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Gender, Split::Age, Split::Ethnicity];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Gender => "gender",
            Split::Age => "age",
            Split::Ethnicity => "ethnicity",
        }
    }

    /// Labels of the reference and contrast groups.
    pub fn groups(self) -> [&'static str; 2] {
        match self {
            Split::Gender => ["male", "female"],
            Split::Age => [">=35", "<35"],
            Split::Ethnicity => ["majority", "minority"],
        }
    }

    /// `Some(true)` for the contrast group, `None` when the participant is outside the split.
    pub fn side(self, dataset: &Dataset, index: usize, p: &Participant) -> Option<bool> {
        match self {
            Split::Gender => match p.gender? {
                Gender::Male => Some(false),
                Gender::Female => Some(true),
                Gender::Other => None,
            },
            Split::Age => Some(p.age_group()? == AgeGroup::Younger),
            Split::Ethnicity => dataset.is_majority(index).map(|m| !m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemographicCell {
    pub split: Split,
    pub group: &'static str,
    pub category: Category,
    pub participants: usize,
    pub responses: usize,
    /// Mean `1 - |p - y|`.
    pub accuracy: f64,
}

/// Accuracy on one category regressed on the contrast indicator, clustered by participant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitTest {
    pub split: Split,
    pub category: Category,
    pub model: GeeModel,
}

impl SplitTest {
    /// Coefficient of the contrast group.
    pub fn effect(&self) -> f64 {
        self.model.coefficients[1]
    }

    pub fn p_adjusted(&self) -> f64 {
        self.model.p_adjusted.as_ref().map_or(self.model.p_values[1], |p| p[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemographicReport {
    pub cells: Vec<DemographicCell>,
    pub tests: Vec<SplitTest>,
    pub warnings: Vec<String>,
}

impl DemographicReport {
    pub fn accuracy(&self, split: Split, group: &str, category: Category) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.split == split && c.group == group && c.category == category)
            .map(|c| c.accuracy)
    }

    pub fn test(&self, split: Split, category: Category) -> Option<&SplitTest> {
        self.tests.iter().find(|t| t.split == split && t.category == category)
    }
}

/// Accuracy per demographic group and headline category, with a GEE per
/// (split, category) whose p-values are Bonferroni-adjusted over the categories.
pub fn demographic_performance(dataset: &Dataset) -> Result<DemographicReport, BiasError> {
    let mut cells = Vec::new();
    let mut tests = Vec::new();
    let mut warnings = Vec::new();
    for split in Split::ALL {
        let sides: Vec<Option<bool>> = dataset
            .participants()
            .iter()
            .enumerate()
            .map(|(i, p)| split.side(dataset, i, p))
            .collect();
        if sides.iter().all(Option::is_none) {
            warnings.push(format!("{} split skipped: no participant has this attribute", split.as_str()));
            continue;
        }
        for category in Category::ALL {
            let (mut y, mut x, mut cl) = (Vec::new(), Vec::new(), Vec::new());
            let mut per_side = [(Vec::new(), 0usize), (Vec::new(), 0usize)];
            for (pi, side) in sides.iter().enumerate() {
                let Some(side) = *side else { continue };
                let t = dataset.participants()[pi].treatment;
                let mut answered = false;
                for &h in dataset.headlines_in(t) {
                    let head = &dataset.headlines()[h];
                    if head.category != category {
                        continue;
                    }
                    let Some(p) = dataset.probability(pi, h) else { continue };
                    let a = response_accuracy(p, head.genuine);
                    per_side[usize::from(side)].0.push(a);
                    y.push(a);
                    x.push(vec![1.0, f64::from(side)]);
                    cl.push(pi);
                    answered = true;
                }
                per_side[usize::from(side)].1 += usize::from(answered);
            }
            for (k, (acc, n)) in per_side.iter().enumerate() {
                if !acc.is_empty() {
                    cells.push(DemographicCell {
                        split,
                        group: split.groups()[k],
                        category,
                        participants: *n,
                        responses: acc.len(),
                        accuracy: mean(acc),
                    });
                }
            }
            let names = ["intercept", split.groups()[1]];
            match gee_fit(&y, &x, &cl, &names, WorkingCorrelation::Exchangeable) {
                Ok(m) => tests.push(SplitTest {
                    split,
                    category,
                    model: m.with_bonferroni(Category::ALL.len()),
                }),
                Err(e) => warnings.push(format!("{} split on {category} headlines: {e}", split.as_str())),
            }
        }
    }
    Ok(DemographicReport { cells, tests, warnings })
}
