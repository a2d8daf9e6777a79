use serde::{Deserialize, Serialize};

use super::exact::{rank_sum_p, signed_rank_p};
use super::rank::{midranks, tie_sum};
use super::{check_finite, chi2_sf, two_sided_normal_p, StatsError, TestResult};

/// How rank-test p-values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    /// Exact null distribution for small samples, normal approximation otherwise.
    #[default]
    Auto,
    Exact,
    /// Tie-corrected normal approximation with continuity correction.
    Normal,
}

const WILCOXON_EXACT_MAX: usize = 25;
const MWU_EXACT_MAX: usize = 30;

/// Multiple-comparison correction for a family of p-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adjustment {
    #[default]
    Holm,
    Bonferroni,
    None,
}

pub fn adjust_p_values(p: &[f64], how: Adjustment) -> Vec<f64> {
    let m = p.len() as f64;
    match how {
        Adjustment::None => p.to_vec(),
        Adjustment::Bonferroni => p.iter().map(|v| (v * m).min(1.0)).collect(),
        Adjustment::Holm => {
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
            let mut out = vec![0.0; p.len()];
            let mut running: f64 = 0.0;
            for (rank, &i) in order.iter().enumerate() {
                running = running.max(((m - rank as f64) * p[i]).min(1.0));
                out[i] = running;
            }
            out
        }
    }
}

fn doubled(ranks: &[f64]) -> Vec<usize> {
    ranks.iter().map(|r| (2.0 * r).round() as usize).collect()
}

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    wilcoxon_signed_rank_with(a, b, PMethod::Auto)
}

/// Two-sided signed-rank test on paired samples; zero differences are dropped.
///
/// The statistic is `min(W+, W-)`.
pub fn wilcoxon_signed_rank_with(a: &[f64], b: &[f64], method: PMethod) -> Result<TestResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    check_finite(a)?;
    check_finite(b)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    if d.is_empty() {
        return Err(StatsError::Degenerate("all paired differences are zero".into()));
    }
    if d.len() < 5 {
        return Err(StatsError::Degenerate(format!(
            "{} non-zero differences, need at least 5",
            d.len()
        )));
    }
    let n = d.len();
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus = ranks.iter().zip(&d).filter(|(_, v)| **v > 0.0).fold(0.0, |s, (r, _)| s + r);
    let nf = n as f64;
    let total = nf * (nf + 1.0) / 2.0;
    let w_minus = total - w_plus;

    let exact = match method {
        PMethod::Exact => true,
        PMethod::Normal => false,
        PMethod::Auto => n <= WILCOXON_EXACT_MAX,
    };
    let p = if exact {
        signed_rank_p(&doubled(&ranks), (2.0 * w_plus).round() as usize)
    } else {
        let mean = total / 2.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_sum(&abs) / 48.0;
        let dev = ((w_plus - mean).abs() - 0.5).max(0.0);
        two_sided_normal_p(dev / var.sqrt())
    };
    Ok(TestResult {
        statistic: w_plus.min(w_minus),
        p_value: p,
        df: None,
        effect_size: None,
        n: vec![n],
        warning: None,
    })
}

pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    mann_whitney_u_with(x, y, PMethod::Auto)
}

/// Two-sided rank-sum test; the statistic is `U` of the first sample.
pub fn mann_whitney_u_with(x: &[f64], y: &[f64], method: PMethod) -> Result<TestResult, StatsError> {
    if x.is_empty() || y.is_empty() {
        return Err(StatsError::Empty);
    }
    check_finite(x)?;
    check_finite(y)?;
    let (n1, n2) = (x.len(), y.len());
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let (f1, f2) = (n1 as f64, n2 as f64);
    let u1 = r1 - f1 * (f1 + 1.0) / 2.0;
    let n = f1 + f2;
    let ties = tie_sum(&pooled);
    let mut warning = None;

    let p = if ties == n * n * n - n {
        warning = Some("all observations tied; p set to 1".to_string());
        1.0
    } else {
        let exact = match method {
            PMethod::Exact => true,
            PMethod::Normal => false,
            PMethod::Auto => n1 + n2 <= MWU_EXACT_MAX,
        };
        if exact {
            rank_sum_p(&doubled(&ranks), n1, (2.0 * r1).round() as usize)
        } else {
            let mean = f1 * f2 / 2.0;
            let var = f1 * f2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
            let dev = ((u1 - mean).abs() - 0.5).max(0.0);
            two_sided_normal_p(dev / var.sqrt())
        }
    };
    Ok(TestResult {
        statistic: u1,
        p_value: p,
        df: None,
        effect_size: None,
        n: vec![n1, n2],
        warning,
    })
}

fn pooled_ranks<G: AsRef<[f64]>>(groups: &[G]) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>), StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::Invalid("need at least two groups".into()));
    }
    let mut pooled = Vec::new();
    let mut sizes = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        let g = g.as_ref();
        if g.is_empty() {
            return Err(StatsError::Invalid(format!("group {i} is empty")));
        }
        check_finite(g)?;
        pooled.extend_from_slice(g);
        sizes.push(g.len());
    }
    let ranks = midranks(&pooled);
    Ok((pooled, ranks, sizes))
}

/// Tie-corrected Kruskal-Wallis H with chi-squared p on `k - 1` df and
/// `eta^2 = (H - k + 1) / (n - k)`.
pub fn kruskal_wallis<G: AsRef<[f64]>>(groups: &[G]) -> Result<TestResult, StatsError> {
    let (pooled, ranks, sizes) = pooled_ranks(groups)?;
    let k = sizes.len();
    let n = pooled.len() as f64;
    if pooled.len() <= k {
        return Err(StatsError::Invalid(format!("{} observations for {k} groups", pooled.len())));
    }
    let correction = 1.0 - tie_sum(&pooled) / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            df: Some(k - 1),
            effect_size: Some(0.0),
            n: sizes,
            warning: Some("all observations tied; p set to 1".into()),
        });
    }
    let mut start = 0;
    let mut sum = 0.0;
    for &s in &sizes {
        let r: f64 = ranks[start..start + s].iter().sum();
        sum += r * r / s as f64;
        start += s;
    }
    let h = ((12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction).max(0.0);
    Ok(TestResult {
        statistic: h,
        p_value: chi2_sf(h, k - 1),
        df: Some(k - 1),
        effect_size: Some((h - k as f64 + 1.0) / (n - k as f64)),
        n: sizes,
        warning: None,
    })
}

/// One pairwise comparison of Dunn's test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DunnPair {
    pub i: usize,
    pub j: usize,
    pub z: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
}

/// Dunn's pairwise mean-rank comparisons with tie correction.
pub fn dunn_posthoc<G: AsRef<[f64]>>(groups: &[G], adjustment: Adjustment) -> Result<Vec<DunnPair>, StatsError> {
    let (pooled, ranks, sizes) = pooled_ranks(groups)?;
    let n = pooled.len() as f64;
    let mut mean_rank = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for &s in &sizes {
        mean_rank.push(ranks[start..start + s].iter().sum::<f64>() / s as f64);
        start += s;
    }
    let base = n * (n + 1.0) / 12.0 - tie_sum(&pooled) / (12.0 * (n - 1.0));
    let mut pairs = Vec::new();
    for i in 0..sizes.len() {
        for j in i + 1..sizes.len() {
            let se = (base * (1.0 / sizes[i] as f64 + 1.0 / sizes[j] as f64)).sqrt();
            let z = if se > 0.0 { (mean_rank[i] - mean_rank[j]) / se } else { 0.0 };
            pairs.push(DunnPair {
                i,
                j,
                z,
                p_value: two_sided_normal_p(z),
                p_adjusted: 0.0,
            });
        }
    }
    let raw: Vec<f64> = pairs.iter().map(|p| p.p_value).collect();
    for (p, adj) in pairs.iter_mut().zip(adjust_p_values(&raw, adjustment)) {
        p.p_adjusted = adj;
    }
    Ok(pairs)
}
