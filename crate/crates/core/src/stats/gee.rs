use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_finite, two_sided_normal_p, StatsError};

const TOLERANCE: f64 = 1e-8;
const MAX_ITER: usize = 100;
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkingCorrelation {
    Independence,
    #[default]
    Exchangeable,
}

/// Gaussian-identity GEE fit with robust (sandwich) standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeeModel {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Bonferroni-adjusted p-values, when requested.
    pub p_adjusted: Option<Vec<f64>>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub correlation: WorkingCorrelation,
    /// Exchangeable correlation estimate (0 under independence).
    pub alpha: f64,
    pub scale: f64,
    pub clusters: usize,
    pub observations: usize,
    pub iterations: usize,
}

impl GeeModel {
    /// Multiplies p-values by `family` (capped at 1).
    pub fn with_bonferroni(mut self, family: usize) -> Self {
        let m = family.max(1) as f64;
        self.p_adjusted = Some(self.p_values.iter().map(|p| (p * m).min(1.0)).collect());
        self
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

struct Cluster {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

/// `R^-1 v` for an exchangeable correlation matrix of size `v.len()`.
fn exch_solve(alpha: f64, v: &DVector<f64>) -> DVector<f64> {
    if alpha == 0.0 {
        return v.clone();
    }
    let n = v.len() as f64;
    let s = v.sum() * alpha / (1.0 + (n - 1.0) * alpha);
    v.map(|e| (e - s) / (1.0 - alpha))
}

fn exch_solve_mat(alpha: f64, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, col) in m.column_iter().enumerate() {
        out.set_column(j, &exch_solve(alpha, &col.into_owned()));
    }
    out
}

/// Fits `y ~ X beta` with observations grouped by `clusters`.
///
/// `x` holds one row per observation (include a column of ones for an intercept).
pub fn gee_fit(
    y: &[f64],
    x: &[Vec<f64>],
    clusters: &[usize],
    names: &[&str],
    correlation: WorkingCorrelation,
) -> Result<GeeModel, StatsError> {
    let n = y.len();
    if n == 0 {
        return Err(StatsError::Empty);
    }
    if x.len() != n || clusters.len() != n {
        return Err(StatsError::LengthMismatch(n, x.len().min(clusters.len())));
    }
    let p = x[0].len();
    if p == 0 || x.iter().any(|r| r.len() != p) || names.len() != p {
        return Err(StatsError::Invalid("design rows and names must share one width".into()));
    }
    check_finite(y)?;
    for r in x {
        check_finite(r)?;
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in clusters.iter().enumerate() {
        groups.entry(c).or_default().push(i);
    }
    if groups.len() < 2 {
        return Err(StatsError::TooFewClusters(groups.len()));
    }
    let data: Vec<Cluster> = groups
        .values()
        .map(|idx| Cluster {
            x: DMatrix::from_fn(idx.len(), p, |r, c| x[idx[r]][c]),
            y: DVector::from_iterator(idx.len(), idx.iter().map(|&i| y[i])),
        })
        .collect();

    let full = DMatrix::from_fn(n, p, |r, c| x[r][c]);
    let svd = full.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 || svd.singular_values.min() <= smax * 1e-10 * n.max(p) as f64 {
        return Err(StatsError::RankDeficient);
    }

    let max_size = data.iter().map(|c| c.y.len()).max().unwrap_or(1);
    let pairs: f64 = data
        .iter()
        .map(|c| {
            let m = c.y.len() as f64;
            m * (m - 1.0) / 2.0
        })
        .sum();

    let solve = |alpha: f64| -> Result<(DVector<f64>, DMatrix<f64>), StatsError> {
        let mut b = DMatrix::zeros(p, p);
        let mut u = DVector::zeros(p);
        for c in &data {
            let rx = exch_solve_mat(alpha, &c.x);
            b += c.x.transpose() * &rx;
            u += rx.transpose() * &c.y;
        }
        let chol = b.clone().cholesky().ok_or(StatsError::RankDeficient)?;
        Ok((chol.solve(&u), chol.inverse()))
    };

    let residual_stats = |beta: &DVector<f64>| -> (f64, f64) {
        let mut ss = 0.0;
        let mut cross = 0.0;
        for c in &data {
            let e = &c.y - &c.x * beta;
            ss += e.norm_squared();
            let s = e.sum();
            cross += (s * s - e.norm_squared()) / 2.0;
        }
        let scale = ss / (n as f64 - p as f64).max(1.0);
        (scale, cross)
    };

    let (mut beta, mut b_inv) = solve(0.0)?;
    let mut alpha = 0.0;
    let mut iterations = 1;
    let mut last_step = 0.0;
    let mut converged = true;
    if correlation == WorkingCorrelation::Exchangeable && max_size > 1 {
        converged = false;
        let lower = -1.0 / (max_size as f64 - 1.0);
        while iterations < MAX_ITER {
            let (scale, cross) = residual_stats(&beta);
            let denom = (pairs - p as f64).max(1.0) * scale;
            alpha = if denom > 0.0 { cross / denom } else { 0.0 };
            // keep R positive definite for every cluster size
            alpha = alpha.clamp(lower + 1e-9, 1.0 - 1e-9);
            let (next, inv) = solve(alpha)?;
            last_step = (&next - &beta).amax();
            beta = next;
            b_inv = inv;
            iterations += 1;
            if last_step < TOLERANCE {
                converged = true;
                break;
            }
        }
    }

    let mut meat = DMatrix::zeros(p, p);
    for c in &data {
        let e = &c.y - &c.x * &beta;
        let s = c.x.transpose() * exch_solve(alpha, &e);
        meat += &s * s.transpose();
    }
    let cov = &b_inv * meat * &b_inv;
    let (scale, _) = residual_stats(&beta);

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let std_errors: Vec<f64> = (0..p).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    let z: Vec<f64> = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(b, s)| if *s > 0.0 { b / s } else { 0.0 })
        .collect();
    let model = GeeModel {
        names: names.iter().map(|s| s.to_string()).collect(),
        p_values: z.iter().map(|z| two_sided_normal_p(*z)).collect(),
        ci_lo: coefficients.iter().zip(&std_errors).map(|(b, s)| b - Z95 * s).collect(),
        ci_hi: coefficients.iter().zip(&std_errors).map(|(b, s)| b + Z95 * s).collect(),
        coefficients,
        std_errors,
        z,
        p_adjusted: None,
        correlation,
        alpha,
        scale,
        clusters: data.len(),
        observations: n,
        iterations,
    };
    if converged {
        Ok(model)
    } else {
        Err(StatsError::NoConvergence {
            iterations,
            last_step,
            last: Box::new(model),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exchangeable_inverse_is_exact() {
        let alpha = 0.3;
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5, 4.0]);
        let r = DMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { alpha });
        let direct = r.clone().lu().solve(&v).unwrap();
        assert!((exch_solve(alpha, &v) - direct).amax() < 1e-12);
    }

    #[test]
    fn needs_two_clusters() {
        let x = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]];
        let r = gee_fit(&[1.0, 2.0, 3.0], &x, &[0, 0, 0], &["a", "b"], WorkingCorrelation::Independence);
        assert_eq!(r.unwrap_err(), StatsError::TooFewClusters(1));
    }

    #[test]
    fn rank_deficiency_detected() {
        let x = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]];
        let r = gee_fit(&[1.0, 2.0, 3.0], &x, &[0, 1, 2], &["a", "b"], WorkingCorrelation::Independence);
        assert_eq!(r.unwrap_err(), StatsError::RankDeficient);
    }

    #[test]
    fn intercept_only_is_mean() {
        let y = [1.0, 2.0, 3.0, 6.0];
        let x = vec![vec![1.0]; 4];
        let m = gee_fit(&y, &x, &[0, 0, 1, 1], &["(intercept)"], WorkingCorrelation::Exchangeable).unwrap();
        assert!((m.coefficients[0] - 3.0).abs() < 1e-10);
        assert!((m.ci_hi[0] - m.coefficients[0] - 1.96 * m.std_errors[0]).abs() < 1e-12);
    }

    #[test]
    fn exchangeable_alpha_in_range() {
        let y = [1.0, 1.2, 3.0, 3.1, 0.0, 0.3, 2.0, 2.4];
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![1.0, (i % 2) as f64]).collect();
        let m = gee_fit(&y, &x, &[0, 0, 1, 1, 2, 2, 3, 3], &["a", "b"], WorkingCorrelation::Exchangeable).unwrap();
        assert!(m.alpha > -1.0 && m.alpha < 1.0);
        assert!(m.std_errors.iter().all(|s| *s >= 0.0));
    }
}
