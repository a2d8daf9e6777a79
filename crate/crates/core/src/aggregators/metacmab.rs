use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{argmax_tie_break, AdviceMatrix, Aggregator, AggregatorError, Decision};

/// Online ridge regression `theta = A^-1 b` with `A = lambda I + sum x x^T`.
///
/// The Cholesky factor of `A` is kept current with rank-one updates, so
/// scoring and updating are both quadratic in the feature dimension.
#[derive(Debug, Clone)]
pub struct RidgeModel {
    lambda: f64,
    a: DMatrix<f64>,
    b: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    theta: DVector<f64>,
    observations: usize,
}

impl RidgeModel {
    pub fn new(dim: usize, lambda: f64) -> Result<Self, AggregatorError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(AggregatorError::Hyperparameter(format!(
                "ridge lambda must be positive, got {lambda}"
            )));
        }
        let a = DMatrix::identity(dim, dim) * lambda;
        let chol = Cholesky::new(a.clone()).ok_or(AggregatorError::Factorization)?;
        Ok(Self {
            lambda,
            a,
            b: DVector::zeros(dim),
            chol,
            theta: DVector::zeros(dim),
            observations: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn moments(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    pub fn observations(&self) -> usize {
        self.observations
    }

    fn check(&self, x: &[f64]) -> Result<(), AggregatorError> {
        if x.len() != self.dim() {
            return Err(AggregatorError::FeatureLength {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(AggregatorError::NonFinite);
        }
        Ok(())
    }

    pub fn mean(&self, x: &[f64]) -> f64 {
        self.theta.iter().zip(x).map(|(t, v)| t * v).sum()
    }

    /// `x^T A^-1 x`, via a triangular solve against the Cholesky factor.
    pub fn variance(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        match self.chol.l_dirty().solve_lower_triangular(&v) {
            Some(y) => y.norm_squared(),
            None => f64::INFINITY,
        }
    }

    pub fn observe(&mut self, x: &[f64], reward: f64) -> Result<(), AggregatorError> {
        self.check(x)?;
        if !reward.is_finite() {
            return Err(AggregatorError::NonFinite);
        }
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                self.a[(i, j)] += x[i] * x[j];
            }
            self.b[i] += reward * x[i];
        }
        let v = DVector::from_column_slice(x);
        self.chol.rank_one_update(&v, 1.0);
        if !self.chol.l_dirty().iter().all(|v| v.is_finite()) {
            self.rebuild()?;
        }
        self.theta = self.chol.solve(&self.b);
        if !self.theta.iter().all(|v| v.is_finite()) {
            self.rebuild()?;
            self.theta = self.chol.solve(&self.b);
        }
        self.observations += 1;
        Ok(())
    }

    fn rebuild(&mut self) -> Result<(), AggregatorError> {
        self.chol = Cholesky::new(self.a.clone()).ok_or(AggregatorError::Factorization)?;
        Ok(())
    }
}

/// Exploration bonus used when scoring arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exploration {
    /// `alpha * sqrt(x^T A^-1 x)` added to the mean estimate.
    #[default]
    Optimism,
    Greedy,
}

/// Regression meta-aggregator over the whole advice vector.
///
/// Each arm's feature is `[1, p_1(a), ..., p_N(a)]`; the arm with the highest
/// optimistic reward estimate is played.
#[derive(Debug, Clone)]
pub struct MetaCmab {
    model: RidgeModel,
    alpha: f64,
    exploration: Exploration,
}

impl MetaCmab {
    pub fn new(experts: usize, lambda: f64, alpha: f64) -> Result<Self, AggregatorError> {
        Self::with_exploration(experts, lambda, alpha, Exploration::Optimism)
    }

    pub fn with_exploration(
        experts: usize,
        lambda: f64,
        alpha: f64,
        exploration: Exploration,
    ) -> Result<Self, AggregatorError> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(AggregatorError::Hyperparameter(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        Ok(Self {
            model: RidgeModel::new(experts + 1, lambda)?,
            alpha,
            exploration,
        })
    }

    pub fn model(&self) -> &RidgeModel {
        &self.model
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let bonus = match self.exploration {
            Exploration::Optimism if self.alpha > 0.0 => self.alpha * self.model.variance(x).sqrt(),
            _ => 0.0,
        };
        self.model.mean(x) + bonus
    }

    pub fn scores(&self, advice: &AdviceMatrix) -> Vec<f64> {
        (0..advice.arms()).map(|a| self.score(&advice.feature(a))).collect()
    }

    pub fn step(&self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> (Vec<f64>, usize) {
        let scores = self.scores(advice);
        let chosen = argmax_tie_break(&scores, rng);
        (scores, chosen)
    }

    /// Truth prediction `theta^T x` clipped to `[0, 1]`, without exploration bonus.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.model.mean(x).clamp(0.0, 1.0)
    }

    pub fn update(&mut self, x: &[f64], reward: f64) -> Result<(), AggregatorError> {
        self.model.observe(x, reward)
    }
}

impl Aggregator for MetaCmab {
    fn name(&self) -> &'static str {
        "metacmab"
    }

    fn decide(&mut self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> Decision {
        let (scores, chosen) = self.step(advice, rng);
        let predictions = (0..advice.arms())
            .map(|a| self.predict(&advice.feature(a)))
            .collect();
        Decision {
            scores,
            chosen,
            predictions,
        }
    }

    fn update(&mut self, advice: &AdviceMatrix, chosen: usize, reward: f64) {
        MetaCmab::update(self, &advice.feature(chosen), reward)
            .expect("advice matrices hold finite probabilities");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_model_scores_prior_only() {
        let m = MetaCmab::new(2, 2.0, 1.5).unwrap();
        let x = [1.0, 0.5, 0.25];
        let xx: f64 = x.iter().map(|v| v * v).sum();
        assert!((m.score(&x) - 1.5 * (xx / 2.0).sqrt()).abs() < 1e-14);
        assert_eq!(m.predict(&x), 0.0);
    }

    #[test]
    fn three_hand_listed_features() {
        // A = I + sum x x^T and b = sum r x, solved by hand with Cramer's rule.
        let mut m = MetaCmab::new(1, 1.0, 0.0).unwrap();
        m.update(&[1.0, 0.0], 1.0).unwrap();
        m.update(&[1.0, 1.0], 0.0).unwrap();
        m.update(&[1.0, 0.5], 1.0).unwrap();
        // A = [[4, 1.5], [1.5, 2.25]], b = [2, 0.5]; det = 6.75
        let det = 4.0 * 2.25 - 1.5 * 1.5;
        let t0 = (2.0 * 2.25 - 1.5 * 0.5) / det;
        let t1 = (4.0 * 0.5 - 1.5 * 2.0) / det;
        let th = m.model().theta();
        assert!((th[0] - t0).abs() < 1e-10);
        assert!((th[1] - t1).abs() < 1e-10);
    }

    #[test]
    fn rejects_wrong_feature_length_and_nan() {
        let mut m = MetaCmab::new(2, 1.0, 1.0).unwrap();
        assert!(matches!(
            m.update(&[1.0, 0.5], 1.0),
            Err(AggregatorError::FeatureLength { expected: 3, got: 2 })
        ));
        assert_eq!(m.update(&[1.0, f64::NAN, 0.0], 1.0), Err(AggregatorError::NonFinite));
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        assert!(MetaCmab::new(2, 0.0, 1.0).is_err());
        assert!(MetaCmab::new(2, 1.0, -1.0).is_err());
    }

    #[test]
    fn greedy_drops_bonus() {
        let m = MetaCmab::with_exploration(1, 1.0, 3.0, Exploration::Greedy).unwrap();
        assert_eq!(m.score(&[1.0, 1.0]), 0.0);
    }
}
