use rand::{Rng, RngCore};

use super::{AdviceMatrix, Aggregator, AggregatorError, Decision, Diagnostics};

/// Weights are rescaled by their maximum once it exceeds this value.
pub const WEIGHT_CEILING: f64 = 1e100;

/// EXP4: exponential weights over experts, each expert's advice row read as a
/// distribution over arms, with a `gamma` share of uniform exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct Exp4 {
    weights: Vec<f64>,
    gains: Vec<f64>,
    gamma: f64,
}

impl Exp4 {
    pub fn new(experts: usize, gamma: f64) -> Result<Self, AggregatorError> {
        Self::with_weights(vec![1.0; experts], gamma)
    }

    pub fn with_weights(weights: Vec<f64>, gamma: f64) -> Result<Self, AggregatorError> {
        if weights.is_empty() {
            return Err(AggregatorError::Shape { experts: 0, arms: 0 });
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(AggregatorError::Hyperparameter(format!(
                "exp4 gamma must lie in (0, 1], got {gamma}"
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(AggregatorError::Hyperparameter(
                "exp4 weights must be finite and positive".into(),
            ));
        }
        let gains = vec![0.0; weights.len()];
        let mut s = Self { weights, gains, gamma };
        s.renormalize();
        Ok(s)
    }

    /// Finite-horizon tuning `min(1, sqrt(K ln N / ((e - 1) T)))`.
    ///
    /// `N` is floored at 2 so a single expert still explores.
    pub fn default_gamma(arms: usize, experts: usize, horizon: usize) -> f64 {
        let n = experts.max(2) as f64;
        let t = horizon.max(1) as f64;
        ((arms as f64 * n.ln()) / ((std::f64::consts::E - 1.0) * t))
            .sqrt()
            .min(1.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cumulative importance-weighted gain of each expert.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    fn normalized_row(advice: &AdviceMatrix, expert: usize) -> impl Iterator<Item = f64> + '_ {
        let row = advice.row(expert);
        let sum: f64 = row.iter().sum();
        let k = row.len() as f64;
        row.iter()
            .map(move |&v| if sum > 0.0 { v / sum } else { 1.0 / k })
    }

    /// Sampling distribution over arms for this advice.
    pub fn arm_probabilities(&self, advice: &AdviceMatrix) -> Vec<f64> {
        let k = advice.arms();
        let total: f64 = self.weights.iter().sum();
        let mut mix = vec![0.0; k];
        for (n, w) in self.weights.iter().enumerate() {
            let share = w / total;
            for (m, xi) in mix.iter_mut().zip(Self::normalized_row(advice, n)) {
                *m += share * xi;
            }
        }
        mix.iter()
            .map(|m| (1.0 - self.gamma) * m + self.gamma / k as f64)
            .collect()
    }

    pub fn step(&self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> (Vec<f64>, usize) {
        let probs = self.arm_probabilities(advice);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = probs.len() - 1;
        for (a, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = a;
                break;
            }
        }
        (probs, chosen)
    }

    /// Weight-averaged advice, used as the truth prediction for each arm.
    pub fn predict(&self, advice: &AdviceMatrix) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        (0..advice.arms())
            .map(|a| {
                advice
                    .column(a)
                    .zip(&self.weights)
                    .map(|(p, w)| w / total * p)
                    .sum::<f64>()
                    .clamp(0.0, 1.0)
            })
            .collect()
    }

    pub fn update(&mut self, advice: &AdviceMatrix, chosen: usize, reward: f64) {
        let probs = self.arm_probabilities(advice);
        let k = advice.arms() as f64;
        let estimate = reward / probs[chosen];
        for n in 0..self.weights.len() {
            let xi = Self::normalized_row(advice, n)
                .nth(chosen)
                .expect("chosen arm in range");
            let gain = xi * estimate;
            self.gains[n] += gain;
            self.weights[n] *= (self.gamma * gain / k).exp();
        }
        self.renormalize();
    }

    fn renormalize(&mut self) {
        let max = self.weights.iter().copied().fold(0.0, f64::max);
        if max > WEIGHT_CEILING {
            for w in &mut self.weights {
                *w /= max;
            }
        }
    }
}

impl Aggregator for Exp4 {
    fn name(&self) -> &'static str {
        "exp4"
    }

    fn decide(&mut self, advice: &AdviceMatrix, rng: &mut dyn RngCore) -> Decision {
        let (scores, chosen) = self.step(advice, rng);
        Decision {
            scores,
            chosen,
            predictions: self.predict(advice),
        }
    }

    fn update(&mut self, advice: &AdviceMatrix, chosen: usize, reward: f64) {
        Exp4::update(self, advice, chosen, reward);
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics::Weights(self.weights.clone())
    }
}
