use rand::seq::SliceRandom;
use rand::RngCore;

use super::{Mode, SimError};
use crate::data::Dataset;

/// Headlines presented in one round, as dataset indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub headlines: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPlan {
    pub mode: Mode,
    pub rounds: Vec<Round>,
}

/// Orders a treatment's headlines into rounds without repeats.
///
/// With an even number of arms every round holds as many genuine as altered headlines.
pub fn build_rounds(dataset: &Dataset, treatment: u8, mode: Mode, rng: &mut dyn RngCore) -> Result<RoundPlan, SimError> {
    let pool = dataset.headlines_in(treatment);
    if pool.is_empty() {
        return Err(SimError::Config(format!("treatment {treatment} has no headlines")));
    }
    let k = mode.headlines_per_round();
    if k == 0 || !pool.len().is_multiple_of(k) || (matches!(mode, Mode::HeadlineSelection { .. }) && k < 2) {
        return Err(SimError::Config(format!(
            "{k} headlines per round does not divide the {} headlines of treatment {treatment}",
            pool.len()
        )));
    }
    let rounds = if k.is_multiple_of(2) {
        let (mut genuine, mut altered): (Vec<usize>, Vec<usize>) =
            pool.iter().partition(|&&h| dataset.headlines()[h].genuine);
        if genuine.len() != altered.len() {
            return Err(SimError::Config(format!(
                "treatment {treatment} has {} genuine and {} altered headlines; balanced rounds need equal counts",
                genuine.len(),
                altered.len()
            )));
        }
        genuine.shuffle(rng);
        altered.shuffle(rng);
        let half = k / 2;
        genuine
            .chunks(half)
            .zip(altered.chunks(half))
            .map(|(g, a)| {
                let mut headlines: Vec<usize> = g.iter().chain(a).copied().collect();
                headlines.shuffle(rng);
                Round { headlines }
            })
            .collect()
    } else {
        let mut order = pool.to_vec();
        order.shuffle(rng);
        order.chunks(k).map(|c| Round { headlines: c.to_vec() }).collect()
    };
    Ok(RoundPlan { mode, rounds })
}
