//! Aggregators on a toy stream: three advisers rate two labels each round, and
//! only the first adviser knows the answer.

use factcrowd::aggregators::{cwmv_scores, mv_scores, AdviceMatrix, Aggregator, Exp4, MetaCmab};
use factcrowd::data::Category;
use factcrowd::seed::rng_for;
use rand::Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rng_for("aggregate-round", &[]);
    let mut exp4 = Exp4::new(3, 0.1)?;
    let mut cmab = MetaCmab::new(3, 1.0, 1.0)?;
    let (mut exp4_hits, mut cmab_hits) = (0.0, 0.0);
    let rounds = 500;

    for t in 0..rounds {
        let truth = f64::from(rng.random_range(0..2u8));
        let noisy = |rng: &mut rand_chacha::ChaCha8Rng| f64::from(rng.random_range(0..5u8)) / 4.0;
        let ratings = [0.25 + 0.5 * truth, noisy(&mut rng), noisy(&mut rng)];
        // arm 0 labels the headline genuine, arm 1 fake
        let advice = AdviceMatrix::label_arms(&ratings, Category::Gender)?;
        let reward = |arm: usize| if (arm == 0) == (truth == 1.0) { 1.0 } else { 0.0 };
        if t == 0 {
            println!("first round advice {:?}", ratings);
            println!("  majority scores {:?}", mv_scores(&advice));
            println!("  confidence-weighted scores {:?}", cwmv_scores(&advice));
        }

        let d = exp4.decide(&advice, &mut rng);
        exp4_hits += reward(d.chosen);
        Aggregator::update(&mut exp4, &advice, d.chosen, reward(d.chosen));

        let d = cmab.decide(&advice, &mut rng);
        cmab_hits += reward(d.chosen);
        Aggregator::update(&mut cmab, &advice, d.chosen, reward(d.chosen));
    }

    let total: f64 = exp4.weights().iter().sum();
    let shares: Vec<String> = exp4.weights().iter().map(|w| format!("{:.3}", w / total)).collect();
    println!("EXP4 accuracy {:.3}, adviser weight shares [{}]", exp4_hits / rounds as f64, shares.join(", "));
    println!("MetaCMAB accuracy {:.3}", cmab_hits / rounds as f64);
    Ok(())
}
