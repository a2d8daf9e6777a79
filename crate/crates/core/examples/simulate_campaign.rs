//! Bootstrap campaign on the bundled fixture: every aggregator at three group sizes.

use factcrowd::aggregators::AlgorithmSpec;
use factcrowd::fixture;
use factcrowd::simulation::{run_campaign, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimulationConfig {
        sizes: vec![4, 12, 36],
        replicas: 100,
        seed: 1,
        algorithms: AlgorithmSpec::parse_list("random,mv,cwmv,exp4,metacmab,etree")?,
        ..Default::default()
    };
    let out = run_campaign(&cfg, &fixture::dataset())?;
    println!("{:10} {:>3} {:>9} {:>9} {:>16}", "algorithm", "N", "accuracy", "best", "terminal regret");
    for r in &out.table.rows {
        println!(
            "{:10} {:>3} {:>9.3} {:>9.3} {:>+7.3} [{:+.3}, {:+.3}]",
            r.algorithm,
            r.size,
            r.accuracy.mean,
            r.best_member_accuracy.mean,
            r.terminal_regret.mean,
            r.terminal_regret.lo,
            r.terminal_regret.hi
        );
    }
    Ok(())
}
