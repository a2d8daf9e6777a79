//! Structure selection: on a population whose competence depends on the
//! headline's category the tree splits off ethnicity, on the fixture it does not.

use factcrowd::aggregators::AlgorithmSpec;
use factcrowd::data::Dataset;
use factcrowd::fixture;
use factcrowd::simulation::{run_campaign, SimulationConfig};
use factcrowd::synth::{generate, CalibrationTargets, Population};

fn shares(name: &str, data: &Dataset) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimulationConfig {
        sizes: vec![36],
        replicas: 40,
        seed: 3,
        algorithms: vec![AlgorithmSpec::etree()],
        ..Default::default()
    };
    let out = run_campaign(&cfg, data)?;
    println!("{name}");
    for (structure, share) in &out.table.rows[0].structure_shares {
        println!("  {:16} {:5.1}%", structure.as_str(), 100.0 * share);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specialists = generate(&Population::EthnicitySpecialists.config(&CalibrationTargets::default(), 21)?)?;
    shares("ethnicity specialists", &specialists)?;
    shares("bundled fixture", &fixture::dataset())?;
    Ok(())
}
