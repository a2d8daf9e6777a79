//! Generates a calibrated synthetic study and writes it as CSV.
//!
//! `cargo run --example synthesize -- crates/core/fixtures` regenerates the bundled fixture.

use std::fs::File;
use std::path::PathBuf;

use factcrowd::data::{write_headlines, write_responses, Category};
use factcrowd::synth::{expected_accuracy, generate, CalibrationTargets, Population};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "synth-out".into()));
    std::fs::create_dir_all(&out)?;

    let cfg = Population::FewExperts.config(&CalibrationTargets::default(), 7)?;
    let data = generate(&cfg)?;
    write_headlines(&data, File::create(out.join("headlines.csv"))?)?;
    write_responses(&data, File::create(out.join("responses.csv"))?)?;
    std::fs::write(out.join("synth_config.json"), serde_json::to_string(&cfg)? + "\n")?;

    println!("delta {:?}, rho {:.3}", cfg.delta, cfg.rho);
    for c in Category::ALL {
        println!("expected accuracy on {:9} {:.4}", c.as_str(), expected_accuracy(&cfg, c));
    }
    println!("{} responses written to {}", data.responses().len(), out.display());
    Ok(())
}
