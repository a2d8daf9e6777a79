//! Writes metrics and framing tables for the fixture, then renders charts and a summary from them.

use std::fs::File;
use std::path::PathBuf;

use factcrowd::aggregators::AlgorithmSpec;
use factcrowd::bias::{framing_analysis, write_framing_csv, Source};
use factcrowd::fixture;
use factcrowd::report::render_report;
use factcrowd::simulation::{run_campaign, write_metrics_csv, SimulationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "report-out".into()));
    std::fs::create_dir_all(&out)?;
    let data = fixture::dataset();

    let cfg = SimulationConfig {
        sizes: vec![4, 12, 36],
        replicas: 30,
        algorithms: AlgorithmSpec::parse_list("cwmv,exp4,metacmab,etree")?,
        ..Default::default()
    };
    write_metrics_csv(&run_campaign(&cfg, &data)?.table, File::create(out.join("metrics.csv"))?)?;
    write_framing_csv(&framing_analysis(&data, Source::Responses)?, File::create(out.join("framing.csv"))?)?;

    for f in render_report(&out, &out)?.files {
        println!("{}", f.display());
    }
    Ok(())
}
