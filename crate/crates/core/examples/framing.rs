//! Framing quadrants: mean belief in the original against the altered member of each headline pair.

use factcrowd::bias::{framing_analysis, Quadrant, Source};
use factcrowd::fixture;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = framing_analysis(&fixture::dataset(), Source::Responses)?;
    for q in Quadrant::ALL {
        println!("{:8} {:3}", q.as_str(), report.summary.count(q));
    }
    if let Some(f) = report.summary.framing_fraction {
        println!("pairs with a significant framing shift: {} of {} ({:.2})", report.summary.significant, report.summary.tested, f);
    }
    Ok(())
}
