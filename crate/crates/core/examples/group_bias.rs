//! Error by headline group, demographic accuracy, confidence calibration and rater similarity on the fixture.

use factcrowd::bias::{
    confidence_calibration, demographic_performance, diversity_analysis, group_error_table, Source, Split,
};
use factcrowd::data::Category;
use factcrowd::fixture;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = fixture::dataset();

    let groups = group_error_table(&data, Source::Responses)?;
    for c in &groups.cells {
        println!(
            "{:9} {:8} genuine={:5} error {:.3}",
            c.category.as_str(),
            c.sentiment.as_str(),
            c.genuine,
            c.mean_error.unwrap_or(f64::NAN)
        );
    }
    for t in &groups.tests {
        if let Some(kw) = &t.kruskal_wallis {
            println!("{:9} Kruskal-Wallis H {:.3}, p {:.4}", t.category.as_str(), kw.statistic, kw.p_value);
        }
    }

    let demo = demographic_performance(&data)?;
    for (split, group) in [(Split::Gender, "male"), (Split::Gender, "female"), (Split::Age, "<35"), (Split::Age, ">=35")] {
        let acc: Vec<String> = Category::ALL
            .iter()
            .map(|c| format!("{:.3}", demo.accuracy(split, group, *c).unwrap_or(f64::NAN)))
            .collect();
        println!("{group:6} accuracy on gender/ethnicity/age headlines {}", acc.join(" "));
    }

    if let Some(v) = confidence_calibration(&data).crowd_vote {
        println!("crowd vote: majority {:.3}, confidence-weighted {:.3}", v.majority, v.confidence_weighted);
    }

    let div = diversity_analysis(&data)?;
    println!(
        "mean rater correlation: men {:.3}, women {:.3}, balanced mix {:.3}",
        div.men.mean.unwrap_or(f64::NAN),
        div.women.mean.unwrap_or(f64::NAN),
        div.balanced_mix.unwrap_or(f64::NAN)
    );
    Ok(())
}
