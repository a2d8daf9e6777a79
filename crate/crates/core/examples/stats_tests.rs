//! The statistics toolkit on small samples.

use factcrowd::seed::rng_for;
use factcrowd::stats::{
    bootstrap_ci, dunn_posthoc, gee_fit, kruskal_wallis, mann_whitney_u, wilcoxon_signed_rank, Adjustment,
    WorkingCorrelation,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let before = [0.50, 0.25, 0.75, 0.50, 0.25, 0.50, 0.75, 0.25];
    let after = [0.75, 0.50, 0.75, 1.00, 0.50, 0.75, 1.00, 0.25];
    let w = wilcoxon_signed_rank(&before, &after)?;
    println!("Wilcoxon signed-rank W {} p {:.4}", w.statistic, w.p_value);

    let m = mann_whitney_u(&before, &after)?;
    println!("Mann-Whitney U {} p {:.4}", m.statistic, m.p_value);

    let groups = [vec![0.1, 0.2, 0.15, 0.3], vec![0.4, 0.5, 0.45, 0.35], vec![0.2, 0.25, 0.3, 0.2]];
    let kw = kruskal_wallis(&groups)?;
    println!("Kruskal-Wallis H {:.3} df {:?} p {:.4} eta^2 {:.3}", kw.statistic, kw.df, kw.p_value, kw.effect_size.unwrap_or(f64::NAN));
    for d in dunn_posthoc(&groups, Adjustment::Holm)? {
        println!("  Dunn {} vs {} z {:+.3} p(Holm) {:.4}", d.i, d.j, d.z, d.p_adjusted);
    }

    let ci = bootstrap_ci(&after, 2000, after.len(), 0.95, &mut rng_for("stats-example", &[]))?;
    println!("bootstrap mean {:.3} [{:.3}, {:.3}]", ci.mean, ci.lo, ci.hi);

    // two measurements per subject, clustered by subject
    let y: Vec<f64> = before.iter().chain(&after).copied().collect();
    let x: Vec<Vec<f64>> = (0..16).map(|i| vec![1.0, if i < 8 { 0.0 } else { 1.0 }]).collect();
    let clusters: Vec<usize> = (0..16).map(|i| i % 8).collect();
    let g = gee_fit(&y, &x, &clusters, &["intercept", "after"], WorkingCorrelation::Exchangeable)?;
    for (i, name) in g.names.iter().enumerate() {
        println!("GEE {name:9} {:+.3} (robust se {:.3})", g.coefficients[i], g.std_errors[i]);
    }
    Ok(())
}
