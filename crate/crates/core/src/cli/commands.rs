use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{invalid, runtime, Analysis, CliError, CliResult, DataConfig, Outputs, RunConfig, StatTest};
use crate::aggregators::AlgorithmSpec;
use crate::bias::{self, BiasError, Source};
use crate::data::{load_dataset, write_headlines, write_responses, Dataset};
use crate::report::{render_report, ReportError};
use crate::seed::rng_for;
use crate::simulation::{
    collect_predictions, run_campaign, write_metrics_csv, write_metrics_meta, write_trace_csv, SimError,
};
use crate::stats::{
    bootstrap_ci, dunn_posthoc, gee_fit, kruskal_wallis, mann_whitney_u_with, pearson, wilcoxon_signed_rank_with,
};
use crate::synth::{calibrate, generate, SynthError};
use crate::fixture;

pub(crate) fn load(data: &DataConfig) -> CliResult<Dataset> {
    if data.fixture {
        return Ok(fixture::dataset());
    }
    let from_dir = |name: &str| data.dir.as_ref().map(|d| d.join(name));
    let h = data.headlines.clone().or_else(|| from_dir("headlines.csv"));
    let r = data.responses.clone().or_else(|| from_dir("responses.csv"));
    match (h, r) {
        (Some(h), Some(r)) => load_dataset(&h, &r).map_err(invalid),
        _ => Err(invalid(
            "no dataset given: pass --data DIR, both --headlines and --responses, or --fixture",
        )),
    }
}

fn dataset_label(d: &Dataset) -> Option<String> {
    let p = d.provenance();
    p.note
        .clone()
        .or_else(|| p.responses_sha256.as_ref().map(|s| format!("responses sha256 {s}")))
}

fn sim_err(e: SimError) -> CliError {
    if e.is_validation() {
        invalid(e)
    } else {
        runtime(e)
    }
}

fn bias_err(e: BiasError) -> CliError {
    match e {
        BiasError::Stats(_) | BiasError::Io { .. } => runtime(e),
        _ => invalid(e),
    }
}

pub(crate) fn simulate(config: &RunConfig, hash: &str, out: &mut Outputs) -> CliResult<()> {
    let dataset = load(&config.data)?;
    let result = run_campaign(&config.simulation, &dataset).map_err(sim_err)?;
    write_metrics_csv(&result.table, out.create("metrics.csv")?).map_err(sim_err)?;
    write_metrics_meta(&result.table, hash, dataset_label(&dataset), out.create("metrics.meta.json")?)
        .map_err(sim_err)?;
    let ids: Vec<String> = dataset.headlines().iter().map(|h| h.id.to_string()).collect();
    for t in &result.traces {
        let name = format!("traces/{}-t{}-n{}-r{}.csv", t.algorithm, t.treatment, t.size, t.replica);
        write_trace_csv(t, &ids, out.create(&name)?).map_err(sim_err)?;
    }
    println!("algorithm      N  accuracy  best_member  terminal_regret  [95% CI]");
    for r in &result.table.rows {
        println!(
            "{:<12} {:>3}  {:.4}    {:.4}       {:+.4}          [{:+.4}, {:+.4}]",
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

pub(crate) fn synth(config: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let s = &config.synth;
    let mut cfg = s.config.clone();
    if let Some(p) = s.population {
        cfg.profiles = p.profiles();
    }
    let synth_err = |e: SynthError| match e {
        SynthError::Config(_) => invalid(e),
        _ => runtime(e),
    };
    if let Some(t) = &s.targets {
        cfg = calibrate(t, &cfg).map_err(synth_err)?;
    }
    let d = generate(&cfg).map_err(synth_err)?;
    write_headlines(&d, out.create("headlines.csv")?).map_err(runtime)?;
    write_responses(&d, out.create("responses.csv")?).map_err(runtime)?;
    out.write_json("synth_config.json", &cfg)?;
    println!(
        "{} participants, {} responses; delta {:?}, rho {:.4}",
        d.participants().len(),
        d.responses().len(),
        cfg.delta,
        cfg.rho
    );
    Ok(())
}

pub(crate) fn analyze(config: &RunConfig, which: Analysis, out: &mut Outputs) -> CliResult<()> {
    let d = load(&config.data)?;
    let a = &config.analysis;
    let predictions = if a.source == "raw" {
        None
    } else {
        let spec = AlgorithmSpec::from_str(&a.source).map_err(invalid)?;
        let smallest = d
            .answered_treatments()
            .iter()
            .map(|&t| d.participants_in(t).len())
            .min()
            .unwrap_or(0);
        if a.prediction_size == 0 || a.prediction_size > smallest {
            return Err(invalid(format!(
                "prediction group size {} must be between 1 and the smallest treatment population {smallest}",
                a.prediction_size
            )));
        }
        let p = collect_predictions(
            &d,
            &spec,
            a.prediction_size,
            a.prediction_replicas,
            config.simulation.seed,
            config.simulation.workers,
        )
        .map_err(sim_err)?;
        let mut w = csv::Writer::from_writer(out.create("predictions.csv")?);
        let io = |e: csv::Error| runtime(format!("predictions.csv: {e}"));
        w.write_record(["headline_id", "prediction"]).map_err(io)?;
        for (h, v) in d.headlines().iter().zip(&p) {
            w.write_record([h.id.as_str(), &v.map(|x| x.to_string()).unwrap_or_default()])
                .map_err(io)?;
        }
        w.flush().map_err(runtime)?;
        Some(p)
    };
    let source = match &predictions {
        Some(p) => Source::Predictions(p),
        None => Source::Responses,
    };
    let runs = |x: Analysis| which == x || which == Analysis::All;
    let response_only = [Analysis::Demographics, Analysis::Calibration, Analysis::Timing, Analysis::Diversity];
    if predictions.is_some() && response_only.contains(&which) {
        eprintln!("note: {which:?} always reads the raw responses; --source applies to framing and groupbias");
    }

    if runs(Analysis::Framing) {
        let r = bias::framing_analysis(&d, source).map_err(bias_err)?;
        bias::write_framing_csv(&r, out.create("framing.csv")?).map_err(bias_err)?;
        out.write_json("framing.json", &r.summary)?;
        let s = &r.summary;
        println!(
            "framing ({}): Q1 {} Q2 {} Q3 {} Q4 {} boundary {}; framing fraction {}",
            r.source,
            s.counts[0],
            s.counts[1],
            s.counts[2],
            s.counts[3],
            s.counts[4],
            s.framing_fraction.map_or("n/a".into(), |f| format!("{f:.3}"))
        );
    }
    if runs(Analysis::Groupbias) {
        let r = bias::group_error_table(&d, source).map_err(bias_err)?;
        bias::write_group_errors_csv(&r, out.create("group_errors.csv")?).map_err(bias_err)?;
        bias::write_group_tests_csv(&r, out.create("group_tests.csv")?).map_err(bias_err)?;
        out.write_json("group_errors.json", &r)?;
        for t in &r.tests {
            if let Some(kw) = &t.kruskal_wallis {
                println!(
                    "group errors {}: H = {:.3}, df = {}, p = {:.4}",
                    t.category,
                    kw.statistic,
                    kw.df.unwrap_or(0),
                    kw.p_value
                );
            }
        }
        warn_all(&r.warnings);
    }
    if runs(Analysis::Demographics) {
        let r = bias::demographic_performance(&d).map_err(bias_err)?;
        bias::write_demographics_csv(&r, out.create("demographics.csv")?).map_err(bias_err)?;
        out.write_json("demographics.json", &r)?;
        for c in &r.cells {
            println!(
                "accuracy {} {:<9} on {:<9} headlines: {:.4}",
                c.split.as_str(),
                c.group,
                c.category.as_str(),
                c.accuracy
            );
        }
        warn_all(&r.warnings);
    }
    if runs(Analysis::Calibration) {
        let r = bias::confidence_calibration(&d);
        bias::write_calibration_csv(&r, out.create("calibration.csv")?).map_err(bias_err)?;
        for b in &r.buckets {
            println!(
                "confidence {:.2}: {} responses, accuracy {}",
                b.confidence,
                b.responses,
                b.accuracy.map_or("n/a".into(), |a| format!("{a:.4}"))
            );
        }
        if let Some(v) = &r.crowd_vote {
            println!(
                "crowd vote over {} headlines: majority {:.4}, confidence-weighted {:.4}",
                v.headlines, v.majority, v.confidence_weighted
            );
        }
        out.write_json("calibration.json", &r)?;
    }
    if runs(Analysis::Timing) {
        let curve = bias::response_time_curve(&d, a.window).map_err(bias_err)?;
        bias::write_timing_csv(&curve, out.create("timing.csv")?).map_err(bias_err)?;
        println!("timing: {} windows of {}", curve.len(), a.window);
    }
    if runs(Analysis::Diversity) {
        let r = bias::diversity_analysis(&d).map_err(bias_err)?;
        out.write_json("diversity.json", &r)?;
        let f = |v: Option<f64>| v.map_or("n/a".into(), |x| format!("{x:.4}"));
        println!(
            "mean pairwise correlation: men {}, women {}, between {}, balanced mix {}",
            f(r.men.mean),
            f(r.women.mean),
            f(r.between.mean),
            f(r.balanced_mix)
        );
        warn_all(&r.warnings);
    }
    Ok(())
}

fn warn_all(ws: &[String]) {
    for w in ws {
        eprintln!("warning: {w}");
    }
}

/// A CSV read into named columns of raw cells.
struct Columns {
    file: String,
    header: Vec<String>,
    cells: Vec<Vec<String>>,
}

impl Columns {
    fn read(path: &Path) -> CliResult<Self> {
        let file = path.display().to_string();
        let mut r = csv::Reader::from_path(path).map_err(|e| invalid(format!("{file}: {e}")))?;
        let header = r
            .headers()
            .map_err(|e| invalid(format!("{file}: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut cells = Vec::new();
        for rec in r.records() {
            cells.push(rec.map_err(|e| invalid(format!("{file}: {e}")))?.iter().map(str::to_string).collect());
        }
        Ok(Self { file, header, cells })
    }

    fn index(&self, name: &str) -> CliResult<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid(format!("{}: no column `{name}`", self.file)))
    }

    fn raw(&self, name: &str) -> CliResult<Vec<String>> {
        let i = self.index(name)?;
        Ok(self.cells.iter().map(|r| r.get(i).cloned().unwrap_or_default()).collect())
    }

    /// Numeric column with blanks as `None`.
    fn numbers(&self, name: &str) -> CliResult<Vec<Option<f64>>> {
        self.raw(name)?
            .into_iter()
            .enumerate()
            .map(|(row, v)| {
                let v = v.trim();
                if v.is_empty() {
                    Ok(None)
                } else {
                    v.parse().map(Some).map_err(|_| {
                        invalid(format!("{}: row {}: column `{name}` holds non-numeric `{v}`", self.file, row + 2))
                    })
                }
            })
            .collect()
    }

    /// Non-blank values of `value` grouped by `group`, groups in label order.
    fn grouped(&self, value: &str, group: &str) -> CliResult<Vec<(String, Vec<f64>)>> {
        let v = self.numbers(value)?;
        let g = self.raw(group)?;
        let mut by: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (x, k) in v.into_iter().zip(g) {
            if let Some(x) = x {
                by.entry(k).or_default().push(x);
            }
        }
        Ok(by.into_iter().collect())
    }
}

fn need<'a>(what: &str, v: &'a Option<String>) -> CliResult<&'a str> {
    v.as_deref().ok_or_else(|| invalid(format!("--{what} is required for this test")))
}

fn need_columns(c: &[String], n: usize) -> CliResult<&[String]> {
    if c.len() == n {
        Ok(c)
    } else {
        Err(invalid(format!("--columns needs exactly {n} names, got {}", c.len())))
    }
}

#[derive(Serialize)]
struct StatsOutput<'a, T: Serialize> {
    test: &'a str,
    file: String,
    result: T,
}

pub(crate) fn stats(config: &RunConfig, test: StatTest, out: &mut Outputs) -> CliResult<()> {
    let s = &config.stats;
    let path = s.file.as_ref().ok_or_else(|| invalid("--file is required"))?;
    let t = Columns::read(path)?;
    let file = path.display().to_string();
    let stat = |e: crate::stats::StatsError| runtime(e);
    let mut put = |name: &str, value: serde_json::Value, line: String| -> CliResult<()> {
        println!("{line}");
        out.write_json(
            "stats.json",
            &StatsOutput {
                test: name,
                file: file.clone(),
                result: value,
            },
        )
    };
    let json = |v: &dyn erased::Ser| v.to_json();
    match test {
        StatTest::Wilcoxon | StatTest::Pearson => {
            let c = need_columns(&s.columns, 2)?;
            let (a, b) = (t.numbers(&c[0])?, t.numbers(&c[1])?);
            let (x, y): (Vec<f64>, Vec<f64>) = a.into_iter().zip(b).filter_map(|(a, b)| Some((a?, b?))).unzip();
            if test == StatTest::Wilcoxon {
                let r = wilcoxon_signed_rank_with(&x, &y, s.p_method).map_err(stat)?;
                let line = format!("Wilcoxon W = {}, p = {:.6} (n = {})", r.statistic, r.p_value, x.len());
                put("wilcoxon", json(&r), line)
            } else {
                let r = pearson(&x, &y);
                let line = format!("Pearson r = {} (n = {})", r.map_or("undefined".into(), |v| format!("{v:.6}")), x.len());
                put("pearson", json(&r), line)
            }
        }
        StatTest::Mwu => {
            let (x, y) = if s.columns.len() == 2 {
                let f = |n: &str| -> CliResult<Vec<f64>> { Ok(t.numbers(n)?.into_iter().flatten().collect()) };
                (f(&s.columns[0])?, f(&s.columns[1])?)
            } else {
                let g = t.grouped(need("value", &s.value)?, need("group", &s.group)?)?;
                if g.len() != 2 {
                    return Err(invalid(format!("Mann-Whitney needs exactly 2 groups, found {}", g.len())));
                }
                let mut it = g.into_iter();
                (it.next().expect("two").1, it.next().expect("two").1)
            };
            let r = mann_whitney_u_with(&x, &y, s.p_method).map_err(stat)?;
            let line = format!("Mann-Whitney U = {}, p = {:.6} (n = {}, {})", r.statistic, r.p_value, x.len(), y.len());
            put("mwu", json(&r), line)
        }
        StatTest::Kruskal | StatTest::Dunn => {
            let g = t.grouped(need("value", &s.value)?, need("group", &s.group)?)?;
            let samples: Vec<&[f64]> = g.iter().map(|(_, v)| v.as_slice()).collect();
            let labels: Vec<&str> = g.iter().map(|(k, _)| k.as_str()).collect();
            if test == StatTest::Kruskal {
                let r = kruskal_wallis(&samples).map_err(stat)?;
                let line = format!(
                    "Kruskal-Wallis H = {:.4}, df = {}, p = {:.6}, eta^2 = {:.4}; groups {:?}",
                    r.statistic,
                    r.df.unwrap_or(0),
                    r.p_value,
                    r.effect_size.unwrap_or(f64::NAN),
                    labels
                );
                put("kruskal", json(&r), line)
            } else {
                let r = dunn_posthoc(&samples, s.adjustment).map_err(stat)?;
                let mut line = String::new();
                for p in &r {
                    line.push_str(&format!(
                        "{} vs {}: z = {:.4}, p = {:.6}, adjusted {:.6}\n",
                        labels[p.i], labels[p.j], p.z, p.p_value, p.p_adjusted
                    ));
                }
                put("dunn", json(&r), line.trim_end().to_string())
            }
        }
        StatTest::Bootstrap => {
            let c = need_columns(&s.columns, 1)?;
            let v: Vec<f64> = t.numbers(&c[0])?.into_iter().flatten().collect();
            let mut rng = rng_for("stats-bootstrap", &[config.simulation.seed]);
            let r = bootstrap_ci(&v, s.resamples, v.len(), s.level, &mut rng).map_err(stat)?;
            let line = format!("mean {:.6}, {}% CI [{:.6}, {:.6}]", r.mean, s.level * 100.0, r.lo, r.hi);
            put("bootstrap", json(&r), line)
        }
        StatTest::Gee => {
            let y_name = need("value", &s.value)?;
            let cluster = need("cluster", &s.cluster)?;
            if s.predictors.is_empty() {
                return Err(invalid("--predictors is required for gee"));
            }
            let y = t.numbers(y_name)?;
            let xs: Vec<Vec<Option<f64>>> = s.predictors.iter().map(|p| t.numbers(p)).collect::<CliResult<_>>()?;
            let cl = t.raw(cluster)?;
            let ids: BTreeMap<&str, usize> = {
                let mut u: Vec<&str> = cl.iter().map(String::as_str).collect();
                u.sort_unstable();
                u.dedup();
                u.into_iter().enumerate().map(|(i, k)| (k, i)).collect()
            };
            let (mut yy, mut xx, mut cc) = (Vec::new(), Vec::new(), Vec::new());
            'rows: for i in 0..y.len() {
                let Some(yv) = y[i] else { continue };
                let mut row = vec![1.0];
                for x in &xs {
                    let Some(v) = x[i] else { continue 'rows };
                    row.push(v);
                }
                yy.push(yv);
                xx.push(row);
                cc.push(ids[cl[i].as_str()]);
            }
            let names: Vec<&str> = std::iter::once("intercept").chain(s.predictors.iter().map(String::as_str)).collect();
            let m = gee_fit(&yy, &xx, &cc, &names, s.correlation).map_err(stat)?;
            let mut line = String::new();
            for (i, n) in m.names.iter().enumerate() {
                line.push_str(&format!(
                    "{n}: {:.4} (se {:.4}, p {:.4}, 95% CI [{:.4}, {:.4}])\n",
                    m.coefficients[i], m.std_errors[i], m.p_values[i], m.ci_lo[i], m.ci_hi[i]
                ));
            }
            put("gee", json(&m), line.trim_end().to_string())
        }
    }
}

mod erased {
    use serde::Serialize;

    /// Object-safe JSON conversion so one closure can serialize any result.
    pub trait Ser {
        fn to_json(&self) -> serde_json::Value;
    }

    impl<T: Serialize> Ser for T {
        fn to_json(&self) -> serde_json::Value {
            serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
        }
    }
}

pub(crate) fn report(config: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let input = config.report_input.clone().unwrap_or_else(|| out.dir.clone());
    let r = render_report(&input, &out.dir).map_err(|e| match e {
        ReportError::Io { .. } => runtime(e),
        _ => invalid(e),
    })?;
    for f in &r.files {
        if let Ok(rel) = f.strip_prefix(&out.dir) {
            out.record(&rel.display().to_string());
        }
        let _ = writeln!(std::io::stdout(), "wrote {}", f.display());
    }
    Ok(())
}
