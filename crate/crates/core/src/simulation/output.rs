use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{MetricsTable, Mode, ReplicaTrace, SimError};
use crate::aggregators::Diagnostics;
use crate::stats::BootstrapCi;

/// SHA-256 of the JSON serialization of a config.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&json))
}

fn io(path: &str) -> impl Fn(std::io::Error) -> SimError + '_ {
    move |source| SimError::Io {
        path: path.to_string(),
        source,
    }
}

fn csv_err(e: csv::Error) -> SimError {
    SimError::Io {
        path: "metrics.csv".into(),
        source: std::io::Error::other(e),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the long-format table `algorithm,treatment,N,metric,round,value,ci_lo,ci_hi`.
///
/// Rounds are 1-based; `win_pct` rows put the member rank (1 = best) in the `round` column.
pub fn write_metrics_csv<W: Write>(table: &MetricsTable, out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "treatment", "N", "metric", "round", "value", "ci_lo", "ci_hi"])
        .map_err(csv_err)?;
    for row in &table.rows {
        let n = row.size.to_string();
        let mut put = |metric: &str, round: String, value: f64, lo: Option<f64>, hi: Option<f64>| {
            w.write_record([
                row.algorithm.as_str(),
                "all",
                n.as_str(),
                metric,
                round.as_str(),
                value.to_string().as_str(),
                opt(lo).as_str(),
                opt(hi).as_str(),
            ])
        };
        let scalar = |c: &BootstrapCi| (c.mean, Some(c.lo), Some(c.hi));
        for (metric, c) in [
            ("accuracy", &row.accuracy),
            ("best_member_accuracy", &row.best_member_accuracy),
            ("terminal_regret", &row.terminal_regret),
            ("mean_regret", &row.mean_regret),
        ] {
            let (v, lo, hi) = scalar(c);
            put(metric, String::new(), v, lo, hi).map_err(csv_err)?;
        }
        put("replicas", String::new(), row.replicas as f64, None, None).map_err(csv_err)?;
        put("best_member_ties", String::new(), row.best_ties as f64, None, None).map_err(csv_err)?;
        for (t, p) in row.regret_curve.iter().enumerate() {
            put("regret", (t + 1).to_string(), p.mean, p.lo, p.hi).map_err(csv_err)?;
        }
        for (t, p) in row.reward_curve.iter().enumerate() {
            put("reward", (t + 1).to_string(), p.mean, p.lo, p.hi).map_err(csv_err)?;
        }
        for (q, v) in row.win_pct.iter().enumerate() {
            put("win_pct", (q + 1).to_string(), *v, None, None).map_err(csv_err)?;
        }
        for (s, v) in &row.structure_shares {
            put(&format!("structure_share_{}", s.as_str()), String::new(), *v, None, None).map_err(csv_err)?;
        }
    }
    w.flush().map_err(io("metrics.csv"))?;
    Ok(())
}

/// Sidecar describing a metrics file; holds no timestamps so reruns are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsMeta {
    pub config_hash: String,
    pub mode: Mode,
    pub rounds: usize,
    /// `round` counts decisions; multiply by `headlines_per_round` to get headlines seen.
    pub round_unit: &'static str,
    pub headlines_per_round: usize,
    pub dataset: Option<String>,
}

pub fn write_metrics_meta<W: Write>(table: &MetricsTable, config_hash: &str, dataset: Option<String>, out: W) -> Result<(), SimError> {
    let meta = MetricsMeta {
        config_hash: config_hash.to_string(),
        mode: table.mode,
        rounds: table.rounds,
        round_unit: "round",
        headlines_per_round: table.mode.headlines_per_round(),
        dataset,
    };
    serde_json::to_writer_pretty(out, &meta).map_err(|e| SimError::Io {
        path: "metrics.meta.json".into(),
        source: std::io::Error::other(e),
    })
}

/// One row per round of a kept replica.
pub fn write_trace_csv<W: Write>(trace: &ReplicaTrace, headline_ids: &[String], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "round",
        "headlines",
        "chosen",
        "reward",
        "best_member_reward",
        "regret",
        "scores",
        "predictions",
        "diagnostics",
    ])
    .map_err(csv_err)?;
    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
    for (t, rec) in trace.result.trace.rounds.iter().enumerate() {
        let hs: Vec<&str> = trace.headlines[t].iter().map(|&h| headline_ids[h].as_str()).collect();
        let diag = match &rec.diagnostics {
            Diagnostics::None => String::new(),
            Diagnostics::Weights(w) => join(w),
            Diagnostics::Structure(s) => s.as_str().to_string(),
        };
        w.write_record([
            (t + 1).to_string(),
            hs.join(";"),
            rec.chosen.to_string(),
            rec.reward.to_string(),
            trace.best_member_rewards[t].to_string(),
            trace.result.regret[t].to_string(),
            join(&rec.scores),
            join(&rec.predictions),
            diag,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io("trace"))?;
    Ok(())
}
