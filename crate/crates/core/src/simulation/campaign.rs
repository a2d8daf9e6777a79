use std::collections::BTreeMap;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use super::replica::{run_replica, ReplicaInputs, ReplicaResult};
use super::rounds::build_rounds;
use super::{Mode, SimError, SimulationConfig};
use crate::aggregators::{AlgorithmSpec, Diagnostics, TreeStructure};
use crate::data::Dataset;
use crate::seed::{derive_seed, rng_for};
use crate::stats::{bootstrap_ci, BootstrapCi};

/// One point of a per-round curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub mean: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

/// Aggregated results of one algorithm at one group size, pooled over treatments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub algorithm: String,
    pub size: usize,
    pub replicas: usize,
    pub accuracy: BootstrapCi,
    pub best_member_accuracy: BootstrapCi,
    pub terminal_regret: BootstrapCi,
    /// Mean over rounds of the instantaneous regret.
    pub mean_regret: BootstrapCi,
    pub regret_curve: Vec<CurvePoint>,
    pub reward_curve: Vec<CurvePoint>,
    /// Share of replicas beating the member at each rank, best member first.
    pub win_pct: Vec<f64>,
    /// Replicas whose best member was tied with another member.
    pub best_ties: usize,
    /// Share of replicas ending in each tree structure (tree aggregators only).
    pub structure_shares: Vec<(TreeStructure, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
    pub mode: Mode,
    pub rounds: usize,
}

impl MetricsTable {
    pub fn row(&self, algorithm: &str, size: usize) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.size == size)
    }
}

/// A replica kept for export.
#[derive(Debug, Clone)]
pub struct ReplicaTrace {
    pub algorithm: String,
    pub treatment: u8,
    pub size: usize,
    pub replica: usize,
    pub seed: u64,
    pub headlines: Vec<Vec<usize>>,
    pub best_member: usize,
    pub best_member_rewards: Vec<f64>,
    pub result: ReplicaResult,
}

#[derive(Debug, Clone)]
pub struct CampaignOutput {
    pub table: MetricsTable,
    pub traces: Vec<ReplicaTrace>,
}

fn group_seed(master: u64, treatment: u8, size: usize, replica: usize) -> u64 {
    derive_seed("group", &[master, u64::from(treatment), size as u64, replica as u64])
}

fn algorithm_seed(master: u64, label: &str, treatment: u8, size: usize, replica: usize) -> u64 {
    derive_seed(
        &format!("algorithm:{label}"),
        &[master, u64::from(treatment), size as u64, replica as u64],
    )
}

fn treatments_for(config: &SimulationConfig, dataset: &Dataset) -> Result<Vec<u8>, SimError> {
    let ts = config.treatments.clone().unwrap_or_else(|| dataset.answered_treatments());
    if ts.is_empty() {
        return Err(SimError::Config("dataset has no participants".into()));
    }
    let largest = config.sizes.iter().copied().max().unwrap_or(0);
    for &t in &ts {
        let available = dataset.participants_in(t).len();
        if largest > available {
            return Err(SimError::Config(format!(
                "group size {largest} exceeds the {available} participants of treatment {t}"
            )));
        }
    }
    Ok(ts)
}

fn prepare(
    config: &SimulationConfig,
    dataset: &Dataset,
    treatment: u8,
    size: usize,
    replica: usize,
) -> Result<ReplicaInputs, SimError> {
    let mut rng = rng_for("group", &[config.seed, u64::from(treatment), size as u64, replica as u64]);
    let pop = dataset.participants_in(treatment);
    let group: Vec<usize> = sample(&mut rng, pop.len(), size).into_iter().map(|i| pop[i]).collect();
    let plan = build_rounds(dataset, treatment, config.mode, &mut rng)?;
    ReplicaInputs::new(dataset, &group, &plan, config.horizon(), config.member_ranking)
}

fn play(
    config: &SimulationConfig,
    spec: &AlgorithmSpec,
    inputs: &ReplicaInputs,
    treatment: u8,
    size: usize,
    replica: usize,
) -> Result<ReplicaResult, SimError> {
    let label = spec.label();
    let mut alg = spec.build(size, config.mode.arms(), config.horizon())?;
    let mut rng = rng_for(
        &format!("algorithm:{label}"),
        &[config.seed, u64::from(treatment), size as u64, replica as u64],
    );
    Ok(run_replica(inputs, alg.as_mut(), &mut rng))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, SimError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Config(format!("cannot start {workers} workers: {e}")))
}

struct Cell {
    treatment: u8,
    replica: usize,
    best_tied: bool,
    best_member: usize,
    best_rewards: Vec<f64>,
    headlines: Vec<Vec<usize>>,
    results: Vec<ReplicaResult>,
}

/// Runs every (treatment, size, replica, algorithm) cell and aggregates the metrics.
///
/// Groups and round orders are seeded per (treatment, size, replica) and shared
/// by all algorithms; each algorithm also gets its own stream. Results are
/// collected in a fixed order, so the worker count never changes the output.
pub fn run_campaign(config: &SimulationConfig, dataset: &Dataset) -> Result<CampaignOutput, SimError> {
    config.validate()?;
    let treatments = treatments_for(config, dataset)?;
    let pool = pool(config.workers)?;
    let labels: Vec<String> = config.algorithms.iter().map(AlgorithmSpec::label).collect();
    for spec in &config.algorithms {
        // surface hyperparameter errors before any work starts
        for &size in &config.sizes {
            spec.build(size, config.mode.arms(), config.horizon())
                .map_err(|e| SimError::Config(e.to_string()))?;
        }
    }

    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for &size in &config.sizes {
        let jobs: Vec<(u8, usize)> = treatments
            .iter()
            .flat_map(|&t| (0..config.replicas).map(move |r| (t, r)))
            .collect();
        let cells: Vec<Cell> = pool.install(|| {
            jobs.par_iter()
                .map(|&(t, r)| {
                    let wrap = |e: SimError| SimError::Replica {
                        treatment: t,
                        size,
                        replica: r,
                        seed: group_seed(config.seed, t, size, r),
                        source: Box::new(e),
                    };
                    let inputs = prepare(config, dataset, t, size, r).map_err(wrap)?;
                    let mut results = Vec::with_capacity(config.algorithms.len());
                    for spec in &config.algorithms {
                        let mut res = play(config, spec, &inputs, t, size, r).map_err(wrap)?;
                        if !config.keep_traces {
                            res.trace.rounds = Vec::new();
                        }
                        results.push(res);
                    }
                    Ok(Cell {
                        treatment: t,
                        replica: r,
                        best_tied: inputs.best_tied,
                        best_member: inputs.best,
                        best_rewards: inputs.member_rewards[inputs.best].clone(),
                        headlines: if config.keep_traces { inputs.headlines.clone() } else { Vec::new() },
                        results,
                    })
                })
                .collect::<Result<Vec<Cell>, SimError>>()
        })?;

        for (a, label) in labels.iter().enumerate() {
            let results: Vec<&ReplicaResult> = cells.iter().map(|c| &c.results[a]).collect();
            rows.push(summarize(config, label, size, &results, &cells));
        }
        if config.keep_traces {
            for cell in cells {
                for (a, result) in cell.results.into_iter().enumerate() {
                    traces.push(ReplicaTrace {
                        algorithm: labels[a].clone(),
                        treatment: cell.treatment,
                        size,
                        replica: cell.replica,
                        seed: algorithm_seed(config.seed, &labels[a], cell.treatment, size, cell.replica),
                        headlines: cell.headlines.clone(),
                        best_member: cell.best_member,
                        best_member_rewards: cell.best_rewards.clone(),
                        result,
                    });
                }
            }
        }
    }
    Ok(CampaignOutput {
        table: MetricsTable {
            rows,
            mode: config.mode,
            rounds: config.horizon(),
        },
        traces,
    })
}

fn ci(config: &SimulationConfig, values: &[f64], tag: &str, size: usize, point: usize) -> BootstrapCi {
    let mut rng = rng_for(tag, &[config.seed, size as u64, point as u64]);
    let m = config.ci.size.unwrap_or_else(|| values.len().min(1000));
    bootstrap_ci(values, config.ci.resamples, m, config.ci.level, &mut rng).expect("validated inputs")
}

fn curve(config: &SimulationConfig, per_replica: &[&[f64]], tag: &str, size: usize) -> Vec<CurvePoint> {
    let rounds = per_replica.first().map_or(0, |r| r.len());
    (0..rounds)
        .map(|t| {
            let column: Vec<f64> = per_replica.iter().map(|r| r[t]).collect();
            if config.ci.curves {
                let c = ci(config, &column, tag, size, t);
                CurvePoint {
                    mean: c.mean,
                    lo: Some(c.lo),
                    hi: Some(c.hi),
                }
            } else {
                CurvePoint {
                    mean: column.iter().sum::<f64>() / column.len() as f64,
                    lo: None,
                    hi: None,
                }
            }
        })
        .collect()
}

fn summarize(
    config: &SimulationConfig,
    label: &str,
    size: usize,
    results: &[&ReplicaResult],
    cells: &[Cell],
) -> MetricsRow {
    let tag = |metric: &str| format!("ci:{label}:{metric}");
    let pick = |f: fn(&ReplicaResult) -> f64| -> Vec<f64> { results.iter().map(|r| f(r)).collect() };
    let accuracy = ci(config, &pick(|r| r.accuracy), &tag("accuracy"), size, 0);
    let best = ci(config, &pick(|r| r.best_accuracy), "ci:best_member", size, 0);
    let terminal = ci(config, &pick(|r| r.terminal_regret), &tag("terminal_regret"), size, 0);
    let mean_regret = ci(
        config,
        &pick(|r| r.regret.iter().sum::<f64>() / r.regret.len() as f64),
        &tag("mean_regret"),
        size,
        0,
    );
    let regrets: Vec<&[f64]> = results.iter().map(|r| r.regret.as_slice()).collect();
    let rewards: Vec<&[f64]> = results.iter().map(|r| r.rewards.as_slice()).collect();
    let n = results.len() as f64;
    let win_pct = (0..size)
        .map(|q| results.iter().filter(|r| r.wins[q]).count() as f64 / n)
        .collect();
    let mut shares: BTreeMap<TreeStructure, usize> = BTreeMap::new();
    for r in results {
        if let Diagnostics::Structure(s) = r.final_diagnostics {
            *shares.entry(s).or_default() += 1;
        }
    }
    let structure_shares = if shares.is_empty() {
        Vec::new()
    } else {
        TreeStructure::ALL
            .iter()
            .map(|s| (*s, shares.get(s).copied().unwrap_or(0) as f64 / n))
            .collect()
    };
    MetricsRow {
        algorithm: label.to_string(),
        size,
        replicas: results.len(),
        accuracy,
        best_member_accuracy: best,
        terminal_regret: terminal,
        mean_regret,
        regret_curve: curve(config, &regrets, &tag("regret"), size),
        reward_curve: curve(config, &rewards, &tag("reward"), size),
        win_pct,
        best_ties: cells.iter().filter(|c| c.best_tied).count(),
        structure_shares,
    }
}

/// Mean truth prediction each headline receives from an aggregator in label
/// mode, averaged over `replicas` random groups of `size` per treatment.
///
/// Entries are `None` for headlines of treatments without enough participants.
pub fn collect_predictions(
    dataset: &Dataset,
    spec: &AlgorithmSpec,
    size: usize,
    replicas: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<Option<f64>>, SimError> {
    let config = SimulationConfig {
        sizes: vec![size],
        replicas,
        mode: Mode::Label,
        seed,
        algorithms: vec![spec.clone()],
        workers,
        keep_traces: true,
        ..SimulationConfig::default()
    };
    config.validate()?;
    let treatments: Vec<u8> = dataset
        .answered_treatments()
        .into_iter()
        .filter(|&t| dataset.participants_in(t).len() >= size)
        .collect();
    let jobs: Vec<(u8, usize)> = treatments
        .iter()
        .flat_map(|&t| (0..replicas).map(move |r| (t, r)))
        .collect();
    let pool = pool(workers)?;
    let runs: Vec<(Vec<Vec<usize>>, ReplicaResult)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(t, r)| {
                let inputs = prepare(&config, dataset, t, size, r)?;
                let res = play(&config, spec, &inputs, t, size, r)?;
                Ok((inputs.headlines, res))
            })
            .collect::<Result<_, SimError>>()
    })?;
    let mut sums = vec![0.0; dataset.headlines().len()];
    let mut counts = vec![0usize; dataset.headlines().len()];
    for (headlines, res) in &runs {
        for (hs, round) in headlines.iter().zip(&res.trace.rounds) {
            sums[hs[0]] += round.predictions[0];
            counts[hs[0]] += 1;
        }
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| (c > 0).then(|| s / c as f64))
        .collect())
}
