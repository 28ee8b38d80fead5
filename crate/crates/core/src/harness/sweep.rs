use std::fs;
use std::path::Path;

use rand::Rng as _;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Method};
use super::svg::render_svg;
use super::trial::{run_trial, TrialRecord, TrialSpec};
use crate::dag::BivariateGraph;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng};

const GRAPH_TAG: u64 = 0x0067_7261_7068;

/// Aggregate over the repeats of one (method, environment count) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub num_envs: usize,
    pub mse_mean: f64,
    pub mse_std: f64,
    pub dag_accuracy: f64,
    /// Trials whose prediction failed; they are excluded from the MSE columns.
    pub failures: usize,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

/// True graph for repeat `r`, shared by every environment count.
fn true_graph(master_seed: u64, repeat: usize) -> BivariateGraph {
    let mut rng = stream_rng(derive_seed(master_seed, &[GRAPH_TAG, repeat as u64]), 0);
    BivariateGraph::ALL[rng.random_range(0..BivariateGraph::ALL.len())]
}

/// Runs every trial of the sweep in parallel without touching the filesystem.
pub fn execute_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let spec = TrialSpec {
        prior: config.prior,
        positions: config.positions,
        significance: config.significance,
        smoothing: config.smoothing,
    };
    let mut jobs = Vec::new();
    for &envs in &config.env_counts {
        for r in 0..config.repeats {
            for &m in &config.methods {
                jobs.push((envs, r, m));
            }
        }
    }
    let trials: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(envs, r, m)| {
            let seed = derive_seed(config.master_seed, &[envs as u64, r as u64]);
            let mut rec = run_trial(&spec, m, true_graph(config.master_seed, r), envs, seed);
            rec.repeat_index = r;
            rec
        })
        .collect();
    let summary = summarize(&trials);
    Ok(SweepOutcome { trials, summary })
}

/// Groups trials by method then environment count, in first-seen order.
pub fn summarize(trials: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Method, usize)> = Vec::new();
    for t in trials {
        if !keys.contains(&(t.method, t.num_envs)) {
            keys.push((t.method, t.num_envs));
        }
    }
    keys.sort_by_key(|&(m, e)| (Method::ALL.iter().position(|&x| x == m), e));
    keys.into_iter()
        .map(|(method, num_envs)| {
            let group: Vec<&TrialRecord> = trials
                .iter()
                .filter(|t| t.method == method && t.num_envs == num_envs)
                .collect();
            let mses: Vec<f64> = group.iter().filter(|t| !t.failed()).map(|t| t.mse).collect();
            let (mse_mean, mse_std) = mean_std(&mses);
            let correct = group.iter().filter(|t| t.graph_correct).count();
            SummaryRow {
                method,
                num_envs,
                mse_mean,
                mse_std,
                dag_accuracy: correct as f64 / group.len() as f64,
                failures: group.len() - mses.len(),
            }
        })
        .collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the sweep and writes `trials.csv`, `summary.csv` and `sweep.svg`
/// into the configured output directory.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    let outcome = execute_sweep(config)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_trials(&dir.join("trials.csv"), &outcome.trials)?;
    write_summary(&dir.join("summary.csv"), &outcome.summary)?;
    let svg_path = dir.join("sweep.svg");
    fs::write(&svg_path, render_svg(&outcome.summary)).map_err(|e| Error::io(&svg_path, e))?;
    Ok(outcome)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn write_trials(path: &Path, trials: &[TrialRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "method",
        "n_envs",
        "repeat",
        "true_graph",
        "chosen_graph",
        "intervened_var",
        "intervened_pos",
        "intervened_value",
        "mse",
        "graph_correct",
        "error",
    ])
    .map_err(|e| csv_err(path, e))?;
    for t in trials {
        w.write_record([
            t.method.as_str().to_string(),
            t.num_envs.to_string(),
            t.repeat_index.to_string(),
            t.true_graph.as_str().to_string(),
            t.chosen_graph.map(|g| g.as_str()).unwrap_or("").to_string(),
            t.intervened_axis.var.to_string(),
            t.intervened_axis.pos.to_string(),
            t.intervened_value.to_string(),
            t.mse.to_string(),
            t.graph_correct.to_string(),
            t.error.clone().unwrap_or_default(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["method", "n_envs", "mse_mean", "mse_std", "dag_accuracy"])
        .map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.method.as_str().to_string(),
            r.num_envs.to_string(),
            r.mse_mean.to_string(),
            r.mse_std.to_string(),
            r.dag_accuracy.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
