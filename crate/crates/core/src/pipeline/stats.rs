use super::run::with_pool;
use super::{Method, PipelineError, Prepared, RunConfig, Stage};
use crate::seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Linear-interpolation quantile over sorted data (the inclusive
/// definition: position `q·(n−1)`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    /// Most extreme observations within 1.5·IQR of the quartiles.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

pub fn summarize(values: &[f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let (q1, median, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = |x: &&f64| **x >= lo_fence && **x <= hi_fence;
    let whisker_low = v.iter().find(inside).copied().unwrap_or(v[0]);
    let whisker_high = v.iter().rev().find(inside).copied().unwrap_or(v[n - 1]);
    let outliers = v.iter().copied().filter(|x| *x < lo_fence || *x > hi_fence).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(Stats {
        n,
        median,
        q1,
        q3,
        iqr,
        whisker_low,
        whisker_high,
        outliers,
        mean,
        std,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub budget_index: usize,
    pub n_sample: u64,
    pub n_u: u64,
    pub n_v: u64,
    pub r: usize,
    pub repetition: usize,
    pub seed: u64,
    /// `ok` or the failure kind.
    pub status: String,
    pub converged: Option<bool>,
    pub e_corrected: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub budget: crate::cbt::ShotBudget,
    pub n_ok: usize,
    pub n_failed: usize,
    pub stats: Option<Stats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsOutput {
    pub e_active_qc: f64,
    pub raw: Vec<RawRecord>,
    pub summaries: Vec<StatSummary>,
}

impl StatsOutput {
    pub fn n_failed(&self) -> usize {
        self.summaries.iter().map(|s| s.n_failed).sum()
    }
}

/// Repeats tomography, tailoring and CCSD over every budget with
/// independent seeds; the active-space solve runs once.
pub fn run_statistics(cfg: &RunConfig, path: &Path) -> Result<StatsOutput, PipelineError> {
    if cfg.repetitions < 2 {
        return Err(PipelineError::new(
            Stage::Config,
            "repetitions",
            "statistics need at least two repetitions".into(),
        ));
    }
    if cfg.budgets.is_empty() {
        return Err(PipelineError::new(
            Stage::Config,
            "budget",
            "no shot budgets given".into(),
        ));
    }
    let mut cfg = cfg.clone();
    cfg.methods.retain(|m| m.is_tailored());
    cfg.methods.insert(Method::TccC);
    let prepared = Prepared::new(&cfg, path)?;
    let e_active_qc = prepared.state.as_ref().map(|s| s.1).expect("state prepared");
    let jobs: Vec<(usize, usize)> = (0..cfg.budgets.len())
        .flat_map(|b| (0..cfg.repetitions).map(move |rep| (b, rep)))
        .collect();
    let raw: Vec<RawRecord> = with_pool(cfg.threads, || {
        jobs.par_iter()
            .map(|&(b, rep)| {
                let budget = &cfg.budgets[b];
                let s = seed::derive(cfg.seed, &[b as u64, rep as u64]);
                let outcome = prepared.tail(s, budget);
                let (status, converged, e_corrected) = match &outcome {
                    Ok(t) => ("ok".to_string(), Some(t.converged), Some(t.e_corrected)),
                    Err(e) => {
                        log::debug!("budget {b} repetition {rep}: {e}");
                        (e.kind.clone(), None, None)
                    }
                };
                RawRecord {
                    budget_index: b,
                    n_sample: budget.n_sample,
                    n_u: budget.n_u,
                    n_v: budget.n_v,
                    r: budget.r,
                    repetition: rep,
                    seed: s,
                    status,
                    converged,
                    e_corrected,
                }
            })
            .collect()
    })?;
    let summaries = cfg
        .budgets
        .iter()
        .enumerate()
        .map(|(b, budget)| {
            let values: Vec<f64> = raw
                .iter()
                .filter(|r| r.budget_index == b)
                .filter_map(|r| r.e_corrected)
                .collect();
            StatSummary {
                budget: *budget,
                n_ok: values.len(),
                n_failed: cfg.repetitions - values.len(),
                stats: summarize(&values),
            }
        })
        .collect();
    Ok(StatsOutput {
        e_active_qc,
        raw,
        summaries,
    })
}
