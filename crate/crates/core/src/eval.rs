//! Scoring predicted counts against ground truth.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("length mismatch: {0} predictions vs {1} truths")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
}

fn check(pred: &[u32], truth: &[u32]) -> Result<(), EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// Fraction of ticks where the prediction equals the truth.
pub fn accuracy(pred: &[u32], truth: &[u32]) -> Result<f64, EvalError> {
    check(pred, truth)?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Mean `|pred - truth|` over incorrect ticks only; `None` when every
/// tick is correct.
pub fn mean_error_distance(pred: &[u32], truth: &[u32]) -> Result<Option<f64>, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::LengthMismatch(pred.len(), truth.len()));
    }
    let (sum, n) = pred
        .iter()
        .zip(truth)
        .filter(|(p, t)| p != t)
        .fold((0u64, 0u64), |(s, n), (&p, &t)| {
            (s + p.abs_diff(t) as u64, n + 1)
        });
    Ok((n > 0).then(|| sum as f64 / n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountStats {
    pub ticks: usize,
    pub accuracy: f64,
    pub mean_distance: Option<f64>,
}

/// Overall and per-true-count scores for one prediction sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_ticks: usize,
    pub accuracy: f64,
    pub mean_distance: Option<f64>,
    /// Keyed by the true count.
    pub per_count: BTreeMap<u32, CountStats>,
}

impl EvalReport {
    pub fn new(pred: &[u32], truth: &[u32]) -> Result<Self, EvalError> {
        let accuracy = accuracy(pred, truth)?;
        let mean_distance = mean_error_distance(pred, truth)?;
        let mut buckets: BTreeMap<u32, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
        for (&p, &t) in pred.iter().zip(truth) {
            let b = buckets.entry(t).or_default();
            b.0.push(p);
            b.1.push(t);
        }
        let per_count = buckets
            .into_iter()
            .map(|(k, (p, t))| {
                let stats = CountStats {
                    ticks: p.len(),
                    accuracy: self::accuracy(&p, &t).expect("non-empty bucket"),
                    mean_distance: mean_error_distance(&p, &t).expect("equal lengths"),
                };
                (k, stats)
            })
            .collect();
        Ok(Self {
            n_ticks: pred.len(),
            accuracy,
            mean_distance,
            per_count,
        })
    }

    /// Tick-weighted mean of the per-count accuracies.
    pub fn weighted_accuracy(&self) -> f64 {
        self.per_count
            .values()
            .map(|s| s.accuracy * s.ticks as f64)
            .sum::<f64>()
            / self.n_ticks as f64
    }
}

/// Change in accuracy from adding the HMM stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Improvement {
    /// `(acc_hmm - acc_csp) / acc_csp`.
    Relative(f64),
    /// `acc_hmm - acc_csp`, used when `acc_csp` is zero.
    Absolute(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub csp: EvalReport,
    pub csp_hmm: EvalReport,
    pub improvement: Improvement,
}

pub fn compare_pipelines(
    csp_only: &[u32],
    csp_hmm: &[u32],
    truth: &[u32],
) -> Result<Comparison, EvalError> {
    if csp_only.len() != csp_hmm.len() {
        return Err(EvalError::LengthMismatch(csp_only.len(), csp_hmm.len()));
    }
    let csp = EvalReport::new(csp_only, truth)?;
    let hmm = EvalReport::new(csp_hmm, truth)?;
    let improvement = relative_improvement(csp.accuracy, hmm.accuracy);
    Ok(Comparison {
        csp,
        csp_hmm: hmm,
        improvement,
    })
}

pub fn relative_improvement(acc_csp: f64, acc_hmm: f64) -> Improvement {
    if acc_csp > 0.0 {
        Improvement::Relative((acc_hmm - acc_csp) / acc_csp)
    } else {
        Improvement::Absolute(acc_hmm - acc_csp)
    }
}

/// Mean, min and max of a metric across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Aggregate {
    /// `None` when no value is defined.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut n = 0;
        let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            n += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        (n > 0).then(|| Self {
            mean: sum / n as f64,
            min,
            max,
            n,
        })
    }
}

/// One row of the CSV report.
///
/// Columns: `omega, agents, run, pipeline, true_count, ticks, accuracy,
/// mean_distance, improvement`. `run` is a run index or `all` for rows
/// aggregated over runs; `true_count` is a count or `all`;
/// `mean_distance` is empty when undefined; `improvement` is filled only on
/// the `csp+hmm` overall rows (prefixed `abs:` when absolute).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub omega: u32,
    pub agents: u32,
    pub run: String,
    pub pipeline: String,
    pub true_count: String,
    pub ticks: usize,
    pub accuracy: f64,
    pub mean_distance: Option<f64>,
    pub improvement: Option<String>,
}

impl ReportRow {
    /// The overall row followed by one row per true count.
    pub fn from_report(
        omega: u32,
        agents: u32,
        run: &str,
        pipeline: &str,
        report: &EvalReport,
        improvement: Option<Improvement>,
    ) -> Vec<ReportRow> {
        let mut rows = vec![ReportRow {
            omega,
            agents,
            run: run.into(),
            pipeline: pipeline.into(),
            true_count: "all".into(),
            ticks: report.n_ticks,
            accuracy: report.accuracy,
            mean_distance: report.mean_distance,
            improvement: improvement.map(|i| match i {
                Improvement::Relative(r) => format!("{r}"),
                Improvement::Absolute(a) => format!("abs:{a}"),
            }),
        }];
        for (&k, s) in &report.per_count {
            rows.push(ReportRow {
                omega,
                agents,
                run: run.into(),
                pipeline: pipeline.into(),
                true_count: k.to_string(),
                ticks: s.ticks,
                accuracy: s.accuracy,
                mean_distance: s.mean_distance,
                improvement: None,
            });
        }
        rows
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[ReportRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
