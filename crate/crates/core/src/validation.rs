//! Accuracy metrics and cross-model validation.
//!
//! Three layers of assessment are available for a training configuration:
//! the inner (model-selection) error reported by [`train`], the outer
//! leave-one-out error of [`outer_loocv`] in which every held-out sample is
//! predicted by a model whose construction and selection never saw it, and
//! independent testing on fresh samples.
//!
//! Variances are population variances (`1/N` normalization), matching the
//! `1/N` mean squared errors they are compared with.

use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Benchmark;
use crate::error::{PceError, Result};
use crate::format::format_f64;
use crate::input_model::{ExperimentalDesign, InputSpace};
use crate::rng::derive_seed;
use crate::training::{train, SparsePceModel, TrainConfig};

pub fn population_variance(values: &DVector<f64>) -> Result<f64> {
    if values.is_empty() {
        return Err(PceError::ZeroVariance);
    }
    let n = values.len() as f64;
    let mean = values.sum() / n;
    Ok(values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n)
}

/// Determination coefficient `1 − ε / var(reference)`; may be negative.
pub fn q_squared(epsilon: f64, reference_responses: &DVector<f64>) -> Result<f64> {
    let variance = population_variance(reference_responses)?;
    if variance == 0.0 {
        return Err(PceError::ZeroVariance);
    }
    Ok(1.0 - epsilon / variance)
}

pub fn mean_squared_error(predictions: &DVector<f64>, truth: &DVector<f64>) -> f64 {
    (predictions - truth).norm_squared() / truth.len() as f64
}

/// In-sample coefficient of determination.
///
/// Constant responses reproduced exactly give 1; any other fit of constant
/// responses is undefined.
pub fn r_squared_train(model: &SparsePceModel, ed: &ExperimentalDesign) -> Result<f64> {
    if model.dimension() != ed.dimension() {
        return Err(PceError::DimensionMismatch { expected: model.dimension(), found: ed.dimension() });
    }
    let predictions = model.predict(ed.inputs())?;
    let eps = mean_squared_error(&predictions, ed.responses());
    let variance = population_variance(ed.responses())?;
    match (variance == 0.0, eps == 0.0) {
        (true, true) => Ok(1.0),
        (true, false) => Err(PceError::ZeroVariance),
        (false, _) => Ok(1.0 - eps / variance),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcvFold {
    pub held_out_index: usize,
    /// Absent when training on the remaining samples failed.
    pub prediction: Option<f64>,
    pub truth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcvReport {
    pub per_fold: Vec<OcvFold>,
    pub failed_folds: Vec<usize>,
    /// Mean squared held-out error; present only when every fold succeeded.
    pub epsilon_ocv: Option<f64>,
    pub q2_ocv: Option<f64>,
    /// Population variance of all `N` responses.
    pub variance_reference: f64,
}

/// Prediction of sample `index` by a model trained without it.
pub fn ocv_fold(ed: &ExperimentalDesign, space: &InputSpace, cfg: &TrainConfig, index: usize) -> Result<f64> {
    let model = train(&ed.without(index), space, cfg)?;
    let x = ed.inputs().rows(index, 1).into_owned();
    Ok(model.predict(&x)?[0])
}

/// Outer leave-one-out cross-validation of the full training pipeline.
pub fn outer_loocv(ed: &ExperimentalDesign, space: &InputSpace, cfg: &TrainConfig) -> Result<OcvReport> {
    let n = ed.len();
    if n < 4 {
        return Err(PceError::InvalidArgument(format!("outer cross-validation needs at least 4 samples, got {n}")));
    }
    let variance_reference = population_variance(ed.responses())?;
    let per_fold: Vec<OcvFold> = (0..n)
        .into_par_iter()
        .map(|i| OcvFold {
            held_out_index: i,
            prediction: ocv_fold(ed, space, cfg, i).ok(),
            truth: ed.responses()[i],
        })
        .collect();
    let failed_folds: Vec<usize> = per_fold.iter().filter(|f| f.prediction.is_none()).map(|f| f.held_out_index).collect();
    let (epsilon_ocv, q2_ocv) = if failed_folds.is_empty() {
        let eps = per_fold.iter().map(|f| (f.prediction.unwrap_or(f64::NAN) - f.truth).powi(2)).sum::<f64>() / n as f64;
        let q2 = (variance_reference > 0.0).then(|| 1.0 - eps / variance_reference);
        (Some(eps), q2)
    } else {
        (None, None)
    };
    Ok(OcvReport { per_fold, failed_folds, epsilon_ocv, q2_ocv, variance_reference })
}

/// Repeated train / assess experiment on a benchmark problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStudy {
    pub benchmark: Benchmark,
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub train: TrainConfig,
    pub test_size: usize,
    pub master_seed: u64,
    /// Whether to run the (N-fold more expensive) outer cross-validation.
    pub outer_cv: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationOutcome {
    pub n: usize,
    pub replication: usize,
    pub q2_icv: f64,
    pub q2_ocv: Option<f64>,
    pub q2_test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub n: usize,
    pub q2_icv_mean: f64,
    pub q2_icv_std: f64,
    pub q2_ocv_mean: f64,
    pub q2_ocv_std: f64,
    pub q2_test_mean: f64,
    pub q2_test_std: f64,
    /// Replications aggregated into this row.
    pub n_rep: usize,
    /// Replications excluded after a training or assessment failure.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationTable {
    pub rows: Vec<ReplicationRow>,
}

pub const REPLICATION_CSV_HEADER: &str =
    "N,q2_icv_mean,q2_icv_std,q2_ocv_mean,q2_ocv_std,q2_test_mean,q2_test_std,n_rep,failures";

impl ReplicationTable {
    pub fn row(&self, n: usize) -> Option<&ReplicationRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{REPLICATION_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                format_f64(r.q2_icv_mean),
                format_f64(r.q2_icv_std),
                format_f64(r.q2_ocv_mean),
                format_f64(r.q2_ocv_std),
                format_f64(r.q2_test_mean),
                format_f64(r.q2_test_std),
                r.n_rep,
                r.failures
            )?;
        }
        Ok(())
    }
}

/// Training-design seed and test-set seed for one `(N, replication)` cell.
pub fn replication_seeds(master_seed: u64, n: usize, replication: usize) -> (u64, u64) {
    (
        derive_seed(master_seed, &[n as u64, replication as u64, 0]),
        derive_seed(master_seed, &[n as u64, replication as u64, 1]),
    )
}

/// Runs one cell of a replication study.
pub fn run_replication(study: &ReplicationStudy, n: usize, replication: usize) -> Result<ReplicationOutcome> {
    let (train_seed, test_seed) = replication_seeds(study.master_seed, n, replication);
    let space = study.benchmark.input_space();
    let ed = study.benchmark.sample(n, train_seed)?;
    let cfg = TrainConfig { seed: train_seed, ..study.train };
    let model = train(&ed, &space, &cfg)?;
    let q2_icv = model.diagnostics().q2_icv;

    let test = study.benchmark.sample(study.test_size, test_seed)?;
    let predictions = model.predict(test.inputs())?;
    let q2_test = q_squared(mean_squared_error(&predictions, test.responses()), test.responses())?;

    let q2_ocv = if study.outer_cv {
        let report = outer_loocv(&ed, &space, &cfg)?;
        Some(report.q2_ocv.ok_or_else(|| {
            PceError::TrainingFailed(format!("outer cross-validation folds failed: {:?}", report.failed_folds))
        })?)
    } else {
        None
    };
    Ok(ReplicationOutcome { n, replication, q2_icv, q2_ocv, q2_test })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, std)
}

/// Aggregates per-replication outcomes into one row per sample size.
///
/// Outcomes are reduced in replication order, so the table does not depend
/// on the order in which the cells were computed.
pub fn aggregate(sizes: &[usize], replications: usize, outcomes: &[Result<ReplicationOutcome>]) -> ReplicationTable {
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let rows = sizes
        .iter()
        .map(|&n| {
            let mut ok: Vec<&ReplicationOutcome> =
                outcomes.iter().filter_map(|o| o.as_ref().ok()).filter(|o| o.n == n).collect();
            ok.sort_by_key(|o| o.replication);
            let icv: Vec<f64> = ok.iter().map(|o| o.q2_icv).collect();
            let ocv: Vec<f64> = ok.iter().map(|o| o.q2_ocv.unwrap_or(f64::NAN)).collect();
            let test: Vec<f64> = ok.iter().map(|o| o.q2_test).collect();
            let (q2_icv_mean, q2_icv_std) = mean_std(&icv);
            let (q2_ocv_mean, q2_ocv_std) = mean_std(&ocv);
            let (q2_test_mean, q2_test_std) = mean_std(&test);
            ReplicationRow {
                n,
                q2_icv_mean,
                q2_icv_std,
                q2_ocv_mean,
                q2_ocv_std,
                q2_test_mean,
                q2_test_std,
                n_rep: ok.len(),
                failures: replications - ok.len(),
            }
        })
        .collect();
    ReplicationTable { rows }
}

/// Runs every `(N, replication)` cell of the study in parallel.
pub fn replication_study(study: &ReplicationStudy) -> Result<ReplicationTable> {
    if study.sizes.is_empty() || study.replications == 0 || study.test_size < 2 {
        return Err(PceError::InvalidArgument(
            "replication study needs sizes, at least one replication and two test samples".into(),
        ));
    }
    let cells: Vec<(usize, usize)> = study
        .sizes
        .iter()
        .flat_map(|&n| (0..study.replications).map(move |r| (n, r)))
        .collect();
    let outcomes: Vec<Result<ReplicationOutcome>> =
        cells.par_iter().map(|&(n, r)| run_replication(study, n, r)).collect();
    Ok(aggregate(&study.sizes, study.replications, &outcomes))
}
