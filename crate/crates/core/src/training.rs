//! Degree-adaptive construction of sparse and full PCE surrogates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{enumerate_total_degree, total_degree_cardinality, BasisSpec, MultiIndex, UnivariateTable};
use crate::error::{PceError, Result};
use crate::input_model::{ExperimentalDesign, InputSpace};
use crate::regression::ols_fit;
use crate::selectors::{selection_path, Selector};
use crate::validation::population_variance;

/// Model file format version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorKind {
    Omp,
    Lars,
    /// OLS on the complete total-degree basis.
    Full,
}

impl SelectorKind {
    fn sparse(self) -> Option<Selector> {
        match self {
            SelectorKind::Omp => Some(Selector::Omp),
            SelectorKind::Lars => Some(Selector::Lars),
            SelectorKind::Full => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    Loo,
    CorrectedLoo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub selector: SelectorKind,
    #[serde(default = "default_p_max")]
    pub p_max: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_metric")]
    pub error_metric: ErrorMetric,
}

fn default_p_max() -> u32 {
    10
}

fn default_metric() -> ErrorMetric {
    ErrorMetric::CorrectedLoo
}

impl TrainConfig {
    pub fn new(selector: SelectorKind) -> Self {
        Self { selector, p_max: default_p_max(), seed: 0, error_metric: default_metric() }
    }

    pub fn with_p_max(mut self, p_max: u32) -> Self {
        self.p_max = p_max;
        self
    }

    pub fn with_metric(mut self, metric: ErrorMetric) -> Self {
        self.error_metric = metric;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of the selection at one candidate degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub degree: u32,
    /// Basis size `C(p + d, d)`.
    pub basis_size: usize,
    /// Smallest selection error over the path, absent if no step was admissible.
    pub min_error: Option<f64>,
    /// Number of terms at the minimizing step.
    pub terms: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDiagnostics {
    pub selector: SelectorKind,
    pub error_metric: ErrorMetric,
    pub samples: usize,
    pub p_chosen: u32,
    pub terms: usize,
    pub per_degree: Vec<DegreeRecord>,
    pub eps_loo: f64,
    pub eps_icv: f64,
    /// `1 − ε / var(y)` with ε the selection metric of the winning model.
    pub q2_icv: f64,
    pub r2_train: f64,
    pub nonzero_coefficients: usize,
}

/// A trained expansion: selected basis, coefficients and the input model
/// needed to standardize new samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePceModel {
    input_space: InputSpace,
    basis: BasisSpec,
    coefficients: DVector<f64>,
    diagnostics: TrainingDiagnostics,
    seed: u64,
}

/// Serialized form of a [`SparsePceModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub input_space: InputSpace,
    pub families: Vec<crate::basis::PolynomialFamily>,
    pub indices: Vec<MultiIndex>,
    pub coefficients: Vec<f64>,
    pub diagnostics: TrainingDiagnostics,
    pub seed: u64,
}

impl SparsePceModel {
    /// Assembles a model from parts; indices are stored in canonical order.
    pub fn from_parts(
        input_space: InputSpace,
        indices: Vec<MultiIndex>,
        coefficients: Vec<f64>,
        diagnostics: TrainingDiagnostics,
        seed: u64,
    ) -> Result<Self> {
        if indices.len() != coefficients.len() {
            return Err(PceError::DimensionMismatch { expected: indices.len(), found: coefficients.len() });
        }
        let mut pairs: Vec<(MultiIndex, f64)> = indices.into_iter().zip(coefficients).collect();
        pairs.sort_by(|a, b| a.0.canonical_cmp(&b.0));
        let (indices, coefficients): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let basis = BasisSpec::new(input_space.families(), indices)?;
        Ok(Self { input_space, basis, coefficients: DVector::from_vec(coefficients), diagnostics, seed })
    }

    pub fn input_space(&self) -> &InputSpace {
        &self.input_space
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn indices(&self) -> &[MultiIndex] {
        self.basis.indices()
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn diagnostics(&self) -> &TrainingDiagnostics {
        &self.diagnostics
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dimension(&self) -> usize {
        self.input_space.dimension()
    }

    /// Evaluates the expansion at `M × d` natural-unit inputs.
    pub fn predict(&self, inputs: &DMatrix<f64>) -> Result<DVector<f64>> {
        let standardized = self.input_space.standardize(inputs)?;
        self.predict_standardized(&standardized)
    }

    pub fn predict_standardized(&self, standardized: &DMatrix<f64>) -> Result<DVector<f64>> {
        if self.basis.is_empty() {
            return Ok(DVector::zeros(standardized.nrows()));
        }
        let table = UnivariateTable::new(standardized, self.basis.families(), self.basis.max_degree())?;
        let mut out = DVector::zeros(standardized.nrows());
        let mut column = vec![0.0; standardized.nrows()];
        for (index, beta) in self.basis.indices().iter().zip(self.coefficients.iter()) {
            table.fill_column(index, &mut column);
            for (o, c) in out.iter_mut().zip(&column) {
                *o += beta * c;
            }
        }
        Ok(out)
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            version: MODEL_FORMAT_VERSION,
            input_space: self.input_space.clone(),
            families: self.basis.families().to_vec(),
            indices: self.basis.indices().to_vec(),
            coefficients: self.coefficients.iter().copied().collect(),
            diagnostics: self.diagnostics.clone(),
            seed: self.seed,
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(PceError::InvalidArgument(format!("unsupported model version {}", doc.version)));
        }
        if doc.families != doc.input_space.families() {
            return Err(PceError::InvalidArgument("polynomial families disagree with the input space".into()));
        }
        Self::from_parts(doc.input_space, doc.indices, doc.coefficients, doc.diagnostics, doc.seed)
    }
}

// Best (degree, terms) candidate found so far.
struct Candidate {
    degree: u32,
    indices: Vec<MultiIndex>,
    coefficients: Vec<f64>,
    eps_loo: f64,
    eps_icv: f64,
    selection_error: f64,
}

fn selection_error(metric: ErrorMetric, loo: f64, corrected: f64) -> f64 {
    match metric {
        ErrorMetric::Loo => loo,
        ErrorMetric::CorrectedLoo => corrected,
    }
}

/// Trains a PCE surrogate, searching degrees `1..=p_max`.
///
/// For each degree a selection path (or a full OLS fit) is evaluated and the
/// step with the smallest selection error retained. The search stops early
/// once that minimum has increased at two consecutive degrees; the model with
/// the globally smallest error is returned, ties going to the smaller degree
/// and then the smaller number of terms.
pub fn train(ed: &ExperimentalDesign, space: &InputSpace, cfg: &TrainConfig) -> Result<SparsePceModel> {
    let n = ed.len();
    let d = space.dimension();
    if n < 3 {
        return Err(PceError::InvalidArgument(format!("training needs at least 3 samples, got {n}")));
    }
    if ed.dimension() != d {
        return Err(PceError::DimensionMismatch { expected: d, found: ed.dimension() });
    }
    if cfg.p_max < 1 {
        return Err(PceError::InvalidArgument("p_max must be at least 1".into()));
    }
    let y = ed.responses();
    if !y.iter().all(|v| v.is_finite()) {
        return Err(PceError::InvalidArgument("responses must be finite".into()));
    }
    let variance = population_variance(y)?;
    if variance == 0.0 {
        return constant_model(ed, space, cfg, y[0]);
    }

    let standardized = space.standardize(ed.inputs())?;
    let table = UnivariateTable::new(&standardized, &space.families(), cfg.p_max)?;

    let mut per_degree: Vec<DegreeRecord> = Vec::new();
    let mut best: Option<Candidate> = None;
    let mut indices: Vec<MultiIndex> = Vec::new();
    let mut data: Vec<f64> = Vec::new();

    for p in 1..=cfg.p_max {
        let basis_size = total_degree_cardinality(d, p as usize)
            .ok_or(PceError::BasisTooLarge { dimension: d, degree: p as usize })?;
        if cfg.selector == SelectorKind::Full && basis_size > n - 1 {
            break;
        }
        // Canonical ordering makes the degree-p basis an extension of the
        // degree-(p-1) basis, so only the new columns are evaluated.
        let full = enumerate_total_degree(d, p as usize)?;
        data.resize(n * full.len(), 0.0);
        for (j, index) in full.iter().enumerate().skip(indices.len()) {
            table.fill_column(index, &mut data[j * n..(j + 1) * n]);
        }
        indices = full;
        let psi = DMatrix::from_column_slice(n, indices.len(), &data);

        let mut record = DegreeRecord { degree: p, basis_size, min_error: None, terms: None };
        let mut degree_best: Option<Candidate> = None;
        match cfg.selector.sparse() {
            None => {
                if let Ok(fit) = ols_fit(&psi, y) {
                    let loo = fit.loo_error().unwrap_or(f64::INFINITY);
                    let icv = fit.corrected_loo_error().unwrap_or(f64::INFINITY);
                    let err = selection_error(cfg.error_metric, loo, icv);
                    if err.is_finite() {
                        degree_best = Some(Candidate {
                            degree: p,
                            indices: indices.clone(),
                            coefficients: fit.coefficients.iter().copied().collect(),
                            eps_loo: loo,
                            eps_icv: icv,
                            selection_error: err,
                        });
                    }
                }
            }
            Some(selector) => {
                let max_terms = (n - 1).min(indices.len());
                let path = selection_path(selector, &psi, y, max_terms)?;
                let mut best_step: Option<(usize, f64)> = None;
                for (k, step) in path.steps.iter().enumerate() {
                    let err = selection_error(cfg.error_metric, step.loo, step.corrected_loo);
                    if err.is_finite() && best_step.is_none_or(|(_, e)| err < e) {
                        best_step = Some((k, err));
                    }
                }
                if let Some((k, err)) = best_step {
                    let step = &path.steps[k];
                    degree_best = Some(Candidate {
                        degree: p,
                        indices: path.active_set(k).iter().map(|&j| indices[j].clone()).collect(),
                        coefficients: step.coefficients.iter().copied().collect(),
                        eps_loo: step.loo,
                        eps_icv: step.corrected_loo,
                        selection_error: err,
                    });
                }
            }
        }
        if let Some(c) = &degree_best {
            record.min_error = Some(c.selection_error);
            record.terms = Some(c.indices.len());
        }
        per_degree.push(record);
        if let Some(c) = degree_best {
            if best.as_ref().is_none_or(|b| c.selection_error < b.selection_error) {
                best = Some(c);
            }
        }

        if p >= 3 {
            let e = |k: usize| per_degree[k].min_error.unwrap_or(f64::INFINITY);
            let last = per_degree.len() - 1;
            if e(last) > e(last - 1) && e(last - 1) > e(last - 2) {
                break;
            }
        }
    }

    let best = best.ok_or_else(|| {
        PceError::TrainingFailed(format!("no admissible model for {:?} with {n} samples", cfg.selector))
    })?;
    let diagnostics = TrainingDiagnostics {
        selector: cfg.selector,
        error_metric: cfg.error_metric,
        samples: n,
        p_chosen: best.degree,
        terms: best.indices.len(),
        per_degree,
        eps_loo: best.eps_loo,
        eps_icv: best.eps_icv,
        q2_icv: 1.0 - best.selection_error / variance,
        r2_train: f64::NAN,
        nonzero_coefficients: best.coefficients.iter().filter(|c| **c != 0.0).count(),
    };
    finish(space, best.indices, best.coefficients, diagnostics, ed, cfg.seed)
}

fn finish(
    space: &InputSpace,
    indices: Vec<MultiIndex>,
    coefficients: Vec<f64>,
    diagnostics: TrainingDiagnostics,
    ed: &ExperimentalDesign,
    seed: u64,
) -> Result<SparsePceModel> {
    let mut model = SparsePceModel::from_parts(space.clone(), indices, coefficients, diagnostics, seed)?;
    model.diagnostics.r2_train = crate::validation::r_squared_train(&model, ed)?;
    Ok(model)
}

fn constant_model(ed: &ExperimentalDesign, space: &InputSpace, cfg: &TrainConfig, value: f64) -> Result<SparsePceModel> {
    let diagnostics = TrainingDiagnostics {
        selector: cfg.selector,
        error_metric: cfg.error_metric,
        samples: ed.len(),
        p_chosen: 0,
        terms: 1,
        per_degree: Vec::new(),
        eps_loo: 0.0,
        eps_icv: 0.0,
        q2_icv: 1.0,
        r2_train: f64::NAN,
        nonzero_coefficients: usize::from(value != 0.0),
    };
    finish(space, vec![MultiIndex::zero(space.dimension())], vec![value], diagnostics, ed, cfg.seed)
}
