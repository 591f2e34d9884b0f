//! Greedy basis selection: orthogonal matching pursuit and least angle
//! regression.
//!
//! Both selectors return a nested sequence of active sets. Every step is
//! evaluated the same way: an OLS refit on the active columns and its
//! analytic leave-one-out error. Ties are broken in favour of the lower
//! column position, which is the canonical basis order.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PceError, Result};
use crate::regression::IncrementalQr;

// A path stops once the OLS residual is this small relative to ‖y‖.
const EXACT_FIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Omp,
    Lars,
}

/// One step of a selection path; its active set is the first
/// `coefficients.len()` entries of [`SelectionPath::activation`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathStep {
    pub coefficients: DVector<f64>,
    /// Leave-one-out error, `+∞` when a leverage reaches one.
    pub loo: f64,
    /// Corrected leave-one-out error, `+∞` when undefined.
    pub corrected_loo: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPath {
    pub selector: Selector,
    /// Column positions in activation order.
    pub activation: Vec<usize>,
    pub steps: Vec<PathStep>,
}

impl SelectionPath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn active_set(&self, step: usize) -> &[usize] {
        &self.activation[..=step]
    }
}

fn check_inputs(psi: &DMatrix<f64>, y: &DVector<f64>, max_terms: usize) -> Result<()> {
    let (n, p) = psi.shape();
    if y.len() != n {
        return Err(PceError::DimensionMismatch { expected: n, found: y.len() });
    }
    if max_terms == 0 || max_terms > p || max_terms >= n {
        return Err(PceError::InvalidArgument(format!(
            "path length {max_terms} must lie in 1..=min(N-1, P) = 1..={}",
            p.min(n.saturating_sub(1))
        )));
    }
    Ok(())
}

fn record_step(qr: &IncrementalQr) -> PathStep {
    PathStep {
        coefficients: qr.coefficients(),
        loo: qr.loo_error().unwrap_or(f64::INFINITY),
        corrected_loo: qr.corrected_loo_error().unwrap_or(f64::INFINITY),
        residual_norm: qr.residual().norm(),
    }
}

// Index of the largest score among `eligible`, lowest index on ties.
fn argmax(scores: &[f64], eligible: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &s) in scores.iter().enumerate() {
        if eligible[j] && best.is_none_or(|b| s > scores[b]) {
            best = Some(j);
        }
    }
    best
}

/// Orthogonal matching pursuit path of at most `max_terms` steps.
///
/// Step `j` activates the column most correlated with the current OLS
/// residual, i.e. the largest `|ψᵀr| / ‖ψ‖`. Scoring on unit-norm columns
/// keeps a column with a large empirical norm from outranking the atom that
/// actually explains the residual; for exactly orthonormal columns the order
/// is that of `|ψᵀr|`. Columns whose addition would make the active system
/// singular are dropped and the next-best column is tried.
pub fn omp_path(psi: &DMatrix<f64>, y: &DVector<f64>, max_terms: usize) -> Result<SelectionPath> {
    check_inputs(psi, y, max_terms)?;
    let y_norm = y.norm();
    let norms: Vec<f64> = psi.column_iter().map(|c| c.norm()).collect();
    let mut qr = IncrementalQr::new(y, max_terms);
    let mut eligible: Vec<bool> = norms.iter().map(|&s| s > 0.0 && s.is_finite()).collect();
    let mut path = SelectionPath { selector: Selector::Omp, activation: Vec::new(), steps: Vec::new() };

    while path.len() < max_terms {
        let residual = qr.residual();
        if residual.norm() <= EXACT_FIT_TOLERANCE * y_norm {
            break;
        }
        let scores: Vec<f64> = psi.tr_mul(residual).iter().zip(&norms).map(|(c, n)| c.abs() / n).collect();
        let zero_level = 1e-14 * residual.norm();
        let chosen = loop {
            let Some(j) = argmax(&scores, &eligible) else { break None };
            if scores[j] <= zero_level {
                break None;
            }
            eligible[j] = false;
            if qr.try_push(psi.column(j).as_slice()).is_ok() {
                break Some(j);
            }
        };
        let Some(j) = chosen else { break };
        path.activation.push(j);
        path.steps.push(record_step(&qr));
    }
    Ok(path)
}

/// Least angle regression activation sequence with OLS-refit evaluation.
///
/// Directions are computed on columns scaled to unit Euclidean norm. The
/// equiangular LARS coefficients only drive the activation order; each
/// reported step carries the OLS refit on its active set.
pub fn lars_path(psi: &DMatrix<f64>, y: &DVector<f64>, max_terms: usize) -> Result<SelectionPath> {
    check_inputs(psi, y, max_terms)?;
    let p = psi.ncols();
    let y_norm = y.norm();
    let norms: Vec<f64> = psi.column_iter().map(|c| c.norm()).collect();
    let mut eligible: Vec<bool> = norms.iter().map(|&s| s > 0.0 && s.is_finite()).collect();
    let mut qr = IncrementalQr::new(y, max_terms);
    let mut path = SelectionPath { selector: Selector::Lars, activation: Vec::new(), steps: Vec::new() };

    // Correlations of the LARS residual with the normalized columns.
    let mut corr: Vec<f64> = psi.tr_mul(y).iter().zip(&norms).map(|(c, s)| c / s).collect();

    // First activation: largest absolute correlation.
    let abs: Vec<f64> = corr.iter().map(|c| c.abs()).collect();
    let zero_level = 1e-14 * y_norm;
    loop {
        let Some(j) = argmax(&abs, &eligible) else { return Ok(path) };
        if abs[j] <= zero_level {
            return Ok(path);
        }
        eligible[j] = false;
        if qr.try_push(psi.column(j).as_slice()).is_ok() {
            path.activation.push(j);
            path.steps.push(record_step(&qr));
            break;
        }
    }

    while path.len() < max_terms {
        if qr.residual().norm() <= EXACT_FIT_TOLERANCE * y_norm {
            break;
        }
        let active = &path.activation;
        let signs: Vec<f64> = active.iter().map(|&j| if corr[j] < 0.0 { -1.0 } else { 1.0 }).collect();
        let c_max = active.iter().map(|&j| corr[j].abs()).fold(0.0, f64::max);
        if c_max <= zero_level {
            break;
        }
        // With X = Ψ D⁻¹ (unit-norm columns): v = (X_AᵀX_A)⁻¹ s = D (ΨᵀΨ)⁻¹ D s.
        let ds = DVector::from_iterator(active.len(), active.iter().zip(&signs).map(|(&j, s)| norms[j] * s));
        let g = qr.solve_gram(&ds);
        let v = DVector::from_iterator(active.len(), active.iter().zip(g.iter()).map(|(&j, gi)| norms[j] * gi));
        let s_dot_v: f64 = signs.iter().zip(v.iter()).map(|(s, vi)| s * vi).sum();
        if !(s_dot_v > 0.0) {
            break;
        }
        let a_norm = s_dot_v.powf(-0.5);
        // Equiangular direction u = A X_A v = A Ψ_A D⁻¹ v.
        let w = DVector::from_iterator(active.len(), active.iter().zip(v.iter()).map(|(&j, vi)| a_norm * vi / norms[j]));
        let u = qr.combine(&w);
        let a: Vec<f64> = psi.tr_mul(&u).iter().zip(&norms).map(|(c, s)| c / s).collect();

        let mut steps: Vec<(f64, usize)> = (0..p)
            .filter(|&j| eligible[j])
            .filter_map(|j| {
                let candidates = [(c_max - corr[j]) / (a_norm - a[j]), (c_max + corr[j]) / (a_norm + a[j])];
                let gamma = candidates
                    .into_iter()
                    .filter(|g| g.is_finite() && *g > 1e-12 * (c_max / a_norm))
                    .fold(f64::INFINITY, f64::min);
                gamma.is_finite().then_some((gamma, j))
            })
            .collect();
        steps.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        let mut entered = None;
        for &(gamma, j) in &steps {
            eligible[j] = false;
            if qr.try_push(psi.column(j).as_slice()).is_ok() {
                entered = Some((gamma, j));
                break;
            }
        }
        let Some((gamma, j)) = entered else { break };
        // Moving μ by γu lowers every correlation by γa.
        for (c, aj) in corr.iter_mut().zip(&a) {
            *c -= gamma * aj;
        }
        path.activation.push(j);
        path.steps.push(record_step(&qr));
    }
    Ok(path)
}

pub fn selection_path(selector: Selector, psi: &DMatrix<f64>, y: &DVector<f64>, max_terms: usize) -> Result<SelectionPath> {
    match selector {
        Selector::Omp => omp_path(psi, y, max_terms),
        Selector::Lars => lars_path(psi, y, max_terms),
    }
}
