//! Moments and Sobol indices read off orthonormal expansion coefficients.
//!
//! With an orthonormal basis the mean is the constant coefficient and the
//! variance is the sum of the remaining squared coefficients; each Sobol
//! index is a ratio of partial sums of squares. The indices describe the
//! surrogate, not the underlying model.

use std::io::Write;

use nalgebra::DMatrix;

use crate::basis::MultiIndex;
use crate::error::{PceError, Result};
use crate::format::format_f64;
use crate::training::SparsePceModel;

/// Label written at the top of every sensitivity report.
pub const SOBOL_LABEL: &str = "surrogate Sobol indices";

#[derive(Debug, Clone, PartialEq)]
pub struct SobolIndices {
    pub first_order: Vec<f64>,
    pub total: Vec<f64>,
    /// Symmetric; entry (i, j) collects terms in which exactly variables
    /// `i` and `j` have positive degree.
    pub second_order: DMatrix<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl SobolIndices {
    pub fn dimension(&self) -> usize {
        self.total.len()
    }

    pub fn total_sum(&self) -> f64 {
        self.total.iter().sum()
    }

    /// Writes the per-variable block and the pairwise block as CSV.
    pub fn write_csv<W: Write>(&self, names: &[String], mut out: W) -> std::io::Result<()> {
        writeln!(out, "# {SOBOL_LABEL}")?;
        writeln!(out, "variable,first_order,total")?;
        for (i, name) in names.iter().enumerate() {
            writeln!(out, "{name},{},{}", format_f64(self.first_order[i]), format_f64(self.total[i]))?;
        }
        writeln!(out, "sum,,{}", format_f64(self.total_sum()))?;
        writeln!(out)?;
        writeln!(out, "i,j,second_order")?;
        let d = self.dimension();
        for i in 0..d {
            for j in i + 1..d {
                writeln!(out, "{},{},{}", names[i], names[j], format_f64(self.second_order[(i, j)]))?;
            }
        }
        Ok(())
    }
}

/// Mean and variance of an expansion given by `(index, coefficient)` pairs.
pub fn moments_of(indices: &[MultiIndex], coefficients: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut variance = 0.0;
    for (a, c) in indices.iter().zip(coefficients) {
        if a.is_zero() {
            mean += c;
        } else {
            variance += c * c;
        }
    }
    (mean, variance)
}

pub fn pce_moments(model: &SparsePceModel) -> (f64, f64) {
    moments_of(model.indices(), model.coefficients().as_slice())
}

pub fn sobol_of(indices: &[MultiIndex], coefficients: &[f64]) -> Result<SobolIndices> {
    let d = indices.first().map_or(0, MultiIndex::dimension);
    let (mean, variance) = moments_of(indices, coefficients);
    if !(variance > 0.0) {
        return Err(PceError::ZeroVariance);
    }
    let mut first_order = vec![0.0; d];
    let mut total = vec![0.0; d];
    let mut second_order = DMatrix::zeros(d, d);
    for (a, c) in indices.iter().zip(coefficients) {
        let share = c * c / variance;
        let active: Vec<usize> = a.degrees().iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, _)| i).collect();
        for &i in &active {
            total[i] += share;
        }
        match active.as_slice() {
            [i] => first_order[*i] += share,
            [i, j] => {
                second_order[(*i, *j)] += share;
                second_order[(*j, *i)] += share;
            }
            _ => {}
        }
    }
    Ok(SobolIndices { first_order, total, second_order, mean, variance })
}

pub fn sobol_indices(model: &SparsePceModel) -> Result<SobolIndices> {
    sobol_of(model.indices(), model.coefficients().as_slice())
}
