//! Total-degree multi-index sets and orthonormal tensor-product polynomials.
//!
//! Canonical ordering: ascending total degree, and within one total degree
//! descending lexicographic order of the degree vector. The degree-`p` set is
//! therefore always a prefix of the degree-`p + 1` set.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{PceError, Result};

/// Largest basis [`enumerate_total_degree`] will materialize.
pub const MAX_BASIS_SIZE: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolynomialFamily {
    /// Orthonormal w.r.t. the uniform measure on `[-1, 1]`.
    Legendre,
    /// Probabilists' Hermite, orthonormal w.r.t. the standard normal measure.
    Hermite,
}

impl PolynomialFamily {
    pub fn contains(self, x: f64) -> bool {
        match self {
            PolynomialFamily::Legendre => (-1.0..=1.0).contains(&x),
            PolynomialFamily::Hermite => x.is_finite(),
        }
    }
}

/// Per-variable polynomial degrees of one basis function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(degrees: Vec<u32>) -> Self {
        Self(degrees)
    }

    pub fn zero(dimension: usize) -> Self {
        Self(vec![0; dimension])
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Number of variables with a positive degree.
    pub fn interaction_order(&self) -> usize {
        self.0.iter().filter(|&&a| a > 0).count()
    }

    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(degrees: Vec<u32>) -> Self {
        Self(degrees)
    }
}

/// `C(n, k)`, or `None` when it does not fit in `usize`.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    usize::try_from(acc).ok()
}

/// Number of `d`-variate multi-indices of total degree at most `p`.
pub fn total_degree_cardinality(d: usize, p: usize) -> Option<usize> {
    binomial(p.checked_add(d)?, d)
}

/// All multi-indices with total degree `≤ p`, in canonical order.
pub fn enumerate_total_degree(d: usize, p: usize) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(PceError::InvalidArgument("basis dimension must be positive".into()));
    }
    let count = total_degree_cardinality(d, p)
        .filter(|&c| c <= MAX_BASIS_SIZE)
        .ok_or(PceError::BasisTooLarge { dimension: d, degree: p })?;
    let mut out = Vec::with_capacity(count);
    let mut current = vec![0u32; d];
    for total in 0..=p as u32 {
        compositions(total, 0, &mut current, &mut out);
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

// Pushes every composition of `remaining` into current[position..], first
// component largest first (descending lexicographic).
fn compositions(remaining: u32, position: usize, current: &mut [u32], out: &mut Vec<MultiIndex>) {
    if position + 1 == current.len() {
        current[position] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for head in (0..=remaining).rev() {
        current[position] = head;
        compositions(remaining - head, position + 1, current, out);
    }
    current[position] = 0;
}

/// Degree-`k` orthonormal polynomial of `family` at `x`.
pub fn eval_univariate(family: PolynomialFamily, k: u32, x: f64) -> f64 {
    let mut values = vec![0.0; k as usize + 1];
    eval_univariate_all(family, x, &mut values);
    values[k as usize]
}

/// Fills `out[k]` with the degree-`k` orthonormal polynomial for `k < out.len()`.
///
/// Uses the orthonormal three-term recurrence
/// `b_{k+1} φ_{k+1}(x) = x φ_k(x) − b_k φ_{k−1}(x)` with
/// `b_k = k / sqrt(4k² − 1)` (Legendre) or `b_k = sqrt(k)` (Hermite).
pub fn eval_univariate_all(family: PolynomialFamily, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    let b = |k: usize| -> f64 {
        let k = k as f64;
        match family {
            PolynomialFamily::Legendre => k / (4.0 * k * k - 1.0).sqrt(),
            PolynomialFamily::Hermite => k.sqrt(),
        }
    };
    out[1] = x / b(1);
    for k in 1..out.len() - 1 {
        out[k + 1] = (x * out[k] - b(k) * out[k - 1]) / b(k + 1);
    }
}

/// Polynomial families per variable and the ordered set of basis indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    families: Vec<PolynomialFamily>,
    indices: Vec<MultiIndex>,
}

impl BasisSpec {
    pub fn new(families: Vec<PolynomialFamily>, indices: Vec<MultiIndex>) -> Result<Self> {
        let d = families.len();
        if d == 0 {
            return Err(PceError::InvalidArgument("basis needs at least one variable".into()));
        }
        if let Some(bad) = indices.iter().find(|a| a.dimension() != d) {
            return Err(PceError::DimensionMismatch { expected: d, found: bad.dimension() });
        }
        let mut seen = std::collections::HashSet::with_capacity(indices.len());
        if !indices.iter().all(|a| seen.insert(a)) {
            return Err(PceError::InvalidArgument("duplicate multi-index in basis".into()));
        }
        Ok(Self { families, indices })
    }

    /// Full total-degree basis.
    pub fn total_degree(families: Vec<PolynomialFamily>, p: usize) -> Result<Self> {
        let indices = enumerate_total_degree(families.len(), p)?;
        Ok(Self { families, indices })
    }

    pub fn families(&self) -> &[PolynomialFamily] {
        &self.families
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn dimension(&self) -> usize {
        self.families.len()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.indices.iter().flat_map(|a| a.degrees().iter().copied()).max().unwrap_or(0)
    }
}

/// Univariate polynomial values for every sample, variable and degree.
#[derive(Debug, Clone)]
pub struct UnivariateTable {
    rows: usize,
    dimension: usize,
    stride: usize,
    values: Vec<f64>,
}

impl UnivariateTable {
    /// Tabulates degrees `0..=max_degree` at each standardized sample.
    pub fn new(standardized: &DMatrix<f64>, families: &[PolynomialFamily], max_degree: u32) -> Result<Self> {
        let (rows, dimension) = standardized.shape();
        if dimension != families.len() {
            return Err(PceError::DimensionMismatch { expected: families.len(), found: dimension });
        }
        let stride = max_degree as usize + 1;
        let mut values = vec![0.0; rows * dimension * stride];
        for row in 0..rows {
            for (column, &family) in families.iter().enumerate() {
                let x = standardized[(row, column)];
                if !family.contains(x) {
                    return Err(PceError::OutsidePolynomialDomain { row, column, value: x });
                }
                let start = (row * dimension + column) * stride;
                eval_univariate_all(family, x, &mut values[start..start + stride]);
            }
        }
        Ok(Self { rows, dimension, stride, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    fn value(&self, row: usize, column: usize, degree: u32) -> f64 {
        self.values[(row * self.dimension + column) * self.stride + degree as usize]
    }

    /// Writes the basis function `index` evaluated at every sample into `out`.
    pub fn fill_column(&self, index: &MultiIndex, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.rows);
        let active: Vec<(usize, u32)> = index
            .degrees()
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(i, &a)| (i, a))
            .collect();
        for (row, slot) in out.iter_mut().enumerate() {
            *slot = active.iter().map(|&(i, a)| self.value(row, i, a)).product();
        }
    }

    pub fn matrix(&self, indices: &[MultiIndex]) -> DMatrix<f64> {
        let mut data = vec![0.0; self.rows * indices.len()];
        for (j, index) in indices.iter().enumerate() {
            self.fill_column(index, &mut data[j * self.rows..(j + 1) * self.rows]);
        }
        DMatrix::from_vec(self.rows, indices.len(), data)
    }
}

/// Regression matrix `Ψ[n, j] = Ψ_{α_j}(x⁽ⁿ⁾)` for standardized samples.
pub fn design_matrix(standardized: &DMatrix<f64>, spec: &BasisSpec) -> Result<DMatrix<f64>> {
    if spec.is_empty() {
        return Err(PceError::InvalidArgument("basis has no polynomials".into()));
    }
    let table = UnivariateTable::new(standardized, spec.families(), spec.max_degree())?;
    Ok(table.matrix(spec.indices()))
}
