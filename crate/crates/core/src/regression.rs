//! Ordinary least squares with analytic leave-one-out errors.
//!
//! Fits never form `ΨᵀΨ`: coefficients come from a QR factorization of `Ψ`,
//! leverages are squared row norms of the thin `Q`, and
//! `tr((ΨᵀΨ)⁻¹) = ‖R⁻¹‖²_F`.

use nalgebra::{DMatrix, DVector};

use crate::error::{PceError, Result};

/// Fits whose Gram-matrix condition estimate exceeds this are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Leverages at or above `1 - LEVERAGE_TOLERANCE` make the LOO error undefined.
pub const LEVERAGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub hat_diagonal: DVector<f64>,
    pub gram_inverse_trace: f64,
    pub residuals: DVector<f64>,
    /// 1-norm condition estimate of `ΨᵀΨ`, i.e. `(‖R‖₁‖R⁻¹‖₁)²`.
    pub condition_estimate: f64,
}

impl OlsFit {
    pub fn samples(&self) -> usize {
        self.residuals.len()
    }

    pub fn terms(&self) -> usize {
        self.coefficients.len()
    }

    pub fn loo_error(&self) -> Result<f64> {
        loo_from_parts(&self.residuals, &self.hat_diagonal)
    }

    pub fn corrected_loo_error(&self) -> Result<f64> {
        corrected_icv_error(self.loo_error()?, self.terms(), self.samples(), self.gram_inverse_trace)
    }
}

fn loo_from_parts(residuals: &DVector<f64>, hat: &DVector<f64>) -> Result<f64> {
    let mut acc = 0.0;
    for (index, (r, h)) in residuals.iter().zip(hat.iter()).enumerate() {
        if *h >= 1.0 - LEVERAGE_TOLERANCE {
            return Err(PceError::DegenerateLeverage { index, leverage: *h });
        }
        acc += (r / (1.0 - h)).powi(2);
    }
    Ok(acc / residuals.len() as f64)
}

/// Multiplier `(1 − P/N)⁻¹ (1 + tr((ΨᵀΨ)⁻¹))` applied to the LOO error.
pub fn correction_factor(terms: usize, samples: usize, gram_inverse_trace: f64) -> Result<f64> {
    if terms >= samples {
        return Err(PceError::CorrectionUndefined { terms, samples });
    }
    Ok((1.0 + gram_inverse_trace) / (1.0 - terms as f64 / samples as f64))
}

/// Corrected inner cross-validation error.
pub fn corrected_icv_error(loo: f64, terms: usize, samples: usize, gram_inverse_trace: f64) -> Result<f64> {
    Ok(loo * correction_factor(terms, samples, gram_inverse_trace)?)
}

fn one_norm_upper(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Least-squares fit of `y` on the columns of `psi`.
pub fn ols_fit(psi: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, p) = psi.shape();
    if y.len() != n {
        return Err(PceError::DimensionMismatch { expected: n, found: y.len() });
    }
    if p == 0 || n < p {
        return Err(PceError::Underdetermined { rows: n, columns: p });
    }
    let qr = psi.clone().qr();
    let q = qr.q();
    let r = qr.r();
    if r.diagonal().iter().any(|d| *d == 0.0 || !d.is_finite()) {
        return Err(PceError::Singular { condition: f64::INFINITY });
    }
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(PceError::Singular { condition: f64::INFINITY })?;
    let condition_estimate = (one_norm_upper(&r) * one_norm_upper(&r_inv)).powi(2);
    if !(condition_estimate <= MAX_GRAM_CONDITION) {
        return Err(PceError::Singular { condition: condition_estimate });
    }
    let qty = q.transpose() * y;
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or(PceError::Singular { condition: condition_estimate })?;
    let residuals = y - psi * &coefficients;
    let hat_diagonal = DVector::from_iterator(n, q.row_iter().map(|row| row.norm_squared()));
    Ok(OlsFit {
        coefficients,
        hat_diagonal,
        gram_inverse_trace: r_inv.norm_squared(),
        residuals,
        condition_estimate,
    })
}

/// Exact leave-one-out mean squared error `(1/N) Σ ((yᵢ − ŷᵢ)/(1 − hᵢ))²`.
pub fn loo_error(fit: &OlsFit) -> Result<f64> {
    fit.loo_error()
}

/// QR factorization of a growing set of columns, updated one column at a time.
///
/// Columns are orthogonalized by classical Gram–Schmidt with one
/// reorthogonalization pass. Alongside `Q` and `R` it tracks `R⁻¹`, `Qᵀy`,
/// the residual and the leverages, so that each step of a greedy path costs
/// `O(N·P)` instead of a fresh factorization.
#[derive(Debug, Clone)]
pub struct IncrementalQr {
    rows: usize,
    capacity: usize,
    len: usize,
    q: DMatrix<f64>,
    columns: DMatrix<f64>,
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
    qty: Vec<f64>,
    y: DVector<f64>,
    residual: DVector<f64>,
    hat: DVector<f64>,
    r_inv_frobenius_sq: f64,
    r_norm1: f64,
    r_inv_norm1: f64,
}

impl IncrementalQr {
    pub fn new(y: &DVector<f64>, capacity: usize) -> Self {
        let rows = y.len();
        Self {
            rows,
            capacity,
            len: 0,
            q: DMatrix::zeros(rows, capacity),
            columns: DMatrix::zeros(rows, capacity),
            r: DMatrix::zeros(capacity, capacity),
            r_inv: DMatrix::zeros(capacity, capacity),
            qty: Vec::with_capacity(capacity),
            y: y.clone(),
            residual: y.clone(),
            hat: DVector::zeros(rows),
            r_inv_frobenius_sq: 0.0,
            r_norm1: 0.0,
            r_inv_norm1: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends a column, or leaves the state untouched and returns
    /// [`PceError::Singular`] when the enlarged system would be ill-conditioned.
    pub fn try_push(&mut self, column: &[f64]) -> Result<()> {
        assert_eq!(column.len(), self.rows);
        let k = self.len;
        if k == self.capacity || k == self.rows {
            return Err(PceError::Underdetermined { rows: self.rows, columns: k + 1 });
        }
        let mut v = DVector::from_column_slice(column);
        let norm0 = v.norm();
        if !(norm0 > 0.0) || !norm0.is_finite() {
            return Err(PceError::Singular { condition: f64::INFINITY });
        }
        let mut coeffs = DVector::zeros(k);
        if k > 0 {
            let q = self.q.columns(0, k);
            for _ in 0..2 {
                let c = q.tr_mul(&v);
                v -= &q * &c;
                coeffs += c;
            }
        }
        let rho = v.norm();
        if !(rho > 1e-13 * norm0) {
            return Err(PceError::Singular { condition: f64::INFINITY });
        }

        // New column of R⁻¹: [-R⁻¹ r / ρ; 1/ρ].
        let mut inv_col = DVector::zeros(k + 1);
        if k > 0 {
            let r_inv = self.r_inv.view((0, 0), (k, k));
            inv_col.rows_mut(0, k).copy_from(&(r_inv * &coeffs / -rho));
        }
        inv_col[k] = 1.0 / rho;
        let r_norm1 = self.r_norm1.max(coeffs.iter().map(|c| c.abs()).sum::<f64>() + rho);
        let r_inv_norm1 = self.r_inv_norm1.max(inv_col.iter().map(|c| c.abs()).sum::<f64>());
        let condition = (r_norm1 * r_inv_norm1).powi(2);
        if !(condition <= MAX_GRAM_CONDITION) {
            return Err(PceError::Singular { condition });
        }

        v /= rho;
        let qty = v.dot(&self.y);
        self.residual.axpy(-qty, &v, 1.0);
        self.hat.zip_apply(&v, |h, q| *h += q * q);
        self.q.set_column(k, &v);
        self.columns.set_column(k, &DVector::from_column_slice(column));
        for i in 0..k {
            self.r[(i, k)] = coeffs[i];
        }
        self.r[(k, k)] = rho;
        for i in 0..=k {
            self.r_inv[(i, k)] = inv_col[i];
        }
        self.qty.push(qty);
        self.r_inv_frobenius_sq += inv_col.norm_squared();
        self.r_norm1 = r_norm1;
        self.r_inv_norm1 = r_inv_norm1;
        self.len += 1;
        Ok(())
    }

    pub fn coefficients(&self) -> DVector<f64> {
        let k = self.len;
        let r = self.r.view((0, 0), (k, k));
        let qty = DVector::from_column_slice(&self.qty);
        r.solve_upper_triangular(&qty).expect("diagonal of R is nonzero by construction")
    }

    pub fn residual(&self) -> &DVector<f64> {
        &self.residual
    }

    pub fn hat_diagonal(&self) -> &DVector<f64> {
        &self.hat
    }

    pub fn gram_inverse_trace(&self) -> f64 {
        self.r_inv_frobenius_sq
    }

    pub fn condition_estimate(&self) -> f64 {
        (self.r_norm1 * self.r_inv_norm1).powi(2)
    }

    pub fn loo_error(&self) -> Result<f64> {
        loo_from_parts(&self.residual, &self.hat)
    }

    pub fn corrected_loo_error(&self) -> Result<f64> {
        corrected_icv_error(self.loo_error()?, self.len, self.rows, self.r_inv_frobenius_sq)
    }

    /// `(ΨᵀΨ)⁻¹ rhs` for the active columns.
    pub fn solve_gram(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let k = self.len;
        let r_inv = self.r_inv.view((0, 0), (k, k));
        &r_inv * (r_inv.tr_mul(rhs))
    }

    /// `Ψ w` for the active columns.
    pub fn combine(&self, weights: &DVector<f64>) -> DVector<f64> {
        self.columns.columns(0, self.len) * weights
    }

    /// Snapshot in the same form as [`ols_fit`].
    pub fn fit(&self) -> OlsFit {
        OlsFit {
            coefficients: self.coefficients(),
            hat_diagonal: self.hat.clone(),
            gram_inverse_trace: self.r_inv_frobenius_sq,
            residuals: self.residual.clone(),
            condition_estimate: self.condition_estimate(),
        }
    }
}
