//! Marginal input distributions, isoprobabilistic standardization and Latin
//! hypercube designs.
//!
//! Uniform variables are mapped affinely onto `[-1, 1]` (Legendre domain).
//! Gaussian and lognormal variables, optionally truncated, are mapped onto the
//! standard normal through `Φ⁻¹(F(x))` (Hermite domain).

use nalgebra::{DMatrix, DVector};
use rand::distr::{Distribution, Open01};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::basis::PolynomialFamily;
use crate::error::{PceError, Result};
use crate::rng::{rng_from_seed, PceRng};

// Probabilities are kept this far away from 0 and 1 before Φ⁻¹ so that
// samples sitting exactly on a truncation bound map to a finite value.
const PROBABILITY_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Uniform,
    Gaussian,
    Lognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct RawMarginal {
    kind: DistributionKind,
    params: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<[f64; 2]>,
}

/// One independent input variable.
///
/// `params` are (lower, upper) for uniform, (mean, standard deviation) for
/// Gaussian and the mean and standard deviation of the underlying normal for
/// lognormal. Optional `bounds` truncate the distribution in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarginal", into = "RawMarginal")]
pub struct MarginalDistribution {
    kind: DistributionKind,
    params: [f64; 2],
    bounds: Option<[f64; 2]>,
    // Standard-normal probabilities of the truncation bounds.
    mass: Option<(f64, f64)>,
}

impl TryFrom<RawMarginal> for MarginalDistribution {
    type Error = PceError;

    fn try_from(raw: RawMarginal) -> Result<Self> {
        MarginalDistribution::new(raw.kind, raw.params, raw.bounds)
    }
}

impl From<MarginalDistribution> for RawMarginal {
    fn from(m: MarginalDistribution) -> Self {
        RawMarginal { kind: m.kind, params: m.params, bounds: m.bounds }
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

// Φ⁻¹ polished by Newton steps on Φ; the library quantile alone is only
// accurate to about 1e-10.
fn normal_quantile(p: f64) -> f64 {
    let n = std_normal();
    let mut z = n.inverse_cdf(p);
    for _ in 0..2 {
        let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        // Upper half: compare survival probabilities, 1 − p is exact there.
        let gap = if p < 0.5 { n.cdf(z) - p } else { (1.0 - p) - n.sf(z) };
        if density == 0.0 {
            break;
        }
        let step = gap / density;
        z -= step;
    }
    z
}

impl MarginalDistribution {
    pub fn new(kind: DistributionKind, params: [f64; 2], bounds: Option<[f64; 2]>) -> Result<Self> {
        let invalid = |msg: String| Err(PceError::InvalidDistribution(msg));
        if !params.iter().all(|v| v.is_finite()) {
            return invalid(format!("non-finite parameters {params:?}"));
        }
        if let Some([lo, hi]) = bounds {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return invalid(format!("bounds [{lo}, {hi}] are not an interval"));
            }
        }
        match kind {
            DistributionKind::Uniform => {
                let [lo, hi] = params;
                if lo >= hi {
                    return invalid(format!("uniform lower bound {lo} not below upper bound {hi}"));
                }
                if let Some(b) = bounds {
                    if b != params {
                        return invalid(format!("uniform bounds {b:?} differ from its parameters {params:?}"));
                    }
                }
                Ok(Self { kind, params, bounds, mass: None })
            }
            DistributionKind::Gaussian | DistributionKind::Lognormal => {
                if params[1] <= 0.0 {
                    return invalid(format!("standard deviation {} must be positive", params[1]));
                }
                let mass = match bounds {
                    None => None,
                    Some([lo, hi]) => {
                        if kind == DistributionKind::Lognormal && hi <= 0.0 {
                            return invalid(format!("lognormal bounds [{lo}, {hi}] exclude the positive axis"));
                        }
                        let m = Self { kind, params, bounds: None, mass: None };
                        let (a, b) = (m.reduced(lo), m.reduced(hi));
                        let (fa, fb) = (std_normal().cdf(a), std_normal().cdf(b));
                        if !(fb - fa > 0.0) {
                            return invalid(format!("bounds [{lo}, {hi}] enclose no probability mass"));
                        }
                        Some((fa, fb))
                    }
                };
                Ok(Self { kind, params, bounds, mass })
            }
        }
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        Self::new(DistributionKind::Uniform, [lower, upper], None)
    }

    pub fn gaussian(mean: f64, std_dev: f64) -> Result<Self> {
        Self::new(DistributionKind::Gaussian, [mean, std_dev], None)
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(DistributionKind::Lognormal, [mu, sigma], None)
    }

    /// Restricts a Gaussian or lognormal marginal to `[lower, upper]`.
    pub fn truncated(self, lower: f64, upper: f64) -> Result<Self> {
        Self::new(self.kind, self.params, Some([lower, upper]))
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn params(&self) -> [f64; 2] {
        self.params
    }

    pub fn bounds(&self) -> Option<[f64; 2]> {
        self.bounds
    }

    /// Polynomial family orthonormal with respect to the standardized variable.
    pub fn family(&self) -> PolynomialFamily {
        match self.kind {
            DistributionKind::Uniform => PolynomialFamily::Legendre,
            DistributionKind::Gaussian | DistributionKind::Lognormal => PolynomialFamily::Hermite,
        }
    }

    /// Closed support in natural units.
    pub fn support(&self) -> (f64, f64) {
        match (self.kind, self.bounds) {
            (DistributionKind::Uniform, _) => (self.params[0], self.params[1]),
            (_, Some([lo, hi])) => (lo, hi),
            (DistributionKind::Gaussian, None) => (f64::NEG_INFINITY, f64::INFINITY),
            (DistributionKind::Lognormal, None) => (0.0, f64::INFINITY),
        }
    }

    fn in_support(&self, value: f64) -> bool {
        let (lo, hi) = self.support();
        if value.is_nan() || value < lo || value > hi {
            return false;
        }
        !(self.kind == DistributionKind::Lognormal && value <= 0.0) && value.is_finite()
    }

    // Underlying standard-normal coordinate of a Gaussian/lognormal value.
    fn reduced(&self, value: f64) -> f64 {
        let [mu, sigma] = self.params;
        match self.kind {
            DistributionKind::Lognormal => (value.ln() - mu) / sigma,
            _ => (value - mu) / sigma,
        }
    }

    fn from_reduced(&self, z: f64) -> f64 {
        let [mu, sigma] = self.params;
        match self.kind {
            DistributionKind::Lognormal => (mu + sigma * z).exp(),
            _ => mu + sigma * z,
        }
    }

    /// Cumulative distribution function in natural units (truncation aware).
    pub fn cdf(&self, value: f64) -> f64 {
        let (lo, hi) = self.support();
        if value <= lo {
            return 0.0;
        }
        if value >= hi {
            return 1.0;
        }
        match self.kind {
            DistributionKind::Uniform => (value - lo) / (hi - lo),
            _ => {
                let p = std_normal().cdf(self.reduced(value));
                match self.mass {
                    Some((fa, fb)) => ((p - fa) / (fb - fa)).clamp(0.0, 1.0),
                    None => p,
                }
            }
        }
    }

    /// Isoprobabilistic map to the reference domain of [`Self::family`].
    pub fn to_standard(&self, value: f64) -> Result<f64> {
        if !self.in_support(value) {
            return Err(PceError::ValueOutOfSupport { value });
        }
        Ok(match self.kind {
            DistributionKind::Uniform => {
                let [lo, hi] = self.params;
                (2.0 * (value - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
            }
            _ => match self.mass {
                // Untruncated: F and Φ⁻¹ cancel exactly.
                None => self.reduced(value),
                Some(_) => {
                    let u = self.cdf(value).clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR);
                    normal_quantile(u)
                }
            },
        })
    }

    /// Inverse of [`Self::to_standard`].
    pub fn from_standard(&self, standard: f64) -> f64 {
        match self.kind {
            DistributionKind::Uniform => {
                let [lo, hi] = self.params;
                lo + (standard + 1.0) * 0.5 * (hi - lo)
            }
            _ => match self.mass {
                None => self.from_reduced(standard),
                Some(_) => self.inverse_cdf(std_normal().cdf(standard)),
            },
        }
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        match self.kind {
            DistributionKind::Uniform => {
                let [lo, hi] = self.params;
                lo + u * (hi - lo)
            }
            _ => {
                let p = match self.mass {
                    Some((fa, fb)) => fa + u * (fb - fa),
                    None => u,
                };
                let p = p.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR);
                let x = self.from_reduced(normal_quantile(p));
                let (lo, hi) = self.support();
                x.clamp(lo, hi)
            }
        }
    }

    /// Quantile function `F⁻¹(u)` for `u` in the open unit interval.
    pub fn from_unit(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(PceError::UnitOutOfRange(u));
        }
        Ok(self.inverse_cdf(u))
    }
}

/// A named input variable as declared in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputVariable {
    pub name: String,
    #[serde(flatten)]
    pub marginal: MarginalDistribution,
}

/// Ordered list of mutually independent input variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<InputVariable>", into = "Vec<InputVariable>")]
pub struct InputSpace {
    variables: Vec<InputVariable>,
}

impl TryFrom<Vec<InputVariable>> for InputSpace {
    type Error = PceError;

    fn try_from(variables: Vec<InputVariable>) -> Result<Self> {
        InputSpace::new(variables)
    }
}

impl From<InputSpace> for Vec<InputVariable> {
    fn from(space: InputSpace) -> Self {
        space.variables
    }
}

impl InputSpace {
    pub fn new(variables: Vec<InputVariable>) -> Result<Self> {
        if variables.is_empty() {
            return Err(PceError::InvalidArgument("input space needs at least one variable".into()));
        }
        Ok(Self { variables })
    }

    /// Builds a space from marginals, naming the variables `x1, x2, ...`.
    pub fn from_marginals(marginals: impl IntoIterator<Item = MarginalDistribution>) -> Result<Self> {
        Self::new(
            marginals
                .into_iter()
                .enumerate()
                .map(|(i, marginal)| InputVariable { name: format!("x{}", i + 1), marginal })
                .collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[InputVariable] {
        &self.variables
    }

    pub fn marginal(&self, variable: usize) -> &MarginalDistribution {
        &self.variables[variable].marginal
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn families(&self) -> Vec<PolynomialFamily> {
        self.variables.iter().map(|v| v.marginal.family()).collect()
    }

    pub fn to_standard(&self, variable: usize, value: f64) -> Result<f64> {
        self.marginal(variable)
            .to_standard(value)
            .map_err(|_| PceError::OutOfSupport { variable, value })
    }

    /// Standardizes an `N × d` matrix of natural-unit samples.
    pub fn standardize(&self, natural: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let d = self.dimension();
        if natural.ncols() != d {
            return Err(PceError::DimensionMismatch { expected: d, found: natural.ncols() });
        }
        let mut out = DMatrix::zeros(natural.nrows(), d);
        for j in 0..d {
            let marginal = self.marginal(j);
            for i in 0..natural.nrows() {
                let value = natural[(i, j)];
                out[(i, j)] = marginal
                    .to_standard(value)
                    .map_err(|_| PceError::SampleOutOfSupport { row: i, variable: j, value })?;
            }
        }
        Ok(out)
    }

    /// Maps unit-hypercube points to natural units column by column.
    pub fn from_unit_matrix(&self, unit: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let d = self.dimension();
        if unit.ncols() != d {
            return Err(PceError::DimensionMismatch { expected: d, found: unit.ncols() });
        }
        let mut out = DMatrix::zeros(unit.nrows(), d);
        for j in 0..d {
            for i in 0..unit.nrows() {
                out[(i, j)] = self.marginal(j).from_unit(unit[(i, j)])?;
            }
        }
        Ok(out)
    }
}

/// Samples in natural units together with their standardized images.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrixSample {
    pub natural: DMatrix<f64>,
    pub standardized: DMatrix<f64>,
}

/// Paired inputs (natural units, `N × d`) and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentalDesign {
    inputs: DMatrix<f64>,
    responses: DVector<f64>,
}

impl ExperimentalDesign {
    pub fn new(inputs: DMatrix<f64>, responses: DVector<f64>) -> Result<Self> {
        if inputs.nrows() != responses.len() {
            return Err(PceError::DimensionMismatch { expected: inputs.nrows(), found: responses.len() });
        }
        Ok(Self { inputs, responses })
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn responses(&self) -> &DVector<f64> {
        &self.responses
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.inputs.ncols()
    }

    /// The design with sample `index` removed.
    pub fn without(&self, index: usize) -> Self {
        Self {
            inputs: self.inputs.clone().remove_row(index),
            responses: self.responses.clone().remove_row(index),
        }
    }
}

/// Latin hypercube sample on the unit cube `(0, 1)^d`.
///
/// Each column is an independent random permutation of the `n` strata with a
/// uniformly random position inside each stratum.
pub fn lhs_unit(n: usize, d: usize, rng: &mut PceRng) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, d);
    let mut strata: Vec<usize> = (0..n).collect();
    let below_one = 1.0 - f64::EPSILON / 2.0;
    for j in 0..d {
        strata.shuffle(rng);
        for (i, &k) in strata.iter().enumerate() {
            let offset: f64 = Open01.sample(rng);
            out[(i, j)] = ((k as f64 + offset) / n as f64).min(below_one);
        }
    }
    out
}

/// Latin hypercube design of `n` samples over `space`, reproducible from `seed`.
pub fn lhs_sample(n: usize, space: &InputSpace, seed: u64) -> Result<DesignMatrixSample> {
    if n == 0 {
        return Err(PceError::InvalidArgument("Latin hypercube sample size must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let unit = lhs_unit(n, space.dimension(), &mut rng);
    let natural = space.from_unit_matrix(&unit)?;
    let standardized = space.standardize(&natural)?;
    Ok(DesignMatrixSample { natural, standardized })
}
