//! Sparse polynomial chaos expansion surrogates.
//!
//! Orthonormal Legendre/Hermite bases over total-degree index sets, sparse
//! term selection by OMP or LARS with hybrid least-squares refits, degree
//! adaptation driven by leave-one-out error, outer cross-validation, and
//! Sobol indices computed from the expansion coefficients.

pub mod basis;
pub mod benchmarks;
pub mod error;
pub mod format;
pub mod input_model;
pub mod regression;
pub mod rng;
pub mod selectors;
pub mod sensitivity;
pub mod training;
pub mod validation;

pub use basis::{BasisSpec, MultiIndex, PolynomialFamily};
pub use benchmarks::{Benchmark, ReductionMode, Scenario, ScenarioPose, Wall};
pub use error::{PceError, Result};
pub use input_model::{DistributionKind, ExperimentalDesign, InputSpace, InputVariable, MarginalDistribution};
pub use selectors::{Selector, SelectionPath};
pub use sensitivity::{sobol_indices, SobolIndices};
pub use training::{train, ErrorMetric, SelectorKind, SparsePceModel, TrainConfig, TrainingDiagnostics};
pub use validation::{outer_loocv, replication_study, OcvReport, ReplicationStudy, ReplicationTable};
