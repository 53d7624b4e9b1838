//! Fourier series, sampling and model-space membership tests for singular
//! probability measures on the circle `(-1/2, 1/2)`.
//!
//! Finitely atomic measures make every object finite-dimensional, so each
//! identity can be checked to rounding error. Self-similar (IFS) measures are
//! handled through exact moment products and atomic refinement.
//!
//! The pipeline, bottom-up:
//!
//! - [`measure`]: atomic and IFS measures, moments, `L²(μ)` functions.
//! - [`transforms`]: the Cauchy series `μ₊`, its reciprocal `α`, and the
//!   inner function `b = 1 - 1/μ₊`.
//! - [`kaczmarz`]: the dual sequence `gₙ`, analysis/synthesis, Parseval
//!   defects and the iterative Kaczmarz oracle.
//! - [`sampling`]: coefficients from integer samples and the reconstruction
//!   formula for `f̂(z)`.
//! - [`interpolation`]: the normalized Cauchy transform, Toeplitz membership
//!   defects, the moment problem, two-sided checks and growth probes.

#![forbid(unsafe_code)]

pub mod error;
mod fft;
pub mod interpolation;
pub mod io;
pub mod kaczmarz;
pub mod measure;
pub mod report;
pub mod sampling;
mod sum;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use interpolation::{
    boundary_recover, growth_envelope_check, nct_quotient, nct_series, solve_moment_problem,
    toeplitz_defect, two_sided_check, BoundaryValues, GrowthReport, MembershipReport,
    ModelCandidate, MomentOutcome, Provenance, TwoSidedReport,
};
pub use kaczmarz::{
    adaptive_analysis, analyze, kaczmarz_iterate, parseval_curve, parseval_defect,
    synthesize_dual, synthesize_exponential, AdaptiveAnalysis, AdaptiveOptions, DualSequence,
    FourierData, InverseCache, KaczmarzIter, Synthesis,
};
pub use measure::{
    fourier_stieltjes, inner_product, moment, AtomicMeasure, IfsMeasure, IfsMoment, Measure,
    MeasureSpec, MomentSource, MuFunction, RandomAtomic,
};
pub use report::DefectReport;
pub use sampling::{
    adaptive_order, beta_coefficients, reconstruct, reconstruct_many, summability_report, verify_representation,
    ReconstructionReport, SampleSet, SummabilityOptions, SummabilityReport, VerificationReport,
};
pub use transforms::{
    cauchy_eval, cauchy_inverse, cauchy_series, convolve, inner_function_series,
    reciprocal_series, series_eval, CauchyInverse, PowerSeries,
};
