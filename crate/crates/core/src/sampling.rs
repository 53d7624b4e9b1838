//! Sampling characterization: coefficients from integer samples and the
//! reconstruction formula
//!
//! ```text
//! F(z) = Σₙ (Σⱼ α_{n-j} F(j)) · (Σₖ conj(α_{n-k}) μ̂(z - k))
//! ```
//!
//! The inner sum over `k` is `ĝₙ(z)`, computed as a Cauchy product of
//! `conj(α)` with the row `μ̂(z - k)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kaczmarz::FourierData;
use crate::measure::{fourier_stieltjes, AtomicMeasure, MuFunction};
use crate::report::{extrapolated_tail, DefectReport};
use crate::transforms::{convolve, PowerSeries};

/// Integer samples `F(0), F(1), …, F(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<Complex64>,
}

impl SampleSet {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("a sample set needs at least F(0)".into()));
        }
        Ok(Self { values })
    }

    /// `F(j) = eval(j)` for `j = 0..=max_index`.
    pub fn from_fn(max_index: usize, eval: impl FnMut(usize) -> Complex64) -> Self {
        Self { values: (0..=max_index).map(eval).collect() }
    }

    /// Samples of `f̂` at `0..=max_index`.
    pub fn of_transform(m: &AtomicMeasure, f: &MuFunction, max_index: usize) -> Result<Self> {
        Ok(Self { values: m.function_moments(f, max_index)? })
    }

    /// `conj(f̂(-n))` for `n = 0..=max_index`, the pre-conjugated negative
    /// side used by the two-sided check. Equals the samples of `conj(f)`.
    pub fn of_transform_negative(m: &AtomicMeasure, f: &MuFunction, max_index: usize) -> Result<Self> {
        Self::of_transform(m, &f.conj(), max_index)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    fn as_series(&self) -> PowerSeries {
        PowerSeries::from_vec(self.values.clone())
    }
}

/// `βₙ = Σ_{j≤n} α_{n-j} F(j)` for `n = 0..=order`.
pub fn beta_coefficients(samples: &SampleSet, alpha: &PowerSeries, order: usize) -> Result<FourierData> {
    if order > samples.max_index() {
        return Err(Error::InsufficientData { needed: order + 1, available: samples.len() });
    }
    if order > alpha.order() {
        return Err(Error::OrderOverflow { requested: order, available: alpha.order() });
    }
    Ok(convolve(alpha, &samples.as_series(), order).into())
}

#[derive(Debug, Clone, Copy)]
pub struct SummabilityOptions {
    /// Largest admissible energy in the final window.
    pub tol: f64,
    /// Fraction of the coefficients forming the final window.
    pub tail_fraction: f64,
}

impl Default for SummabilityOptions {
    fn default() -> Self {
        Self { tol: 1e-6, tail_fraction: 1.0 / 3.0 }
    }
}

/// Finite-data proxy for `Σ |βₙ|² < ∞`.
#[derive(Debug, Clone, Serialize)]
pub struct SummabilityReport {
    pub partial_sums: Vec<f64>,
    pub total: f64,
    /// Energy in the final `tail_fraction` of the coefficients.
    pub tail_energy: f64,
    /// Share of the total energy carried by the last tenth of the coefficients.
    pub last_decade_ratio: f64,
    pub verdict: bool,
}

pub fn summability_report(beta: &FourierData, opts: SummabilityOptions) -> SummabilityReport {
    let partial_sums = beta.cumulative_energy();
    let len = partial_sums.len();
    let total = partial_sums[len - 1];
    let energy_from = |start: usize| if start == 0 { total } else { total - partial_sums[start - 1] };
    let window = ((len as f64 * opts.tail_fraction).ceil() as usize).clamp(1, len);
    let tail_energy = energy_from(len - window).max(0.0);
    let decade = (len / 10).max(1);
    let last_decade_ratio = if total > 0.0 { energy_from(len - decade).max(0.0) / total } else { 0.0 };
    SummabilityReport {
        verdict: tail_energy <= opts.tol,
        partial_sums,
        total,
        tail_energy,
        last_decade_ratio,
    }
}

/// One evaluation of the reconstruction formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub point: Complex64,
    pub reconstructed: Complex64,
    pub reference: Option<Complex64>,
    pub truncation_order: usize,
    /// Estimate of `Σ_{n>order} |βₙ|²`.
    pub tail_energy: f64,
    /// `√tail_energy · ‖e^{2πi z̄ x}‖_μ`, which bounds the truncation error
    /// when the samples come from some `f̂`.
    pub tail_bound: f64,
}

impl ReconstructionReport {
    pub fn error(&self) -> Option<f64> {
        self.reference.map(|r| (r - self.reconstructed).norm())
    }

    pub fn with_reference(mut self, reference: Complex64) -> Self {
        self.reference = Some(reference);
        self
    }
}

/// `‖e^{2πi z̄ x}‖_μ = (Σ wₖ e^{4π Im(z) xₖ})^{1/2}`.
fn conjugate_exponential_norm(m: &AtomicMeasure, z: Complex64) -> f64 {
    m.atoms()
        .map(|(x, w)| w * (2.0 * std::f64::consts::TAU * z.im * x).exp())
        .sum::<f64>()
        .sqrt()
}

/// `ĝₙ(z) = Σ_{k≤n} conj(α_{n-k}) μ̂(z - k)` for `n = 0..=order`.
pub fn dual_transform_row(m: &AtomicMeasure, alpha: &PowerSeries, z: Complex64, order: usize) -> Result<Vec<Complex64>> {
    if order > alpha.order() {
        return Err(Error::OrderOverflow { requested: order, available: alpha.order() });
    }
    let shifted: Vec<_> = (0..=order).map(|k| fourier_stieltjes(m, z - k as f64)).collect();
    let conj_alpha: Vec<_> = alpha.coefficients()[..=order].iter().map(|a| a.conj()).collect();
    Ok(convolve(&PowerSeries::from_vec(conj_alpha), &PowerSeries::from_vec(shifted), order).into_coefficients())
}

struct Prepared {
    beta: FourierData,
    tail_energy: f64,
}

fn prepare(samples: &SampleSet, alpha: &PowerSeries, order: usize) -> Result<Prepared> {
    let available = samples.max_index().min(alpha.order());
    if order > available {
        // Reports which of the two inputs is too short.
        beta_coefficients(samples, alpha, order)?;
    }
    let full = beta_coefficients(samples, alpha, available)?;
    let tail_energy = extrapolated_tail(full.coefficients(), order);
    Ok(Prepared { beta: full.truncated(order), tail_energy })
}

fn evaluate(m: &AtomicMeasure, alpha: &PowerSeries, prepared: &Prepared, z: Complex64) -> Result<ReconstructionReport> {
    let order = prepared.beta.order();
    let row = dual_transform_row(m, alpha, z, order)?;
    let reconstructed = prepared.beta.coefficients().iter().zip(&row).map(|(b, g)| b * g).sum();
    Ok(ReconstructionReport {
        point: z,
        reconstructed,
        reference: None,
        truncation_order: order,
        tail_energy: prepared.tail_energy,
        tail_bound: prepared.tail_energy.sqrt() * conjugate_exponential_norm(m, z),
    })
}

/// Evaluates the reconstruction formula at `z`, truncated at `order`.
pub fn reconstruct(
    samples: &SampleSet,
    m: &AtomicMeasure,
    alpha: &PowerSeries,
    z: Complex64,
    order: usize,
) -> Result<ReconstructionReport> {
    let prepared = prepare(samples, alpha, order)?;
    evaluate(m, alpha, &prepared, z)
}

/// [`reconstruct`] over many points sharing one set of coefficients.
pub fn reconstruct_many(
    samples: &SampleSet,
    m: &AtomicMeasure,
    alpha: &PowerSeries,
    points: &[Complex64],
    order: usize,
) -> Result<Vec<ReconstructionReport>> {
    let prepared = prepare(samples, alpha, order)?;
    points.iter().map(|&z| evaluate(m, alpha, &prepared, z)).collect()
}

/// Smallest order whose estimated tail energy is at most `tol²`, or the
/// largest available order if none is.
pub fn adaptive_order(samples: &SampleSet, alpha: &PowerSeries, tol: f64) -> Result<usize> {
    let available = samples.max_index().min(alpha.order());
    let beta = beta_coefficients(samples, alpha, available)?;
    let c = beta.coefficients();
    let mut suffix = vec![0.0; c.len() + 1];
    for n in (0..c.len()).rev() {
        suffix[n] = suffix[n + 1] + c[n].norm_sqr();
    }
    // Extrapolated remainder beyond the available data.
    let beyond = extrapolated_tail(c, available);
    Ok((0..=available).find(|&n| suffix[n + 1] + beyond <= tol * tol).unwrap_or(available))
}

/// Combined finite-data check of summability and reconstruction.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub verdict: bool,
    pub summability: SummabilityReport,
    pub points: Vec<ReconstructionReport>,
    pub max_error: f64,
    pub order: usize,
}

impl VerificationReport {
    pub fn defect_report(&self) -> DefectReport {
        let bound = self.points.iter().map(|p| p.tail_bound).fold(0.0, f64::max);
        DefectReport { verdict: self.verdict, defect: self.max_error, bound, order: self.order }
    }
}

/// True iff the coefficients pass the summability proxy and the
/// reconstruction matches every caller-supplied reference within `tol`.
pub fn verify_representation(
    samples: &SampleSet,
    m: &AtomicMeasure,
    alpha: &PowerSeries,
    test_points: &[Complex64],
    references: &[Complex64],
    tol: f64,
    opts: SummabilityOptions,
) -> Result<VerificationReport> {
    if test_points.len() != references.len() {
        return Err(Error::LengthMismatch { expected: test_points.len(), found: references.len() });
    }
    let order = samples.max_index().min(alpha.order());
    let beta = beta_coefficients(samples, alpha, order)?;
    let summability = summability_report(&beta, opts);
    let points: Vec<_> = reconstruct_many(samples, m, alpha, test_points, order)?
        .into_iter()
        .zip(references)
        .map(|(r, &reference)| r.with_reference(reference))
        .collect();
    let max_error = points.iter().filter_map(|p| p.error()).fold(0.0, f64::max);
    Ok(VerificationReport {
        verdict: summability.verdict && max_error <= tol,
        summability,
        points,
        max_error,
        order,
    })
}
