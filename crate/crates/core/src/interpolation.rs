//! The normalized Cauchy transform `V_μ f = (∫ f/(1 - z e^{-2πix}) dμ)/μ₊`
//! and the model space `H(b) = ker T_{b̄}`.
//!
//! `V_μ f` has Taylor coefficients `⟨f, gₙ⟩`. Membership of a disk function
//! `G` in `H(b)` is decided by the truncated Toeplitz defect
//! `(T_{b̄} G)ₘ = Σ_{k≥0} conj(bₖ) G_{m+k}` together with a Cauchy–Schwarz
//! bound on the discarded part of each sum.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kaczmarz::{analyze, synthesize_dual, FourierData};
use crate::measure::{unit_phase, AtomicMeasure, MuFunction};
use crate::report::{extrapolated_tail, DefectReport};
use crate::sampling::SampleSet;
use crate::sum::CompensatedSum;
use crate::transforms::{check_disk, convolve, series_eval, PowerSeries};

/// Window used by the moment problem and the two-sided check.
pub const DEFAULT_WINDOW: usize = 32;

/// Radius at which radial limits are cross-checked.
pub const RADIAL_CHECK_RADIUS: f64 = 1.0 - 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FromMoments,
    FromFunction,
    External,
}

/// Taylor coefficients of a disk function offered for membership in `H(b)`.
#[derive(Debug, Clone)]
pub struct ModelCandidate {
    series: PowerSeries,
    provenance: Provenance,
    norm: Option<f64>,
}

impl ModelCandidate {
    pub fn new(series: PowerSeries, provenance: Provenance) -> Result<Self> {
        if series.order() < 1 {
            return Err(Error::InvalidArgument("a model candidate needs order >= 1".into()));
        }
        Ok(Self { series, provenance, norm: None })
    }

    /// Attaches the known `H²` norm, which makes tail bounds exact.
    pub fn with_norm(mut self, norm: f64) -> Self {
        self.norm = Some(norm);
        self
    }

    pub fn series(&self) -> &PowerSeries {
        &self.series
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn norm(&self) -> Option<f64> {
        self.norm
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    /// `Σ_{n>order} |Gₙ|²`: exact from the norm when known, extrapolated
    /// from the trailing coefficients otherwise.
    pub fn tail_energy(&self) -> f64 {
        match self.norm {
            Some(norm) => {
                let total = norm * norm;
                let tail = total - self.series.energy();
                // Differences within a few ulps of the total are rounding.
                if tail <= 8.0 * f64::EPSILON * total { 0.0 } else { tail }
            }
            None => extrapolated_tail(self.series.coefficients(), self.order()),
        }
    }

    /// Bound on `|G(z) - Σ_{n≤order} Gₙ zⁿ|` for `|z| = r < 1`.
    pub fn tail_bound(&self, r: f64) -> f64 {
        let tail = self.tail_energy();
        if tail == 0.0 {
            return 0.0;
        }
        tail.sqrt() * r.powi(self.order() as i32 + 1) / (1.0 - r * r).sqrt()
    }
}

/// `V_μ f` as a series: the coefficients `⟨f, gₙ⟩`.
pub fn nct_series(
    m: &AtomicMeasure,
    f: &MuFunction,
    alpha: &PowerSeries,
    order: usize,
) -> Result<ModelCandidate> {
    let data = analyze(m, f, alpha, order)?;
    Ok(ModelCandidate::new(data.as_series(), Provenance::FromFunction)?.with_norm(f.norm(m)))
}

/// `V_μ f(z)` as the quotient of two direct sums over the atoms.
pub fn nct_quotient(m: &AtomicMeasure, f: &MuFunction, z: Complex64) -> Result<Complex64> {
    check_disk(z)?;
    f.check(m)?;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for ((x, w), v) in m.atoms().zip(f.values()) {
        let kernel = w / (1.0 - z * unit_phase(-1.0, 1.0, x));
        num += v * kernel;
        den += kernel;
    }
    Ok(num / den)
}

/// Radii `1 - 10^{-k}`, `k = 1..=steps`.
pub fn default_schedule(steps: usize) -> Vec<f64> {
    (1..=steps).map(|k| 1.0 - 10f64.powi(-(k as i32))).collect()
}

/// Values of `G(r e^{2πixₖ})` along a radius schedule.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryValues {
    pub points: Vec<f64>,
    /// Values at the largest radius.
    pub values: Vec<Complex64>,
    pub r_schedule: Vec<f64>,
    /// `‖f - G(r e^{2πi·})‖_μ` per radius, when a reference was supplied.
    pub errors: Vec<f64>,
    pub tail_bounds: Vec<f64>,
}

impl BoundaryValues {
    pub fn function(&self) -> MuFunction {
        MuFunction::from_values(self.values.clone())
    }
}

/// Evaluates the candidate at the atoms along each radius of the schedule.
/// Fails when a radius needs more coefficients than the candidate has.
pub fn boundary_recover(
    candidate: &ModelCandidate,
    m: &AtomicMeasure,
    r_schedule: &[f64],
    reference: Option<&MuFunction>,
    tol: f64,
) -> Result<BoundaryValues> {
    if r_schedule.is_empty()
        || r_schedule.iter().any(|&r| !(r > 0.0 && r < 1.0))
        || r_schedule.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidArgument(
            "radii must lie in (0, 1) and increase strictly".into(),
        ));
    }
    if let Some(f) = reference {
        f.check(m)?;
    }
    let mut errors = Vec::new();
    let mut tail_bounds = Vec::new();
    let mut values = Vec::new();
    for &r in r_schedule {
        let bound = candidate.tail_bound(r);
        if !(bound <= tol) {
            return Err(Error::SeriesTooShort { radius: r, bound, tol });
        }
        tail_bounds.push(bound);
        values = m
            .positions()
            .iter()
            .map(|&x| series_eval(candidate.series(), r * unit_phase(1.0, 1.0, x)))
            .collect();
        if let Some(f) = reference {
            errors.push(MuFunction::from_values(values.clone()).distance(f, m));
        }
    }
    Ok(BoundaryValues {
        points: m.positions().to_vec(),
        values,
        r_schedule: r_schedule.to_vec(),
        errors,
        tail_bounds,
    })
}

/// Truncated `T_{b̄} G` on coefficients `0..=window`.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub coefficients: Vec<Complex64>,
    /// Euclidean norm of `coefficients`.
    pub defect: f64,
    /// Bound on the contribution of the discarded terms.
    pub bound: f64,
    pub order: usize,
    pub window: usize,
}

impl MembershipReport {
    pub fn certify(&self, tol: f64) -> DefectReport {
        DefectReport::certify(self.defect, self.bound, self.order, tol)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.certify(tol).verdict
    }
}

/// `(T_{b̄} G)ₘ ≈ Σ_{k: m+k ≤ order} conj(bₖ) G_{m+k}` for `m = 0..=window`.
///
/// `b` must be the inner function of a probability measure, so `‖b‖_{H²} = 1`
/// and its tail energy past `L` is exactly `1 - Σ_{k≤L} |bₖ|²`. The discarded
/// part of coefficient `m` is then bounded by
/// `‖b_{>order-m}‖ · ‖G_{>order}‖`.
pub fn toeplitz_defect(
    candidate: &ModelCandidate,
    b: &PowerSeries,
    window: usize,
) -> Result<MembershipReport> {
    let order = candidate.order().min(b.order());
    if order < 2 * window {
        return Err(Error::InsufficientOrder { window, needed: 2 * window, available: order });
    }
    let g = candidate.series().coefficients();
    let bc = b.coefficients();
    let coefficients: Vec<Complex64> = (0..=window)
        .map(|m| (0..=order - m).map(|k| bc[k].conj() * g[m + k]).sum())
        .collect();
    let defect = coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();

    let mut cumulative = Vec::with_capacity(order + 1);
    let mut acc = CompensatedSum::default();
    for c in &bc[..=order] {
        acc.add(c.norm_sqr());
        cumulative.push(acc.value());
    }
    let g_tail = candidate.tail_energy();
    let bound = (0..=window)
        .map(|m| {
            let b_tail = (1.0 - cumulative[order - m]).max(0.0);
            if g_tail.is_infinite() {
                f64::INFINITY
            } else {
                b_tail * g_tail
            }
        })
        .sum::<f64>()
        .sqrt();
    Ok(MembershipReport { coefficients, defect, bound, order, window })
}

/// Outcome of the moment problem `aₙ = ∫ f e^{-2πinx} dμ`.
#[derive(Debug, Clone)]
pub enum MomentOutcome {
    Solved {
        function: MuFunction,
        membership: MembershipReport,
        /// `maxₙ |f̂(n) - aₙ|` for the returned `f`.
        moment_error: f64,
    },
    Infeasible {
        membership: MembershipReport,
        /// Present when membership passed but the moments did not match.
        moment_error: Option<f64>,
    },
}

impl MomentOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, MomentOutcome::Solved { .. })
    }

    pub fn membership(&self) -> &MembershipReport {
        match self {
            MomentOutcome::Solved { membership, .. } | MomentOutcome::Infeasible { membership, .. } => membership,
        }
    }
}

fn model_from_samples(samples: &[Complex64], alpha: &PowerSeries, order: usize) -> Result<ModelCandidate> {
    let a = PowerSeries::from_vec(samples[..=order].to_vec());
    ModelCandidate::new(convolve(alpha, &a, order), Provenance::FromMoments)
}

fn check_orders(order: usize, alpha: &PowerSeries, b: &PowerSeries) -> Result<()> {
    let available = alpha.order().min(b.order());
    if order > available {
        return Err(Error::OrderOverflow { requested: order, available });
    }
    Ok(())
}

/// Builds `G_a = (Σ aₙ zⁿ)/μ₊ = Σ (Σⱼ α_{n-j} aⱼ) zⁿ`, tests `G_a ∈ H(b)`,
/// and on success returns `f = Σ (G_a)ₙ gₙ` with its moment mismatch.
pub fn solve_moment_problem(
    a: &[Complex64],
    m: &AtomicMeasure,
    alpha: &PowerSeries,
    b: &PowerSeries,
    tol: f64,
) -> Result<MomentOutcome> {
    if a.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, available: a.len() });
    }
    let order = a.len() - 1;
    check_orders(order, alpha, b)?;
    let candidate = model_from_samples(a, alpha, order)?;
    let membership = toeplitz_defect(&candidate, b, (order / 2).min(DEFAULT_WINDOW))?;
    if !membership.passes(tol) {
        return Ok(MomentOutcome::Infeasible { membership, moment_error: None });
    }
    let data = FourierData::from(candidate.series().clone());
    let function = synthesize_dual(m, &data, alpha, None)?.function;
    let moments = m.function_moments(&function, order)?;
    let moment_error = moments.iter().zip(a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if moment_error <= tol {
        Ok(MomentOutcome::Solved { function, membership, moment_error })
    } else {
        Ok(MomentOutcome::Infeasible { membership, moment_error: Some(moment_error) })
    }
}

/// Both model-space inclusions and the boundary relation `conj(G₊⋆) = G₋⋆`.
#[derive(Debug, Clone, Serialize)]
pub struct TwoSidedReport {
    pub plus: MembershipReport,
    pub minus: MembershipReport,
    /// `G₊⋆`, computed by dual synthesis of the coefficients of `G₊`.
    #[serde(skip)]
    pub plus_boundary: MuFunction,
    #[serde(skip)]
    pub minus_boundary: MuFunction,
    /// `‖conj(G₊⋆) - G₋⋆‖_μ`.
    pub mismatch: f64,
    /// `‖G₊(r e^{2πi·}) - G₊⋆‖_μ` at [`RADIAL_CHECK_RADIUS`], an independent
    /// route to the boundary values.
    pub radial_gap: f64,
    pub order: usize,
    pub verdict: bool,
}

impl TwoSidedReport {
    pub fn defect_report(&self) -> DefectReport {
        DefectReport {
            verdict: self.verdict,
            defect: self.mismatch.max(self.plus.defect).max(self.minus.defect),
            bound: self.plus.bound.max(self.minus.bound),
            order: self.order,
        }
    }
}

/// `positive` holds `F(n)`, `negative` holds `conj(F(-n))`, both from `n = 0`.
pub fn two_sided_check(
    positive: &SampleSet,
    negative: &SampleSet,
    m: &AtomicMeasure,
    alpha: &PowerSeries,
    b: &PowerSeries,
    tol: f64,
) -> Result<TwoSidedReport> {
    let order = positive.max_index().min(negative.max_index());
    if order < 2 {
        return Err(Error::InsufficientData { needed: 3, available: order + 1 });
    }
    check_orders(order, alpha, b)?;
    let window = (order / 2).min(DEFAULT_WINDOW);
    let g_plus = model_from_samples(positive.values(), alpha, order)?;
    let g_minus = model_from_samples(negative.values(), alpha, order)?;
    let plus = toeplitz_defect(&g_plus, b, window)?;
    let minus = toeplitz_defect(&g_minus, b, window)?;

    let boundary = |g: &ModelCandidate| {
        synthesize_dual(m, &FourierData::from(g.series().clone()), alpha, None).map(|s| s.function)
    };
    let plus_boundary = boundary(&g_plus)?;
    let minus_boundary = boundary(&g_minus)?;
    let mismatch = plus_boundary.conj().distance(&minus_boundary, m);

    let radial = MuFunction::from_values(
        m.positions()
            .iter()
            .map(|&x| series_eval(g_plus.series(), RADIAL_CHECK_RADIUS * unit_phase(1.0, 1.0, x)))
            .collect(),
    );
    let radial_gap = radial.distance(&plus_boundary, m);

    let verdict = plus.passes(tol) && minus.passes(tol) && mismatch <= tol;
    Ok(TwoSidedReport { plus, minus, plus_boundary, minus_boundary, mismatch, radial_gap, order, verdict })
}

/// Imaginary-axis growth probe of `|f̂(±iy)| e^{-πy}`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub y: Vec<f64>,
    pub ratio_pos: Vec<f64>,
    pub ratio_neg: Vec<f64>,
    /// `‖f‖_μ e^{(2πa - π) y}` with `a = maxₖ |xₖ|`.
    pub envelope: Vec<f64>,
    pub eventually_decreasing: bool,
    pub verdict: bool,
}

impl GrowthReport {
    pub fn defect_report(&self) -> DefectReport {
        let last = self.ratio_pos.last().copied().unwrap_or(0.0).max(self.ratio_neg.last().copied().unwrap_or(0.0));
        DefectReport {
            verdict: self.verdict,
            defect: last,
            bound: self.envelope.last().copied().unwrap_or(0.0),
            order: self.y.len(),
        }
    }
}

/// Ratios `|f̂(iy)| e^{-πy}` and `|f̂(-iy)| e^{-πy}` along increasing `y`.
///
/// The verdict holds when both sequences are non-increasing over the second
/// half of the schedule and their final values are at most `tol`.
pub fn growth_envelope_check(
    m: &AtomicMeasure,
    f: &MuFunction,
    y_values: &[f64],
    tol: f64,
) -> Result<GrowthReport> {
    f.check(m)?;
    if y_values.is_empty()
        || y_values.iter().any(|&y| !(y > 0.0 && y.is_finite()))
        || y_values.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidArgument("y values must be positive and increasing".into()));
    }
    // e^{-πy}·e^{±2πyx} = e^{πy(±2x - 1)} keeps every term bounded.
    let ratio = |y: f64, sign: f64| -> f64 {
        m.atoms()
            .zip(f.values())
            .map(|((x, w), v)| w * v * (PI * y * (sign * 2.0 * x - 1.0)).exp())
            .sum::<Complex64>()
            .norm()
    };
    let ratio_pos: Vec<_> = y_values.iter().map(|&y| ratio(y, 1.0)).collect();
    let ratio_neg: Vec<_> = y_values.iter().map(|&y| ratio(y, -1.0)).collect();
    let a = m.max_abs_position();
    let norm = f.norm(m);
    let envelope = y_values.iter().map(|&y| norm * ((TAU * a - PI) * y).exp()).collect();

    let half = y_values.len() / 2;
    let decreasing = |r: &[f64]| r[half..].windows(2).all(|w| w[1] <= w[0]);
    let eventually_decreasing = decreasing(&ratio_pos) && decreasing(&ratio_neg);
    let verdict = eventually_decreasing
        && ratio_pos.last().is_some_and(|&r| r <= tol)
        && ratio_neg.last().is_some_and(|&r| r <= tol);
    Ok(GrowthReport { y: y_values.to_vec(), ratio_pos, ratio_neg, envelope, eventually_decreasing, verdict })
}
