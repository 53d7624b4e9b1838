//! Verdict records shared by every approximate check.

use serde::Serialize;

/// A mathematical verdict together with the numbers that support it.
///
/// `defect` is the computed quantity being tested, `bound` the truncation
/// error budget attached to it, `order` the truncation order used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectReport {
    pub verdict: bool,
    pub defect: f64,
    pub bound: f64,
    pub order: usize,
}

impl DefectReport {
    /// Passes iff `defect + bound <= tol`.
    pub fn certify(defect: f64, bound: f64, order: usize, tol: f64) -> Self {
        Self { verdict: defect + bound <= tol, defect, bound, order }
    }
}

/// Estimated `Σ_{n>from} |cₙ|²` for a sequence known only up to its end.
///
/// The observed energy past `from` is extended geometrically from the ratio
/// of the energies in the last two blocks of `len/8` coefficients. A
/// non-decaying tail yields infinity.
pub(crate) fn extrapolated_tail(coeffs: &[num_complex::Complex64], from: usize) -> f64 {
    let observed: f64 = coeffs.iter().skip(from + 1).map(|c| c.norm_sqr()).sum();
    let block = (coeffs.len() / 8).max(1);
    if coeffs.len() < 2 * block {
        return f64::INFINITY;
    }
    let energy = |r: std::ops::Range<usize>| coeffs[r].iter().map(|c| c.norm_sqr()).sum::<f64>();
    let n = coeffs.len();
    let last = energy(n - block..n);
    let prev = energy(n - 2 * block..n - block);
    let scale: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().max(1.0);
    // Below the rounding floor (RMS coefficient under 64ε of the norm) the
    // ratio is noise.
    let floor = block as f64 * (64.0 * f64::EPSILON).powi(2) * scale;
    if last <= floor {
        return observed + last;
    }
    let q = last / prev;
    if q.is_finite() && q < 1.0 {
        observed + last * q / (1.0 - q)
    } else {
        f64::INFINITY
    }
}
