//! Truncated power series and the Cauchy-transform machinery built on them.
//!
//! The Cauchy series uses the kernel `1/(1 - z e^{-2πix})`, so its `n`-th
//! Taylor coefficient is exactly the moment `μ̂(n)`. The `α` sequence is the
//! coefficient sequence of `1/μ₊`, and the inner function is
//! `b = 1 - 1/μ₊`, obtained from the Herglotz transform `H = 2μ₊ - 1` via
//! `b = (H - 1)/(H + 1)`.

use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::convolve_truncated;
use crate::measure::{AtomicMeasure, MomentSource};

/// Orders at or below this use the schoolbook reciprocal recursion.
pub const DIRECT_RECIPROCAL_MAX: usize = 1024;

/// Limit on the residual `max |μ₊·α - 1|` accepted by [`cauchy_inverse`].
pub const RESIDUAL_LIMIT: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients `c₀, …, c_order` of a truncated power series.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    coefficients: Vec<Complex64>,
}

impl PowerSeries {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("a power series needs at least one coefficient".into()));
        }
        Ok(Self { coefficients })
    }

    pub(crate) fn from_vec(coefficients: Vec<Complex64>) -> Self {
        debug_assert!(!coefficients.is_empty());
        Self { coefficients }
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The constant series `1`, padded with zeros to `order`.
    pub fn one(order: usize) -> Self {
        let mut c = vec![ZERO; order + 1];
        c[0] = ONE;
        Self { coefficients: c }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    /// Coefficient `n`, or zero past the truncation order.
    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.coefficients.get(n).copied().unwrap_or(ZERO)
    }

    /// Truncate (or zero-pad) to the given order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut c = self.coefficients.clone();
        c.resize(order + 1, ZERO);
        Self { coefficients: c }
    }

    /// `Σ |cₙ|²`.
    pub fn energy(&self) -> f64 {
        crate::sum::sum(self.coefficients.iter().map(|c| c.norm_sqr()))
    }

    /// Largest coefficient-wise distance, padding the shorter series with zeros.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let n = self.coefficients.len().max(other.coefficients.len());
        (0..n).map(|k| (self.coefficient(k) - other.coefficient(k)).norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for PowerSeries {
    type Output = Complex64;

    fn index(&self, n: usize) -> &Complex64 {
        &self.coefficients[n]
    }
}

/// Taylor coefficients of `μ₊(z) = ∫ 1/(1 - z e^{-2πix}) dμ`, i.e. `μ̂(0..=order)`.
pub fn cauchy_series<M: MomentSource + ?Sized>(m: &M, order: usize) -> PowerSeries {
    PowerSeries::from_vec(m.moments(order))
}

/// `μ₊(z)` evaluated directly as a finite sum over the atoms.
pub fn cauchy_eval(m: &AtomicMeasure, z: Complex64) -> Result<Complex64> {
    check_disk(z)?;
    Ok(m.atoms().map(|(x, w)| w / (ONE - z * crate::measure::unit_phase(-1.0, 1.0, x))).sum())
}

pub(crate) fn check_disk(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk(format!("{z}")))
    }
}

/// Bound on `|μ₊(z) - Σ_{n≤order} μ̂(n) zⁿ|` from `|μ̂(n)| ≤ 1`.
pub fn cauchy_tail_bound(order: usize, radius: f64) -> f64 {
    radius.powi(order as i32 + 1) / (1.0 - radius)
}

/// Coefficients of `1/p` to the order of `p`.
///
/// Short series use the recursion `α₀ = 1/p₀`,
/// `αₙ = -(1/p₀)·Σ_{k=1}^{n} pₖ α_{n-k}`; long ones use Newton iteration with
/// FFT products. Both agree to rounding.
pub fn reciprocal_series(p: &PowerSeries) -> Result<PowerSeries> {
    if p.order() <= DIRECT_RECIPROCAL_MAX {
        reciprocal_direct(p)
    } else {
        reciprocal_newton(p)
    }
}

/// The schoolbook recursion, `O(order²)`.
pub fn reciprocal_direct(p: &PowerSeries) -> Result<PowerSeries> {
    let c = p.coefficients();
    if c[0] == ZERO || !c[0].is_finite() {
        return Err(Error::VanishingConstantTerm);
    }
    let inv0 = c[0].inv();
    let mut alpha = Vec::with_capacity(c.len());
    alpha.push(inv0);
    for n in 1..c.len() {
        let s: Complex64 = (1..=n).map(|k| c[k] * alpha[n - k]).sum();
        alpha.push(-inv0 * s);
    }
    Ok(PowerSeries::from_vec(alpha))
}

/// Newton iteration `r ← r·(2 - p·r)` doubling precision each step.
pub fn reciprocal_newton(p: &PowerSeries) -> Result<PowerSeries> {
    let c = p.coefficients();
    if c[0] == ZERO || !c[0].is_finite() {
        return Err(Error::VanishingConstantTerm);
    }
    let n = c.len();
    let mut r = vec![c[0].inv()];
    let mut len = 1;
    while len < n {
        let next = (2 * len).min(n);
        let mut t = convolve_truncated(&c[..next], &r, next);
        for v in t.iter_mut() {
            *v = -*v;
        }
        t[0] += 2.0;
        r = convolve_truncated(&r, &t, next);
        len = next;
    }
    Ok(PowerSeries::from_vec(r))
}

/// `b = 1 - 1/μ₊` from the `α` coefficients: `b₀ = 1 - α₀`, `bₙ = -αₙ`.
pub fn inner_function_series(alpha: &PowerSeries) -> PowerSeries {
    let mut b: Vec<_> = alpha.coefficients().iter().map(|a| -a).collect();
    b[0] += ONE;
    PowerSeries::from_vec(b)
}

/// `Σₙ pₙ zⁿ` by Horner's rule.
pub fn series_eval(p: &PowerSeries, z: Complex64) -> Complex64 {
    p.coefficients().iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// Cauchy product truncated at `order`.
pub fn convolve(p: &PowerSeries, q: &PowerSeries, order: usize) -> PowerSeries {
    let a = p.coefficients().len().min(order + 1);
    let b = q.coefficients().len().min(order + 1);
    if a.min(b) <= 32 || a * b <= 1 << 16 {
        convolve_direct(p, q, order)
    } else {
        PowerSeries::from_vec(convolve_truncated(p.coefficients(), q.coefficients(), order + 1))
    }
}

/// Schoolbook Cauchy product, `coefficient n = Σ_{j≤n} pⱼ q_{n-j}`.
pub fn convolve_direct(p: &PowerSeries, q: &PowerSeries, order: usize) -> PowerSeries {
    let (pc, qc) = (p.coefficients(), q.coefficients());
    let out = (0..=order)
        .map(|n| {
            let lo = n.saturating_sub(qc.len() - 1);
            let hi = n.min(pc.len() - 1);
            if lo > hi {
                ZERO
            } else {
                (lo..=hi).map(|j| pc[j] * qc[n - j]).sum()
            }
        })
        .collect();
    PowerSeries::from_vec(out)
}

/// `max_n |(p·q)ₙ - δ_{n0}|` over the common order.
pub fn unit_residual(p: &PowerSeries, q: &PowerSeries) -> f64 {
    let order = p.order().min(q.order());
    convolve(p, q, order)
        .coefficients()
        .iter()
        .enumerate()
        .map(|(n, c)| if n == 0 { (c - ONE).norm() } else { c.norm() })
        .fold(0.0, f64::max)
}

/// `μ₊`, its reciprocal `α`, and the certifying residual.
#[derive(Debug, Clone)]
pub struct CauchyInverse {
    pub mu_plus: PowerSeries,
    pub alpha: PowerSeries,
    /// `max_n |(μ₊·α)ₙ - δ_{n0}|`.
    pub residual: f64,
}

impl CauchyInverse {
    pub fn order(&self) -> usize {
        self.alpha.order()
    }

    pub fn inner_function(&self) -> PowerSeries {
        inner_function_series(&self.alpha)
    }
}

/// Computes `α` to `order` and certifies it against `μ₊`.
pub fn cauchy_inverse<M: MomentSource + ?Sized>(m: &M, order: usize) -> Result<CauchyInverse> {
    let mu_plus = cauchy_series(m, order);
    let alpha = reciprocal_series(&mu_plus)?;
    let residual = unit_residual(&mu_plus, &alpha);
    if !(residual <= RESIDUAL_LIMIT) {
        return Err(Error::ResidualTooLarge { residual, limit: RESIDUAL_LIMIT });
    }
    Ok(CauchyInverse { mu_plus, alpha, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::RandomAtomic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dirac_series_is_geometric() {
        let m = AtomicMeasure::dirac(0.0).unwrap();
        let s = cauchy_series(&m, 10);
        assert!(s.coefficients().iter().all(|&v| v == ONE));
        let alpha = reciprocal_series(&s).unwrap();
        assert_eq!(alpha[0], ONE);
        assert_eq!(alpha[1], c(-1.0, 0.0));
        assert!(alpha.coefficients()[2..].iter().all(|v| v.norm() == 0.0));
        let b = inner_function_series(&alpha);
        assert_eq!(b[0], ZERO);
        assert_eq!(b[1], ONE);
    }

    #[test]
    fn fourth_roots_give_z_to_the_four() {
        let m = AtomicMeasure::roots_of_unity(4).unwrap();
        let s = cauchy_series(&m, 16);
        for (n, v) in s.coefficients().iter().enumerate() {
            let expected = if n % 4 == 0 { 1.0 } else { 0.0 };
            assert!((v - c(expected, 0.0)).norm() < 1e-15, "n = {n}");
        }
        let alpha = reciprocal_series(&s).unwrap();
        for (n, v) in alpha.coefficients().iter().enumerate() {
            let expected = match n {
                0 => 1.0,
                4 => -1.0,
                _ => 0.0,
            };
            assert!((v - c(expected, 0.0)).norm() < 1e-14, "n = {n}");
        }
        let b = inner_function_series(&alpha);
        assert!((b[4] - ONE).norm() < 1e-14);
        assert!(b[0].norm() < 1e-15);
        assert!((cauchy_eval(&m, c(0.5, 0.0)).unwrap() - c(16.0 / 15.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn two_atom_first_coefficients() {
        let m = AtomicMeasure::new([(0.0, 0.5), (0.25, 0.5)]).unwrap();
        let s = cauchy_series(&m, 4);
        assert!((s[1] - c(0.5, -0.5)).norm() < 1e-15);
        let alpha = reciprocal_series(&s).unwrap();
        assert!((alpha[1] - c(-0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn cauchy_eval_rejects_boundary() {
        let m = AtomicMeasure::dirac(0.0).unwrap();
        assert!(cauchy_eval(&m, c(1.0, 0.0)).is_err());
        assert!(cauchy_eval(&m, c(0.6, 0.8)).is_err());
        assert!((cauchy_eval(&m, c(0.5, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn vanishing_constant_term_is_an_error() {
        let p = PowerSeries::from_real(&[0.0, 1.0]).unwrap();
        assert!(matches!(reciprocal_series(&p), Err(Error::VanishingConstantTerm)));
        assert!(matches!(reciprocal_newton(&p), Err(Error::VanishingConstantTerm)));
    }

    #[test]
    fn series_eval_basics() {
        let p = PowerSeries::from_real(&[1.0, -1.0]).unwrap();
        assert_eq!(series_eval(&p, c(0.5, 0.0)), c(0.5, 0.0));
        let q = PowerSeries::new(vec![c(0.3, -2.0), c(1.0, 1.0)]).unwrap();
        assert_eq!(series_eval(&q, ZERO), c(0.3, -2.0));
    }

    #[test]
    fn convolve_identities() {
        let p = PowerSeries::new((0..9).map(|k| c(k as f64, -(k as f64) * 0.5)).collect()).unwrap();
        assert_eq!(convolve(&p, &PowerSeries::one(0), 8), p);
        let geometric = PowerSeries::from_real(&[1.0; 12]).unwrap();
        let diff = PowerSeries::from_real(&[1.0, -1.0]).unwrap();
        assert_eq!(convolve(&diff, &geometric, 11), PowerSeries::one(11));
    }

    #[test]
    fn newton_agrees_with_recursion() {
        let m = RandomAtomic::default().sample(&mut ChaCha8Rng::seed_from_u64(5));
        let s = cauchy_series(&m, 3000);
        let a = reciprocal_direct(&s).unwrap();
        let b = reciprocal_newton(&s).unwrap();
        assert!(a.max_deviation(&b) < 1e-11, "{}", a.max_deviation(&b));
    }

    #[test]
    fn cauchy_eval_matches_series_within_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = RandomAtomic::default().sample(&mut rng);
        let s = cauchy_series(&m, 200);
        for i in 0..10 {
            for j in 0..16 {
                let r = 0.9 * i as f64 / 9.0;
                let z = Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / 16.0);
                let direct = cauchy_eval(&m, z).unwrap();
                let err = (direct - series_eval(&s, z)).norm();
                assert!(err <= cauchy_tail_bound(200, r) + 1e-12);
                assert!(direct.norm() > 0.0);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn coeffs(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Complex64>> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c(a, b)), len)
        }

        proptest! {
            #[test]
            fn horner_matches_naive(p in coeffs(1..40), re in -1.0f64..1.0, im in -1.0f64..1.0) {
                let s = PowerSeries::new(p.clone()).unwrap();
                let z = c(re, im) * 0.7;
                let naive: Complex64 = p.iter().enumerate().map(|(n, a)| a * z.powu(n as u32)).sum();
                prop_assert!((series_eval(&s, z) - naive).norm() < 1e-12);
            }

            #[test]
            fn reciprocal_is_an_involution(tail in coeffs(0..60)) {
                let mut p = vec![ONE];
                p.extend(tail.into_iter().map(|v| v * 0.3));
                let s = PowerSeries::new(p).unwrap();
                let back = reciprocal_series(&reciprocal_series(&s).unwrap()).unwrap();
                prop_assert!(back.max_deviation(&s) < 1e-9);
            }

            #[test]
            fn fft_and_direct_products_agree(p in coeffs(1..300), q in coeffs(1..300)) {
                let a = PowerSeries::new(p).unwrap();
                let b = PowerSeries::new(q).unwrap();
                let order = a.order() + b.order();
                let fast = PowerSeries::from_vec(convolve_truncated(a.coefficients(), b.coefficients(), order + 1));
                prop_assert!(fast.max_deviation(&convolve_direct(&a, &b, order)) < 1e-10);
            }
        }
    }
}
