//! Fourier series in `L²(μ)` through the Kaczmarz dual sequence.
//!
//! With `α` the Taylor coefficients of `1/μ₊` and `eₙ(x) = e^{2πinx}`, the
//! functions `gₙ = Σ_{j≤n} conj(α_{n-j}) eⱼ` satisfy
//! `f = Σ ⟨f, gₙ⟩ eₙ = Σ ⟨f, gₙ⟩ gₙ` and `‖f‖² = Σ |⟨f, gₙ⟩|²`. The
//! coefficients are computed as `⟨f, gₙ⟩ = Σ_{j≤n} α_{n-j} f̂(j)`; the
//! classical Kaczmarz iteration is kept as an independent route to the same
//! partial sums.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, MuFunction, Phasors};
use crate::sum::{sum, CompensatedSum};
use crate::transforms::{cauchy_inverse, convolve, CauchyInverse, PowerSeries};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The sequence `gₙ(x) = Σ_{j=0}^{n} conj(α_{n-j}) e^{2πijx}`.
#[derive(Debug, Clone)]
pub struct DualSequence {
    alpha: PowerSeries,
}

impl DualSequence {
    pub fn new(alpha: PowerSeries) -> Self {
        Self { alpha }
    }

    pub fn alpha(&self) -> &PowerSeries {
        &self.alpha
    }

    pub fn order(&self) -> usize {
        self.alpha.order()
    }

    /// Exponential coefficients of `gₙ`: entry `j` is `conj(α_{n-j})`.
    pub fn row(&self, n: usize) -> Result<Vec<Complex64>> {
        if n > self.order() {
            return Err(Error::OrderOverflow { requested: n, available: self.order() });
        }
        Ok((0..=n).map(|j| self.alpha[n - j].conj()).collect())
    }

    /// `gₙ` on the atoms, summed term by term from [`DualSequence::row`].
    pub fn at_atoms(&self, m: &AtomicMeasure, n: usize) -> Result<MuFunction> {
        let row = self.row(n)?;
        let values = m
            .positions()
            .iter()
            .map(|&x| {
                row.iter()
                    .enumerate()
                    .map(|(j, c)| c * crate::measure::unit_phase(1.0, j as f64, x))
                    .sum()
            })
            .collect();
        Ok(MuFunction::from_values(values))
    }

    /// Streams `g₀, g₁, …` on the atoms in `O(#atoms)` per step, using
    /// `gₙ(x) = e^{2πinx}·conj(Σ_{m≤n} αₘ e^{2πimx})`.
    pub(crate) fn stream<'a>(&'a self, m: &'a AtomicMeasure) -> DualStream<'a> {
        DualStream {
            alpha: self.alpha.coefficients(),
            phasors: Phasors::new(m.positions(), 1.0),
            partial: vec![ZERO; m.len()],
            current: vec![ZERO; m.len()],
            n: 0,
        }
    }
}

pub(crate) struct DualStream<'a> {
    alpha: &'a [Complex64],
    phasors: Phasors<'a>,
    partial: Vec<Complex64>,
    current: Vec<Complex64>,
    n: usize,
}

impl DualStream<'_> {
    /// Values of the next `gₙ` at the atoms, or `None` past the order of `α`.
    pub(crate) fn next_values(&mut self) -> Option<&[Complex64]> {
        if self.n >= self.alpha.len() {
            return None;
        }
        if self.n > 0 {
            self.phasors.advance();
        }
        let a = self.alpha[self.n];
        for ((q, g), e) in self.partial.iter_mut().zip(&mut self.current).zip(self.phasors.current()) {
            *q += a * e;
            *g = e * q.conj();
        }
        self.n += 1;
        Some(&self.current)
    }
}

/// The coefficients `⟨f, gₙ⟩`, `n = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierData {
    coefficients: Vec<Complex64>,
}

impl FourierData {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("Fourier data needs at least one coefficient".into()));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn truncated(&self, order: usize) -> Self {
        Self { coefficients: self.coefficients[..=order.min(self.order())].to_vec() }
    }

    /// Running sums `Σ_{k≤n} |cₖ|²`.
    pub fn cumulative_energy(&self) -> Vec<f64> {
        let mut acc = CompensatedSum::default();
        self.coefficients
            .iter()
            .map(|c| {
                acc.add(c.norm_sqr());
                acc.value()
            })
            .collect()
    }

    pub fn energy(&self) -> f64 {
        sum(self.coefficients.iter().map(|c| c.norm_sqr()))
    }

    pub fn as_series(&self) -> PowerSeries {
        PowerSeries::from_vec(self.coefficients.clone())
    }
}

impl From<PowerSeries> for FourierData {
    fn from(p: PowerSeries) -> Self {
        Self { coefficients: p.into_coefficients() }
    }
}

fn check_order(order: usize, alpha: &PowerSeries) -> Result<()> {
    if order > alpha.order() {
        return Err(Error::OrderOverflow { requested: order, available: alpha.order() });
    }
    Ok(())
}

/// `⟨f, gₙ⟩ = Σ_{j≤n} α_{n-j} f̂(j)` for `n = 0..=order`.
pub fn analyze(
    m: &AtomicMeasure,
    f: &MuFunction,
    alpha: &PowerSeries,
    order: usize,
) -> Result<FourierData> {
    check_order(order, alpha)?;
    let fhat = PowerSeries::from_vec(m.function_moments(f, order)?);
    Ok(convolve(alpha, &fhat, order).into())
}

/// A synthesized function and, when a reference was supplied, the residual
/// `‖f - Sₙ‖_μ` after each partial sum `Sₙ`.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub function: MuFunction,
    pub residuals: Vec<f64>,
}

fn residual(m: &AtomicMeasure, reference: &[Complex64], acc: &[Complex64]) -> f64 {
    reference
        .iter()
        .zip(acc)
        .zip(m.weights())
        .map(|((r, a), w)| w * (r - a).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `Σₙ dataₙ eₙ` on the atoms.
pub fn synthesize_exponential(
    m: &AtomicMeasure,
    data: &FourierData,
    reference: Option<&MuFunction>,
) -> Result<Synthesis> {
    if let Some(r) = reference {
        r.check(m)?;
    }
    let mut phasors = Phasors::new(m.positions(), 1.0);
    let mut acc = vec![ZERO; m.len()];
    let mut residuals = Vec::new();
    for (n, c) in data.coefficients().iter().enumerate() {
        if n > 0 {
            phasors.advance();
        }
        for (a, e) in acc.iter_mut().zip(phasors.current()) {
            *a += c * e;
        }
        if let Some(r) = reference {
            residuals.push(residual(m, r.values(), &acc));
        }
    }
    Ok(Synthesis { function: MuFunction::from_values(acc), residuals })
}

/// `Σₙ dataₙ gₙ` on the atoms.
pub fn synthesize_dual(
    m: &AtomicMeasure,
    data: &FourierData,
    alpha: &PowerSeries,
    reference: Option<&MuFunction>,
) -> Result<Synthesis> {
    check_order(data.order(), alpha)?;
    if let Some(r) = reference {
        r.check(m)?;
    }
    let dual = DualSequence::new(alpha.with_order(data.order()));
    let mut stream = dual.stream(m);
    let mut acc = vec![ZERO; m.len()];
    let mut residuals = Vec::new();
    for c in data.coefficients() {
        let g = stream.next_values().expect("α covers the data order");
        for (a, v) in acc.iter_mut().zip(g) {
            *a += c * v;
        }
        if let Some(r) = reference {
            residuals.push(residual(m, r.values(), &acc));
        }
    }
    Ok(Synthesis { function: MuFunction::from_values(acc), residuals })
}

/// `‖f‖²_μ - Σ_{n≤order} |⟨f, gₙ⟩|²` for every truncation `0..=order`.
pub fn parseval_curve(
    m: &AtomicMeasure,
    f: &MuFunction,
    alpha: &PowerSeries,
    order: usize,
) -> Result<Vec<f64>> {
    let data = analyze(m, f, alpha, order)?;
    let norm = f.norm_sqr(m);
    Ok(data.cumulative_energy().into_iter().map(|e| norm - e).collect())
}

/// `‖f‖²_μ - Σ_{n≤order} |⟨f, gₙ⟩|²`.
pub fn parseval_defect(
    m: &AtomicMeasure,
    f: &MuFunction,
    alpha: &PowerSeries,
    order: usize,
) -> Result<f64> {
    Ok(*parseval_curve(m, f, alpha, order)?.last().expect("non-empty"))
}

/// The classical (unit relaxation) Kaczmarz iteration
/// `hₙ = hₙ₋₁ + (cₙ - ⟨hₙ₋₁, eₙ⟩)·eₙ`, `h₋₁ = 0`.
pub struct KaczmarzIter<'a> {
    measure: &'a AtomicMeasure,
    targets: &'a [Complex64],
    phasors: Phasors<'a>,
    current: Vec<Complex64>,
    n: usize,
    last_update: Complex64,
}

impl<'a> KaczmarzIter<'a> {
    pub fn new(measure: &'a AtomicMeasure, targets: &'a [Complex64]) -> Self {
        Self {
            measure,
            targets,
            phasors: Phasors::new(measure.positions(), 1.0),
            current: vec![ZERO; measure.len()],
            n: 0,
            last_update: ZERO,
        }
    }

    /// The coefficient `cₙ - ⟨hₙ₋₁, eₙ⟩` of the most recent step.
    pub fn last_update(&self) -> Complex64 {
        self.last_update
    }

    fn step(&mut self) -> Option<()> {
        let target = *self.targets.get(self.n)?;
        if self.n > 0 {
            self.phasors.advance();
        }
        let e = self.phasors.current();
        let projection: Complex64 = self
            .current
            .iter()
            .zip(e)
            .zip(self.measure.weights())
            .map(|((h, e), w)| w * h * e.conj())
            .sum();
        let update = target - projection;
        for (h, e) in self.current.iter_mut().zip(e) {
            *h += update * e;
        }
        self.last_update = update;
        self.n += 1;
        Some(())
    }
}

impl Iterator for KaczmarzIter<'_> {
    type Item = MuFunction;

    fn next(&mut self) -> Option<MuFunction> {
        self.step()?;
        Some(MuFunction::from_values(self.current.clone()))
    }
}

/// Iterates `h₀, …, h_order` for target moments `c₀, …, c_order`.
pub fn kaczmarz_iterate(
    m: &AtomicMeasure,
    targets: &[Complex64],
    order: usize,
) -> Result<Vec<MuFunction>> {
    if targets.len() <= order {
        return Err(Error::InsufficientData { needed: order + 1, available: targets.len() });
    }
    Ok(KaczmarzIter::new(m, &targets[..=order]).collect())
}

/// Stopping rule for [`adaptive_analysis`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Stop at the first order whose Parseval defect is at most this.
    pub tol: f64,
    pub initial_order: usize,
    pub cap: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { tol: 1e-6, initial_order: 64, cap: 1 << 20 }
    }
}

/// Outcome of an adaptive analysis. `converged == false` means the cap was
/// hit first; `order` is then the cap.
#[derive(Debug, Clone)]
pub struct AdaptiveAnalysis {
    pub alpha: PowerSeries,
    pub data: FourierData,
    pub order: usize,
    pub defect: f64,
    pub converged: bool,
    /// Residual of the `α` computation that produced the data.
    pub residual: f64,
}

/// Computes and caches `α` for one measure, recomputing only to extend it.
pub struct InverseCache<'a> {
    measure: &'a AtomicMeasure,
    inverse: Option<CauchyInverse>,
}

impl<'a> InverseCache<'a> {
    pub fn new(measure: &'a AtomicMeasure) -> Self {
        Self { measure, inverse: None }
    }

    pub fn measure(&self) -> &'a AtomicMeasure {
        self.measure
    }

    /// An inverse of order at least `order`.
    pub fn get(&mut self, order: usize) -> Result<&CauchyInverse> {
        let stale = self.inverse.as_ref().is_none_or(|inv| inv.order() < order);
        if stale {
            self.inverse = Some(cauchy_inverse(self.measure, order)?);
        }
        Ok(self.inverse.as_ref().expect("just filled"))
    }
}

/// Doubles the order until the Parseval defect drops below `opts.tol` or the
/// cap is reached, and returns the data truncated at the stopping order.
pub fn adaptive_analysis(
    cache: &mut InverseCache<'_>,
    f: &MuFunction,
    opts: AdaptiveOptions,
) -> Result<AdaptiveAnalysis> {
    let m = cache.measure();
    let norm = f.norm_sqr(m);
    let mut order = opts.initial_order.min(opts.cap).max(1);
    loop {
        let inverse = cache.get(order)?;
        let data = analyze(m, f, &inverse.alpha, order)?;
        let energy = data.cumulative_energy();
        if let Some(n) = energy.iter().position(|e| norm - e <= opts.tol) {
            return Ok(AdaptiveAnalysis {
                alpha: inverse.alpha.with_order(n),
                data: data.truncated(n),
                order: n,
                defect: norm - energy[n],
                converged: true,
                residual: inverse.residual,
            });
        }
        if order >= opts.cap {
            return Ok(AdaptiveAnalysis {
                alpha: inverse.alpha.with_order(order),
                defect: norm - energy[order],
                data,
                order,
                converged: false,
                residual: inverse.residual,
            });
        }
        order = (2 * order).min(opts.cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{inner_product, RandomAtomic};
    use crate::transforms::cauchy_inverse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_dist(a: &MuFunction, b: &MuFunction) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn dirac_constant_function() {
        let m = AtomicMeasure::dirac(0.0).unwrap();
        let alpha = cauchy_inverse(&m, 10).unwrap().alpha;
        let f = MuFunction::constant(&m, c(2.0, -1.0));
        let data = analyze(&m, &f, &alpha, 10).unwrap();
        assert_eq!(data.coefficients()[0], c(2.0, -1.0));
        assert!(data.coefficients()[1..].iter().all(|v| v.norm() < 1e-15));
        assert_eq!(parseval_defect(&m, &f, &alpha, 0).unwrap(), 0.0);

        let exp = synthesize_exponential(&m, &data, None).unwrap().function;
        let dual = synthesize_dual(&m, &data, &alpha, None).unwrap().function;
        assert!(max_dist(&exp, &f) < 1e-15 && max_dist(&dual, &f) < 1e-15);

        let targets = vec![c(3.0, 0.0); 6];
        let iterates = kaczmarz_iterate(&m, &targets, 5).unwrap();
        assert!(iterates.iter().all(|h| (h.values()[0] - c(3.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn fourth_roots_are_exact() {
        let m = AtomicMeasure::roots_of_unity(4).unwrap();
        let alpha = cauchy_inverse(&m, 12).unwrap().alpha;
        let f = MuFunction::new(&m, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let fhat = m.function_moments(&f, 12).unwrap();
        let data = analyze(&m, &f, &alpha, 12).unwrap();
        for n in 0..=12 {
            let expected = if n < 4 { fhat[n] } else { c(0.0, 0.0) };
            assert!((data.coefficients()[n] - expected).norm() < 1e-15, "n = {n}");
        }
        assert!(parseval_defect(&m, &f, &alpha, 3).unwrap().abs() <= 1e-12);

        let exp = synthesize_exponential(&m, &data.truncated(3), Some(&f)).unwrap();
        assert!(*exp.residuals.last().unwrap() <= 1e-12);
        let dual = synthesize_dual(&m, &data, &alpha, None).unwrap().function;
        assert!(max_dist(&dual, &exp.function) < 1e-15);

        let iterates = kaczmarz_iterate(&m, &fhat, 3).unwrap();
        assert!(max_dist(&iterates[3], &f) < 1e-15);
    }

    #[test]
    fn fourth_roots_dual_family_is_orthonormal() {
        let m = AtomicMeasure::roots_of_unity(4).unwrap();
        let dual = DualSequence::new(cauchy_inverse(&m, 8).unwrap().alpha);
        let g: Vec<_> = (0..4).map(|n| dual.at_atoms(&m, n).unwrap()).collect();
        for i in 0..4 {
            for j in 0..4 {
                let v = inner_product(&m, &g[i], &g[j]).unwrap();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - c(e, 0.0)).norm() < 1e-12);
            }
        }
        for n in 4..8 {
            assert!(dual.at_atoms(&m, n).unwrap().norm(&m) < 1e-14);
        }
    }

    #[test]
    fn coefficients_match_explicit_pairings() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let gen = RandomAtomic { atoms: 5..=5, ..RandomAtomic::default() };
        let m = gen.sample(&mut rng);
        let f = MuFunction::random(&m, &mut rng);
        let alpha = cauchy_inverse(&m, 80).unwrap().alpha;
        let data = analyze(&m, &f, &alpha, 80).unwrap();
        let dual = DualSequence::new(alpha.clone());
        let mut stream = dual.stream(&m);
        for n in 0..=80 {
            let g = dual.at_atoms(&m, n).unwrap();
            let direct = inner_product(&m, &f, &g).unwrap();
            assert!((direct - data.coefficients()[n]).norm() < 1e-10, "n = {n}");
            let streamed = stream.next_values().unwrap();
            for (a, b) in streamed.iter().zip(g.values()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn residuals_decrease_and_syntheses_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = RandomAtomic::default().sample(&mut rng);
        let f = MuFunction::random(&m, &mut rng);
        let mut cache = InverseCache::new(&m);
        let run = adaptive_analysis(&mut cache, &f, AdaptiveOptions { tol: 1e-14, ..Default::default() }).unwrap();
        assert!(run.converged);
        let exp = synthesize_exponential(&m, &run.data, Some(&f)).unwrap();
        // ‖f - Sₙ‖² is exactly the Parseval defect, so it never increases.
        assert!(exp.residuals.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let dual = synthesize_dual(&m, &run.data, &run.alpha, Some(&f)).unwrap();
        assert!(exp.function.distance(&dual.function, &m) < 1e-6);
        assert!(*dual.residuals.last().unwrap() < 1e-6);
    }

    #[test]
    fn adaptive_defect_on_six_atoms() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = RandomAtomic { atoms: 6..=6, ..RandomAtomic::default() }.sample(&mut rng);
        let f = MuFunction::random(&m, &mut rng);
        let run = adaptive_analysis(&mut InverseCache::new(&m), &f, AdaptiveOptions::default()).unwrap();
        assert!(run.converged);
        assert!(run.defect <= 1e-6 && run.defect >= -1e-9);
        assert!((parseval_defect(&m, &f, &run.alpha, run.order).unwrap() - run.defect).abs() < 1e-12);
    }

    #[test]
    fn kaczmarz_matches_partial_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = RandomAtomic::default().sample(&mut rng);
        let f = MuFunction::random(&m, &mut rng);
        let order = 200;
        let alpha = cauchy_inverse(&m, order).unwrap().alpha;
        let data = analyze(&m, &f, &alpha, order).unwrap();
        let fhat = m.function_moments(&f, order).unwrap();
        let mut iter = KaczmarzIter::new(&m, &fhat);
        let mut phasors = Phasors::new(m.positions(), 1.0);
        let mut partial = vec![ZERO; m.len()];
        for n in 0..=order {
            if n > 0 {
                phasors.advance();
            }
            for (p, e) in partial.iter_mut().zip(phasors.current()) {
                *p += data.coefficients()[n] * e;
            }
            let h = iter.next().unwrap();
            assert!((iter.last_update() - data.coefficients()[n]).norm() < 1e-10);
            for (a, b) in h.values().iter().zip(&partial) {
                assert!((a - b).norm() < 1e-10, "n = {n}");
            }
        }
    }

    #[test]
    fn analysis_of_dual_synthesis_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = RandomAtomic::default().sample(&mut rng);
        let f = MuFunction::random(&m, &mut rng);
        let order = 1024;
        let alpha = cauchy_inverse(&m, order).unwrap().alpha;
        let data = analyze(&m, &f, &alpha, order).unwrap();
        let back = synthesize_dual(&m, &data, &alpha, None).unwrap().function;
        let again = analyze(&m, &back, &alpha, order).unwrap();
        let worst = data
            .coefficients()
            .iter()
            .zip(again.coefficients())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn order_overflow_is_reported() {
        let m = AtomicMeasure::dirac(0.1).unwrap();
        let alpha = cauchy_inverse(&m, 4).unwrap().alpha;
        let f = MuFunction::constant(&m, c(1.0, 0.0));
        assert!(matches!(analyze(&m, &f, &alpha, 5), Err(Error::OrderOverflow { .. })));
        let data = FourierData::new(vec![c(1.0, 0.0); 6]).unwrap();
        assert!(matches!(synthesize_dual(&m, &data, &alpha, None), Err(Error::OrderOverflow { .. })));
        assert!(matches!(kaczmarz_iterate(&m, &[c(1.0, 0.0)], 3), Err(Error::InsufficientData { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn bessel_bound_holds(seed in 0u64..10_000, order in 1usize..300) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = RandomAtomic::default().sample(&mut rng);
                let f = MuFunction::random(&m, &mut rng);
                let alpha = cauchy_inverse(&m, order).unwrap().alpha;
                let curve = parseval_curve(&m, &f, &alpha, order).unwrap();
                prop_assert!(curve.iter().all(|&d| d >= -1e-9));
                prop_assert!(curve.windows(2).all(|w| w[1] <= w[0]));
            }
        }
    }
}
