//! Singular probability measures on the circle, represented on `(-1/2, 1/2)`.
//!
//! Two families are modelled: finitely atomic measures, on which `L²(μ)` is a
//! weighted sequence space, and self-similar measures generated by equal-ratio
//! contractions, which are reached through exact moment products or by
//! refinement to atoms.

use std::f64::consts::TAU;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ wₖ = 1` for probability weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Default cap on the number of atoms produced by [`IfsMeasure::refine`].
pub const DEFAULT_ATOM_CAP: usize = 1 << 16;

/// Phasors are recomputed from scratch this often when streamed.
const REANCHOR_EVERY: usize = 16;

/// `(n·x) mod 1`, reduced to `[-1/2, 1/2)`, computed without losing the low
/// bits of the product.
pub(crate) fn turns(n: f64, x: f64) -> f64 {
    let p = n * x;
    let err = n.mul_add(x, -p);
    let r = (p - p.round()) + err;
    r - r.round()
}

/// `e^{2πit}` for `t` in `[-1/2, 1/2]`, exact at multiples of `1/4`.
fn cis_turns(t: f64) -> Complex64 {
    let q = (4.0 * t).round();
    let (s, c) = (TAU * (t - 0.25 * q)).sin_cos();
    match q as i64 & 3 {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        2 => Complex64::new(-c, -s),
        _ => Complex64::new(s, -c),
    }
}

/// `e^{2πi·sign·n·x}`.
pub(crate) fn unit_phase(sign: f64, n: f64, x: f64) -> Complex64 {
    cis_turns(sign * turns(n, x))
}

/// Streams `e^{2πi·sign·n·xₖ}` for `n = 0, 1, 2, …` over fixed positions.
pub(crate) struct Phasors<'a> {
    positions: &'a [f64],
    sign: f64,
    step: Vec<Complex64>,
    current: Vec<Complex64>,
    n: usize,
}

impl<'a> Phasors<'a> {
    pub(crate) fn new(positions: &'a [f64], sign: f64) -> Self {
        Self {
            positions,
            sign,
            step: positions.iter().map(|&x| unit_phase(sign, 1.0, x)).collect(),
            current: vec![Complex64::new(1.0, 0.0); positions.len()],
            n: 0,
        }
    }

    pub(crate) fn current(&self) -> &[Complex64] {
        &self.current
    }

    pub(crate) fn advance(&mut self) {
        self.n += 1;
        if self.n % REANCHOR_EVERY == 0 {
            let n = self.n as f64;
            for (c, &x) in self.current.iter_mut().zip(self.positions) {
                *c = unit_phase(self.sign, n, x);
            }
        } else {
            for (c, s) in self.current.iter_mut().zip(&self.step) {
                *c *= s;
            }
        }
    }
}

/// `out[j] = Σₖ coeffs[k]·e^{2πi·sign·j·xₖ}` for `j = 0..=n_max`.
pub(crate) fn exponential_sums(
    positions: &[f64],
    coeffs: &[Complex64],
    n_max: usize,
    sign: f64,
) -> Vec<Complex64> {
    debug_assert_eq!(positions.len(), coeffs.len());
    let mut phasors = Phasors::new(positions, sign);
    let mut out = Vec::with_capacity(n_max + 1);
    for j in 0..=n_max {
        if j > 0 {
            phasors.advance();
        }
        let s = phasors
            .current()
            .iter()
            .zip(coeffs)
            .fold(Complex64::new(0.0, 0.0), |acc, (e, c)| acc + e * c);
        out.push(s);
    }
    out
}

/// Anything that can report integer Fourier moments `μ̂(n) = ∫ e^{-2πinx} dμ`.
pub trait MomentSource {
    fn moment(&self, n: i64) -> Complex64;

    /// `μ̂(0), …, μ̂(order)`.
    fn moments(&self, order: usize) -> Vec<Complex64> {
        (0..=order as i64).map(|n| self.moment(n)).collect()
    }
}

/// A finitely atomic probability measure.
///
/// Positions are stored in the order given; functions in `L²(μ)` index their
/// values the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    positions: Vec<f64>,
    weights: Vec<f64>,
}

/// Reduce a position modulo 1 into `[-1/2, 1/2)`.
fn reduce_position(x: f64) -> f64 {
    let r = x - (x + 0.5).floor();
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

impl AtomicMeasure {
    /// Builds a measure from `(position, weight)` pairs.
    ///
    /// Positions are reduced modulo 1; a position landing on `±1/2` is
    /// rejected rather than rotated. Weights must be positive and sum to one.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::build(atoms, false)
    }

    /// Like [`AtomicMeasure::new`] but on the half-open circle `[-1/2, 1/2)`:
    /// an atom at `1/2` is stored as `-1/2`.
    ///
    /// Even-order roots of unity need this. Such a measure violates the
    /// `μ({1/2}) = 0` convention, which only matters for growth estimates along
    /// the imaginary axis.
    pub fn on_circle(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::build(atoms, true)
    }

    fn build(atoms: impl IntoIterator<Item = (f64, f64)>, half_open: bool) -> Result<Self> {
        let mut positions = Vec::new();
        let mut weights = Vec::new();
        for (i, (x, w)) in atoms.into_iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom {i}: position {x} is not finite")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidMeasure(format!("atom {i}: weight {w} must be positive")));
            }
            let x = reduce_position(x);
            if x == -0.5 && !half_open {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i}: position lies on ±1/2; rotate the measure first"
                )));
            }
            positions.push(x);
            weights.push(w);
        }
        if positions.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let mut sorted = positions.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
            return Err(Error::InvalidMeasure(format!("duplicate atom at {}", pair[0])));
        }
        Ok(Self { positions, weights })
    }

    /// Builds a measure from positive masses, normalizing them to total one.
    pub fn normalized(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let atoms: Vec<_> = atoms.into_iter().collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        Self::new(atoms.into_iter().map(|(x, w)| (x, w / total)))
    }

    /// The point mass `δₓ`.
    pub fn dirac(x: f64) -> Result<Self> {
        Self::new([(x, 1.0)])
    }

    /// Uniform measure on the `n`-th roots of unity, i.e. on `{k/n mod 1}`.
    ///
    /// Its moments are `μ̂(j) = 1` when `n | j` and `0` otherwise.
    pub fn roots_of_unity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMeasure("need at least one root".into()));
        }
        let w = 1.0 / n as f64;
        Self::on_circle((0..n).map(|k| (k as f64 / n as f64, w)))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.positions.iter().copied().zip(self.weights.iter().copied())
    }

    /// `maxₖ |xₖ|`.
    pub fn max_abs_position(&self) -> f64 {
        self.positions.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// `f̂(j) = ∫ f e^{-2πijx} dμ` for `j = 0..=order`.
    pub fn function_moments(&self, f: &MuFunction, order: usize) -> Result<Vec<Complex64>> {
        f.check(self)?;
        let coeffs: Vec<_> = f.values.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        Ok(exponential_sums(&self.positions, &coeffs, order, -1.0))
    }

    /// `f̂(z) = ∫ f e^{-2πizx} dμ` at an arbitrary complex `z`.
    pub fn function_transform(&self, f: &MuFunction, z: Complex64) -> Result<Complex64> {
        f.check(self)?;
        Ok(self
            .atoms()
            .zip(&f.values)
            .map(|((x, w), v)| w * v * exp_neg_2pi_i(z, x))
            .sum())
    }
}

/// `e^{-2πi z x}` for complex `z` and real `x`.
pub(crate) fn exp_neg_2pi_i(z: Complex64, x: f64) -> Complex64 {
    (TAU * z.im * x).exp() * cis_turns(-turns(z.re, x))
}

impl MomentSource for AtomicMeasure {
    fn moment(&self, n: i64) -> Complex64 {
        moment(self, n)
    }

    fn moments(&self, order: usize) -> Vec<Complex64> {
        let w: Vec<_> = self.weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        exponential_sums(&self.positions, &w, order, -1.0)
    }
}

/// `μ̂(n) = Σₖ wₖ e^{-2πinxₖ}`.
pub fn moment(m: &AtomicMeasure, n: i64) -> Complex64 {
    m.atoms().map(|(x, w)| w * unit_phase(-1.0, n as f64, x)).sum()
}

/// `μ̂(z) = Σₖ wₖ e^{-2πizxₖ}` for complex `z`.
pub fn fourier_stieltjes(m: &AtomicMeasure, z: Complex64) -> Complex64 {
    m.atoms().map(|(x, w)| w * exp_neg_2pi_i(z, x)).sum()
}

/// An element of `L²(μ)` for atomic `μ`: one value per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct MuFunction {
    values: Vec<Complex64>,
}

impl MuFunction {
    pub fn new(m: &AtomicMeasure, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != m.len() {
            return Err(Error::LengthMismatch { expected: m.len(), found: values.len() });
        }
        Ok(Self { values })
    }

    pub(crate) fn from_values(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn constant(m: &AtomicMeasure, c: Complex64) -> Self {
        Self { values: vec![c; m.len()] }
    }

    /// `x ↦ e^{2πinx}` restricted to the atoms.
    pub fn exponential(m: &AtomicMeasure, n: i64) -> Self {
        Self { values: m.positions().iter().map(|&x| unit_phase(1.0, n as f64, x)).collect() }
    }

    /// Independent standard complex Gaussian values at each atom.
    pub fn random<R: Rng + ?Sized>(m: &AtomicMeasure, rng: &mut R) -> Self {
        let values = (0..m.len())
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        Self { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn conj(&self) -> Self {
        Self { values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn norm_sqr(&self, m: &AtomicMeasure) -> f64 {
        crate::sum::sum(self.values.iter().zip(m.weights()).map(|(v, w)| w * v.norm_sqr()))
    }

    pub fn norm(&self, m: &AtomicMeasure) -> f64 {
        self.norm_sqr(m).sqrt()
    }

    /// `‖self - other‖_μ`.
    pub fn distance(&self, other: &Self, m: &AtomicMeasure) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(m.weights())
            .map(|((a, b), w)| w * (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub(crate) fn check(&self, m: &AtomicMeasure) -> Result<()> {
        if self.values.len() != m.len() {
            return Err(Error::LengthMismatch { expected: m.len(), found: self.values.len() });
        }
        Ok(())
    }
}

/// `⟨f, g⟩_μ = Σₖ wₖ f(xₖ) conj(g(xₖ))`.
pub fn inner_product(m: &AtomicMeasure, f: &MuFunction, g: &MuFunction) -> Result<Complex64> {
    f.check(m)?;
    g.check(m)?;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(m.weights())
        .map(|((a, b), w)| w * a * b.conj())
        .sum())
}

/// Self-similar measure of the maps `x ↦ ratio·x + offsetⱼ` chosen with
/// probabilities `pⱼ`, supported in `[-support_bound, support_bound]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsMeasure {
    ratio: f64,
    offsets: Vec<f64>,
    probabilities: Vec<f64>,
    support_bound: f64,
}

/// Truncated moment product together with its truncation record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfsMoment {
    pub value: Complex64,
    /// Number of product factors used.
    pub depth: usize,
    /// `2π|t|·ratio^depth·support_bound`, which bounds `|μ̂ - value|`.
    pub bound: f64,
}

impl IfsMeasure {
    pub fn new(
        ratio: f64,
        offsets: Vec<f64>,
        probabilities: Vec<f64>,
        support_bound: f64,
    ) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidMeasure(format!("ratio {ratio} must lie in (0, 1)")));
        }
        if offsets.is_empty() || offsets.len() != probabilities.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} offsets but {} probabilities",
                offsets.len(),
                probabilities.len()
            )));
        }
        if probabilities.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(Error::InvalidMeasure("probabilities must be positive".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("probabilities sum to {total}, not 1")));
        }
        // Equality is allowed: the middle-thirds Cantor attractor touches ±1/2,
        // but every finite refinement stays strictly inside.
        if !(support_bound > 0.0 && support_bound <= 0.5) {
            return Err(Error::InvalidMeasure(format!(
                "support bound {support_bound} must lie in (0, 1/2]"
            )));
        }
        for &b in &offsets {
            if ratio * support_bound + b.abs() > support_bound * (1.0 + 1e-12) {
                return Err(Error::InvalidMeasure(format!(
                    "map with offset {b} does not send the support interval into itself"
                )));
            }
        }
        Ok(Self { ratio, offsets, probabilities, support_bound })
    }

    /// Middle-thirds Cantor measure on `[-1/2, 1/2]`.
    pub fn middle_thirds() -> Self {
        Self::new(1.0 / 3.0, vec![-1.0 / 3.0, 1.0 / 3.0], vec![0.5, 0.5], 0.5)
            .expect("valid IFS")
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    /// Depth-fold compositions of the maps applied to the support midpoint,
    /// with product weights. Coincident images are merged.
    pub fn refine(&self, depth: usize, cap: usize) -> Result<AtomicMeasure> {
        let branches = self.offsets.len() as u128;
        let required = branches.checked_pow(depth as u32).unwrap_or(u128::MAX);
        if required > cap as u128 {
            return Err(Error::CapExceeded { required, cap });
        }
        let mut atoms = vec![(0.0f64, 1.0f64)];
        for _ in 0..depth {
            atoms = self
                .offsets
                .iter()
                .zip(&self.probabilities)
                .flat_map(|(&b, &p)| atoms.iter().map(move |&(x, w)| (self.ratio * x + b, w * p)))
                .collect();
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(last) if (x - last.0).abs() <= 1e-15 => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        AtomicMeasure::new(merged)
    }

    fn first_factor(&self, t: f64) -> Complex64 {
        self.offsets
            .iter()
            .zip(&self.probabilities)
            .map(|(&b, &p)| p * unit_phase(-1.0, t, b))
            .sum()
    }

    /// `μ̂(t)` from the self-similarity product
    /// `μ̂(t) = (Σⱼ pⱼ e^{-2πitbⱼ})·μ̂(ratio·t)`, stopped once the first-order
    /// bound `2π|s|·support_bound` on `|μ̂(s) - 1|` drops below `tol`.
    pub fn moment_at(&self, t: f64, tol: f64) -> IfsMoment {
        let mut value = Complex64::new(1.0, 0.0);
        let mut scale = 1.0;
        let mut depth = 0;
        let bound = |scale: f64| TAU * t.abs() * scale * self.support_bound;
        while bound(scale) >= tol && scale > 0.0 {
            value *= self.first_factor(t * scale);
            scale *= self.ratio;
            depth += 1;
        }
        IfsMoment { value, depth, bound: bound(scale) }
    }
}

impl MomentSource for IfsMeasure {
    fn moment(&self, n: i64) -> Complex64 {
        self.moment_at(n as f64, 1e-15).value
    }
}

/// Either family, as read from a measure document.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Atomic(AtomicMeasure),
    Ifs(IfsMeasure),
}

impl MomentSource for Measure {
    fn moment(&self, n: i64) -> Complex64 {
        match self {
            Measure::Atomic(m) => MomentSource::moment(m, n),
            Measure::Ifs(s) => MomentSource::moment(s, n),
        }
    }

    fn moments(&self, order: usize) -> Vec<Complex64> {
        match self {
            Measure::Atomic(m) => m.moments(order),
            Measure::Ifs(s) => s.moments(order),
        }
    }
}

impl Measure {
    /// The atomic measure itself, or the depth-`depth` refinement of an IFS.
    pub fn to_atomic(&self, depth: usize, cap: usize) -> Result<AtomicMeasure> {
        match self {
            Measure::Atomic(m) => Ok(m.clone()),
            Measure::Ifs(s) => s.refine(depth, cap),
        }
    }
}

/// JSON measure document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureSpec {
    Atomic {
        atoms: Vec<[f64; 2]>,
    },
    Ifs {
        ratio: f64,
        offsets: Vec<f64>,
        probabilities: Vec<f64>,
        support_bound: f64,
    },
}

impl MeasureSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<Measure> {
        match self {
            MeasureSpec::Atomic { atoms } => {
                Ok(Measure::Atomic(AtomicMeasure::new(atoms.iter().map(|a| (a[0], a[1])))?))
            }
            MeasureSpec::Ifs { ratio, offsets, probabilities, support_bound } => Ok(Measure::Ifs(
                IfsMeasure::new(*ratio, offsets.clone(), probabilities.clone(), *support_bound)?,
            )),
        }
    }
}

impl From<&AtomicMeasure> for MeasureSpec {
    fn from(m: &AtomicMeasure) -> Self {
        MeasureSpec::Atomic { atoms: m.atoms().map(|(x, w)| [x, w]).collect() }
    }
}

/// Seeded generator for random atomic test measures.
///
/// Atoms are placed in `[-half_width, half_width]` with pairwise gaps of at
/// least `min_separation`; weights are drawn from `[min_weight, 1]` and then
/// normalized. The decay rate of the `α` coefficients is governed by how
/// close atoms are, so the separation bounds the orders the pipeline needs.
#[derive(Debug, Clone)]
pub struct RandomAtomic {
    pub atoms: RangeInclusive<usize>,
    pub half_width: f64,
    pub min_separation: f64,
    pub min_weight: f64,
}

impl Default for RandomAtomic {
    fn default() -> Self {
        Self { atoms: 2..=8, half_width: 0.45, min_separation: 0.1, min_weight: 0.5 }
    }
}

impl RandomAtomic {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> AtomicMeasure {
        let k = rng.random_range(self.atoms.clone());
        let span = 2.0 * self.half_width;
        let gaps = (k - 1) as f64 * self.min_separation;
        assert!(gaps <= span, "cannot fit {k} atoms with the requested separation");
        // Stick-breaking: k + 1 exponential pieces share the free length.
        let pieces: Vec<f64> = (0..=k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = pieces.iter().sum();
        let slack = span - gaps;
        let mut x = -self.half_width;
        let mut atoms = Vec::with_capacity(k);
        for (i, p) in pieces.iter().take(k).enumerate() {
            x += p / total * slack;
            if i > 0 {
                x += self.min_separation;
            }
            atoms.push((x, rng.random_range(self.min_weight..=1.0)));
        }
        AtomicMeasure::normalized(atoms).expect("generated atoms are valid")
    }
}
