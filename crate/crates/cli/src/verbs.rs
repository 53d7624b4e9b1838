use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spw_core::interpolation::{ModelCandidate, Provenance};
use spw_core::io::{self, fmt_f64, ParsevalRecord, PlotRow, SeriesMeta};
use spw_core::*;

use crate::output::Output;
use crate::ExperimentConfig;

/// Largest atomic refinement a verb will build.
const ATOM_CAP: usize = 1 << 20;

pub enum Status {
    Done,
    Verdict(bool),
}

#[derive(Debug, Args)]
pub struct FunctionArgs {
    /// Test function CSV ("k,x,re,im"); a seeded random function otherwise.
    #[arg(long)]
    pub function: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParsevalArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    /// Stop at the first order whose defect is at most --tol (capped by --order).
    #[arg(long)]
    pub adaptive: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Samples CSV ("j,re,im"); otherwise samples of f̂ for the test function.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Points CSV ("re,im"); defaults to the real grid -2, -1.9, …, 2.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Reference values at the points ("re,im").
    #[arg(long)]
    pub references: Option<PathBuf>,
    #[command(flatten)]
    pub function: FunctionArgs,
    /// Truncate at the smallest order whose tail estimate is below --tol.
    #[arg(long)]
    pub adaptive: bool,
}

#[derive(Debug, Args)]
pub struct MembershipArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    /// Candidate series CSV ("n,re,im") instead of V_μ f.
    #[arg(long, conflicts_with = "adversarial")]
    pub candidate: Option<PathBuf>,
    /// Use the candidate G = b·z, which is never in the model space.
    #[arg(long)]
    pub adversarial: bool,
    #[arg(long, default_value_t = 32)]
    pub window: usize,
}

#[derive(Debug, Args)]
pub struct MomentsSolveArgs {
    /// Moment CSV ("n,re,im"); otherwise the moments of the test function.
    #[arg(long)]
    pub moments: Option<PathBuf>,
    #[command(flatten)]
    pub function: FunctionArgs,
}

#[derive(Debug, Args)]
pub struct TwoSidedArgs {
    /// Samples F(n), n ≥ 0 ("j,re,im").
    #[arg(long, requires = "negative")]
    pub positive: Option<PathBuf>,
    /// Samples conj(F(-n)), n ≥ 0 ("j,re,im").
    #[arg(long, requires = "positive")]
    pub negative: Option<PathBuf>,
    #[command(flatten)]
    pub function: FunctionArgs,
    /// Take the negative side from an unrelated random function.
    #[arg(long, conflicts_with = "positive")]
    pub mismatched: bool,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    /// Increasing positive heights.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
    pub y: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct CantorArgs {
    /// Depth of the atomic refinement compared against.
    #[arg(long, default_value_t = 12)]
    pub refine_depth: usize,
    #[arg(long, default_value_t = 32)]
    pub max_n: i64,
    /// Truncation tolerance of the moment products.
    #[arg(long, default_value_t = 1e-10)]
    pub ifs_tol: f64,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Report CSV files.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(long, default_value = "plotdata.csv")]
    pub name: String,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    verb: &'a str,
    config: &'a ExperimentConfig,
    atoms: usize,
    /// Present when the atoms come from refining an IFS measure.
    refinement_depth: Option<usize>,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).with_context(|| format!("reading {}", path.display()))
}

fn load_measure(config: &ExperimentConfig) -> Result<Measure> {
    let path = config.measure.as_deref().context("--measure is required")?;
    let spec = io::read_measure_json(&read_text(path)?).with_context(|| path.display().to_string())?;
    Ok(spec.build()?)
}

/// Loads the measure as atoms, opening the output directory and recording
/// the run configuration.
fn setup(config: &ExperimentConfig, verb: &str) -> Result<(AtomicMeasure, Output)> {
    let measure = load_measure(config)?;
    let refinement_depth = matches!(measure, Measure::Ifs(_)).then_some(config.depth);
    let m = measure.to_atomic(config.depth, ATOM_CAP)?;
    let mut out = Output::create(&config.out)?;
    out.json(&format!("{verb}_run.json"), &RunRecord { verb, config, atoms: m.len(), refinement_depth })?;
    Ok((m, out))
}

fn rng(config: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed)
}

fn test_function(m: &AtomicMeasure, args: &FunctionArgs, rng: &mut ChaCha8Rng) -> Result<MuFunction> {
    match &args.function {
        Some(path) => Ok(io::read_function_csv(open(path)?, m).with_context(|| path.display().to_string())?),
        None => Ok(MuFunction::random(m, rng)),
    }
}

fn verdict(out: &mut Output, verb: &str, report: DefectReport) -> Result<Status> {
    out.json(&format!("{verb}_verdict.json"), &report)?;
    Ok(Status::Verdict(report.verdict))
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

pub fn moments(config: &ExperimentConfig) -> Result<Status> {
    let measure = load_measure(config)?;
    let series = cauchy_series(&measure, config.order());
    let mut out = Output::create(&config.out)?;
    out.csv("moments.csv", |w| io::write_series_csv(w, &series))?;
    out.finish();
    Ok(Status::Done)
}

pub fn alpha(config: &ExperimentConfig) -> Result<Status> {
    let measure = load_measure(config)?;
    let inv = cauchy_inverse(&measure, config.order())?;
    let mut out = Output::create(&config.out)?;
    out.csv("mu_plus.csv", |w| io::write_series_csv(w, &inv.mu_plus))?;
    out.csv("alpha.csv", |w| io::write_series_csv(w, &inv.alpha))?;
    out.json("alpha.json", &SeriesMeta { order: inv.order(), residual: inv.residual })?;
    out.csv("b.csv", |w| io::write_series_csv(w, &inv.inner_function()))?;
    out.finish();
    Ok(Status::Done)
}

pub fn parseval(config: &ExperimentConfig, args: &ParsevalArgs) -> Result<Status> {
    let (m, mut out) = setup(config, "parseval")?;
    let f = test_function(&m, &args.function, &mut rng(config))?;
    let start = Instant::now();
    let (data, order) = if args.adaptive {
        let opts = AdaptiveOptions { tol: config.tol, initial_order: 64.min(config.order()), cap: config.order() };
        let run = adaptive_analysis(&mut InverseCache::new(&m), &f, opts)?;
        (run.data, run.order)
    } else {
        let inv = cauchy_inverse(&m, config.order())?;
        (analyze(&m, &f, &inv.alpha, config.order())?, config.order())
    };
    let norm = f.norm_sqr(&m);
    let curve: Vec<f64> = data.cumulative_energy().iter().map(|e| norm - e).collect();
    let wall_time = start.elapsed().as_secs_f64();
    let defect = *curve.last().expect("non-empty");

    out.csv("function.csv", |w| io::write_function_csv(w, &m, &f))?;
    out.csv("fourier.csv", |w| io::write_fourier_csv(w, &data))?;
    out.csv("parseval_curve.csv", |w| {
        io::write_table(w, &["order", "defect"], curve.iter().enumerate().map(|(n, d)| vec![n.to_string(), fmt_f64(*d)]))
    })?;
    out.json("parseval.json", &ParsevalRecord { order, defect, wall_time })?;
    let report = DefectReport::certify(defect.abs(), 0.0, order, config.tol);
    let status = verdict(&mut out, "parseval", report)?;
    out.finish();
    Ok(status)
}

pub fn kaczmarz_compare(config: &ExperimentConfig, args: &FunctionArgs) -> Result<Status> {
    let (m, mut out) = setup(config, "kaczmarz_compare")?;
    let f = test_function(&m, args, &mut rng(config))?;
    let order = config.order();
    let inv = cauchy_inverse(&m, order)?;
    let data = analyze(&m, &f, &inv.alpha, order)?;
    let targets = m.function_moments(&f, order)?;

    let mut partial = MuFunction::constant(&m, Complex64::new(0.0, 0.0));
    let mut rows = Vec::with_capacity(order + 1);
    let mut worst = 0.0f64;
    for (n, h) in KaczmarzIter::new(&m, &targets).enumerate() {
        partial = partial.add(&MuFunction::exponential(&m, n as i64).scale(data.coefficients()[n]));
        let deviation = max_of(h.values().iter().zip(partial.values()).map(|(a, b)| (a - b).norm()));
        worst = worst.max(deviation);
        rows.push(vec![n.to_string(), fmt_f64(deviation), fmt_f64(h.distance(&f, &m))]);
    }
    out.csv("kaczmarz.csv", |w| io::write_table(w, &["n", "max_deviation", "residual"], rows.into_iter()))?;
    let status = verdict(&mut out, "kaczmarz_compare", DefectReport::certify(worst, 0.0, order, config.tol))?;
    out.finish();
    Ok(status)
}

fn default_grid() -> Vec<Complex64> {
    (0..=40).map(|k| Complex64::new(-2.0 + 0.1 * k as f64, 0.0)).collect()
}

pub fn reconstruct(config: &ExperimentConfig, args: &ReconstructArgs) -> Result<Status> {
    let (m, mut out) = setup(config, "reconstruct")?;
    let mut rng = rng(config);
    let points = match &args.points {
        Some(path) => io::read_points_csv(open(path)?).with_context(|| path.display().to_string())?,
        None => default_grid(),
    };
    let (samples, f) = match &args.samples {
        Some(path) => (io::read_samples_csv(open(path)?).with_context(|| path.display().to_string())?, None),
        None => {
            let f = test_function(&m, &args.function, &mut rng)?;
            (SampleSet::of_transform(&m, &f, config.order())?, Some(f))
        }
    };
    let references = match (&args.references, &f) {
        (Some(path), _) => {
            let r = io::read_points_csv(open(path)?).with_context(|| path.display().to_string())?;
            if r.len() != points.len() {
                bail!("{} reference values for {} points", r.len(), points.len());
            }
            Some(r)
        }
        (None, Some(f)) => Some(points.iter().map(|&z| m.function_transform(f, z)).collect::<spw_core::Result<_>>()?),
        (None, None) => None,
    };

    let available = samples.max_index().min(config.order());
    let alpha = cauchy_inverse(&m, available)?.alpha;
    let order = if args.adaptive { adaptive_order(&samples, &alpha, config.tol)? } else { available };
    let mut reports = reconstruct_many(&samples, &m, &alpha, &points, order)?;
    if let Some(refs) = &references {
        for (r, &v) in reports.iter_mut().zip(refs) {
            *r = r.with_reference(v);
        }
    }
    if args.samples.is_none() {
        out.csv("samples.csv", |w| io::write_samples_csv(w, &samples))?;
    }
    out.csv("reconstruct.csv", |w| io::write_reconstruction_csv(w, &reports))?;
    let status = if references.is_some() {
        let err = max_of(reports.iter().filter_map(|r| r.error()));
        let bound = max_of(reports.iter().map(|r| r.tail_bound));
        verdict(&mut out, "reconstruct", DefectReport::certify(err, bound, order, config.tol))?
    } else {
        Status::Done
    };
    out.finish();
    Ok(status)
}

fn polar_grid(radius: f64) -> Vec<Complex64> {
    (0..10)
        .flat_map(|a| (0..16).map(move |b| Complex64::from_polar(radius * a as f64 / 9.0, TAU * b as f64 / 16.0)))
        .collect()
}

#[derive(Serialize)]
struct VmuRecord {
    order: usize,
    max_difference: f64,
    tail_bound: f64,
    series_norm: f64,
    function_norm: f64,
}

pub fn vmu(config: &ExperimentConfig, args: &FunctionArgs) -> Result<Status> {
    let (m, mut out) = setup(config, "vmu")?;
    let f = test_function(&m, args, &mut rng(config))?;
    let order = config.order();
    let inv = cauchy_inverse(&m, order)?;
    let candidate = nct_series(&m, &f, &inv.alpha, order)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for z in polar_grid(0.9) {
        let s = series_eval(candidate.series(), z);
        let q = nct_quotient(&m, &f, z)?;
        let d = (s - q).norm();
        worst = worst.max(d);
        rows.push([z.re, z.im, s.re, s.im, q.re, q.im, d].map(fmt_f64).to_vec());
    }
    let record = VmuRecord {
        order,
        max_difference: worst,
        tail_bound: candidate.tail_bound(0.9),
        series_norm: candidate.series().energy().sqrt(),
        function_norm: f.norm(&m),
    };
    out.csv("vmu_series.csv", |w| io::write_series_csv(w, candidate.series()))?;
    out.csv("vmu.csv", |w| {
        io::write_table(w, &["re_z", "im_z", "re_series", "im_series", "re_quotient", "im_quotient", "diff"], rows.into_iter())
    })?;
    out.json("vmu.json", &record)?;
    let status = verdict(&mut out, "vmu", DefectReport::certify(worst, record.tail_bound, order, config.tol))?;
    out.finish();
    Ok(status)
}

fn write_membership(out: &mut Output, name: &str, report: &MembershipReport) -> Result<()> {
    out.csv(name, |w| {
        let rows = report.coefficients.iter().enumerate().map(|(k, c)| vec![k.to_string(), fmt_f64(c.re), fmt_f64(c.im)]);
        io::write_table(w, &["m", "re", "im"], rows)
    })
}

pub fn membership(config: &ExperimentConfig, args: &MembershipArgs) -> Result<Status> {
    let (m, mut out) = setup(config, "membership")?;
    let order = config.order();
    let inv = cauchy_inverse(&m, order)?;
    let b = inv.inner_function();
    let candidate = if let Some(path) = &args.candidate {
        let series = io::read_series_csv(open(path)?).with_context(|| path.display().to_string())?;
        ModelCandidate::new(series, Provenance::External)?
    } else if args.adversarial {
        let z = PowerSeries::from_real(&[0.0, 1.0])?;
        ModelCandidate::new(convolve(&b, &z, order), Provenance::External)?
    } else {
        let f = test_function(&m, &args.function, &mut rng(config))?;
        nct_series(&m, &f, &inv.alpha, order)?
    };
    let report = toeplitz_defect(&candidate, &b, args.window)?;
    out.csv("candidate.csv", |w| io::write_series_csv(w, candidate.series()))?;
    write_membership(&mut out, "membership.csv", &report)?;
    let status = verdict(&mut out, "membership", report.certify(config.tol))?;
    out.finish();
    Ok(status)
}

#[derive(Serialize)]
struct MomentsSolveRecord {
    solved: bool,
    order: usize,
    window: usize,
    membership_defect: f64,
    membership_bound: f64,
    moment_error: Option<f64>,
}

pub fn moments_solve(config: &ExperimentConfig, args: &MomentsSolveArgs) -> Result<Status> {
    let (m, mut out) = setup(config, "moments_solve")?;
    let a = match &args.moments {
        Some(path) => io::read_series_csv(open(path)?).with_context(|| path.display().to_string())?.into_coefficients(),
        None => {
            let f = test_function(&m, &args.function, &mut rng(config))?;
            m.function_moments(&f, config.order())?
        }
    };
    let order = a.len() - 1;
    let inv = cauchy_inverse(&m, order)?;
    let outcome = solve_moment_problem(&a, &m, &inv.alpha, &inv.inner_function(), config.tol)?;
    let membership = outcome.membership().clone();
    let moment_error = match &outcome {
        MomentOutcome::Solved { function, moment_error, .. } => {
            out.csv("solution.csv", |w| io::write_function_csv(w, &m, function))?;
            Some(*moment_error)
        }
        MomentOutcome::Infeasible { moment_error, .. } => *moment_error,
    };
    write_membership(&mut out, "moments_solve_membership.csv", &membership)?;
    out.json(
        "moments_solve.json",
        &MomentsSolveRecord {
            solved: outcome.is_solved(),
            order,
            window: membership.window,
            membership_defect: membership.defect,
            membership_bound: membership.bound,
            moment_error,
        },
    )?;
    let report = DefectReport {
        verdict: outcome.is_solved(),
        defect: membership.defect.max(moment_error.unwrap_or(0.0)),
        bound: membership.bound,
        order,
    };
    let status = verdict(&mut out, "moments_solve", report)?;
    out.finish();
    Ok(status)
}

pub fn two_sided(config: &ExperimentConfig, args: &TwoSidedArgs) -> Result<Status> {
    let (m, mut out) = setup(config, "two_sided")?;
    let mut rng = rng(config);
    let (pos, neg) = match (&args.positive, &args.negative) {
        (Some(p), Some(n)) => (
            io::read_samples_csv(open(p)?).with_context(|| p.display().to_string())?,
            io::read_samples_csv(open(n)?).with_context(|| n.display().to_string())?,
        ),
        _ => {
            let f = test_function(&m, &args.function, &mut rng)?;
            let pos = SampleSet::of_transform(&m, &f, config.order())?;
            let neg = if args.mismatched {
                SampleSet::of_transform(&m, &MuFunction::random(&m, &mut rng), config.order())?
            } else {
                SampleSet::of_transform_negative(&m, &f, config.order())?
            };
            out.csv("two_sided_positive.csv", |w| io::write_samples_csv(w, &pos))?;
            out.csv("two_sided_negative.csv", |w| io::write_samples_csv(w, &neg))?;
            (pos, neg)
        }
    };
    let order = pos.max_index().min(neg.max_index());
    let inv = cauchy_inverse(&m, order)?;
    let report = two_sided_check(&pos, &neg, &m, &inv.alpha, &inv.inner_function(), config.tol)?;
    out.csv("two_sided_plus_boundary.csv", |w| io::write_function_csv(w, &m, &report.plus_boundary))?;
    out.csv("two_sided_minus_boundary.csv", |w| io::write_function_csv(w, &m, &report.minus_boundary))?;
    out.json("two_sided.json", &report)?;
    let status = verdict(&mut out, "two_sided", report.defect_report())?;
    out.finish();
    Ok(status)
}

pub fn growth(config: &ExperimentConfig, args: &GrowthArgs) -> Result<Status> {
    let (m, mut out) = setup(config, "growth")?;
    let f = test_function(&m, &args.function, &mut rng(config))?;
    let report = growth_envelope_check(&m, &f, &args.y, config.tol)?;
    out.csv("growth.csv", |w| {
        let rows = (0..report.y.len()).map(|k| {
            [report.y[k], report.ratio_pos[k], report.ratio_neg[k], report.envelope[k]].map(fmt_f64).to_vec()
        });
        io::write_table(w, &["y", "ratio_pos", "ratio_neg", "envelope"], rows)
    })?;
    out.json("growth.json", &report)?;
    let status = verdict(&mut out, "growth", report.defect_report())?;
    out.finish();
    Ok(status)
}

pub fn cantor_check(config: &ExperimentConfig, args: &CantorArgs) -> Result<Status> {
    let ifs = match config.measure {
        Some(_) => match load_measure(config)? {
            Measure::Ifs(s) => s,
            Measure::Atomic(_) => bail!("cantor-check needs an IFS measure"),
        },
        None => IfsMeasure::middle_thirds(),
    };
    if !(args.ifs_tol > 0.0) {
        bail!("--ifs-tol must be positive");
    }
    let refined = ifs.refine(args.refine_depth, ATOM_CAP << 4)?;
    let mut out = Output::create(&config.out)?;
    let mut rows = Vec::new();
    let (mut worst, mut bound) = (0.0f64, 0.0f64);
    for n in -args.max_n.abs()..=args.max_n.abs() {
        let product = ifs.moment_at(n as f64, args.ifs_tol);
        let atomic = moment(&refined, n);
        let d = (product.value - atomic).norm();
        worst = worst.max(d);
        bound = bound.max(product.bound);
        let mut row = vec![n.to_string()];
        row.extend([product.value.re, product.value.im, atomic.re, atomic.im, d, product.bound].map(fmt_f64));
        rows.push(row);
    }
    out.csv("cantor.csv", |w| {
        io::write_table(w, &["n", "re_ifs", "im_ifs", "re_atomic", "im_atomic", "diff", "bound"], rows.into_iter())
    })?;
    let status = verdict(&mut out, "cantor_check", DefectReport::certify(worst, bound, args.refine_depth, config.tol))?;
    out.finish();
    Ok(status)
}

pub fn plotdata(config: &ExperimentConfig, args: &PlotArgs) -> Result<Status> {
    let mut rows: Vec<PlotRow> = Vec::new();
    for path in &args.reports {
        if !path.is_file() {
            bail!("missing report {}", path.display());
        }
        rows.extend(io::plot_rows(open(path)?).with_context(|| path.display().to_string())?);
    }
    let mut out = Output::create(&config.out)?;
    out.csv(&args.name, |w| io::write_plotdata_csv(w, &rows))?;
    out.finish();
    Ok(Status::Done)
}
