//! RQMC ensembles over a grid of sample sizes `N = 2^m`, squared-error
//! statistics, and log-log rate fits.
//!
//! Each replicate streams the first `2^m_max` points of its scrambled net in
//! Gray-code order and records the running mean at every power of two. Every
//! such prefix is itself a net, so one pass yields the estimates for all `m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrands::{Integrand, IntegralValue, IntegrandSpec, ReferenceBudget, ReferenceValue};
use crate::net_gen::{build_sobol_matrices, digit_to_unit, GeneratorMatrixSet, Offset, DEFAULT_PRECISION};
use crate::scramble::{lms_scramble, shift_words, OwenScrambler, ScrambleKind, ScrambleSpec};

pub const DEFAULT_PERCENTILES: [f64; 5] = [1.0, 25.0, 50.0, 75.0, 99.0];

/// Default tolerance on fitted slopes.
pub const RATE_TOLERANCE: f64 = 0.35;

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
struct Sum {
    sum: f64,
    carry: f64,
}

impl Sum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Mean and unbiased (`n - 1`) variance, summed in slice order.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mut s = Sum::default();
    xs.iter().for_each(|&x| s.add(x));
    let mean = s.total() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let mut q = Sum::default();
    xs.iter().for_each(|&x| q.add((x - mean) * (x - mean)));
    (mean, q.total() / (n - 1.0))
}

/// Percentile `q` in `[0, 100]` of sorted data, linear interpolation at rank `(n - 1) q / 100`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = (sorted.len() - 1) as f64 * q / 100.0;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Running means `I_{2^k}` for `k = 0..=m_max` of one scrambled net.
pub fn prefix_estimates<F: Integrand + ?Sized>(
    f: &F,
    g: &GeneratorMatrixSet,
    m_max: u32,
    spec: &ScrambleSpec,
    offset: Offset,
) -> Result<Vec<f64>> {
    let (s, w) = (g.dim(), g.precision());
    if f.dim() != s {
        return Err(Error::Shape(format!("integrand has dimension {}, net has {s}", f.dim())));
    }
    if m_max > w {
        return Err(Error::Precision(format!("m = {m_max} exceeds precision w = {w}")));
    }
    if m_max > 40 {
        return Err(Error::Resource(format!("2^{m_max} points per replicate")));
    }
    let lms;
    let (g, shift) = match spec.kind {
        ScrambleKind::LmsShift => {
            lms = lms_scramble(g, spec)?;
            (&lms, shift_words(s, w, spec))
        }
        _ => (g, vec![0; s]),
    };
    let owen = (spec.kind == ScrambleKind::Owen).then(|| OwenScrambler::new(s, w, spec.seed, spec.replicate));
    let columns: Vec<&[u64]> = (0..s).map(|j| g.columns(j)).collect();

    let mut x = vec![0u64; s];
    let mut t = vec![0.0; s];
    let mut sum = Sum::default();
    let mut out = Vec::with_capacity(m_max as usize + 1);
    for i in 0..1u64 << m_max {
        if i > 0 {
            let c = i.trailing_zeros() as usize;
            for j in 0..s {
                x[j] ^= columns[j][c];
            }
        }
        for j in 0..s {
            let mut d = x[j] ^ shift[j];
            if let Some(o) = &owen {
                d = o.scramble(j, d);
            }
            t[j] = digit_to_unit(d, w, offset);
        }
        let v = f.value(&t);
        if !v.is_finite() {
            return Err(Error::Evaluation {
                index: i as usize,
                source: Box::new(Error::SingularPoint(format!("integrand is {v} at {t:?}"))),
            });
        }
        sum.add(v);
        if (i + 1).is_power_of_two() {
            out.push(sum.total() / (i + 1) as f64);
        }
    }
    Ok(out)
}

/// `(1/N) sum_{i<N} f(x_i)` over the scrambled `2^m`-point net.
pub fn rqmc_estimate<F: Integrand + ?Sized>(
    f: &F,
    g: &GeneratorMatrixSet,
    m: u32,
    spec: &ScrambleSpec,
    offset: Offset,
) -> Result<f64> {
    Ok(prefix_estimates(f, g, m, spec, offset)?[m as usize])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub integrand: IntegrandSpec,
    pub scramble: ScrambleKind,
    pub m_min: u32,
    pub m_max: u32,
    pub replicates: u64,
    pub seed: u64,
    pub percentiles: Vec<f64>,
    pub offset: Offset,
    pub precision: u32,
    /// Budget for the reference value when no closed form exists.
    pub reference_budget: ReferenceBudget,
}

impl ExperimentConfig {
    /// Desk-scale defaults: Owen scrambling, `m in [6, 14]`, 512 replicates.
    pub fn new(integrand: IntegrandSpec) -> Self {
        ExperimentConfig {
            integrand,
            scramble: ScrambleKind::Owen,
            m_min: 6,
            m_max: 14,
            replicates: 512,
            seed: 0,
            percentiles: DEFAULT_PERCENTILES.to_vec(),
            offset: Offset::None,
            precision: DEFAULT_PRECISION,
            reference_budget: ReferenceBudget::default(),
        }
    }

    /// 8192 replicates and `N` up to `2^25`.
    pub fn paper_scale(integrand: IntegrandSpec) -> Self {
        ExperimentConfig {
            m_max: 25,
            replicates: 8192,
            reference_budget: ReferenceBudget::paper_scale(),
            ..Self::new(integrand)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision == 0 || self.precision > 64 {
            return Err(Error::Precision(format!("precision {} outside 1..=64", self.precision)));
        }
        if self.m_min > self.m_max {
            return Err(Error::OutOfRange(format!("m_min = {} exceeds m_max = {}", self.m_min, self.m_max)));
        }
        if self.m_max > self.precision {
            return Err(Error::Precision(format!("m_max = {} exceeds precision {}", self.m_max, self.precision)));
        }
        if self.replicates < 2 {
            return Err(Error::OutOfRange("at least 2 replicates are required".into()));
        }
        if let Some(q) = self.percentiles.iter().find(|q| !(**q > 0.0 && **q < 100.0)) {
            return Err(Error::OutOfRange(format!("percentile {q} outside (0, 100)")));
        }
        Ok(())
    }
}

/// Where the value the squared errors are measured against came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provenance", rename_all = "snake_case")]
pub enum Reference {
    Exact { value: f64 },
    Rqmc(ReferenceValue),
}

impl Reference {
    pub fn value(&self) -> f64 {
        match self {
            Reference::Exact { value } => *value,
            Reference::Rqmc(r) => r.value,
        }
    }

    /// Standard error of the reference itself (0 for closed forms).
    pub fn std_error(&self) -> f64 {
        match self {
            Reference::Exact { .. } => 0.0,
            Reference::Rqmc(r) => r.std_error,
        }
    }
}

/// Closed form if available, otherwise a fresh RQMC reference.
pub fn resolve_reference(config: &ExperimentConfig) -> Result<Reference> {
    match config.integrand.exact_integral() {
        IntegralValue::Exact(value) => Ok(Reference::Exact { value }),
        IntegralValue::Reference(_) => {
            Ok(Reference::Rqmc(crate::integrands::run_reference(&config.integrand, &config.reference_budget)?))
        }
    }
}

/// Statistics for one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub m: u32,
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    /// Squared-error percentiles, aligned with the configured list.
    pub percentiles: Vec<f64>,
    pub median_squared_error: f64,
    pub mse: f64,
    pub squared_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub reference: Reference,
    pub records: Vec<Record>,
}

/// Raw estimates, `estimates[r][k]` for replicate `r` and `m = m_min + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub estimates: Vec<Vec<f64>>,
}

/// Runs the ensemble, computing the reference first if needed.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let reference = resolve_reference(config)?;
    Ok(run_ensemble_against(config, reference)?.0)
}

/// Runs the ensemble against a given reference. Replicates run in parallel;
/// results are gathered in replicate order, so the output does not depend
/// on the number of threads.
pub fn run_ensemble_against(config: &ExperimentConfig, reference: Reference) -> Result<(ExperimentResult, Ensemble)> {
    config.validate()?;
    let g = build_sobol_matrices(config.integrand.s, config.precision)?;
    let estimates = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let spec = ScrambleSpec::new(config.scramble, config.seed, r);
            let all = prefix_estimates(&config.integrand, &g, config.m_max, &spec, config.offset)?;
            Ok(all[config.m_min as usize..].to_vec())
        })
        .collect::<Result<Vec<_>>>()?;

    let target = reference.value();
    let records = (config.m_min..=config.m_max)
        .enumerate()
        .map(|(k, m)| {
            let column: Vec<f64> = estimates.iter().map(|e| e[k]).collect();
            summarize(m, &column, target, &config.percentiles)
        })
        .collect();
    let result = ExperimentResult { config: config.clone(), reference, records };
    Ok((result, Ensemble { estimates }))
}

fn summarize(m: u32, estimates: &[f64], target: f64, percentiles: &[f64]) -> Record {
    let (mean, variance) = mean_and_variance(estimates);
    let mut squared: Vec<f64> = estimates.iter().map(|e| (e - target) * (e - target)).collect();
    let (mse, _) = mean_and_variance(&squared);
    squared.sort_by(f64::total_cmp);
    Record {
        m,
        n: 1 << m,
        mean,
        variance,
        percentiles: percentiles.iter().map(|&q| percentile(&squared, q)).collect(),
        median_squared_error: percentile(&squared, 50.0),
        mse,
        squared_bias: (mean - target) * (mean - target),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    #[default]
    Median,
    Mse,
    Variance,
}

impl Statistic {
    pub fn of(&self, r: &Record) -> f64 {
        match self {
            Statistic::Median => r.median_squared_error,
            Statistic::Mse => r.mse,
            Statistic::Variance => r.variance,
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Statistic::Median => "median",
            Statistic::Mse => "mse",
            Statistic::Variance => "variance",
        })
    }
}

/// Least-squares fit of `log2(statistic)` against `m`.
///
/// `corrected_slope` is the slope after subtracting `(s - 1) log2(m)`, the
/// logarithmic factor in the variance bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub statistic: Statistic,
    pub m_min: u32,
    pub m_max: u32,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub corrected_slope: f64,
    pub corrected_intercept: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `(m, value)` pairs directly; `s` sets the log correction.
pub fn fit_points(statistic: Statistic, points: &[(u32, f64)], s: usize) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::OutOfRange(format!("rate fit needs at least 3 sample sizes, got {}", points.len())));
    }
    if let Some(&(m, _)) = points.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::ZeroStatistic { m });
    }
    let x: Vec<f64> = points.iter().map(|&(m, _)| m as f64).collect();
    let y: Vec<f64> = points.iter().map(|&(_, v)| v.log2()).collect();
    let (slope, intercept) = least_squares(&x, &y);
    let residuals = x.iter().zip(&y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let log_term = (s as f64 - 1.0).max(0.0);
    let yc: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - log_term * a.log2()).collect();
    let (corrected_slope, corrected_intercept) = least_squares(&x, &yc);
    Ok(RateFit {
        statistic,
        m_min: points[0].0,
        m_max: points[points.len() - 1].0,
        slope,
        intercept,
        residuals,
        corrected_slope,
        corrected_intercept,
    })
}

/// Fits the chosen statistic over `m_range` (inclusive; whole grid if `None`).
pub fn fit_rate(result: &ExperimentResult, statistic: Statistic, m_range: Option<(u32, u32)>) -> Result<RateFit> {
    let (lo, hi) = m_range.unwrap_or((result.config.m_min, result.config.m_max));
    let points: Vec<(u32, f64)> = result
        .records
        .iter()
        .filter(|r| (lo..=hi).contains(&r.m))
        .map(|r| (r.m, statistic.of(r)))
        .collect();
    fit_points(statistic, &points, result.config.integrand.s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub fitted: f64,
    pub predicted: f64,
    pub tolerance: f64,
    /// One-sided: `fitted <= predicted + tolerance`. Faster decay passes.
    pub pass: bool,
    /// Two-sided: `|fitted - predicted| <= tolerance`.
    pub close: bool,
}

pub fn compare_slope(fitted: f64, predicted: f64, tolerance: f64) -> Verdict {
    Verdict {
        fitted,
        predicted,
        tolerance,
        pass: fitted <= predicted + tolerance,
        close: (fitted - predicted).abs() <= tolerance,
    }
}

/// Compares a fitted slope to the predicted variance exponent of `spec`.
pub fn compare_to_prediction(fit: &RateFit, spec: &IntegrandSpec) -> Result<Verdict> {
    Ok(compare_slope(fit.slope, spec.predicted_variance_exponent()?, RATE_TOLERANCE))
}
