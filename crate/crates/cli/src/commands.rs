//! Subcommand implementations. Each returns its artifacts; `main` writes them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use scrambled_nets::experiment::{
    compare_to_prediction, fit_rate, run_ensemble_against, ExperimentConfig, ExperimentResult, RateFit, Reference,
    Statistic, Verdict,
};
use scrambled_nets::integrands::{run_reference, IntegralValue, IntegrandSpec, ReferenceBudget, ReferenceValue};
use scrambled_nets::net_gen::{generate_net_ordered, to_unit_cube, DigitalPointSet};
use scrambled_nets::net_verify::{certify, quality_parameter_of, CellGrid};
use scrambled_nets::scramble::{digital_shift, lms_scramble, owen_scramble};
use scrambled_nets::variation::{bound_chain_check, dyadic_partition, kink_partition, BoundChainReport, Partition};
use scrambled_nets::{build_sobol_matrices, ScrambleKind, ScrambleSpec};
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::output::{from_json, read_file, to_json, CliResult, Failure};

/// Everything a subcommand produces.
pub struct Artifacts {
    /// Primary output: to `--out` or stdout.
    pub primary: Vec<u8>,
    /// Further files, written atomically before the primary output.
    pub extra: Vec<(PathBuf, Vec<u8>)>,
    /// Files read besides the named input.
    pub inputs: Vec<PathBuf>,
    /// Exit with this failure after writing the outputs.
    pub status: Option<Failure>,
}

impl Artifacts {
    fn new(primary: Vec<u8>) -> Self {
        Artifacts { primary, extra: Vec::new(), inputs: Vec::new(), status: None }
    }
}

pub fn execute(command: &Command) -> CliResult<Artifacts> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify(a),
        Command::Variation(a) => variation(a),
        Command::Experiment(a) => experiment(a),
        Command::Rate(a) => rate(a),
        Command::Reference(a) => reference(a),
        Command::Rerun(_) => unreachable!("reruns are resolved before dispatch"),
    }
}

/// Raw digit output of `gen`, read back by `verify`.
#[derive(Debug, Serialize, Deserialize)]
struct DigitFile {
    s: usize,
    m: u32,
    w: u32,
    digits: Vec<Vec<u64>>,
}

fn gen(a: &GenArgs) -> CliResult<Artifacts> {
    let g = build_sobol_matrices(a.dim, a.precision)?;
    let spec = ScrambleSpec::new(a.scramble.into(), a.seed, a.replicate);
    let net = match spec.kind {
        ScrambleKind::None => generate_net_ordered(&g, a.m, a.ordering.into())?,
        ScrambleKind::Owen => owen_scramble(&generate_net_ordered(&g, a.m, a.ordering.into())?, &spec)?,
        ScrambleKind::LmsShift => {
            digital_shift(&generate_net_ordered(&lms_scramble(&g, &spec)?, a.m, a.ordering.into())?, &spec)?
        }
    };
    let bytes = match a.format {
        FormatArg::Csv => {
            let mut out = String::new();
            for p in to_unit_cube(&net, a.offset.into()) {
                let row: Vec<String> = p.iter().map(f64::to_string).collect();
                writeln!(out, "{}", row.join(",")).unwrap();
            }
            out.into_bytes()
        }
        FormatArg::Json => {
            let digits = net.points().map(<[u64]>::to_vec).collect();
            to_json(&DigitFile { s: net.s, m: net.m, w: net.w, digits })
        }
    };
    Ok(Artifacts::new(bytes))
}

fn parse_csv(text: &str, path: &Path) -> CliResult<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            line.split(',')
                .map(|x| {
                    x.trim().parse::<f64>().map_err(|e| {
                        Failure::validation(format!("{}:{}: bad coordinate `{}`: {e}", path.display(), i + 1, x.trim()))
                    })
                })
                .collect()
        })
        .collect()
}

/// Exponent `m` with `base^m == n`, if any.
fn exact_log(n: usize, base: u32) -> Option<u32> {
    let (mut m, mut p) = (0u32, 1usize);
    while p < n {
        p = p.checked_mul(base as usize)?;
        m += 1;
    }
    (p == n).then_some(m)
}

fn verify(a: &VerifyArgs) -> CliResult<Artifacts> {
    let text = read_file(&a.input)?;
    let (grid, m, s) = if text.trim_start().starts_with('{') {
        let file: DigitFile = from_json(&text, &a.input)?;
        if a.base != 2 {
            return Err(Failure::validation("digit files hold base-2 digits; use --base 2"));
        }
        if a.m.is_some_and(|m| m != file.m) {
            return Err(Failure::validation(format!("--m {} disagrees with m = {} in the file", a.m.unwrap(), file.m)));
        }
        let digits = file.digits.concat();
        let p = DigitalPointSet::new(file.s, file.m, file.w, digits)?;
        (CellGrid::from_digits(&p), p.m, p.s)
    } else {
        let points = parse_csv(&text, &a.input)?;
        if points.is_empty() {
            return Err(Failure::validation(format!("{} holds no points", a.input.display())));
        }
        let m = match a.m {
            Some(m) => m,
            None => exact_log(points.len(), a.base).ok_or_else(|| {
                Failure::validation(format!("{} points is not a power of the base {}", points.len(), a.base))
            })?,
        };
        let s = points[0].len();
        (CellGrid::from_unit_cube(&points, a.base, m)?, m, s)
    };
    let t = match a.t {
        Some(t) => t,
        None => quality_parameter_of(&grid, m, s)?,
    };
    let cert = certify(&grid, t, m, s, a.max_violations)?;
    Ok(Artifacts::new(to_json(&cert)))
}

#[derive(Serialize)]
struct PartitionInfo {
    family: &'static str,
    level: u32,
    boxes: usize,
}

#[derive(Serialize)]
struct VariationReport {
    integrand: IntegrandSpec,
    #[serde(flatten)]
    report: BoundChainReport,
    partitions: Vec<PartitionInfo>,
}

fn variation(a: &VariationArgs) -> CliResult<Artifacts> {
    let spec = a.integrand.spec()?;
    let mut partitions: Vec<(PartitionInfo, Partition)> = Vec::new();
    if matches!(a.partition, PartitionArg::Dyadic | PartitionArg::Both) {
        for level in 0..=a.max_level {
            let p = dyadic_partition(spec.s, level)?;
            partitions.push((PartitionInfo { family: "dyadic", level, boxes: p.len() }, p));
        }
    }
    if matches!(a.partition, PartitionArg::Kink | PartitionArg::Both) {
        for level in 1..=a.max_level {
            let p = kink_partition(spec.s, level, 0.5)?;
            partitions.push((PartitionInfo { family: "kink", level, boxes: p.len() }, p));
        }
    }
    let (info, parts): (Vec<_>, Vec<_>) = partitions.into_iter().unzip();
    let report = bound_chain_check(&spec, a.alpha_var, &parts)?;
    Ok(Artifacts::new(to_json(&VariationReport { integrand: spec, report, partitions: info })))
}

/// Reference values keyed by integrand and budget (which includes the seed).
#[derive(Debug, Default, Serialize, Deserialize)]
struct ReferenceCache {
    entries: Vec<ReferenceValue>,
}

/// A file to write: destination and contents.
type FileUpdate = (PathBuf, Vec<u8>);

/// Looks `spec`/`budget` up in the cache, computing and adding it on a miss.
/// Returns the value and the updated cache file, if it changed.
fn cached_reference(
    spec: &IntegrandSpec,
    budget: &ReferenceBudget,
    cache: Option<&PathBuf>,
) -> CliResult<(ReferenceValue, Option<FileUpdate>)> {
    let Some(path) = cache else {
        return Ok((run_reference(spec, budget)?, None));
    };
    let mut store: ReferenceCache = if path.exists() { from_json(&read_file(path)?, path)? } else { Default::default() };
    if let Some(hit) = store.entries.iter().find(|r| r.spec == *spec && r.budget == *budget) {
        return Ok((*hit, None));
    }
    let value = run_reference(spec, budget)?;
    store.entries.push(value);
    Ok((value, Some((path.clone(), to_json(&store)))))
}

fn insufficient(r: &ReferenceValue) -> Failure {
    Failure::numerical(format!(
        "reference {} (std error {:e}) does not meet tolerance {:e}; raise the reference budget",
        r.value, r.std_error, r.budget.tolerance
    ))
}

fn experiment_config(a: &ExperimentArgs) -> CliResult<ExperimentConfig> {
    let spec = a.integrand.spec()?;
    let mut c = if a.paper_scale { ExperimentConfig::paper_scale(spec) } else { ExperimentConfig::new(spec) };
    c.scramble = a.scramble.into();
    c.m_min = a.m_min.unwrap_or(c.m_min);
    c.m_max = a.m_max.unwrap_or(c.m_max);
    c.replicates = a.replicates.unwrap_or(c.replicates);
    c.seed = a.seed;
    c.offset = a.offset.into();
    c.precision = a.precision;
    c.percentiles = a.percentiles.clone();
    let b = &mut c.reference_budget;
    b.m = a.reference.reference_m.unwrap_or(b.m);
    b.replicates = a.reference.reference_replicates.unwrap_or(b.replicates);
    b.seed = a.reference.reference_seed;
    b.tolerance = a.reference.reference_tolerance;
    c.validate()?;
    Ok(c)
}

fn errors_csv(result: &ExperimentResult, estimates: &[Vec<f64>]) -> Vec<u8> {
    let target = result.reference.value();
    let mut out = String::from("replicate");
    for r in &result.records {
        write!(out, ",m{}", r.m).unwrap();
    }
    out.push('\n');
    for (i, row) in estimates.iter().enumerate() {
        write!(out, "{i}").unwrap();
        for e in row {
            write!(out, ",{}", (e - target) * (e - target)).unwrap();
        }
        out.push('\n');
    }
    out.into_bytes()
}

fn experiment(a: &ExperimentArgs) -> CliResult<Artifacts> {
    let config = experiment_config(a)?;
    let mut extra = Vec::new();
    let mut inputs = Vec::new();
    let reference = match config.integrand.exact_integral() {
        IntegralValue::Exact(value) => Reference::Exact { value },
        IntegralValue::Reference(_) => {
            let cache = a.reference.reference_cache.as_ref();
            let (r, update) = cached_reference(&config.integrand, &config.reference_budget, cache)?;
            if !r.meets_tolerance {
                return Err(insufficient(&r));
            }
            inputs.extend(cache.cloned());
            extra.extend(update);
            Reference::Rqmc(r)
        }
    };
    let (result, ensemble) = run_ensemble_against(&config, reference)?;
    if let Some(path) = &a.errors_csv {
        extra.push((path.clone(), errors_csv(&result, &ensemble.estimates)));
    }
    Ok(Artifacts { primary: to_json(&result), extra, inputs, status: None })
}

#[derive(Serialize)]
struct Fits {
    median: Option<RateFit>,
    mse: Option<RateFit>,
    variance: Option<RateFit>,
}

#[derive(Serialize)]
struct RateReport {
    integrand: IntegrandSpec,
    statistic: Statistic,
    fit: RateFit,
    /// Comparison with the predicted exponent, when the integrand has one.
    verdict: Option<Verdict>,
    fits: Fits,
}

fn rate(a: &RateArgs) -> CliResult<Artifacts> {
    let result: ExperimentResult = from_json(&read_file(&a.input)?, &a.input)?;
    let range = match (a.m_min, a.m_max) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(result.config.m_min), hi.unwrap_or(result.config.m_max))),
    };
    let statistic: Statistic = a.statistic.into();
    let fit = fit_rate(&result, statistic, range)?;
    let verdict = compare_to_prediction(&fit, &result.config.integrand).ok();
    let each = |s| fit_rate(&result, s, range).ok();
    let fits = Fits { median: each(Statistic::Median), mse: each(Statistic::Mse), variance: each(Statistic::Variance) };
    let report = RateReport { integrand: result.config.integrand, statistic, fit, verdict, fits };
    Ok(Artifacts::new(to_json(&report)))
}

fn reference(a: &ReferenceArgs) -> CliResult<Artifacts> {
    let spec = a.integrand.spec()?;
    let base = if a.paper_scale { ReferenceBudget::paper_scale() } else { ReferenceBudget::default() };
    let budget = ReferenceBudget {
        m: a.m.unwrap_or(base.m),
        replicates: a.replicates.unwrap_or(base.replicates),
        seed: a.seed,
        scramble: a.scramble.into(),
        tolerance: a.tolerance,
    };
    let (value, update) = cached_reference(&spec, &budget, a.cache.as_ref())?;
    let mut out = Artifacts::new(to_json(&value));
    out.inputs.extend(a.cache.clone());
    out.extra.extend(update);
    if !value.meets_tolerance {
        out.status = Some(insufficient(&value));
    }
    Ok(out)
}
