//! Reference integrals for integrands without a closed form.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Integrand, IntegrandSpec};
use crate::error::{Error, Result};
use crate::experiment::{mean_and_variance, rqmc_estimate};
use crate::net_gen::{build_sobol_matrices, Offset, DEFAULT_PRECISION};
use crate::quadrature::{integrate_box, Tolerance};
use crate::scramble::{ScrambleKind, ScrambleSpec};

/// Largest dimension for which the tensor-quadrature cross-check runs.
pub const QUADRATURE_CHECK_MAX_DIM: usize = 3;

/// RQMC budget for a reference value: `replicates` independent scrambles of a
/// `2^m`-point net. The default is the desk-scale protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBudget {
    pub m: u32,
    pub replicates: u64,
    pub seed: u64,
    pub scramble: ScrambleKind,
    /// Target accuracy: `4 * std_error` and the quadrature discrepancy must fall below it.
    pub tolerance: f64,
}

impl Default for ReferenceBudget {
    fn default() -> Self {
        ReferenceBudget { m: 18, replicates: 4096, seed: 0, scramble: ScrambleKind::LmsShift, tolerance: 1e-6 }
    }
}

impl ReferenceBudget {
    /// The large setting: 8192 replicates of `2^25` points.
    pub fn paper_scale() -> Self {
        ReferenceBudget { m: 25, replicates: 8192, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > DEFAULT_PRECISION {
            return Err(Error::Precision(format!("reference m = {} exceeds precision {DEFAULT_PRECISION}", self.m)));
        }
        if self.replicates < 2 {
            return Err(Error::OutOfRange("reference needs at least 2 replicates".into()));
        }
        if self.scramble == ScrambleKind::None {
            return Err(Error::OutOfRange("reference replicates must be randomized".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::OutOfRange("reference tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureCheck {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    /// `|rqmc - quadrature| <= tolerance + quadrature error + 4 std_error`.
    pub agrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub spec: IntegrandSpec,
    pub value: f64,
    pub std_error: f64,
    pub budget: ReferenceBudget,
    pub quadrature: Option<QuadratureCheck>,
    /// False flags an insufficient budget for the requested tolerance.
    pub meets_tolerance: bool,
}

/// Ensemble-average RQMC reference, cross-checked against tensor quadrature
/// for dimensions up to [`QUADRATURE_CHECK_MAX_DIM`].
pub fn run_reference(spec: &IntegrandSpec, budget: &ReferenceBudget) -> Result<ReferenceValue> {
    budget.validate()?;
    let g = build_sobol_matrices(spec.s, DEFAULT_PRECISION)?;
    let estimates = (0..budget.replicates)
        .into_par_iter()
        .map(|r| rqmc_estimate(spec, &g, budget.m, &ScrambleSpec::new(budget.scramble, budget.seed, r), Offset::None))
        .collect::<Result<Vec<f64>>>()?;
    let (value, variance) = mean_and_variance(&estimates);
    let std_error = (variance / estimates.len() as f64).sqrt();

    let quadrature = (spec.s <= QUADRATURE_CHECK_MAX_DIM).then(|| {
        let r = integrate_box(
            |t| spec.value(t),
            &vec![0.0; spec.s],
            &vec![1.0; spec.s],
            spec.singularities(),
            Tolerance::new(0.1 * budget.tolerance, 1e-10),
        );
        let agrees = (value - r.value).abs() <= budget.tolerance + r.error + 4.0 * std_error;
        QuadratureCheck { value: r.value, error: r.error, converged: r.converged, agrees }
    });
    let meets_tolerance = 4.0 * std_error <= budget.tolerance && quadrature.is_none_or(|q| q.converged && q.agrees);
    Ok(ReferenceValue { spec: *spec, value, std_error, budget: *budget, quadrature, meets_tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ReferenceBudget {
        ReferenceBudget { m: 14, replicates: 32, ..Default::default() }
    }

    #[test]
    fn example2_quadratic_reference() {
        // int_0^1 v^2 (1 - v) dv over the density of t_1 + t_2 - 1 on [0, 1].
        let spec = IntegrandSpec::example2(2, 0.0).unwrap();
        let r = run_reference(&spec, &small()).unwrap();
        assert!((r.value - 1.0 / 12.0).abs() < 1e-6, "{r:?}");
        let q = r.quadrature.unwrap();
        assert!(q.converged && q.agrees);
        assert!((q.value - 1.0 / 12.0).abs() < 1e-9);
        assert!(r.meets_tolerance);
    }

    #[test]
    fn example2_one_dimensional_is_zero() {
        let r = run_reference(&IntegrandSpec::example2(1, -0.5).unwrap(), &small()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn example1_cross_check() {
        let spec = IntegrandSpec::example1(2, 0.5).unwrap();
        let r = run_reference(&spec, &ReferenceBudget { tolerance: 1e-4, ..small() }).unwrap();
        assert!((r.value - 2.0 / 9.0).abs() < 1e-4);
        assert!(r.quadrature.unwrap().agrees);
    }

    #[test]
    fn insufficient_budget_is_flagged() {
        let spec = IntegrandSpec::example1(2, 0.2).unwrap();
        let budget = ReferenceBudget { m: 4, replicates: 4, tolerance: 1e-12, ..Default::default() };
        let r = run_reference(&spec, &budget).unwrap();
        assert!(!r.meets_tolerance);
    }

    #[test]
    fn budget_validation() {
        let spec = IntegrandSpec::example2(2, 0.0).unwrap();
        for bad in [
            ReferenceBudget { m: 40, ..small() },
            ReferenceBudget { replicates: 1, ..small() },
            ReferenceBudget { scramble: ScrambleKind::None, ..small() },
            ReferenceBudget { tolerance: 0.0, ..small() },
        ] {
            assert!(run_reference(&spec, &bad).is_err());
        }
    }

    #[test]
    fn deterministic() {
        let spec = IntegrandSpec::example2(2, -0.5).unwrap();
        let b = ReferenceBudget { m: 8, replicates: 16, ..Default::default() };
        assert_eq!(run_reference(&spec, &b).unwrap(), run_reference(&spec, &b).unwrap());
    }
}
