//! Test integrands with kinks, their weak mixed derivatives, and the
//! integrability exponents that govern scrambled-net variance rates.
//!
//! * `example1`: `f(t) = prod_j |t_j - 1/2|^alpha`, `alpha > 0`. Kinks lie on
//!   the axis-parallel planes `t_j = 1/2`.
//! * `example2`: `f(t) = max(sum_j t_j - 1, 0)^(s + alpha)`, `alpha > -1`.
//!   The kink is the hyperplane `sum_j t_j = 1`.
//! * `smooth_product`: `f(t) = prod_j t_j`, mixed derivative identically 1.
//!
//! If the mixed derivative `d^{1:s} f` lies in `L^p` for some `1 <= p <= 2`,
//! the scrambled-net variance decays like `N^(-4 + 2/p)` up to logarithmic
//! factors. For `example1` the derivative is in `L^p` exactly for
//! `p < 1/(1 - alpha)`, for `example2` for `p < -1/alpha`.

mod reference;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Singularities, Tolerance};

pub use reference::{run_reference, QuadratureCheck, ReferenceBudget, ReferenceValue};

/// Something that can be integrated and differentiated once in every coordinate.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;

    /// `f(t)`; `t` has length [`Integrand::dim`].
    fn value(&self, t: &[f64]) -> f64;

    /// Weak mixed derivative `d^{1:s} f (t)`. Errors on the kink locus.
    fn mixed_derivative(&self, t: &[f64]) -> Result<f64>;

    /// [`Integrand::mixed_derivative`] at `t = c + u`. Integrands with kinks
    /// on the planes `t_j = c` override this to work in `u` directly, so
    /// offsets below the float spacing at `c` stay distinct.
    fn mixed_derivative_centered(&self, c: f64, u: &[f64]) -> Result<f64> {
        let t: Vec<f64> = u.iter().map(|x| c + x).collect();
        self.mixed_derivative(&t)
    }

    fn singularities(&self) -> Singularities {
        Singularities::None
    }

    /// Whether `|d^{1:s} f|^p` is integrable over the box `[lo, hi]`.
    fn local_norm_finite(&self, _lo: &[f64], _hi: &[f64], _p: f64) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Example1,
    Example2,
    SmoothProduct,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Example1 => "example1",
            Family::Example2 => "example2",
            Family::SmoothProduct => "smooth_product",
        })
    }
}

/// `prod_j alpha sign(u_j) |u_j|^(alpha - 1)` for `u_j = t_j - 1/2`.
fn example1_derivative(alpha: f64, u: impl Iterator<Item = f64>) -> Result<f64> {
    let mut d = 1.0;
    for (j, u) in u.enumerate() {
        if u == 0.0 {
            return Err(Error::SingularPoint(format!("t_{j} = 1/2 lies on the kink locus")));
        }
        d *= alpha * u.signum() * u.abs().powf(alpha - 1.0);
    }
    Ok(d)
}

/// One built-in integrand. `alpha` is unused (and zero) for `smooth_product`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrandSpec {
    pub family: Family,
    pub s: usize,
    pub alpha: f64,
}

impl IntegrandSpec {
    pub fn new(family: Family, s: usize, alpha: f64) -> Result<Self> {
        if s == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        match family {
            Family::Example1 if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::OutOfRange(format!("example1 requires alpha > 0, got {alpha}")))
            }
            Family::Example2 if !(alpha > -1.0 && alpha.is_finite()) => {
                Err(Error::OutOfRange(format!("example2 requires alpha > -1, got {alpha}")))
            }
            Family::SmoothProduct => Ok(IntegrandSpec { family, s, alpha: 0.0 }),
            _ => Ok(IntegrandSpec { family, s, alpha }),
        }
    }

    pub fn example1(s: usize, alpha: f64) -> Result<Self> {
        Self::new(Family::Example1, s, alpha)
    }

    pub fn example2(s: usize, alpha: f64) -> Result<Self> {
        Self::new(Family::Example2, s, alpha)
    }

    pub fn smooth_product(s: usize) -> Result<Self> {
        Self::new(Family::SmoothProduct, s, 0.0)
    }

    /// Checked evaluation.
    pub fn evaluate(&self, t: &[f64]) -> Result<f64> {
        self.check_shape(t)?;
        Ok(self.value(t))
    }

    /// Checked weak mixed derivative.
    pub fn weak_derivative(&self, t: &[f64]) -> Result<f64> {
        self.check_shape(t)?;
        self.mixed_derivative(t)
    }

    fn check_shape(&self, t: &[f64]) -> Result<()> {
        if t.len() == self.s {
            Ok(())
        } else {
            Err(Error::Shape(format!("point has {} coordinates, integrand has {}", t.len(), self.s)))
        }
    }

    /// Closed-form integral, or a pointer to the reference procedure.
    pub fn exact_integral(&self) -> IntegralValue {
        let s = self.s as i32;
        match self.family {
            Family::Example1 => {
                IntegralValue::Exact(1.0 / (2f64.powf(self.alpha * s as f64) * (self.alpha + 1.0).powi(s)))
            }
            Family::SmoothProduct => IntegralValue::Exact(0.5f64.powi(s)),
            _ if self.s == 1 => IntegralValue::Exact(0.0),
            Family::Example2 => IntegralValue::Reference(ReferenceDescriptor {
                spec: *self,
                budget: ReferenceBudget::default(),
            }),
        }
    }

    /// `||d^{1:s} f||_p` over the unit cube; `+inf` when not integrable.
    pub fn lp_norm_derivative(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::OutOfRange(format!("p must be at least 1, got {p}")));
        }
        let a = self.alpha;
        match self.family {
            Family::SmoothProduct => Ok(1.0),
            Family::Example1 => {
                let e = (a - 1.0) * p + 1.0;
                if e <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                let one_dim = a.powf(p) * 2.0 * 0.5f64.powf(e) / e;
                Ok(one_dim.powf(self.s as f64 / p))
            }
            Family::Example2 => {
                if self.s == 1 {
                    return Ok(0.0);
                }
                let gamma = a * p;
                if gamma <= -1.0 {
                    return Ok(f64::INFINITY);
                }
                let moment = truncated_power_moment(self.s, gamma)?;
                Ok(example2_derivative_constant(self.s, a) * moment.powf(1.0 / p))
            }
        }
    }

    /// Supremum of the `p` for which `d^{1:s} f` is in `L^p` (may be `+inf`).
    pub fn integrability_threshold(&self) -> f64 {
        match self.family {
            Family::SmoothProduct => f64::INFINITY,
            Family::Example1 if self.alpha >= 1.0 => f64::INFINITY,
            Family::Example1 => 1.0 / (1.0 - self.alpha),
            Family::Example2 if self.alpha >= 0.0 || self.s == 1 => f64::INFINITY,
            Family::Example2 => -1.0 / self.alpha,
        }
    }

    /// Critical integrability exponent on the parameter ranges where the
    /// variance-rate claim applies: `0 < alpha <= 1/2` for `example1`,
    /// `-1 < alpha <= -1/2` for `example2`.
    pub fn critical_exponent(&self) -> Result<f64> {
        self.check_claim_range()?;
        Ok(self.integrability_threshold())
    }

    /// Predicted exponent of `N` in the estimator variance (ignoring `epsilon`
    /// and log factors). Equals `-4 + 2 / critical_exponent()`.
    pub fn predicted_variance_exponent(&self) -> Result<f64> {
        self.check_claim_range()?;
        Ok(match self.family {
            Family::Example1 => -2.0 - 2.0 * self.alpha,
            _ => -4.0 - 2.0 * self.alpha,
        })
    }

    fn check_claim_range(&self) -> Result<()> {
        let a = self.alpha;
        match self.family {
            Family::Example1 if a > 0.0 && a <= 0.5 => Ok(()),
            Family::Example2 if a > -1.0 && a <= -0.5 => Ok(()),
            Family::SmoothProduct => Err(Error::OutOfRange("smooth_product has no critical exponent".into())),
            f => Err(Error::OutOfRange(format!("{f} with alpha = {a} is outside the range of the rate claim"))),
        }
    }
}

impl Integrand for IntegrandSpec {
    fn dim(&self) -> usize {
        self.s
    }

    #[inline]
    fn value(&self, t: &[f64]) -> f64 {
        match self.family {
            Family::Example1 => t.iter().map(|&x| (x - 0.5).abs().powf(self.alpha)).product(),
            Family::Example2 => {
                let excess = t.iter().sum::<f64>() - 1.0;
                if excess > 0.0 {
                    excess.powf(self.s as f64 + self.alpha)
                } else {
                    0.0
                }
            }
            Family::SmoothProduct => t.iter().product(),
        }
    }

    fn mixed_derivative(&self, t: &[f64]) -> Result<f64> {
        let a = self.alpha;
        match self.family {
            Family::SmoothProduct => Ok(1.0),
            Family::Example1 => example1_derivative(a, t.iter().map(|x| x - 0.5)),
            Family::Example2 => {
                let excess = t.iter().sum::<f64>() - 1.0;
                if excess == 0.0 {
                    return Err(Error::SingularPoint("sum of coordinates equals 1".into()));
                }
                if excess < 0.0 {
                    return Ok(0.0);
                }
                Ok(example2_derivative_constant(self.s, a) * excess.powf(a))
            }
        }
    }

    fn mixed_derivative_centered(&self, c: f64, u: &[f64]) -> Result<f64> {
        if self.family == Family::Example1 && c == 0.5 {
            return example1_derivative(self.alpha, u.iter().copied());
        }
        let t: Vec<f64> = u.iter().map(|x| c + x).collect();
        self.mixed_derivative(&t)
    }

    fn singularities(&self) -> Singularities {
        match self.family {
            Family::Example1 => Singularities::AxisPlanes(0.5),
            Family::Example2 => Singularities::Hyperplane(1.0),
            Family::SmoothProduct => Singularities::None,
        }
    }

    fn local_norm_finite(&self, lo: &[f64], hi: &[f64], p: f64) -> bool {
        match self.family {
            Family::SmoothProduct => true,
            Family::Example1 => {
                (self.alpha - 1.0) * p > -1.0 || lo.iter().zip(hi).all(|(&a, &b)| !(a <= 0.5 && 0.5 <= b))
            }
            Family::Example2 => {
                let gamma = self.alpha * p;
                let (smin, smax): (f64, f64) = (lo.iter().sum(), hi.iter().sum());
                if self.s == 1 || gamma > -1.0 || smax <= 1.0 || smin > 1.0 {
                    true
                } else if smin == 1.0 {
                    // Only the corner touches the kink; the simplex volume near it scales like u^s.
                    gamma > -(self.s as f64)
                } else {
                    false
                }
            }
        }
    }
}

/// `prod_{k=1}^{s} (alpha + k)`, the constant in the mixed derivative of `example2`.
pub fn example2_derivative_constant(s: usize, alpha: f64) -> f64 {
    (1..=s).map(|k| alpha + k as f64).product()
}

/// Irwin–Hall density: the density of a sum of `s` independent uniforms.
pub fn irwin_hall_density(s: usize, v: f64) -> f64 {
    if v <= 0.0 || v >= s as f64 {
        return 0.0;
    }
    let n = s as i32 - 1;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for k in 0..=v.floor() as usize {
        if k > 0 {
            binom *= (s - k + 1) as f64 / k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * (v - k as f64).powi(n);
    }
    let factorial: f64 = (1..s).map(|k| k as f64).product();
    sum / factorial
}

/// `E[max(S - 1, 0)^gamma]` for `S` a sum of `s` uniforms, by one-dimensional
/// quadrature against the Irwin–Hall density. `gamma > -1`.
///
/// With `u = S - 1` the endpoint factor `u^gamma` on `[0, 1]` is removed by
/// the substitution `u = x^(1/(1+gamma))`; the rest is smooth between integers.
pub fn truncated_power_moment(s: usize, gamma: f64) -> Result<f64> {
    if gamma <= -1.0 {
        return Err(Error::OutOfRange(format!("moment diverges for gamma = {gamma}")));
    }
    if s < 2 {
        return Ok(0.0);
    }
    let tol = Tolerance::new(1e-15, 1e-13);
    let k = 1.0 / (1.0 + gamma);
    let near = quadrature::integrate(|x: f64| irwin_hall_density(s, 1.0 + x.powf(k)), 0.0, 1.0, &[], tol);
    let breaks: Vec<f64> = (2..s - 1).map(|i| i as f64).collect();
    let far = quadrature::integrate(
        |u: f64| u.powf(gamma) * irwin_hall_density(s, 1.0 + u),
        1.0,
        (s - 1) as f64,
        &breaks,
        tol,
    );
    if !near.converged || !far.converged {
        return Err(Error::NonConvergence(format!(
            "Irwin-Hall moment for s = {s}, gamma = {gamma} (error {:.3e})",
            near.error + far.error
        )));
    }
    Ok(near.value / (1.0 + gamma) + far.value)
}

/// Integral of a built-in integrand: either known in closed form or to be
/// estimated by [`run_reference`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralValue {
    Exact(f64),
    Reference(ReferenceDescriptor),
}

impl IntegralValue {
    pub fn exact(&self) -> Option<f64> {
        match self {
            IntegralValue::Exact(v) => Some(*v),
            IntegralValue::Reference(_) => None,
        }
    }
}

/// Directs a caller to compute a reference value with the given default budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDescriptor {
    pub spec: IntegrandSpec,
    pub budget: ReferenceBudget,
}

/// Variation parameter `alpha_var in [1/2, 1]`, integrability exponent
/// `p = 2 / (3 - 2 alpha_var) in [1, 2]`, and the variance exponent
/// `-(1 + 2 alpha_var) = -4 + 2/p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParameters {
    pub p: f64,
    pub alpha_var: f64,
    pub predicted_exponent: f64,
}

impl RateParameters {
    pub fn from_alpha_var(alpha_var: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&alpha_var) {
            return Err(Error::OutOfRange(format!("alpha_var must lie in [1/2, 1], got {alpha_var}")));
        }
        Ok(RateParameters {
            p: 2.0 / (3.0 - 2.0 * alpha_var),
            alpha_var,
            predicted_exponent: -(1.0 + 2.0 * alpha_var),
        })
    }

    pub fn from_p(p: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::OutOfRange(format!("p must lie in [1, 2], got {p}")));
        }
        Ok(RateParameters { p, alpha_var: 1.5 - 1.0 / p, predicted_exponent: -4.0 + 2.0 / p })
    }
}

/// The constant function; handy for sanity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    pub s: usize,
    pub c: f64,
}

impl Integrand for Constant {
    fn dim(&self) -> usize {
        self.s
    }

    fn value(&self, _t: &[f64]) -> f64 {
        self.c
    }

    fn mixed_derivative(&self, _t: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prf::{Purpose, StreamKey};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn evaluate_examples() {
        for s in 1..5 {
            let f = IntegrandSpec::example1(s, 0.7).unwrap();
            assert_eq!(f.evaluate(&vec![0.5; s]).unwrap(), 0.0);
        }
        let f = IntegrandSpec::example2(2, 0.0).unwrap();
        assert_eq!(f.evaluate(&[1.0, 1.0]).unwrap(), 1.0);
        let f = IntegrandSpec::example1(2, 0.5).unwrap();
        assert!(close(f.evaluate(&[0.0, 0.0]).unwrap(), 0.5, 1e-15));
        let f = IntegrandSpec::smooth_product(3).unwrap();
        assert_eq!(f.evaluate(&[0.5, 0.5, 0.5]).unwrap(), 0.125);
        assert!(matches!(f.evaluate(&[0.5]), Err(Error::Shape(_))));
    }

    #[test]
    fn parameter_ranges() {
        assert!(IntegrandSpec::example1(2, 0.0).is_err());
        assert!(IntegrandSpec::example1(2, -0.5).is_err());
        assert!(IntegrandSpec::example2(2, -1.0).is_err());
        assert!(IntegrandSpec::example2(2, -0.99).is_ok());
        assert!(IntegrandSpec::smooth_product(0).is_err());
        assert_eq!(IntegrandSpec::new(Family::SmoothProduct, 2, 3.0).unwrap().alpha, 0.0);
    }

    #[test]
    fn exact_integrals() {
        let v = |f: IntegrandSpec| f.exact_integral().exact().unwrap();
        assert!(close(v(IntegrandSpec::example1(1, 1.0).unwrap()), 0.25, 1e-15));
        assert!(close(v(IntegrandSpec::example1(2, 0.5).unwrap()), 2.0 / 9.0, 1e-15));
        assert_eq!(v(IntegrandSpec::example2(1, -0.3).unwrap()), 0.0);
        assert_eq!(v(IntegrandSpec::smooth_product(3).unwrap()), 0.125);
        assert!(matches!(
            IntegrandSpec::example2(2, 0.0).unwrap().exact_integral(),
            IntegralValue::Reference(_)
        ));
    }

    #[test]
    fn weak_derivative_examples() {
        let f = IntegrandSpec::smooth_product(4).unwrap();
        assert_eq!(f.weak_derivative(&[0.1, 0.2, 0.3, 0.4]).unwrap(), 1.0);
        let f = IntegrandSpec::example1(1, 0.5).unwrap();
        assert!(close(f.weak_derivative(&[0.75]).unwrap(), 1.0, 1e-15));
        assert!(close(f.weak_derivative(&[0.25]).unwrap(), -1.0, 1e-15));
        let f = IntegrandSpec::example2(2, 0.0).unwrap();
        assert_eq!(f.weak_derivative(&[0.9, 0.9]).unwrap(), 2.0);
        assert_eq!(f.weak_derivative(&[0.2, 0.3]).unwrap(), 0.0);
    }

    #[test]
    fn kink_evaluations_are_errors() {
        let f = IntegrandSpec::example1(2, 0.5).unwrap();
        assert!(matches!(f.weak_derivative(&[0.5, 0.2]), Err(Error::SingularPoint(_))));
        let f = IntegrandSpec::example2(2, -0.5).unwrap();
        assert!(matches!(f.weak_derivative(&[0.25, 0.75]), Err(Error::SingularPoint(_))));
        // f itself is finite there.
        assert_eq!(f.evaluate(&[0.25, 0.75]).unwrap(), 0.0);
    }

    #[test]
    fn lp_norm_examples() {
        let f = IntegrandSpec::example1(1, 0.5).unwrap();
        assert!(close(f.lp_norm_derivative(1.0).unwrap(), 2f64.sqrt(), 1e-14));
        assert_eq!(f.lp_norm_derivative(2.0).unwrap(), f64::INFINITY);
        assert_eq!(IntegrandSpec::smooth_product(3).unwrap().lp_norm_derivative(2.0).unwrap(), 1.0);
        assert!(IntegrandSpec::smooth_product(3).unwrap().lp_norm_derivative(0.5).is_err());
        // example2 with alpha = 0: derivative is 2 on the upper triangle of area 1/2.
        let f = IntegrandSpec::example2(2, 0.0).unwrap();
        for p in [1.0, 1.5, 2.0] {
            assert!(close(f.lp_norm_derivative(p).unwrap(), 2.0 * 0.5f64.powf(1.0 / p), 1e-12));
        }
        assert_eq!(IntegrandSpec::example2(2, -0.5).unwrap().lp_norm_derivative(2.0).unwrap(), f64::INFINITY);
        assert_eq!(IntegrandSpec::example2(1, -0.5).unwrap().lp_norm_derivative(2.0).unwrap(), 0.0);
    }

    /// `E[(S - 1)_+^g]` by repeated integration of the truncated power:
    /// `Gamma(g+1)/Gamma(g+s+1) * sum_k (-1)^(s-k) C(s,k) (k-1)_+^(g+s)`.
    fn truncated_power_moment_by_differences(s: usize, g: f64) -> f64 {
        let mut sum = 0.0;
        let mut binom = 1.0;
        for k in 0..=s {
            if k > 0 {
                binom *= (s - k + 1) as f64 / k as f64;
            }
            let sign = if (s - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            let base = k as f64 - 1.0;
            if base > 0.0 {
                sum += sign * binom * base.powf(g + s as f64);
            }
        }
        // Gamma(g+1)/Gamma(g+s+1) = 1 / prod_{i=1}^{s} (g + i)
        sum / (1..=s).map(|i| g + i as f64).product::<f64>()
    }

    #[test]
    fn irwin_hall_moment_matches_finite_differences() {
        for s in 2..=5 {
            for g in [-0.95, -0.7, -0.5, -0.2, 0.0, 0.4, 1.0, 2.5] {
                let q = truncated_power_moment(s, g).unwrap();
                let d = truncated_power_moment_by_differences(s, g);
                assert!(close(q, d, 1e-10), "s={s} g={g}: {q} vs {d}");
            }
        }
        // Density integrates to 1.
        for s in 2..=6 {
            let r = quadrature::integrate(
                |v| irwin_hall_density(s, v),
                0.0,
                s as f64,
                &(1..s).map(|k| k as f64).collect::<Vec<_>>(),
                Tolerance::default(),
            );
            assert!(close(r.value, 1.0, 1e-12));
        }
    }

    #[test]
    fn critical_and_predicted_exponents() {
        let e1 = |a| IntegrandSpec::example1(2, a).unwrap();
        let e2 = |a| IntegrandSpec::example2(2, a).unwrap();
        assert_eq!(e1(0.5).critical_exponent().unwrap(), 2.0);
        assert_eq!(e2(-0.5).critical_exponent().unwrap(), 2.0);
        assert!(close(e2(-0.9).critical_exponent().unwrap(), 10.0 / 9.0, 1e-15));
        assert_eq!(e1(0.5).predicted_variance_exponent().unwrap(), -3.0);
        assert_eq!(e2(-0.5).predicted_variance_exponent().unwrap(), -3.0);
        assert!(close(e1(0.2).predicted_variance_exponent().unwrap(), -2.4, 1e-15));
        assert!(e1(0.6).critical_exponent().is_err());
        assert!(e2(-0.4).predicted_variance_exponent().is_err());
        assert!(IntegrandSpec::smooth_product(2).unwrap().critical_exponent().is_err());
        // Consistency with -4 + 2/p.
        for f in [e1(0.5), e1(1.0 / 3.0), e1(0.2), e2(-0.5), e2(-0.7), e2(-0.9)] {
            let p = f.critical_exponent().unwrap();
            let pred = f.predicted_variance_exponent().unwrap();
            assert!((pred - (-4.0 + 2.0 / p)).abs() < 1e-14, "{f:?}");
        }
    }

    #[test]
    fn rate_parameters() {
        let r = RateParameters::from_alpha_var(0.5).unwrap();
        assert_eq!((r.p, r.predicted_exponent), (1.0, -2.0));
        let r = RateParameters::from_alpha_var(1.0).unwrap();
        assert_eq!((r.p, r.predicted_exponent), (2.0, -3.0));
        let r = RateParameters::from_p(1.5).unwrap();
        assert!(close(r.alpha_var, 5.0 / 6.0, 1e-15));
        assert!(close(r.predicted_exponent, -(1.0 + 2.0 * r.alpha_var), 1e-15));
        assert!(RateParameters::from_alpha_var(0.4).is_err());
        assert!(RateParameters::from_p(2.5).is_err());
    }

    /// Central mixed difference in all coordinates with one Richardson step.
    fn mixed_difference(f: &IntegrandSpec, t: &[f64], h: f64) -> f64 {
        let raw = |h: f64| {
            let s = t.len();
            let mut acc = 0.0;
            let mut x = t.to_vec();
            for mask in 0..1u32 << s {
                let mut sign = 1.0;
                for j in 0..s {
                    if mask >> j & 1 == 1 {
                        x[j] = t[j] + h;
                    } else {
                        x[j] = t[j] - h;
                        sign = -sign;
                    }
                }
                acc += sign * f.value(&x);
            }
            acc / (2.0 * h).powi(s as i32)
        };
        // Leading error is O(h^2) in every coordinate.
        (4.0 * raw(h / 2.0) - raw(h)) / 3.0
    }

    #[test]
    fn weak_derivative_matches_finite_differences() {
        let key = StreamKey::new(3, 0, Purpose::Uniform, 0);
        let mut counter = 0;
        let mut next = || {
            counter += 1;
            key.uniform(counter)
        };
        let specs = [
            IntegrandSpec::example1(1, 0.5).unwrap(),
            IntegrandSpec::example1(2, 1.0 / 3.0).unwrap(),
            IntegrandSpec::example1(3, 1.5).unwrap(),
            IntegrandSpec::example2(2, -0.5).unwrap(),
            IntegrandSpec::example2(3, 0.3).unwrap(),
            IntegrandSpec::smooth_product(3).unwrap(),
        ];
        for f in specs {
            let mut tested = 0;
            while tested < 40 {
                let t: Vec<f64> = (0..f.s).map(|_| next()).collect();
                // Stay 0.1 away from kinks so the difference stencil never straddles one.
                let far = match f.family {
                    Family::Example1 => t.iter().all(|x| (x - 0.5).abs() > 0.1),
                    Family::Example2 => t.iter().sum::<f64>() - 1.0 > 0.1,
                    Family::SmoothProduct => true,
                };
                if !far {
                    continue;
                }
                tested += 1;
                let h = if f.s == 1 { 1e-6 } else { 2e-3 };
                let fd = mixed_difference(&f, &t, h);
                let exact = f.mixed_derivative(&t).unwrap();
                assert!(close(fd, exact, 1e-5), "{f:?} at {t:?}: {fd} vs {exact}");
            }
        }
    }

    proptest! {
        #[test]
        fn example1_is_reflection_symmetric(
            t in proptest::collection::vec(0.0f64..=1.0, 3),
            j in 0usize..3,
            alpha in 0.05f64..2.0,
        ) {
            let f = IntegrandSpec::example1(3, alpha).unwrap();
            let mut r = t.clone();
            r[j] = 1.0 - r[j];
            let (a, b) = (f.value(&t), f.value(&r));
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn local_norm_finiteness() {
        let f = IntegrandSpec::example1(2, 0.5).unwrap();
        assert!(f.local_norm_finite(&[0.6, 0.6], &[0.9, 0.9], 2.0));
        assert!(!f.local_norm_finite(&[0.6, 0.4], &[0.9, 0.9], 2.0));
        assert!(f.local_norm_finite(&[0.0, 0.0], &[1.0, 1.0], 1.5));
        let g = IntegrandSpec::example2(2, -0.7).unwrap();
        assert!(!g.local_norm_finite(&[0.0, 0.0], &[1.0, 1.0], 1.5));
        assert!(g.local_norm_finite(&[0.6, 0.6], &[1.0, 1.0], 1.5));
        assert!(g.local_norm_finite(&[0.0, 0.0], &[0.5, 0.5], 1.5));
        assert!(g.local_norm_finite(&[0.5, 0.5], &[1.0, 1.0], 1.5));
        assert!(g.local_norm_finite(&[0.0, 0.0], &[1.0, 1.0], 1.4));
    }
}
