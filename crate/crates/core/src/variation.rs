//! Alternating sums over boxes and the inequalities linking them to
//! `L^p` norms of the mixed derivative.
//!
//! For a box `J = prod [a_j, b_j]` the alternating sum is
//! `Delta(f, J) = sum_{u} (-1)^{|u|} f(a^u : b^{-u})`, where `u` is the set
//! of coordinates taken at their lower endpoint. It equals the integral of
//! `d^{1:s} f` over `J`. The order-2 variation of a partition `P` with
//! parameter `alpha_var` is `(sum_J mu(J)^{1 - 2 alpha_var} Delta(f, J)^2)^{1/2}`;
//! its supremum over partitions is bounded by `||d^{1:s} f||_p` with
//! `p = 2 / (3 - 2 alpha_var)`. Every value computed here is a lower bound
//! for that supremum.

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrands::{Integrand, IntegrandSpec};
use crate::quadrature::{integrate_box, Singularities, Tolerance};

/// Largest partition [`dyadic_partition`] and [`kink_partition`] will build.
pub const MAX_PARTITION_BOXES: usize = 1 << 20;

/// Default numerical slack for the inequality checks.
pub const SLACK: f64 = 1e-9;

/// Closed axis-parallel box inside the unit cube with positive volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Interval {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Shape(format!("corners have lengths {} and {}", a.len(), b.len())));
        }
        for (j, (&lo, &hi)) in a.iter().zip(&b).enumerate() {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(Error::Partition(format!("side {j} is [{lo}, {hi}]; need 0 <= a < b <= 1")));
            }
        }
        Ok(Interval { a, b })
    }

    pub fn unit(s: usize) -> Self {
        Interval { a: vec![0.0; s], b: vec![1.0; s] }
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn volume(&self) -> f64 {
        self.a.iter().zip(&self.b).map(|(lo, hi)| hi - lo).product()
    }

    /// The two halves of `self` cut at `x` along `axis`.
    pub fn split(&self, axis: usize, x: f64) -> Result<(Interval, Interval)> {
        let mut left = self.clone();
        let mut right = self.clone();
        left.b[axis] = x;
        right.a[axis] = x;
        Ok((Interval::new(left.a, left.b)?, Interval::new(right.a, right.b)?))
    }

    fn interiors_overlap(&self, other: &Interval) -> bool {
        self.a.iter().zip(&self.b).zip(other.a.iter().zip(&other.b)).all(|((a1, b1), (a2, b2))| a1 < b2 && a2 < b1)
    }
}

/// Boxes with disjoint interiors covering the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    boxes: Vec<Interval>,
}

impl Partition {
    /// Checks dimensions, total volume (to 1e-12) and pairwise disjointness.
    pub fn new(boxes: Vec<Interval>) -> Result<Self> {
        let s = boxes.first().ok_or_else(|| Error::Partition("empty partition".into()))?.dim();
        if boxes.iter().any(|b| b.dim() != s) {
            return Err(Error::Shape("boxes of different dimensions".into()));
        }
        let total: f64 = boxes.iter().map(Interval::volume).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Partition(format!("volumes sum to {total}, not 1")));
        }
        // Sweep along the first axis so only boxes whose first sides overlap are compared.
        let mut order: Vec<usize> = (0..boxes.len()).collect();
        order.sort_by(|&i, &j| boxes[i].a[0].total_cmp(&boxes[j].a[0]));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if boxes[j].a[0] >= boxes[i].b[0] {
                    break;
                }
                if boxes[i].interiors_overlap(&boxes[j]) {
                    return Err(Error::Partition(format!("boxes {i} and {j} overlap")));
                }
            }
        }
        Ok(Partition { boxes })
    }

    /// Product of per-axis node lists, each running from 0 to 1.
    pub fn grid(nodes: &[Vec<f64>]) -> Result<Self> {
        let count = nodes.iter().try_fold(1usize, |acc, n| acc.checked_mul(n.len().saturating_sub(1)));
        match count {
            Some(c) if c <= MAX_PARTITION_BOXES => {}
            _ => return Err(Error::Resource(format!("grid exceeds {MAX_PARTITION_BOXES} boxes"))),
        }
        for n in nodes {
            if n.len() < 2 || n[0] != 0.0 || n[n.len() - 1] != 1.0 || n.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Partition(format!("grid nodes {n:?} must increase from 0 to 1")));
            }
        }
        let mut boxes = vec![Interval { a: vec![], b: vec![] }];
        for n in nodes {
            boxes = boxes
                .into_iter()
                .flat_map(|bx| {
                    n.windows(2).map(move |w| {
                        let mut next = bx.clone();
                        next.a.push(w[0]);
                        next.b.push(w[1]);
                        next
                    })
                })
                .collect();
        }
        Ok(Partition { boxes })
    }

    pub fn boxes(&self) -> &[Interval] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].dim()
    }
}

/// Uniform grid with `2^level` cells per axis.
pub fn dyadic_partition(s: usize, level: u32) -> Result<Partition> {
    if s == 0 {
        return Err(Error::Shape("dimension must be positive".into()));
    }
    if (level as u64).saturating_mul(s as u64) > MAX_PARTITION_BOXES.trailing_zeros() as u64 {
        return Err(Error::Resource(format!("2^{} boxes exceed the limit of {MAX_PARTITION_BOXES}", level as u64 * s as u64)));
    }
    let cells = 1u64 << level;
    let nodes: Vec<f64> = (0..=cells).map(|k| k as f64 / cells as f64).collect();
    Partition::grid(&vec![nodes; s])
}

/// Grid whose lines pass through `anchor` on every axis and are graded
/// geometrically toward it: nodes `0, 1, anchor` and, for `k = 1..=level`,
/// `anchor - anchor 2^-k` and `anchor + (1 - anchor) 2^-k`.
pub fn kink_partition(s: usize, level: u32, anchor: f64) -> Result<Partition> {
    if s == 0 {
        return Err(Error::Shape("dimension must be positive".into()));
    }
    if !(anchor > 0.0 && anchor < 1.0) {
        return Err(Error::OutOfRange(format!("anchor {anchor} must lie in (0, 1)")));
    }
    let mut nodes = vec![0.0, anchor, 1.0];
    for k in 1..=level.min(52) {
        let h = 0.5f64.powi(k as i32);
        nodes.push(anchor - anchor * h);
        nodes.push(anchor + (1.0 - anchor) * h);
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    Partition::grid(&vec![nodes; s])
}

/// `Delta(f, J)`. Vertex `mask` takes `a_j` where bit `j` is set.
pub fn alternating_sum<F: Fn(&[f64]) -> f64 + ?Sized>(f: &F, j: &Interval) -> f64 {
    let s = j.dim();
    let mut x = j.b.clone();
    let mut total = 0.0;
    for mask in 0..1u64 << s {
        let mut negative = false;
        for (k, xk) in x.iter_mut().enumerate() {
            if mask >> k & 1 == 1 {
                *xk = j.a[k];
                negative = !negative;
            } else {
                *xk = j.b[k];
            }
        }
        let v = f(&x);
        total += if negative { -v } else { v };
    }
    total
}

/// Integral of `|d^{1:s} f|^power` (or the signed derivative when `power` is `None`)
/// over `J`. Nodes that land exactly on the kink locus contribute 0 and are counted.
fn integrate_derivative<I: Integrand + ?Sized>(f: &I, j: &Interval, power: Option<f64>, tol: Tolerance) -> (crate::quadrature::QuadResult, u64) {
    let singular = Cell::new(0u64);
    let apply = |d: Result<f64>| match d {
        Ok(d) => power.map_or(d, |p| d.abs().powf(p)),
        Err(_) => {
            singular.set(singular.get() + 1);
            0.0
        }
    };
    let r = match f.singularities() {
        // Centre the kink at 0, where the float grid is fine enough to resolve it.
        Singularities::AxisPlanes(c) => {
            let lo: Vec<f64> = j.a.iter().map(|x| x - c).collect();
            let hi: Vec<f64> = j.b.iter().map(|x| x - c).collect();
            integrate_box(|u| apply(f.mixed_derivative_centered(c, u)), &lo, &hi, Singularities::AxisPlanes(0.0), tol)
        }
        sing => integrate_box(|t| apply(f.mixed_derivative(t)), &j.a, &j.b, sing, tol),
    };
    (r, singular.get())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub alternating_sum: f64,
    pub integral: f64,
    pub quadrature_error: f64,
    pub difference: f64,
    pub converged: bool,
    /// Quadrature nodes that fell on the kink locus (counted as 0).
    pub singular_nodes: u64,
    /// Converged, `difference <= tol` and `quadrature_error <= tol`.
    pub pass: bool,
}

/// Compares `Delta(f, J)` with the quadrature of `d^{1:s} f` over `J`.
pub fn check_lemma_identity<I: Integrand + ?Sized>(f: &I, j: &Interval, tol: f64) -> Result<LemmaReport> {
    check_dim(f, j)?;
    let delta = alternating_sum(&|t: &[f64]| f.value(t), j);
    let (r, singular_nodes) = integrate_derivative(f, j, None, Tolerance::new(0.1 * tol, 0.01 * tol));
    let difference = (delta - r.value).abs();
    Ok(LemmaReport {
        alternating_sum: delta,
        integral: r.value,
        quadrature_error: r.error,
        difference,
        converged: r.converged,
        singular_nodes,
        pass: r.converged && difference <= tol && r.error <= tol,
    })
}

fn check_dim<I: Integrand + ?Sized>(f: &I, j: &Interval) -> Result<()> {
    if f.dim() == j.dim() {
        Ok(())
    } else {
        Err(Error::Shape(format!("integrand has dimension {}, box has {}", f.dim(), j.dim())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    /// `|Delta(f, J)|`.
    pub lhs: f64,
    /// `||d^{1:s} f 1_J||_p`, `+inf` if not integrable.
    pub norm: f64,
    /// `norm * mu(J)^(1 - 1/p)`.
    pub rhs: f64,
    pub slack: f64,
    pub converged: bool,
    /// False when the norm is infinite and the inequality says nothing.
    pub informative: bool,
    pub pass: bool,
}

/// `|Delta(f, J)| <= ||d^{1:s} f 1_J||_p mu(J)^(1 - 1/p)`.
pub fn holder_check<I: Integrand + ?Sized>(f: &I, j: &Interval, p: f64) -> Result<HolderReport> {
    check_dim(f, j)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::OutOfRange(format!("p must be at least 1, got {p}")));
    }
    let lhs = alternating_sum(&|t: &[f64]| f.value(t), j).abs();
    if !f.local_norm_finite(&j.a, &j.b, p) {
        return Ok(HolderReport {
            lhs,
            norm: f64::INFINITY,
            rhs: f64::INFINITY,
            slack: SLACK,
            converged: true,
            informative: false,
            pass: true,
        });
    }
    let (r, _) = integrate_derivative(f, j, Some(p), Tolerance::new(1e-13, 1e-10));
    let integral = r.value.max(0.0);
    let norm = integral.powf(1.0 / p);
    let weight = j.volume().powf(1.0 - 1.0 / p);
    let rhs = norm * weight;
    let slack = SLACK + ((integral + r.error).powf(1.0 / p) - norm) * weight;
    Ok(HolderReport { lhs, norm, rhs, slack, converged: r.converged, informative: true, pass: lhs <= rhs + slack })
}

/// `(sum v^p)^(2/p) >= sum v^2` up to `1e-12` relative, for any `p`.
pub fn superadditivity_holds(values: &[f64], p: f64) -> bool {
    let sq: f64 = values.iter().map(|v| v * v).sum();
    let lhs = values.iter().map(|v| v.powf(p)).sum::<f64>().powf(2.0 / p);
    lhs >= sq - 1e-12 * sq
}

/// [`superadditivity_holds`] restricted to `1 <= p <= 2`, where it is a theorem.
pub fn superadditivity_check(values: &[f64], p: f64) -> Result<bool> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::OutOfRange(format!("p = {p} outside [1, 2]; the inequality reverses for p > 2")));
    }
    if let Some(v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
        return Err(Error::Domain(format!("values must be nonnegative, got {v}")));
    }
    Ok(superadditivity_holds(values, p))
}

fn check_alpha_var(alpha_var: f64) -> Result<()> {
    if (0.5..=1.0).contains(&alpha_var) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("alpha_var must lie in [1/2, 1], got {alpha_var}")))
    }
}

/// `(sum_J mu(J)^(1 - 2 alpha_var) Delta(f, J)^2)^(1/2)` over one partition.
pub fn vitali_lower_bound<F: Fn(&[f64]) -> f64 + Sync>(f: &F, alpha_var: f64, partition: &Partition) -> Result<f64> {
    check_alpha_var(alpha_var)?;
    let terms: Vec<f64> = partition
        .boxes
        .par_iter()
        .map(|j| {
            let d = alternating_sum(f, j);
            j.volume().powf(1.0 - 2.0 * alpha_var) * d * d
        })
        .collect();
    Ok(terms.iter().sum::<f64>().sqrt())
}

/// Lower bounds for a sequence of partitions with their running maximum.
pub fn vitali_lower_bounds<F: Fn(&[f64]) -> f64 + Sync>(
    f: &F,
    alpha_var: f64,
    partitions: &[Partition],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let bounds = partitions.iter().map(|p| vitali_lower_bound(f, alpha_var, p)).collect::<Result<Vec<_>>>()?;
    let running = bounds
        .iter()
        .scan(0.0f64, |m, &b| {
            *m = m.max(b);
            Some(*m)
        })
        .collect();
    Ok((bounds, running))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundChainReport {
    pub alpha_var: f64,
    pub p: f64,
    pub norm: f64,
    pub lower_bounds: Vec<f64>,
    pub running_max: Vec<f64>,
    pub largest: f64,
    pub pass: bool,
}

/// Checks `vitali_lower_bound(f, alpha_var, P) <= ||d^{1:s} f||_p + 1e-9` for every `P`.
pub fn bound_chain_check(spec: &IntegrandSpec, alpha_var: f64, partitions: &[Partition]) -> Result<BoundChainReport> {
    check_alpha_var(alpha_var)?;
    let p = 2.0 / (3.0 - 2.0 * alpha_var);
    let threshold = spec.integrability_threshold();
    if p >= threshold {
        return Err(Error::OutOfRange(format!(
            "p = {p} is not below the integrability threshold {threshold}; the derivative norm is infinite"
        )));
    }
    let norm = spec.lp_norm_derivative(p)?;
    if !norm.is_finite() {
        return Err(Error::OutOfRange(format!("||d^(1:s) f||_{p} is infinite")));
    }
    if let Some(bad) = partitions.iter().find(|q| q.dim() != spec.s) {
        return Err(Error::Shape(format!("partition of dimension {}, integrand has {}", bad.dim(), spec.s)));
    }
    let (lower_bounds, running_max) = vitali_lower_bounds(&|t: &[f64]| spec.value(t), alpha_var, partitions)?;
    let largest = running_max.last().copied().unwrap_or(0.0);
    let pass = lower_bounds.iter().all(|&b| b <= norm + SLACK);
    Ok(BoundChainReport { alpha_var, p, norm, lower_bounds, running_max, largest, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::Constant;
    use crate::prf::{Purpose, StreamKey};
    use proptest::prelude::*;

    fn bx(a: &[f64], b: &[f64]) -> Interval {
        Interval::new(a.to_vec(), b.to_vec()).unwrap()
    }

    fn e1(s: usize, a: f64) -> IntegrandSpec {
        IntegrandSpec::example1(s, a).unwrap()
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(vec![0.2], vec![0.2]).is_err());
        assert!(Interval::new(vec![-0.1], vec![0.2]).is_err());
        assert!(Interval::new(vec![0.1, 0.2], vec![0.3]).is_err());
        assert!((bx(&[0.0, 0.5], &[0.5, 1.0]).volume() - 0.25).abs() < 1e-16);
    }

    #[test]
    fn partition_validation() {
        let halves = vec![bx(&[0.0], &[0.5]), bx(&[0.5], &[1.0])];
        assert!(Partition::new(halves).is_ok());
        assert!(Partition::new(vec![bx(&[0.0], &[0.6]), bx(&[0.5], &[1.0])]).is_err());
        // Right volume, but overlapping.
        let overlapping = vec![bx(&[0.0, 0.0], &[1.0, 0.5]), bx(&[0.0, 0.0], &[0.5, 1.0]), bx(&[0.5, 0.5], &[1.0, 1.0])];
        assert!(matches!(Partition::new(overlapping), Err(Error::Partition(_))));
        assert!(Partition::new(vec![]).is_err());
    }

    #[test]
    fn dyadic_partitions() {
        let p = dyadic_partition(1, 1).unwrap();
        assert_eq!(p.boxes(), &[bx(&[0.0], &[0.5]), bx(&[0.5], &[1.0])]);
        let p = dyadic_partition(2, 2).unwrap();
        assert_eq!(p.len(), 16);
        assert!(p.boxes().iter().all(|b| b.volume() == 1.0 / 16.0));
        assert!(Partition::new(p.boxes().to_vec()).is_ok());
        assert!(matches!(dyadic_partition(2, 30), Err(Error::Resource(_))));
        assert_eq!(dyadic_partition(3, 0).unwrap().len(), 1);
    }

    #[test]
    fn kink_partitions() {
        let p = kink_partition(1, 2, 0.5).unwrap();
        let nodes: Vec<f64> = p.boxes().iter().map(|b| b.a()[0]).chain([1.0]).collect();
        assert_eq!(nodes, vec![0.0, 0.25, 0.375, 0.5, 0.625, 0.75, 1.0]);
        let p = kink_partition(2, 4, 0.5).unwrap();
        assert_eq!(p.len(), 100);
        assert!(Partition::new(p.boxes().to_vec()).is_ok());
        assert!(kink_partition(2, 3, 1.0).is_err());
    }

    #[test]
    fn alternating_sum_examples() {
        let c = |_: &[f64]| 3.0;
        let prod = |t: &[f64]| t.iter().product::<f64>();
        let j = bx(&[0.1, 0.3, 0.2], &[0.4, 0.9, 0.7]);
        assert_eq!(alternating_sum(&c, &j), 0.0);
        assert!((alternating_sum(&prod, &j) - j.volume()).abs() < 1e-15);
        let f = |t: &[f64]| t[0].sin();
        let j = bx(&[0.2], &[0.7]);
        assert_eq!(alternating_sum(&f, &j), 0.7f64.sin() - 0.2f64.sin());
    }

    proptest! {
        #[test]
        fn alternating_sum_is_additive(
            a in proptest::collection::vec(0.0f64..0.45, 3),
            w in proptest::collection::vec(0.1f64..0.55, 3),
            axis in 0usize..3,
            frac in 0.05f64..0.95,
        ) {
            let b: Vec<f64> = a.iter().zip(&w).map(|(x, y)| x + y).collect();
            let j = Interval::new(a.clone(), b.clone()).unwrap();
            let cut = a[axis] + frac * (b[axis] - a[axis]);
            let (l, r) = j.split(axis, cut).unwrap();
            let f = e1(3, 0.4);
            let g = |t: &[f64]| f.value(t);
            let whole = alternating_sum(&g, &j);
            let parts = alternating_sum(&g, &l) + alternating_sum(&g, &r);
            prop_assert!((whole - parts).abs() < 1e-14);
        }

        #[test]
        fn superadditivity_for_random_vectors(
            v in proptest::collection::vec(0.0f64..10.0, 1..20),
            p in 1.0f64..=2.0,
        ) {
            prop_assert!(superadditivity_check(&v, p).unwrap());
        }

        #[test]
        fn vitali_running_max_is_nondecreasing(alpha in 0.1f64..1.0, avar in 0.5f64..=1.0) {
            let f = e1(2, alpha);
            let parts: Vec<Partition> = (0..4).map(|l| dyadic_partition(2, l).unwrap()).collect();
            let (_, running) = vitali_lower_bounds(&|t: &[f64]| f.value(t), avar, &parts).unwrap();
            prop_assert!(running.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn lemma_identity_examples() {
        let f = IntegrandSpec::smooth_product(2).unwrap();
        let r = check_lemma_identity(&f, &Interval::unit(2), 1e-9).unwrap();
        assert!(r.pass && (r.alternating_sum - 1.0).abs() < 1e-15, "{r:?}");

        let f = e1(1, 0.5);
        let r = check_lemma_identity(&f, &bx(&[0.6], &[0.9]), 1e-9).unwrap();
        assert!((r.alternating_sum - (0.4f64.sqrt() - 0.1f64.sqrt())).abs() < 1e-15);
        assert!(r.pass, "{r:?}");

        let f = e1(2, 0.5);
        let r = check_lemma_identity(&f, &Interval::unit(2), 1e-7).unwrap();
        assert!(r.alternating_sum.abs() < 1e-15 && r.integral.abs() < 1e-7 && r.pass, "{r:?}");
    }

    #[test]
    fn lemma_identity_random_boxes() {
        let key = StreamKey::new(17, 0, Purpose::Uniform, 0);
        let mut c = 0;
        let mut u = || {
            c += 1;
            key.uniform(c)
        };
        let specs = [e1(2, 0.7), IntegrandSpec::example2(2, 0.5).unwrap(), IntegrandSpec::example2(3, 0.0).unwrap()];
        for f in specs {
            for _ in 0..5 {
                let (a, b): (Vec<f64>, Vec<f64>) = (0..f.s)
                    .map(|_| {
                        let (x, y) = (u(), u());
                        (x.min(y), x.max(y))
                    })
                    .unzip();
                let r = check_lemma_identity(&f, &Interval::new(a, b).unwrap(), 1e-8).unwrap();
                assert!(r.pass, "{f:?}: {r:?}");
            }
        }
    }

    #[test]
    fn holder_examples() {
        let f = IntegrandSpec::smooth_product(2).unwrap();
        let r = holder_check(&f, &Interval::unit(2), 2.0).unwrap();
        assert!(r.pass && (r.lhs - 1.0).abs() < 1e-14 && (r.rhs - 1.0).abs() < 1e-9);

        let f = e1(1, 0.5);
        let r = holder_check(&f, &bx(&[0.5], &[1.0]), 1.0).unwrap();
        assert!((r.lhs - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((r.rhs - 0.5f64.sqrt()).abs() < 1e-8, "{r:?}");
        assert!(r.pass);

        let f = e1(2, 0.5);
        let r = holder_check(&f, &Interval::unit(2), 2.0).unwrap();
        assert!(!r.informative && r.pass && r.norm.is_infinite());
        assert!(holder_check(&f, &Interval::unit(2), 0.5).is_err());
    }

    #[test]
    fn holder_random_boxes_in_upper_quadrant() {
        let key = StreamKey::new(23, 0, Purpose::Uniform, 0);
        let mut c = 0;
        let mut u = || {
            c += 1;
            0.5 + 0.5 * key.uniform(c)
        };
        let f = e1(2, 0.5);
        for p in [1.0, 1.5, 2.0] {
            for _ in 0..10 {
                let (a, b): (Vec<f64>, Vec<f64>) = (0..2)
                    .map(|_| {
                        let (x, y) = (u(), u());
                        (x.min(y), x.max(y))
                    })
                    .unzip();
                let r = holder_check(&f, &Interval::new(a, b).unwrap(), p).unwrap();
                assert!(r.pass && r.informative, "{r:?}");
            }
        }
    }

    #[test]
    fn superadditivity_examples() {
        assert!(superadditivity_check(&[3.0, 4.0], 1.0).unwrap());
        for p in [1.0, 1.3, 2.0] {
            assert!(superadditivity_check(&[2.5], p).unwrap());
        }
        assert!(superadditivity_check(&[1.0], 2.5).is_err());
        assert!(superadditivity_check(&[-1.0], 1.5).is_err());
        assert!(!superadditivity_holds(&[1.0, 1.0], 4.0));
    }

    #[test]
    fn vitali_examples() {
        let f = IntegrandSpec::smooth_product(2).unwrap();
        let g = |t: &[f64]| f.value(t);
        for level in 0..4 {
            let p = dyadic_partition(2, level).unwrap();
            assert!((vitali_lower_bound(&g, 1.0, &p).unwrap() - 1.0).abs() < 1e-14);
        }
        let c = Constant { s: 2, c: 4.0 };
        let h = |t: &[f64]| c.value(t);
        assert_eq!(vitali_lower_bound(&h, 0.7, &dyadic_partition(2, 3).unwrap()).unwrap(), 0.0);
        assert!(vitali_lower_bound(&h, 0.4, &dyadic_partition(2, 1).unwrap()).is_err());

        let f = e1(1, 0.5);
        let parts: Vec<Partition> = (1..=6).map(|l| dyadic_partition(1, l).unwrap()).collect();
        let (bounds, running) = vitali_lower_bounds(&|t: &[f64]| f.value(t), 0.5, &parts).unwrap();
        assert!(running.windows(2).all(|w| w[0] <= w[1]));
        assert!(bounds.iter().all(|&b| b <= 2f64.sqrt()));
    }

    #[test]
    fn bound_chain_examples() {
        let f = IntegrandSpec::smooth_product(2).unwrap();
        let parts: Vec<Partition> = (0..4).map(|l| dyadic_partition(2, l).unwrap()).collect();
        let r = bound_chain_check(&f, 1.0, &parts).unwrap();
        assert!(r.pass && (r.largest - 1.0).abs() < 1e-14 && r.norm == 1.0);

        let f = e1(1, 0.5);
        let parts: Vec<Partition> = (0..=8).map(|l| dyadic_partition(1, l).unwrap()).collect();
        let r = bound_chain_check(&f, 0.6, &parts).unwrap();
        assert!(r.pass, "{r:?}");

        let f = e1(2, 1.0 / 3.0);
        let parts: Vec<Partition> = (0..=4).map(|l| dyadic_partition(2, l).unwrap()).collect();
        let r = bound_chain_check(&f, 0.5, &parts).unwrap();
        assert!(r.pass && r.p == 1.0, "{r:?}");

        // alpha = 1/2 has threshold p = 2, reached at alpha_var = 1.
        assert!(bound_chain_check(&e1(2, 0.5), 1.0, &parts).is_err());
    }
}
