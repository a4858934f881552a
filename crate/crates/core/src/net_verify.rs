//! Certification of the (t,m,s)-net property by exhaustive counting.
//!
//! For a resolution vector `ell` the elementary intervals
//! `prod_j [k_j b^-ell_j, (k_j + 1) b^-ell_j)` partition `[0,1)^s` into
//! `b^|ell|` cells. A set of `b^m` points is a (t,m,s)-net when every cell of
//! every `ell` with `|ell| = m - t` holds exactly `b^t` points.
//!
//! Points are assigned to cells by truncating their base-`b` expansion. For
//! base 2 and dyadic inputs (everything the generator produces) that is exact;
//! real-valued input in other bases uses `floor(x * b^m)` in `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net_gen::DigitalPointSet;

/// Largest number of cells counted at once.
const MAX_CELLS: u64 = 1 << 26;

/// Points reduced to their cell index at a fixed maximal resolution.
#[derive(Debug, Clone)]
pub struct CellGrid {
    s: usize,
    base: u64,
    resolution: u32,
    /// `cells[i * s + j] = floor(x_ij * b^resolution)`.
    cells: Vec<u64>,
}

impl CellGrid {
    /// From real coordinates in `[0,1)`.
    pub fn from_unit_cube(points: &[Vec<f64>], base: u32, resolution: u32) -> Result<Self> {
        let b = check_base(base)?;
        let scale = checked_pow(b, resolution)?;
        let s = points.first().map_or(0, Vec::len);
        let mut cells = Vec::with_capacity(points.len() * s);
        for (i, p) in points.iter().enumerate() {
            if p.len() != s {
                return Err(Error::Shape(format!("point {i} has {} coordinates, expected {s}", p.len())));
            }
            for (j, &x) in p.iter().enumerate() {
                if !(0.0..1.0).contains(&x) {
                    return Err(Error::Domain(format!("coordinate {j} of point {i} is {x}, outside [0,1)")));
                }
                let c = (x * scale as f64).floor() as u64;
                // Guards against x * scale rounding up to scale in bases other than 2.
                cells.push(c.min(scale - 1));
            }
        }
        Ok(CellGrid { s, base: b, resolution, cells })
    }

    /// From base-2 digit integers; exact.
    pub fn from_digits(p: &DigitalPointSet) -> Self {
        CellGrid {
            s: p.s,
            base: 2,
            resolution: p.w,
            cells: p.digits.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len().checked_div(self.s).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn base(&self) -> u32 {
        self.base as u32
    }

    /// Counts, indexed by `k` in mixed radix with `k_0` most significant.
    pub fn count(&self, ell: &[u32]) -> Result<Vec<u64>> {
        if ell.len() != self.s {
            return Err(Error::Shape(format!("resolution vector has {} entries for {} dimensions", ell.len(), self.s)));
        }
        if let Some(&l) = ell.iter().find(|&&l| l > self.resolution) {
            return Err(Error::Precision(format!(
                "resolution {l} exceeds the {} digits available",
                self.resolution
            )));
        }
        let total: u32 = ell.iter().sum();
        let n_cells = checked_pow(self.base, total)?;
        if n_cells > MAX_CELLS {
            return Err(Error::Resource(format!("{n_cells} cells exceed the counting limit")));
        }
        let divisors: Vec<u64> = ell
            .iter()
            .map(|&l| checked_pow(self.base, self.resolution - l))
            .collect::<Result<_>>()?;
        let radices: Vec<u64> = ell.iter().map(|&l| self.base.pow(l)).collect();
        let mut counts = vec![0u64; n_cells as usize];
        for p in self.cells.chunks_exact(self.s) {
            let mut idx = 0u64;
            for j in 0..self.s {
                idx = idx * radices[j] + p[j] / divisors[j];
            }
            counts[idx as usize] += 1;
        }
        Ok(counts)
    }
}

fn check_base(base: u32) -> Result<u64> {
    if base < 2 {
        return Err(Error::OutOfRange(format!("base must be at least 2, got {base}")));
    }
    Ok(base as u64)
}

fn checked_pow(b: u64, e: u32) -> Result<u64> {
    b.checked_pow(e)
        .ok_or_else(|| Error::Resource(format!("{b}^{e} overflows 64 bits")))
}

/// Iterator over all `ell` in `N_0^parts` with `|ell| = total`, in lexicographic order.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<u32>>,
}

impl Compositions {
    pub fn new(total: u32, parts: usize) -> Self {
        let current = match parts {
            0 if total == 0 => Some(vec![]),
            0 => None,
            _ => {
                let mut v = vec![0; parts];
                v[parts - 1] = total;
                Some(v)
            }
        };
        Compositions { current }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let s = out.len();
        // Lexicographic successor: bump the rightmost entry (before the last)
        // that has mass to its right, and move the remaining mass to the end.
        let mut rest = 0;
        for i in (0..s.saturating_sub(1)).rev() {
            rest += out[i + 1];
            if rest > 0 {
                let mut next = out.clone();
                next[i] += 1;
                next[i + 1..].iter_mut().for_each(|x| *x = 0);
                next[s - 1] = rest - 1;
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Binomial coefficient, saturating.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// One elementary interval whose count differs from `b^t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub ell: Vec<u32>,
    pub k: Vec<u64>,
    pub count: u64,
    pub expected: u64,
}

/// Outcome of a (t,m,s)-net check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub valid: bool,
    pub t: u32,
    pub m: u32,
    pub s: usize,
    pub base: u32,
    /// Number of resolution vectors examined.
    pub resolutions_checked: u64,
    pub violations: Vec<Violation>,
}

fn decode_cell(mut idx: u64, ell: &[u32], base: u64) -> Vec<u64> {
    let mut k = vec![0; ell.len()];
    for j in (0..ell.len()).rev() {
        let r = base.pow(ell[j]);
        k[j] = idx % r;
        idx /= r;
    }
    k
}

fn check_shape(grid: &CellGrid, m: u32, s: usize) -> Result<()> {
    let n = checked_pow(grid.base, m)?;
    if grid.len() as u64 != n {
        return Err(Error::Shape(format!("{} points, but b^m = {}^{m} = {n}", grid.len(), grid.base)));
    }
    if grid.dim() != s && n > 0 {
        return Err(Error::Shape(format!("points have {} coordinates, expected s = {s}", grid.dim())));
    }
    if m > grid.resolution {
        return Err(Error::Precision(format!("m = {m} exceeds the {} digits available", grid.resolution)));
    }
    Ok(())
}

/// Checks the net property for a given `t`, recording up to `max_violations`
/// violating cells. Stops at the first violating resolution vector.
pub fn certify(grid: &CellGrid, t: u32, m: u32, s: usize, max_violations: usize) -> Result<Certificate> {
    check_shape(grid, m, s)?;
    if t > m {
        return Err(Error::OutOfRange(format!("t = {t} exceeds m = {m}")));
    }
    let expected = grid.base.pow(t);
    let mut checked = 0;
    let mut violations = Vec::new();
    for ell in Compositions::new(m - t, s) {
        checked += 1;
        let counts = grid.count(&ell)?;
        for (idx, &c) in counts.iter().enumerate() {
            if c != expected {
                if violations.len() < max_violations.max(1) {
                    violations.push(Violation {
                        k: decode_cell(idx as u64, &ell, grid.base),
                        ell: ell.clone(),
                        count: c,
                        expected,
                    });
                } else {
                    break;
                }
            }
        }
        if !violations.is_empty() {
            break;
        }
    }
    Ok(Certificate {
        valid: violations.is_empty(),
        t,
        m,
        s,
        base: grid.base(),
        resolutions_checked: checked,
        violations,
    })
}

/// Smallest `t` for which `grid` is a (t,m,s)-net. Always at most `m`.
pub fn quality_parameter_of(grid: &CellGrid, m: u32, s: usize) -> Result<u32> {
    for t in 0..m {
        if certify(grid, t, m, s, 1)?.valid {
            return Ok(t);
        }
    }
    check_shape(grid, m, s)?;
    Ok(m)
}

/// Cell counts of real-valued points for resolution vector `ell`.
pub fn count_points(points: &[Vec<f64>], ell: &[u32], base: u32) -> Result<Vec<u64>> {
    let res = ell.iter().copied().max().unwrap_or(0);
    CellGrid::from_unit_cube(points, base, res)?.count(ell)
}

/// Certificate for the (t,m,s)-net property of real-valued points; lists the
/// first violating cell when invalid.
pub fn is_tms_net(points: &[Vec<f64>], t: u32, m: u32, s: usize, base: u32) -> Result<Certificate> {
    certify(&CellGrid::from_unit_cube(points, base, m)?, t, m, s, 1)
}

/// Quality parameter of real-valued points.
pub fn quality_parameter(points: &[Vec<f64>], m: u32, s: usize, base: u32) -> Result<u32> {
    quality_parameter_of(&CellGrid::from_unit_cube(points, base, m)?, m, s)
}

/// Quality parameter of a digital point set, counted on its digits.
pub fn quality_parameter_digits(p: &DigitalPointSet) -> Result<u32> {
    quality_parameter_of(&CellGrid::from_digits(p), p.m, p.s)
}
