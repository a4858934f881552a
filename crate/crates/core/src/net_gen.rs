//! Base-2 digital net construction from Sobol' generator matrices.
//!
//! A generator matrix over GF(2) is stored column-wise: column `c` is a
//! `w`-bit integer whose most significant bit is the first base-2 digit of
//! the output coordinate. Point `i` of dimension `j` is the XOR of the
//! columns of `C_j` selected by the set bits of `i` (bit 0 selects column 0).
//!
//! Direction numbers come from the Joe–Kuo `new-joe-kuo-6` table, embedded
//! as `data/new-joe-kuo-6.64.txt` (first 64 dimensions).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DIRECTION_TABLE: &str = include_str!("../data/new-joe-kuo-6.64.txt");

/// Number of dimensions available from [`build_sobol_matrices`].
pub const SOBOL_CAPACITY: usize = 64;

/// Default digit precision.
pub const DEFAULT_PRECISION: u32 = 32;

/// Enumeration order of net points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    #[default]
    Natural,
    Gray,
}

/// Placement of a point inside its `2^-w` grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Offset {
    /// Lower-left corner, `d * 2^-w`.
    #[default]
    None,
    /// Cell center, `(d + 1/2) * 2^-w`; never touches the cube boundary.
    Center,
}

/// Per-dimension `w x w` binary generator matrices of a base-2 digital net.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorMatrixSet {
    precision: u32,
    /// `columns[j][c]`: column `c` of the matrix for dimension `j`.
    columns: Vec<Vec<u64>>,
}

impl GeneratorMatrixSet {
    /// Builds a matrix set from explicit columns. Every matrix must be
    /// `w x w` and invertible over GF(2).
    pub fn from_columns(precision: u32, columns: Vec<Vec<u64>>) -> Result<Self> {
        check_precision(precision)?;
        if columns.is_empty() {
            return Err(Error::Shape("at least one dimension is required".into()));
        }
        let mask = digit_mask(precision);
        for (j, cols) in columns.iter().enumerate() {
            if cols.len() != precision as usize {
                return Err(Error::Shape(format!(
                    "dimension {j} has {} columns, expected {precision}",
                    cols.len()
                )));
            }
            if cols.iter().any(|&c| c & !mask != 0) {
                return Err(Error::Shape(format!(
                    "dimension {j} has a column wider than {precision} bits"
                )));
            }
            if gf2_rank(cols) != precision as usize {
                return Err(Error::Shape(format!("matrix of dimension {j} is singular")));
            }
        }
        Ok(GeneratorMatrixSet { precision, columns })
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn columns(&self, dimension: usize) -> &[u64] {
        &self.columns[dimension]
    }

    /// Matrix entry at (`row`, `col`); row 0 is the leading digit.
    pub fn entry(&self, dimension: usize, row: u32, col: u32) -> bool {
        (self.columns[dimension][col as usize] >> (self.precision - 1 - row)) & 1 == 1
    }

    pub(crate) fn from_columns_unchecked(precision: u32, columns: Vec<Vec<u64>>) -> Self {
        GeneratorMatrixSet { precision, columns }
    }
}

/// `N = 2^m` points in `[0,1)^s`, stored as `w`-bit digit integers,
/// row-major (`digits[i * s + j]` is coordinate `j` of point `i`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitalPointSet {
    pub s: usize,
    pub m: u32,
    pub w: u32,
    pub digits: Vec<u64>,
}

impl DigitalPointSet {
    pub fn new(s: usize, m: u32, w: u32, digits: Vec<u64>) -> Result<Self> {
        check_precision(w)?;
        if s == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        if m > w {
            return Err(Error::Precision(format!("m = {m} exceeds precision w = {w}")));
        }
        let n = 1usize
            .checked_shl(m)
            .ok_or_else(|| Error::Resource(format!("2^{m} points do not fit in memory")))?;
        if digits.len() != n * s {
            return Err(Error::Shape(format!(
                "expected {} digit integers for 2^{m} points in {s} dimensions, got {}",
                n * s,
                digits.len()
            )));
        }
        let mask = digit_mask(w);
        if digits.iter().any(|&d| d & !mask != 0) {
            return Err(Error::Shape(format!("digit integer exceeds {w} bits")));
        }
        Ok(DigitalPointSet { s, m, w, digits })
    }

    pub fn len(&self) -> usize {
        self.digits.len() / self.s
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn point(&self, i: usize) -> &[u64] {
        &self.digits[i * self.s..(i + 1) * self.s]
    }

    pub fn points(&self) -> impl Iterator<Item = &[u64]> {
        self.digits.chunks_exact(self.s)
    }
}

fn check_precision(w: u32) -> Result<()> {
    if (1..=64).contains(&w) {
        Ok(())
    } else {
        Err(Error::Precision(format!("precision must be in 1..=64, got {w}")))
    }
}

#[inline]
pub(crate) fn digit_mask(w: u32) -> u64 {
    if w == 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

/// Rank over GF(2) of a set of bit vectors.
pub fn gf2_rank(vectors: &[u64]) -> usize {
    // Basis indexed by leading bit.
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for &v in vectors {
        let mut x = v;
        while x != 0 {
            let lead = 63 - x.leading_zeros() as usize;
            if basis[lead] == 0 {
                basis[lead] = x;
                rank += 1;
                break;
            }
            x ^= basis[lead];
        }
    }
    rank
}

struct Primitive {
    degree: u32,
    coefficients: u64,
    initial: Vec<u64>,
}

fn parse_table() -> Vec<Primitive> {
    DIRECTION_TABLE
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let nums: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse().expect("direction table is well formed"))
                .collect();
            Primitive {
                degree: nums[1] as u32,
                coefficients: nums[2],
                initial: nums[3..].to_vec(),
            }
        })
        .collect()
}

fn direction_columns(poly: &Primitive, w: u32) -> Vec<u64> {
    let deg = poly.degree as usize;
    let w_us = w as usize;
    let mut v = vec![0u64; w_us];
    for k in 0..w_us {
        v[k] = if k < deg {
            poly.initial[k] << (w_us - 1 - k)
        } else {
            let mut x = v[k - deg] ^ (v[k - deg] >> deg);
            for i in 1..deg {
                if (poly.coefficients >> (deg - 1 - i)) & 1 == 1 {
                    x ^= v[k - i];
                }
            }
            x
        };
    }
    v
}

/// Sobol' generator matrices for `s` dimensions at `w` bits of precision.
/// Dimension 0 is the identity (van der Corput).
pub fn build_sobol_matrices(s: usize, w: u32) -> Result<GeneratorMatrixSet> {
    check_precision(w)?;
    if s == 0 {
        return Err(Error::Shape("dimension must be positive".into()));
    }
    if s > SOBOL_CAPACITY {
        return Err(Error::Capacity { requested: s, capacity: SOBOL_CAPACITY });
    }
    let identity: Vec<u64> = (0..w).map(|k| 1u64 << (w - 1 - k)).collect();
    let mut columns = vec![identity];
    columns.extend(parse_table().iter().take(s - 1).map(|p| direction_columns(p, w)));
    Ok(GeneratorMatrixSet::from_columns_unchecked(w, columns))
}

#[inline]
fn apply(columns: &[u64], mut bits: u64) -> u64 {
    let mut x = 0;
    while bits != 0 {
        x ^= columns[bits.trailing_zeros() as usize];
        bits &= bits - 1;
    }
    x
}

/// Digit vector of point `index`.
pub fn generate_point(g: &GeneratorMatrixSet, index: u64, ordering: Ordering) -> Result<Vec<u64>> {
    let w = g.precision();
    if w < 64 && index >> w != 0 {
        return Err(Error::IndexOutOfRange { index, bits: w });
    }
    let bits = match ordering {
        Ordering::Natural => index,
        Ordering::Gray => index ^ (index >> 1),
    };
    Ok(g.columns.iter().map(|cols| apply(cols, bits)).collect())
}

/// The first `2^m` points in natural order.
pub fn generate_net(g: &GeneratorMatrixSet, m: u32) -> Result<DigitalPointSet> {
    generate_net_ordered(g, m, Ordering::Natural)
}

/// The first `2^m` points in the given order. Both orders give the same set.
pub fn generate_net_ordered(
    g: &GeneratorMatrixSet,
    m: u32,
    ordering: Ordering,
) -> Result<DigitalPointSet> {
    let w = g.precision();
    if m > w {
        return Err(Error::Precision(format!("m = {m} exceeds precision w = {w}")));
    }
    if m > 30 {
        return Err(Error::Resource(format!("2^{m} points exceed the in-memory limit of 2^30")));
    }
    let s = g.dim();
    let n = 1usize << m;
    let mut digits = vec![0u64; n * s];
    for i in 1..n {
        let c = i.trailing_zeros() as usize;
        // Natural order: drop the lowest set bit. Gray order: step from i - 1.
        let prev = match ordering {
            Ordering::Natural => i & (i - 1),
            Ordering::Gray => i - 1,
        };
        for j in 0..s {
            digits[i * s + j] = digits[prev * s + j] ^ g.columns[j][c];
        }
    }
    Ok(DigitalPointSet { s, m, w, digits })
}

/// Maps one digit integer to `[0,1)`. Digits beyond the `f64` mantissa
/// (53 bits, 52 with the center offset) are truncated so the result never
/// rounds up to 1.
#[inline]
pub fn digit_to_unit(d: u64, w: u32, offset: Offset) -> f64 {
    let keep = match offset {
        Offset::None => 53,
        Offset::Center => 52,
    };
    let (d, w) = if w > keep { (d >> (w - keep), keep) } else { (d, w) };
    let scale = 1.0 / (1u64 << w) as f64;
    match offset {
        Offset::None => d as f64 * scale,
        Offset::Center => (d as f64 + 0.5) * scale,
    }
}

/// Real coordinates, one `Vec` per point.
pub fn to_unit_cube(p: &DigitalPointSet, offset: Offset) -> Vec<Vec<f64>> {
    p.points()
        .map(|pt| pt.iter().map(|&d| digit_to_unit(d, p.w, offset)).collect())
        .collect()
}
