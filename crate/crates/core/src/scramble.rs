//! Randomization of base-2 digital nets.
//!
//! * Owen nested uniform scrambling. In base 2 a uniformly random permutation
//!   of `{0, 1}` is a random bit flip, so the permutation tree is realized
//!   lazily: the flip applied to digit `d` of a coordinate is one bit of
//!   `prf(seed, replicate, dimension, d, first d - 1 digits)`.
//! * Linear matrix scrambling: each generator matrix is left-multiplied by a
//!   random unit lower-triangular matrix, usually followed by a
//!   [`digital_shift`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net_gen::{digit_mask, generate_net, DigitalPointSet, GeneratorMatrixSet};
use crate::prf::{Purpose, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScrambleKind {
    None,
    #[default]
    Owen,
    /// Linear matrix scramble followed by a digital shift.
    #[serde(rename = "lms")]
    LmsShift,
}

impl std::fmt::Display for ScrambleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScrambleKind::None => "none",
            ScrambleKind::Owen => "owen",
            ScrambleKind::LmsShift => "lms",
        })
    }
}

/// Randomization choice. `(kind, seed, replicate)` fully determines the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScrambleSpec {
    pub kind: ScrambleKind,
    pub seed: u64,
    pub replicate: u64,
}

impl ScrambleSpec {
    pub fn new(kind: ScrambleKind, seed: u64, replicate: u64) -> Self {
        ScrambleSpec { kind, seed, replicate }
    }
}

fn expect_kind(spec: &ScrambleSpec, kind: ScrambleKind) -> Result<()> {
    if spec.kind == kind {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("scramble spec is `{}`, expected `{kind}`", spec.kind)))
    }
}

/// Lazy Owen scrambler for `s` dimensions at precision `w`.
#[derive(Debug, Clone)]
pub struct OwenScrambler {
    w: u32,
    /// One key per (dimension, digit depth).
    keys: Vec<Vec<StreamKey>>,
}

impl OwenScrambler {
    pub fn new(s: usize, w: u32, seed: u64, replicate: u64) -> Self {
        let keys = (0..s)
            .map(|j| {
                let root = StreamKey::new(seed, replicate, Purpose::Owen, j as u64);
                (0..w as u64).map(|d| root.child(d)).collect()
            })
            .collect();
        OwenScrambler { w, keys }
    }

    /// Flip applied to digit `depth` (0 = leading digit) of dimension `j`
    /// when the preceding `depth` digits read `prefix`.
    #[inline]
    pub fn flip(&self, j: usize, depth: u32, prefix: u64) -> u64 {
        self.keys[j][depth as usize].block(prefix) >> 63
    }

    #[inline]
    pub fn scramble(&self, j: usize, x: u64) -> u64 {
        let w = self.w;
        let mut out = x;
        for depth in 0..w {
            let prefix = if depth == 0 { 0 } else { x >> (w - depth) };
            out ^= self.flip(j, depth, prefix) << (w - 1 - depth);
        }
        out
    }
}

/// Owen nested uniform scrambling of every coordinate to full precision.
pub fn owen_scramble(p: &DigitalPointSet, spec: &ScrambleSpec) -> Result<DigitalPointSet> {
    expect_kind(spec, ScrambleKind::Owen)?;
    let scrambler = OwenScrambler::new(p.s, p.w, spec.seed, spec.replicate);
    let digits = p
        .digits
        .iter()
        .enumerate()
        .map(|(idx, &x)| scrambler.scramble(idx % p.s, x))
        .collect();
    Ok(DigitalPointSet { digits, ..p.clone() })
}

/// A `w x w` unit lower-triangular matrix over GF(2), stored by rows.
/// Row `r` is a mask over digit positions; bit `w - 1 - r` is the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerTriangular {
    w: u32,
    rows: Vec<u64>,
}

impl LowerTriangular {
    pub fn identity(w: u32) -> Self {
        LowerTriangular { w, rows: (0..w).map(|r| 1u64 << (w - 1 - r)).collect() }
    }

    /// Uniform draw from the unit lower-triangular matrices.
    pub fn random(w: u32, key: StreamKey) -> Self {
        let rows = (0..w)
            .map(|r| {
                let diag = 1u64 << (w - 1 - r);
                // Strictly-lower entries of row r are the r leading digit positions.
                let lower = digit_mask(w) & !(digit_mask(w - r));
                diag | (key.block(r as u64) & lower)
            })
            .collect();
        LowerTriangular { w, rows }
    }

    #[inline]
    pub fn apply(&self, v: u64) -> u64 {
        let mut out = 0;
        for (r, &row) in self.rows.iter().enumerate() {
            out |= (((row & v).count_ones() & 1) as u64) << (self.w - 1 - r as u32);
        }
        out
    }
}

/// Left-multiplies every generator matrix `C_j` by `mats[j]`.
pub fn apply_lower_triangular(
    g: &GeneratorMatrixSet,
    mats: &[LowerTriangular],
) -> Result<GeneratorMatrixSet> {
    if mats.len() != g.dim() || mats.iter().any(|l| l.w != g.precision()) {
        return Err(Error::Shape("one w x w scrambling matrix per dimension is required".into()));
    }
    let columns = mats
        .iter()
        .enumerate()
        .map(|(j, l)| g.columns(j).iter().map(|&c| l.apply(c)).collect())
        .collect();
    Ok(GeneratorMatrixSet::from_columns_unchecked(g.precision(), columns))
}

/// Random linear matrix scramble of the generator matrices. The companion
/// digital shift is applied separately to the generated points.
pub fn lms_scramble(g: &GeneratorMatrixSet, spec: &ScrambleSpec) -> Result<GeneratorMatrixSet> {
    expect_kind(spec, ScrambleKind::LmsShift)?;
    let mats: Vec<LowerTriangular> = (0..g.dim())
        .map(|j| {
            let key = StreamKey::new(spec.seed, spec.replicate, Purpose::LinearScramble, j as u64);
            LowerTriangular::random(g.precision(), key)
        })
        .collect();
    apply_lower_triangular(g, &mats)
}

/// One random `w`-bit shift word per dimension, drawn from `(seed, replicate, dimension)`.
pub fn shift_words(s: usize, w: u32, spec: &ScrambleSpec) -> Vec<u64> {
    (0..s)
        .map(|j| {
            StreamKey::new(spec.seed, spec.replicate, Purpose::DigitalShift, j as u64).block(0)
                & digit_mask(w)
        })
        .collect()
}

/// XORs each dimension with an explicit shift word.
pub fn digital_shift_with(p: &DigitalPointSet, words: &[u64]) -> Result<DigitalPointSet> {
    if words.len() != p.s {
        return Err(Error::Shape(format!("{} shift words for {} dimensions", words.len(), p.s)));
    }
    let mask = digit_mask(p.w);
    let digits = p
        .digits
        .iter()
        .enumerate()
        .map(|(idx, &x)| x ^ (words[idx % p.s] & mask))
        .collect();
    Ok(DigitalPointSet { digits, ..p.clone() })
}

/// Random digital shift drawn from `spec`.
pub fn digital_shift(p: &DigitalPointSet, spec: &ScrambleSpec) -> Result<DigitalPointSet> {
    digital_shift_with(p, &shift_words(p.s, p.w, spec))
}

/// Generates the first `2^m` points randomized according to `spec`.
pub fn scrambled_net(g: &GeneratorMatrixSet, m: u32, spec: &ScrambleSpec) -> Result<DigitalPointSet> {
    match spec.kind {
        ScrambleKind::None => generate_net(g, m),
        ScrambleKind::Owen => owen_scramble(&generate_net(g, m)?, spec),
        ScrambleKind::LmsShift => digital_shift(&generate_net(&lms_scramble(g, spec)?, m)?, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_gen::{build_sobol_matrices, gf2_rank};

    fn origin(w: u32) -> DigitalPointSet {
        DigitalPointSet::new(1, 0, w, vec![0]).unwrap()
    }

    #[test]
    fn owen_first_bit_is_fair() {
        let ones = (0..4096u64)
            .filter(|&seed| {
                let out = owen_scramble(&origin(32), &ScrambleSpec::new(ScrambleKind::Owen, seed, 0)).unwrap();
                out.digits[0] >> 31 == 1
            })
            .count();
        let frac = ones as f64 / 4096.0;
        assert!((frac - 0.5).abs() <= 0.03, "fraction {frac}");
    }

    #[test]
    fn owen_flips_are_nested() {
        let sc = OwenScrambler::new(1, 8, 11, 3);
        // Two coordinates sharing their first three digits get the same flip at depth 3.
        let a = 0b1010_0000u64;
        let b = 0b1011_1111u64;
        let (oa, ob) = (sc.scramble(0, a), sc.scramble(0, b));
        assert_eq!(oa >> 5 ^ a >> 5, ob >> 5 ^ b >> 5);
        // Digit 3 (bit 4) of the output flips by the same amount for both.
        assert_eq!((oa ^ a) >> 4 & 1, (ob ^ b) >> 4 & 1);

        // Coordinates differing at the first digit see independent flips at depth 1.
        let agree = (0..4096u64)
            .filter(|&seed| {
                let sc = OwenScrambler::new(1, 8, seed, 0);
                sc.flip(0, 1, 0) == sc.flip(0, 1, 1)
            })
            .count() as f64
            / 4096.0;
        assert!((agree - 0.5).abs() < 0.03, "agreement {agree}");
    }

    #[test]
    fn owen_is_bijective_on_the_grid() {
        let sc = OwenScrambler::new(1, 10, 5, 0);
        let mut seen = vec![false; 1024];
        for x in 0..1024u64 {
            let y = sc.scramble(0, x) as usize;
            assert!(!seen[y]);
            seen[y] = true;
        }
    }

    #[test]
    fn spec_mismatch_is_an_error() {
        let p = origin(8);
        let g = build_sobol_matrices(1, 8).unwrap();
        assert!(owen_scramble(&p, &ScrambleSpec::new(ScrambleKind::LmsShift, 0, 0)).is_err());
        assert!(lms_scramble(&g, &ScrambleSpec::new(ScrambleKind::Owen, 0, 0)).is_err());
    }

    #[test]
    fn identity_draw_leaves_matrices_unchanged() {
        let g = build_sobol_matrices(4, 32).unwrap();
        let ids = vec![LowerTriangular::identity(32); 4];
        assert_eq!(apply_lower_triangular(&g, &ids).unwrap(), g);
    }

    #[test]
    fn lms_keeps_matrices_invertible() {
        let g = build_sobol_matrices(16, 32).unwrap();
        for seed in 0..20 {
            let sg = lms_scramble(&g, &ScrambleSpec::new(ScrambleKind::LmsShift, seed, 0)).unwrap();
            for j in 0..16 {
                assert_eq!(gf2_rank(sg.columns(j)), 32);
            }
            assert_ne!(sg, g);
        }
    }

    #[test]
    fn lower_triangular_structure() {
        let l = LowerTriangular::random(8, StreamKey::new(1, 1, Purpose::LinearScramble, 0));
        // A unit lower-triangular map never changes digits above the first differing one.
        for v in 0..256u64 {
            let y = l.apply(v);
            let lead = v.leading_zeros();
            assert_eq!(y.leading_zeros(), lead);
        }
    }

    #[test]
    fn shift_properties() {
        let g = build_sobol_matrices(3, 32).unwrap();
        let net = generate_net(&g, 5).unwrap();
        assert_eq!(digital_shift_with(&net, &[0, 0, 0]).unwrap(), net);
        let spec = ScrambleSpec::new(ScrambleKind::LmsShift, 99, 4);
        let once = digital_shift(&net, &spec).unwrap();
        assert_ne!(once, net);
        assert_eq!(digital_shift(&once, &spec).unwrap(), net);
    }

    #[test]
    fn determinism() {
        let g = build_sobol_matrices(3, 32).unwrap();
        for kind in [ScrambleKind::Owen, ScrambleKind::LmsShift] {
            let spec = ScrambleSpec::new(kind, 1234, 7);
            assert_eq!(scrambled_net(&g, 6, &spec).unwrap(), scrambled_net(&g, 6, &spec).unwrap());
        }
    }

    fn chi_square_uniform(samples: &[u64], cells: usize) -> f64 {
        let mut counts = vec![0f64; cells];
        for &x in samples {
            counts[x as usize] += 1.0;
        }
        let e = samples.len() as f64 / cells as f64;
        counts.iter().map(|c| (c - e) * (c - e) / e).sum()
    }

    #[test]
    fn scrambled_points_are_uniform_across_seeds() {
        let g = build_sobol_matrices(2, 32).unwrap();
        let lead = 6u32;
        for kind in [ScrambleKind::Owen, ScrambleKind::LmsShift] {
            for point in [0usize, 5, 13] {
                let samples: Vec<u64> = (0..4096u64)
                    .map(|seed| {
                        let net = scrambled_net(&g, 4, &ScrambleSpec::new(kind, seed, 0)).unwrap();
                        net.point(point)[1] >> (32 - lead)
                    })
                    .collect();
                // 63 degrees of freedom; the 0.999 quantile is about 103.4.
                let chi2 = chi_square_uniform(&samples, 1 << lead);
                assert!(chi2 < 103.4, "{kind} point {point}: chi2 {chi2}");
            }
        }
    }

    #[test]
    fn replicate_streams_are_uncorrelated() {
        let g = build_sobol_matrices(2, 32).unwrap();
        for kind in [ScrambleKind::Owen, ScrambleKind::LmsShift] {
            let n = 4096;
            let (mut sum_xy, mut sum_x, mut sum_y) = (0.0, 0.0, 0.0);
            for seed in 0..n as u64 {
                let a = scrambled_net(&g, 3, &ScrambleSpec::new(kind, seed, 0)).unwrap();
                let b = scrambled_net(&g, 3, &ScrambleSpec::new(kind, seed, 1)).unwrap();
                let x = (a.point(2)[0] >> 31) as f64;
                let y = (b.point(2)[0] >> 31) as f64;
                sum_xy += x * y;
                sum_x += x;
                sum_y += y;
            }
            let nf = n as f64;
            let cov = sum_xy / nf - (sum_x / nf) * (sum_y / nf);
            let corr = cov / 0.25;
            let se = 1.0 / nf.sqrt();
            assert!(corr.abs() < 3.0 * se, "{kind}: correlation {corr}");
        }
    }
}
