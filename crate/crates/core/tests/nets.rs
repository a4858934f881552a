//! Net structure across generation, scrambling and verification.

use scrambled_nets::net_gen::{build_sobol_matrices, generate_net, to_unit_cube, GeneratorMatrixSet, Offset};
use scrambled_nets::net_verify::{binomial, certify, is_tms_net, quality_parameter, quality_parameter_digits, CellGrid, Compositions};
use scrambled_nets::scramble::{digital_shift, lms_scramble, owen_scramble, scrambled_net, ScrambleKind, ScrambleSpec};
use scrambled_nets::DigitalPointSet;

/// Quality parameter of the digital net spanned by the first `m` columns,
/// by linear algebra: the net has strength `k` iff for every composition
/// `d` of `k` the leading `d_j` rows of the matrices are independent.
fn rank_quality(g: &GeneratorMatrixSet, m: u32) -> u32 {
    let s = g.dim();
    let row = |j: usize, r: u32| -> u64 { (0..m).filter(|&c| g.entry(j, r, c)).map(|c| 1u64 << c).sum() };
    let independent = |vectors: &[u64]| {
        let mut basis: Vec<u64> = Vec::new();
        for &v in vectors {
            let mut x = v;
            for &b in &basis {
                x = x.min(x ^ b);
            }
            if x == 0 {
                return false;
            }
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
        true
    };
    let mut strength = 0;
    for k in 1..=m {
        let all = Compositions::new(k, s).all(|d| {
            let rows: Vec<u64> = d.iter().enumerate().flat_map(|(j, &dj)| (0..dj).map(move |r| (j, r))).map(|(j, r)| row(j, r)).collect();
            independent(&rows)
        });
        if !all {
            break;
        }
        strength = k;
    }
    m - strength
}

#[test]
fn counting_agrees_with_rank_oracle() {
    for s in [2, 3, 5] {
        let g = build_sobol_matrices(s, 32).unwrap();
        for m in 1..=10 {
            let p = generate_net(&g, m).unwrap();
            assert_eq!(quality_parameter_digits(&p).unwrap(), rank_quality(&g, m), "s={s} m={m}");
        }
    }
}

#[test]
fn two_dimensional_sobol_is_a_zero_net() {
    let g = build_sobol_matrices(2, 32).unwrap();
    for m in 0..=10 {
        assert_eq!(quality_parameter_digits(&generate_net(&g, m).unwrap()).unwrap(), 0);
    }
    let pts = to_unit_cube(&generate_net(&g, 4).unwrap(), Offset::None);
    let cert = is_tms_net(&pts, 0, 4, 2, 2).unwrap();
    assert!(cert.valid);
    assert_eq!(cert.resolutions_checked, binomial(5, 1));
}

fn t_of(p: &DigitalPointSet) -> u32 {
    quality_parameter_digits(p).unwrap()
}

#[test]
fn scrambling_preserves_quality_over_many_seeds() {
    for (s, m) in [(2usize, 4u32), (5, 8)] {
        let g = build_sobol_matrices(s, 32).unwrap();
        let base = generate_net(&g, m).unwrap();
        let t = t_of(&base);
        for seed in 0..100 {
            let owen = owen_scramble(&base, &ScrambleSpec::new(ScrambleKind::Owen, seed, 0)).unwrap();
            assert_eq!(t_of(&owen), t, "owen s={s} seed={seed}");
            let spec = ScrambleSpec::new(ScrambleKind::LmsShift, seed, 0);
            let lms = generate_net(&lms_scramble(&g, &spec).unwrap(), m).unwrap();
            assert_eq!(t_of(&lms), t, "lms s={s} seed={seed}");
            assert_eq!(t_of(&digital_shift(&lms, &spec).unwrap()), t);
            assert_eq!(t_of(&digital_shift(&base, &spec).unwrap()), t);
        }
    }
}

#[test]
fn scrambled_points_are_certified_from_reals_too() {
    let g = build_sobol_matrices(3, 32).unwrap();
    for kind in [ScrambleKind::Owen, ScrambleKind::LmsShift] {
        let p = scrambled_net(&g, 7, &ScrambleSpec::new(kind, 99, 3)).unwrap();
        let reals = to_unit_cube(&p, Offset::None);
        assert_eq!(quality_parameter(&reals, 7, 3, 2).unwrap(), t_of(&p));
    }
}

#[test]
fn lms_matrices_have_the_same_rank_quality() {
    let g = build_sobol_matrices(4, 32).unwrap();
    for seed in 0..10 {
        let l = lms_scramble(&g, &ScrambleSpec::new(ScrambleKind::LmsShift, seed, 1)).unwrap();
        for m in [3, 6, 9] {
            assert_eq!(rank_quality(&l, m), rank_quality(&g, m));
        }
    }
}

#[test]
fn certificate_names_violations_for_a_bad_set() {
    // Points on the diagonal: 1-D balanced in every axis but badly 2-D distributed.
    let pts: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64 / 16.0, i as f64 / 16.0]).collect();
    let grid = CellGrid::from_unit_cube(&pts, 2, 32).unwrap();
    let cert = certify(&grid, 0, 4, 2, 4).unwrap();
    assert!(!cert.valid);
    assert!(!cert.violations.is_empty() && cert.violations.len() <= 4);
    let v = &cert.violations[0];
    assert_eq!(v.ell.iter().sum::<u32>(), 4);
    assert_ne!(v.count, v.expected);
    // Halves hold 8 points each, but the diagonal meets only 2 of the 4 quadrants.
    assert_eq!(quality_parameter(&pts, 4, 2, 2).unwrap(), 3);
}
