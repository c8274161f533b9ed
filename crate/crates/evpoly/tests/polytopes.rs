//! Lattice point counting in dilated polytopes: membership against an
//! independent convex-combination oracle, fitted counting functions, and
//! the decomposition identities that reduce large dilations to sumsets.

mod common;

use common::{in_dilation_by_subsets, q, rng};
use rand::Rng;

use evpoly::colorings::Coloring;
use evpoly::orthants::box_points;
use evpoly::polytopes::{CountingFit, RationalPolytope, SetIdentityCheck};
use evpoly::semigroups::{Elem, ZdAdd};
use evpoly::Rational;

fn poly(vertices: &[&[(i64, i64)]]) -> RationalPolytope {
    RationalPolytope::new(
        vertices
            .iter()
            .map(|v| v.iter().map(|&(n, d)| q(n, d)).collect())
            .collect(),
    )
    .unwrap()
}

#[test]
fn membership_agrees_with_convex_combination_search() {
    let mut rng = rng(0xca7a);
    for round in 0..12 {
        let k = rng.gen_range(1..=2usize);
        let m = rng.gen_range(k + 1..=k + 3);
        let vertices: Vec<Vec<Rational>> = (0..m)
            .map(|_| {
                (0..k)
                    .map(|_| q(rng.gen_range(0..=8i64), rng.gen_range(1..=2i64)))
                    .collect()
            })
            .collect();
        let p = RationalPolytope::new(vertices.clone()).unwrap();
        for n in [1u32, 3] {
            let dims: Vec<u32> = (0..k).map(|i| p.bbox_dims(n)[i] + 1).collect();
            for x in box_points(&dims) {
                assert_eq!(
                    p.contains_lattice(&x, n).unwrap(),
                    in_dilation_by_subsets(&vertices, &x, n),
                    "round {round}, n = {n}, x = {x:?}"
                );
            }
        }
    }
}

#[test]
fn cube_and_simplex_counts_fit_their_polynomials() {
    for k in 1..=3usize {
        let mut vertices = Vec::new();
        for mask in 0..1u32 << k {
            vertices.push((0..k).map(|i| q(((mask >> i) & 1) as i64, 1)).collect());
        }
        let cube = RationalPolytope::new(vertices).unwrap();
        let fit = cube.ehrhart_fit().unwrap();
        assert_eq!(fit.period(), 1);
        for n in 0..=12u32 {
            let want = (0..k).fold(q(1, 1), |acc, _| acc * q(n as i64 + 1, 1));
            assert_eq!(fit.eval(n), want, "k = {k}, n = {n}");
        }
    }
    // Unit simplex: binomial counts.
    let simplex = poly(&[&[(0, 1), (0, 1)], &[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
    let fit = simplex.ehrhart_fit().unwrap();
    for n in 0..=12i64 {
        assert_eq!(fit.eval(n as u32), q((n + 1) * (n + 2), 2));
    }
}

#[test]
fn half_open_denominators_give_periodic_counts() {
    // [0, 1/2]: counts floor(n/2) + 1, period 2.
    let half = RationalPolytope::new(vec![vec![q(0, 1)], vec![q(1, 2)]]).unwrap();
    assert_eq!(half.denominator(), 2);
    let fit = half.ehrhart_fit().unwrap();
    assert_eq!(fit.period(), 2);
    for n in 0..=20i64 {
        assert_eq!(fit.eval(n as u32), q(n / 2 + 1, 1), "n = {n}");
    }
    // [0, 1/3] u {2/3-ish segment}: a thirds segment with period 3.
    let third = RationalPolytope::new(vec![vec![q(1, 3)], vec![q(4, 3)]]).unwrap();
    assert_eq!(third.denominator(), 3);
    let fit = third.ehrhart_fit().unwrap();
    let brute = |n: u32| -> i64 {
        let mut c = 0;
        for x in 0..=2 * n as i64 {
            if 3 * x >= n as i64 && 3 * x <= 4 * n as i64 {
                c += 1;
            }
        }
        c
    };
    for n in 0..=18u32 {
        assert_eq!(fit.eval(n), q(brute(n), 1), "n = {n}");
    }
    match fit {
        CountingFit::Quasipolynomial(quasi) => assert_eq!(quasi.period(), 3),
        CountingFit::Polynomial(_) => panic!("expected a periodic fit"),
    }
}

#[test]
fn lattice_decomposition_reduces_dilations() {
    let mut rng = rng(0xdec0);
    let mut checked = 0;
    for _ in 0..25 {
        let k = 2usize;
        let m = rng.gen_range(3..=4);
        let vertices: Vec<Vec<Rational>> = (0..m)
            .map(|_| (0..k).map(|_| q(rng.gen_range(0..=4i64), 1)).collect())
            .collect();
        let p = RationalPolytope::new(vertices).unwrap();
        assert_eq!(p.denominator(), 1);
        for n in 2..=10u32 {
            match p.verify_decomposition(n) {
                Ok(SetIdentityCheck::Holds) => checked += 1,
                Ok(SetIdentityCheck::Counterexample { point, in_dilation }) => {
                    panic!(
                        "decomposition fails at {point:?} (in dilation: {in_dilation}) \
                         for vertices {:?}, n = {n}",
                        p.vertices()
                    );
                }
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
    }
    assert!(checked >= 25 * 9);
}

#[test]
fn small_dilations_are_out_of_scope_for_the_identity() {
    let simplex = poly(&[&[(0, 1), (0, 1)], &[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
    assert!(simplex.verify_decomposition(1).is_err());
    assert!(simplex.verify_decomposition(2).is_ok());
}

#[test]
fn rational_decomposition_uses_the_denominator_step() {
    let half = RationalPolytope::new(vec![vec![q(0, 1)], vec![q(1, 2)]]).unwrap();
    // m = 2, k = 1: valid from n = 2 onward.
    assert!(half.verify_rational_decomposition(1).is_err());
    for n in 2..=14u32 {
        assert!(matches!(
            half.verify_rational_decomposition(n).unwrap(),
            SetIdentityCheck::Holds
        ));
    }
    let tri = poly(&[&[(0, 1), (0, 1)], &[(3, 2), (1, 2)], &[(0, 1), (1, 1)]]);
    assert_eq!(tri.denominator(), 2);
    for n in 4..=9u32 {
        assert!(matches!(
            tri.verify_rational_decomposition(n).unwrap(),
            SetIdentityCheck::Holds
        ));
    }
}

#[test]
fn color_counts_reduce_to_sumset_sizes() {
    // Simplex dilations colored by a gapped numeric map: the number of
    // distinct colors matches the sumset sizes of the generator set.
    let simplex = poly(&[
        &[(0, 1), (0, 1), (0, 1)],
        &[(1, 1), (0, 1), (0, 1)],
        &[(0, 1), (1, 1), (0, 1)],
        &[(0, 1), (0, 1), (1, 1)],
    ]);
    let chi = Coloring::associated(
        ZdAdd { d: 1 },
        vec![Elem::scalar(0), Elem::scalar(2), Elem::scalar(3)],
    )
    .unwrap();
    let counts: Vec<usize> = (0..=9u32)
        .map(|n| simplex.color_count(&chi, n).unwrap())
        .collect();
    // Each dilation colors to exactly n*{0,2,3}: the slack inequality
    // v1+v2+v3 <= n matches the 0 generator absorbing the remainder.
    let direct: Vec<usize> = (0..=9u32)
        .map(|n| {
            evpoly::semigroups::n_fold_sumset(
                &ZdAdd { d: 1 },
                &[0i64, 2, 3].iter().map(|&v| Elem::scalar(v)).collect(),
                n,
            )
            .unwrap()
            .len()
        })
        .collect();
    assert_eq!(counts, direct);
    assert_eq!(counts, vec![1, 3, 6, 9, 12, 15, 18, 21, 24, 27]);
    let fit = simplex.color_count_fit(&chi, None, 8).unwrap();
    for n in 0..=9u32 {
        let expected = q(counts[n as usize] as i64, 1);
        if n >= fit.threshold {
            assert_eq!(fit.fit.eval(n), expected);
        }
    }
    assert!(fit.threshold <= 2);
}

#[test]
fn translated_polytopes_count_like_their_shifts() {
    let (p, offset) =
        RationalPolytope::new_translated(vec![vec![q(-1, 2)], vec![q(3, 2)]]).unwrap();
    assert_eq!(offset, vec![-1]);
    // [-1/2, 3/2] shifted by 1 is [1/2, 5/2]: same width, same counts.
    let fit = p.ehrhart_fit().unwrap();
    let brute = |n: i64| (5 * n).div_euclid(2) - (n - 1).div_euclid(2);
    for n in 1..=12i64 {
        assert_eq!(fit.eval(n as u32), q(brute(n), 1), "n = {n}");
    }
}
