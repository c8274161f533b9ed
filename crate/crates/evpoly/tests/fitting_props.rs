//! Property tests for the exact interpolation layer: fits recover what
//! generated the samples, verification is zero tolerance, and accepted
//! tables are stable under larger search windows.

mod common;

use common::q;
use proptest::prelude::*;

use evpoly::fitting::{
    fit_polynomial, fit_quasipolynomial, fit_sep, verify_fit, Fitted, Quasipolynomial,
};
use evpoly::orthants::box_points;
use evpoly::poly::MultiPoly;
use evpoly::Rational;

fn dense_poly(coeffs: &[i64]) -> MultiPoly<Rational> {
    // Univariate with the given coefficients, constant first.
    let mut p = MultiPoly::zero(1);
    for (d, &c) in coeffs.iter().enumerate() {
        let mono = MultiPoly::monomial(1, vec![d as u32], q(c, 1));
        p = p.add(&mono);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomials_are_recovered_from_enough_samples(
        coeffs in prop::collection::vec(-9i64..=9, 1..=4),
    ) {
        let degree = coeffs.len() as u32 - 1;
        let p = dense_poly(&coeffs);
        let samples: Vec<(Vec<u32>, Rational)> = (0..=degree + 2)
            .map(|n| (vec![n], p.eval_nat(&[n])))
            .collect();
        let fitted = fit_polynomial(1, &samples, degree).unwrap();
        for n in 0..=20u32 {
            prop_assert_eq!(fitted.eval_nat(&[n]), p.eval_nat(&[n]));
        }
    }

    #[test]
    fn bivariate_polynomials_are_recovered(
        a in -5i64..=5, b in -5i64..=5, c in -5i64..=5, d in -5i64..=5,
    ) {
        // p(x, y) = a + b x + c y + d x y.
        let p = MultiPoly::monomial(2, vec![0, 0], q(a, 1))
            .add(&MultiPoly::monomial(2, vec![1, 0], q(b, 1)))
            .add(&MultiPoly::monomial(2, vec![0, 1], q(c, 1)))
            .add(&MultiPoly::monomial(2, vec![1, 1], q(d, 1)));
        let samples: Vec<(Vec<u32>, Rational)> = box_points(&[3, 3])
            .map(|v| {
                let value = p.eval_nat(&v);
                (v, value)
            })
            .collect();
        let fitted = fit_polynomial(2, &samples, 2).unwrap();
        for v in box_points(&[6, 6]) {
            prop_assert_eq!(fitted.eval_nat(&v), p.eval_nat(&v));
        }
    }

    #[test]
    fn quasipolynomials_are_recovered_per_residue(
        c0 in prop::collection::vec(-6i64..=6, 1..=3),
        c1 in prop::collection::vec(-6i64..=6, 1..=3),
    ) {
        let residues = vec![dense_poly(&c0), dense_poly(&c1)];
        let target = Quasipolynomial::new(2, residues).unwrap();
        let degree = 2u32;
        let fitted = fit_quasipolynomial(
            |n| Ok(target.eval(n)),
            2,
            degree,
            0,
        )
        .unwrap();
        for n in 0..=24u32 {
            prop_assert_eq!(fitted.eval(n), target.eval(n));
        }
    }

    #[test]
    fn verification_is_zero_tolerance(
        coeffs in prop::collection::vec(-4i64..=4, 1..=3),
        bump in 1i64..=3,
        at in 0u32..=6,
    ) {
        let p = dense_poly(&coeffs);
        let report = verify_fit(
            &Fitted::Polynomial(&p),
            |n| {
                let mut v = p.eval_nat(n);
                if n[0] == at {
                    v += q(bump, 1);
                }
                Ok(v)
            },
            &[10],
        )
        .unwrap();
        prop_assert_eq!(report.mismatches.len(), 1);
        prop_assert_eq!(report.mismatches[0].point.clone(), vec![at]);
        prop_assert!(!report.clean());
    }

    #[test]
    fn accepted_tables_survive_larger_windows(
        pattern in prop::collection::vec(0i64..=5, 1..=3),
        slope in 0i64..=4,
    ) {
        // Oracle: arbitrary transient values, then linear growth.
        let c = pattern.len() as u32;
        let oracle = |n: &[u32]| -> evpoly::Result<Rational> {
            let n = n[0];
            Ok(if n < c {
                q(pattern[n as usize], 1)
            } else {
                q(slope * n as i64 + 7, 1)
            })
        };
        let tight = fit_sep(1, oracle, 1, 12).unwrap();
        let loose = fit_sep(1, oracle, 3, 12).unwrap();
        for n in 0..=30u32 {
            let w = oracle(&[n]).unwrap();
            prop_assert_eq!(tight.eval(&[n]).unwrap(), w.clone());
            prop_assert_eq!(loose.eval(&[n]).unwrap(), w);
        }
    }
}

#[test]
fn degenerate_periods_collapse_to_plain_fits() {
    let p = dense_poly(&[3, -2, 1]);
    let quasi = fit_quasipolynomial(|n| Ok(p.eval_nat(&[n])), 3, 2, 0).unwrap();
    assert_eq!(quasi.period(), 3);
    for r in quasi.residues() {
        for n in 0..=9u32 {
            assert_eq!(r.eval_nat(&[n]), p.eval_nat(&[n]));
        }
    }
}
