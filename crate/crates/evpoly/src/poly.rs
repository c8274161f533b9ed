//! Multivariate polynomials over an exact scalar, used for interpolation
//! results, SEP table entries, and exponential-polynomial summands.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::scalar::{binomial, rational_from_i64, render_rational, Scalar};
use crate::Rational;

/// Polynomial in `vars` variables; monomials keyed by exponent vector.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly<S> {
    vars: usize,
    terms: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> MultiPoly<S> {
    pub fn zero(vars: usize) -> Self {
        MultiPoly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: S) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars], c);
        }
        p
    }

    pub fn variable(vars: usize, i: usize) -> Self {
        assert!(i < vars);
        let mut exp = vec![0; vars];
        exp[i] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(exp, S::one());
        p
    }

    pub fn monomial(vars: usize, exp: Vec<u32>, c: S) -> Self {
        assert_eq!(exp.len(), vars);
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &S)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn insert_add(&mut self, exp: Vec<u32>, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&exp) {
            None => {
                self.terms.insert(exp, c);
            }
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(exp, s);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_add(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&(-S::one())))
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.vars);
        }
        let mut out = Self::zero(self.vars);
        for (e, x) in &self.terms {
            out.terms.insert(e.clone(), x.clone() * c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars);
        let mut out = Self::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert_add(exp, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn eval(&self, point: &[S]) -> S {
        assert_eq!(point.len(), self.vars);
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &p) in point.iter().zip(e.iter()) {
                if p > 0 {
                    t = t * x.pow_u(p as u64);
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn eval_nat(&self, point: &[u32]) -> S {
        let lifted: Vec<S> = point
            .iter()
            .map(|&v| S::from_rational(rational_from_i64(v as i64)))
            .collect();
        self.eval(&lifted)
    }

    /// Embeds into a polynomial in `vars` variables, mapping variable i of
    /// self to variable `positions[i]`.
    pub fn embed(&self, vars: usize, positions: &[usize]) -> Self {
        assert_eq!(positions.len(), self.vars);
        let mut out = Self::zero(vars);
        for (e, c) in &self.terms {
            let mut exp = vec![0; vars];
            for (i, &p) in positions.iter().enumerate() {
                exp[p] = e[i];
            }
            out.insert_add(exp, c.clone());
        }
        out
    }

    /// Coefficients are all rational integers.
    pub fn is_integral(&self) -> bool {
        self.terms
            .values()
            .all(|c| c.as_rational().map_or(false, |r| r.denom() == &crate::Int::one()))
    }
}

/// The univariate polynomial binom(n - b + e - 1, e - 1) in the variable n,
/// valid (as the series coefficient of x^b/(1-x)^e) whenever n >= b.
/// Requires e >= 1; e = 1 gives the constant 1.
pub fn binomial_poly<S: Scalar>(vars: usize, var: usize, b: u32, e: u32) -> MultiPoly<S> {
    assert!(e >= 1);
    let mut p = MultiPoly::constant(vars, S::one());
    let n = MultiPoly::variable(vars, var);
    for j in 1..e {
        // factor (n - b + j) / j
        let shift = rational_from_i64(j as i64 - b as i64);
        let factor = n.add(&MultiPoly::constant(vars, S::from_rational(shift)));
        let inv_j = S::from_rational(Rational::new(
            crate::Int::one(),
            crate::Int::from(j),
        ));
        p = p.mul(&factor).scale(&inv_j);
    }
    p
}

/// Value of binom(v - b + e - 1, e - 1) for a concrete coordinate v, the
/// fixed-coordinate companion of `binomial_poly`. Zero when v < b.
pub fn binomial_count(v: u32, b: u32, e: u32) -> Rational {
    assert!(e >= 1);
    if v < b {
        return Rational::zero();
    }
    binomial((v - b) as u64 + e as u64 - 1, e as u64 - 1)
}

/// Renders a rational-coefficient polynomial in the artifact's canonical
/// text form: terms ascending by total degree, ties broken by descending
/// exponent vector, e.g. "1 + 2n + n^2" or "1 + n1 + 2 n2".
pub fn render_poly(poly: &MultiPoly<Rational>, names: &[String]) -> String {
    assert_eq!(names.len(), poly.vars());
    if poly.is_zero() {
        return "0".to_string();
    }
    let mut keys: Vec<&Vec<u32>> = poly.terms.keys().collect();
    keys.sort_by(|a, b| {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        da.cmp(&db).then_with(|| b.cmp(a))
    });
    let mut out = String::new();
    for (idx, exp) in keys.iter().enumerate() {
        let c = &poly.terms[*exp];
        let neg = c < &Rational::zero();
        let abs = if neg { -c.clone() } else { c.clone() };
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let is_const = exp.iter().all(|&e| e == 0);
        let coeff_one = abs.is_one();
        let coeff_printed = is_const || !coeff_one;
        if coeff_printed {
            out.push_str(&render_rational(&abs));
        }
        let mut first_var = true;
        for (i, &e) in exp.iter().enumerate() {
            if e == 0 {
                continue;
            }
            // Single-letter names attach to the coefficient ("2n");
            // longer names take a space ("2 n2"); variables are always
            // space-separated from each other.
            if !first_var || (coeff_printed && names[i].len() > 1) {
                out.push(' ');
            }
            first_var = false;
            out.push_str(&names[i]);
            if e > 1 {
                let _ = write!(out, "^{e}");
            }
        }
    }
    out
}

/// Variable names for rendered polynomials: "n" alone, or "n1".."nl".
pub fn default_names(l: usize) -> Vec<String> {
    if l == 1 {
        vec!["n".to_string()]
    } else {
        (1..=l).map(|i| format!("n{i}")).collect()
    }
}

/// Univariate polynomials over S as coefficient vectors (low degree first),
/// for the partial-fraction machinery.
pub mod uni {
    use super::*;

    pub fn trim<S: Scalar>(p: &mut Vec<S>) {
        while p.len() > 1 && p.last().map_or(false, |c| c.is_zero()) {
            p.pop();
        }
    }

    pub fn mul<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
            }
        }
        trim(&mut out);
        out
    }

    /// (1 - alpha y)^e as a coefficient vector.
    pub fn one_minus_alpha_pow<S: Scalar>(alpha: &S, e: u32) -> Vec<S> {
        let base = vec![S::one(), -alpha.clone()];
        let mut acc = vec![S::one()];
        for _ in 0..e {
            acc = mul(&acc, &base);
        }
        acc
    }
}
