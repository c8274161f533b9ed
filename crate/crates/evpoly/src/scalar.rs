//! Scalar types for exact computation: arbitrary-precision rationals and
//! elements of cyclotomic fields Q(zeta_m).
//!
//! Every scalar lives in a *context*: the rationals are context 1, and a
//! cyclotomic element carries the order m of the root of unity it is written
//! in. Contexts combine by lcm; lifting is always exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::{Error, Int, Rational, Result};

/// Exact scalar usable as a generating function coefficient.
///
/// Arithmetic is field arithmetic. `order` is the cyclotomic context
/// (1 for plain rationals); `promote` rewrites the value in a larger
/// context and must be called with a multiple of the current order.
/// `sort_key` gives a canonical ordering among scalars sharing a context.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
{
    fn order(&self) -> u64;

    fn promote(&self, order: u64) -> Result<Self>;

    fn from_rational(r: Rational) -> Self;

    /// The value as a rational, if it is one.
    fn as_rational(&self) -> Option<Rational>;

    /// Multiplicative inverse; `None` exactly for zero.
    fn inverse(&self) -> Option<Self>;

    fn pow_u(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            n >>= 1;
        }
        acc
    }

    /// If the value is a root of unity, the pair (t, m) with value =
    /// zeta_m^t, m its context order. `None` otherwise.
    fn unity_log(&self) -> Option<(u64, u64)>;

    /// zeta_order^t as a value of this scalar type, when representable
    /// (rationals only carry orders 1 and 2).
    fn unity_root(order: u64, t: u64) -> Option<Self>;

    /// Canonical ordering key. Only meaningful between scalars that share
    /// a context (same `order`).
    fn sort_key(&self) -> Vec<Rational>;
}

impl Scalar for Rational {
    fn order(&self) -> u64 {
        1
    }

    fn promote(&self, _order: u64) -> Result<Self> {
        // A rational is an element of every cyclotomic field and its
        // representation does not change.
        Ok(self.clone())
    }

    fn from_rational(r: Rational) -> Self {
        r
    }

    fn as_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn unity_log(&self) -> Option<(u64, u64)> {
        if self.is_one() {
            Some((0, 1))
        } else if (-self.clone()).is_one() {
            Some((1, 2))
        } else {
            None
        }
    }

    fn unity_root(order: u64, t: u64) -> Option<Self> {
        match order {
            1 => Some(Rational::one()),
            2 => Some(if t % 2 == 0 { Rational::one() } else { -Rational::one() }),
            _ => None,
        }
    }

    fn sort_key(&self) -> Vec<Rational> {
        vec![self.clone()]
    }
}

pub fn euler_phi(m: u64) -> u64 {
    assert!(m >= 1);
    let mut n = m;
    let mut phi = m;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            phi = phi / p * (p - 1);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        phi = phi / n * (n - 1);
    }
    phi
}

fn divisors(m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for d in 1..=m {
        if m % d == 0 {
            out.push(d);
        }
    }
    out
}

/// Coefficients of the m-th cyclotomic polynomial, low degree first,
/// computed by exact division of x^m - 1 by the proper-divisor factors.
fn cyclotomic_poly(m: u64) -> Vec<Rational> {
    let mut num: Vec<Rational> = vec![Rational::zero(); m as usize + 1];
    num[0] = -Rational::one();
    num[m as usize] = Rational::one();
    for d in divisors(m) {
        if d == m {
            continue;
        }
        let phi_d = cyclotomic_poly_cached(d);
        num = poly_div_exact(&num, &phi_d);
    }
    num
}

fn cyclotomic_poly_cached(m: u64) -> Vec<Rational> {
    use std::collections::BTreeMap;
    use std::sync::Mutex;
    use std::sync::OnceLock;
    static CACHE: OnceLock<Mutex<BTreeMap<u64, Vec<Rational>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(p) = guard.get(&m) {
        return p.clone();
    }
    drop(guard);
    let p = cyclotomic_poly(m);
    guard = cache.lock().unwrap();
    guard.entry(m).or_insert_with(|| p.clone());
    p
}

fn poly_trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().map_or(false, Zero::is_zero) {
        p.pop();
    }
}

/// Quotient of a by b, panicking if the division is not exact.
fn poly_div_exact(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let (q, r) = poly_div_rem(a, b);
    assert!(r.iter().all(Zero::is_zero), "inexact polynomial division");
    q
}

fn poly_div_rem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut rem: Vec<Rational> = a.to_vec();
    poly_trim(&mut rem);
    let mut bb = b.to_vec();
    poly_trim(&mut bb);
    let db = bb.len() - 1;
    assert!(!bb[db].is_zero(), "division by zero polynomial");
    if rem.len() <= db && !(rem.len() == 1 && db == 0) {
        return (vec![Rational::zero()], rem);
    }
    let mut quo = vec![Rational::zero(); rem.len().saturating_sub(db)];
    while rem.len() > db || (db == 0 && !(rem.len() == 1 && rem[0].is_zero())) {
        let dr = rem.len() - 1;
        if dr < db {
            break;
        }
        let c = &rem[dr] / &bb[db];
        quo[dr - db] = c.clone();
        for i in 0..=db {
            let t = &bb[i] * &c;
            rem[dr - db + i] = &rem[dr - db + i] - &t;
        }
        poly_trim(&mut rem);
        if rem.len() == 1 && rem[0].is_zero() {
            break;
        }
    }
    (quo, rem)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let t = ai * bj;
            out[i + j] = &out[i + j] + &t;
        }
    }
    out
}

/// Element of the cyclotomic field Q(zeta_m), written in the power basis
/// 1, zeta, ..., zeta^(phi(m)-1) after reduction mod the m-th cyclotomic
/// polynomial. `coeffs` always has length phi(m).
#[derive(Clone)]
pub struct Cyclotomic {
    order: u64,
    coeffs: Vec<Rational>,
}

/// Values compare across contexts: both sides are rewritten in the lcm
/// context, where the power-basis representation is unique.
impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = Cyclotomic::unify(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclotomic {}

impl Cyclotomic {
    pub fn new(order: u64, mut coeffs: Vec<Rational>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Schema("cyclotomic order must be positive".into()));
        }
        let phi = euler_phi(order) as usize;
        if coeffs.len() > phi {
            coeffs = reduce_mod_cyclotomic(order, &coeffs);
        }
        coeffs.resize(phi, Rational::zero());
        Ok(Cyclotomic { order, coeffs })
    }

    pub fn from_rational_in(order: u64, r: Rational) -> Self {
        let phi = euler_phi(order) as usize;
        let mut coeffs = vec![Rational::zero(); phi];
        coeffs[0] = r;
        Cyclotomic { order, coeffs }
    }

    /// zeta_m^t as an element of Q(zeta_m).
    pub fn root_of_unity(order: u64, t: u64) -> Self {
        let t = t % order;
        let mut mono = vec![Rational::zero(); t as usize + 1];
        mono[t as usize] = Rational::one();
        let coeffs = reduce_mod_cyclotomic(order, &mono);
        Cyclotomic { order, coeffs }
    }

    /// Order m of the ambient field Q(zeta_m).
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Rewrites both operands in the lcm of their contexts.
    pub fn unify(a: &Cyclotomic, b: &Cyclotomic) -> (Cyclotomic, Cyclotomic) {
        let l = a.order.lcm(&b.order);
        (a.lift(l), b.lift(l))
    }

    fn lift(&self, order: u64) -> Cyclotomic {
        assert!(order % self.order == 0, "lift target must be a multiple");
        if order == self.order {
            return self.clone();
        }
        let step = (order / self.order) as usize;
        let mut raw = vec![Rational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            raw[i * step] = c.clone();
        }
        let coeffs = reduce_mod_cyclotomic(order, &raw);
        Cyclotomic { order, coeffs }
    }

    pub fn conjugate_sum_is_rational(&self) -> bool {
        self.as_rational().is_some()
    }
}

/// Reduces a raw coefficient vector (powers of zeta_m, any length) to the
/// power basis of Q(zeta_m): remainder mod the m-th cyclotomic polynomial,
/// padded to length phi(m).
fn reduce_mod_cyclotomic(order: u64, raw: &[Rational]) -> Vec<Rational> {
    let phi = euler_phi(order) as usize;
    let modp = cyclotomic_poly_cached(order);
    let (_, mut rem) = poly_div_rem(raw, &modp);
    rem.resize(phi, Rational::zero());
    rem
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclotomic(order {}, {:?})", self.order, self.coeffs)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{r}");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if i == 0 {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "z{}^{}", self.order, i)?;
            } else {
                write!(f, "{c} z{}^{}", self.order, i)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: Cyclotomic) -> Cyclotomic {
        let (mut a, b) = Cyclotomic::unify(&self, &rhs);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x = &*x + y;
        }
        a
    }
}

impl Sub for Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: Cyclotomic) -> Cyclotomic {
        self + (-rhs)
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(mut self) -> Cyclotomic {
        for c in &mut self.coeffs {
            *c = -c.clone();
        }
        self
    }
}

impl Mul for Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: Cyclotomic) -> Cyclotomic {
        let (a, b) = Cyclotomic::unify(&self, &rhs);
        let raw = poly_mul(&a.coeffs, &b.coeffs);
        let coeffs = reduce_mod_cyclotomic(a.order, &raw);
        Cyclotomic { order: a.order, coeffs }
    }
}

impl Zero for Cyclotomic {
    fn zero() -> Self {
        Cyclotomic { order: 1, coeffs: vec![Rational::zero()] }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

impl One for Cyclotomic {
    fn one() -> Self {
        Cyclotomic { order: 1, coeffs: vec![Rational::one()] }
    }
    fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }
}

impl Scalar for Cyclotomic {
    fn order(&self) -> u64 {
        self.order
    }

    fn promote(&self, order: u64) -> Result<Self> {
        if order % self.order != 0 {
            return Err(Error::ContextMismatch(format!(
                "cannot rewrite an order-{} element in order {}",
                self.order, order
            )));
        }
        Ok(self.lift(order))
    }

    fn from_rational(r: Rational) -> Self {
        Cyclotomic { order: 1, coeffs: vec![r] }
    }

    fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // Extended Euclid in Q[x] against the cyclotomic polynomial, which
        // is irreducible, so the gcd with any nonzero remainder class is 1.
        let modp = cyclotomic_poly_cached(self.order);
        let mut a = self.coeffs.clone();
        poly_trim(&mut a);
        let (g, s) = half_extended_gcd(&a, &modp);
        debug_assert_eq!(g.len(), 1);
        let ginv = g[0].recip();
        let scaled: Vec<Rational> = s.iter().map(|c| c * &ginv).collect();
        let coeffs = reduce_mod_cyclotomic(self.order, &scaled);
        Some(Cyclotomic { order: self.order, coeffs })
    }

    fn unity_log(&self) -> Option<(u64, u64)> {
        for t in 0..self.order {
            if *self == Cyclotomic::root_of_unity(self.order, t) {
                return Some((t, self.order));
            }
        }
        None
    }

    fn unity_root(order: u64, t: u64) -> Option<Self> {
        Some(Cyclotomic::root_of_unity(order, t))
    }

    fn sort_key(&self) -> Vec<Rational> {
        self.coeffs.clone()
    }
}

/// Returns (gcd, s) with s*a = gcd mod b.
fn half_extended_gcd(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    let mut s0 = vec![Rational::one()];
    let mut s1 = vec![Rational::zero()];
    poly_trim(&mut r0);
    poly_trim(&mut r1);
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_div_rem(&r0, &r1);
        let qs1 = poly_mul(&q, &s1);
        let mut s2 = s0.clone();
        s2.resize(s2.len().max(qs1.len()), Rational::zero());
        for (i, c) in qs1.iter().enumerate() {
            s2[i] = &s2[i] - c;
        }
        poly_trim(&mut s2);
        r0 = r1;
        r1 = r;
        poly_trim(&mut r1);
        s0 = s1;
        s1 = s2;
    }
    (r0, s0)
}

impl PartialOrd for Cyclotomic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (a, b) = Cyclotomic::unify(self, other);
        a.coeffs.partial_cmp(&b.coeffs)
    }
}

/// Parses "p/q" or "p" into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Schema(format!("cannot parse rational from {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: Int = num.trim().parse().map_err(|_| bad())?;
    let d: Int = den.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

/// Renders a rational as "p" or "p/q" in lowest terms.
pub fn render_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_from_i64(n: i64) -> Rational {
    Rational::from_integer(Int::from(n))
}

pub fn rational_is_integer(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Floor of a rational as i64 (panics if out of range).
pub fn rational_floor_i64(r: &Rational) -> i64 {
    let f = r.floor();
    let n = f.numer();
    i64::try_from(n).unwrap_or_else(|_| panic!("floor out of i64 range: {r}"))
}

pub fn binomial(n: u64, k: u64) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let mut num = Int::one();
    let mut den = Int::one();
    for i in 0..k {
        num *= Int::from(n - i);
        den *= Int::from(i + 1);
    }
    Rational::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(Int::from(n), Int::from(d))
    }

    #[test]
    fn cyclotomic_polys_match_known_tables() {
        let check = |m: u64, want: &[i64]| {
            let got = cyclotomic_poly_cached(m);
            let want: Vec<Rational> = want.iter().map(|&c| q(c, 1)).collect();
            assert_eq!(got, want, "order {m}");
        };
        check(1, &[-1, 1]);
        check(2, &[1, 1]);
        check(3, &[1, 1, 1]);
        check(4, &[1, 0, 1]);
        check(6, &[1, -1, 1]);
        check(12, &[1, 0, -1, 0, 1]);
    }

    #[test]
    fn phi_values() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(2), 1);
        assert_eq!(euler_phi(12), 4);
        assert_eq!(euler_phi(36), 12);
    }

    #[test]
    fn roots_of_unity_multiply_by_exponent_addition() {
        for m in [3u64, 4, 5, 6, 12] {
            for s in 0..m {
                for t in 0..m {
                    let a = Cyclotomic::root_of_unity(m, s);
                    let b = Cyclotomic::root_of_unity(m, t);
                    let prod = a * b;
                    assert_eq!(prod, Cyclotomic::root_of_unity(m, (s + t) % m));
                }
            }
        }
    }

    #[test]
    fn geometric_sum_of_all_mth_roots_vanishes() {
        for m in [2u64, 3, 4, 6, 8] {
            let mut acc = Cyclotomic::zero();
            for t in 0..m {
                acc = acc + Cyclotomic::root_of_unity(m, t);
            }
            assert!(acc.is_zero(), "order {m}");
        }
    }

    #[test]
    fn inverse_round_trips() {
        let x = Cyclotomic::new(
            5,
            vec![q(2, 3), q(-1, 1), q(0, 1), q(4, 7)],
        )
        .unwrap();
        let inv = x.inverse().unwrap();
        assert!((x * inv).is_one());

        let z = Cyclotomic::root_of_unity(12, 5);
        let inv = z.inverse().unwrap();
        assert_eq!(inv, Cyclotomic::root_of_unity(12, 7));

        assert!(Cyclotomic::zero().inverse().is_none());
    }

    #[test]
    fn cross_context_equality_lifts_to_lcm() {
        // zeta_6^3 = -1 in context 6 equals -1 in context 2 and context 1.
        let a = Cyclotomic::root_of_unity(6, 3);
        let b = Cyclotomic::root_of_unity(2, 1);
        let c = Cyclotomic::from_rational(q(-1, 1));
        assert_eq!(a, b);
        assert_eq!(b, c);
        assert_eq!(a, c);
        assert_ne!(Cyclotomic::root_of_unity(6, 1), Cyclotomic::root_of_unity(3, 1));
    }

    #[test]
    fn unity_log_finds_exponents_and_rejects_others() {
        let z = Cyclotomic::root_of_unity(8, 5);
        assert_eq!(z.unity_log(), Some((5, 8)));
        let half = Cyclotomic::from_rational_in(4, q(1, 2));
        assert_eq!(half.unity_log(), None);
        assert_eq!(q(1, 1).unity_log(), Some((0, 1)));
        assert_eq!(q(-1, 1).unity_log(), Some((1, 2)));
        assert_eq!(q(2, 1).unity_log(), None);
    }

    #[test]
    fn rational_parse_and_render_round_trip() {
        for s in ["0", "5", "-3", "7/2", "-9/4"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(render_rational(&r), s);
        }
        assert_eq!(render_rational(&parse_rational("4/2").unwrap()), "2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), q(10, 1));
        assert_eq!(binomial(3, 0), q(1, 1));
        assert_eq!(binomial(2, 5), q(0, 1));
        assert_eq!(binomial(10, 5), q(252, 1));
    }

    #[test]
    fn promote_requires_a_multiple() {
        let z = Cyclotomic::root_of_unity(4, 1);
        assert!(z.promote(8).is_ok());
        assert!(z.promote(6).is_err());
        let r = q(3, 2);
        assert!(Scalar::promote(&r, 12).is_ok());
    }

    #[test]
    fn pow_u_matches_repeated_multiplication() {
        let z = Cyclotomic::root_of_unity(5, 2);
        let mut acc = Cyclotomic::one();
        for e in 0..12u64 {
            assert_eq!(z.pow_u(e), acc);
            acc = acc * z.clone();
        }
    }
}
