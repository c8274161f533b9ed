//! Commutative semigroups, sumsets, and finite-order characters.
//!
//! Elements are vectors of integers; each instance interprets them in its
//! own universe and supplies a canonical form, so sets of elements can be
//! deduplicated without assuming any order on the structure itself.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use crate::scalar::Cyclotomic;
use crate::{Error, Result};

/// Semigroup element. Arity and meaning depend on the instance: a point
/// of Z^d, a residue, a saturating natural, or a table index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Elem(pub Vec<i64>);

impl Elem {
    pub fn scalar(v: i64) -> Elem {
        Elem(vec![v])
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "(")?;
            for (i, v) in self.0.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ")")
        }
    }
}

pub trait Semigroup {
    /// Commutative, associative operation.
    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem>;
    /// Normal form; equal canonical forms mean equal elements.
    fn canonical(&self, a: &Elem) -> Result<Elem>;
    /// Whether the element lies in the universe.
    fn contains(&self, a: &Elem) -> bool;
    /// Neutral element, when the instance is a monoid.
    fn neutral(&self) -> Option<Elem>;
    /// Full universe for finite instances, None when infinite.
    fn elements(&self) -> Option<Vec<Elem>>;
    fn describe(&self) -> String;
}

fn expect_arity(a: &Elem, d: usize) -> Result<()> {
    if a.0.len() != d {
        return Err(Error::ArityMismatch { expected: d, got: a.0.len() });
    }
    Ok(())
}

/// (Z^d, +).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZdAdd {
    pub d: usize,
}

impl Semigroup for ZdAdd {
    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        expect_arity(a, self.d)?;
        expect_arity(b, self.d)?;
        Ok(Elem(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect()))
    }

    fn canonical(&self, a: &Elem) -> Result<Elem> {
        expect_arity(a, self.d)?;
        Ok(a.clone())
    }

    fn contains(&self, a: &Elem) -> bool {
        a.0.len() == self.d
    }

    fn neutral(&self) -> Option<Elem> {
        Some(Elem(vec![0; self.d]))
    }

    fn elements(&self) -> Option<Vec<Elem>> {
        None
    }

    fn describe(&self) -> String {
        format!("(Z^{}, +)", self.d)
    }
}

/// (Z/m, +).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModAdd {
    pub m: u64,
}

impl Semigroup for ModAdd {
    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        expect_arity(a, 1)?;
        expect_arity(b, 1)?;
        self.canonical(&Elem::scalar(a.0[0] + b.0[0]))
    }

    fn canonical(&self, a: &Elem) -> Result<Elem> {
        expect_arity(a, 1)?;
        Ok(Elem::scalar(a.0[0].rem_euclid(self.m as i64)))
    }

    fn contains(&self, a: &Elem) -> bool {
        a.0.len() == 1
    }

    fn neutral(&self) -> Option<Elem> {
        Some(Elem::scalar(0))
    }

    fn elements(&self) -> Option<Vec<Elem>> {
        Some((0..self.m as i64).map(Elem::scalar).collect())
    }

    fn describe(&self) -> String {
        format!("(Z/{}, +)", self.m)
    }
}

/// (Z/m, *).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMul {
    pub m: u64,
}

impl Semigroup for ModMul {
    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        expect_arity(a, 1)?;
        expect_arity(b, 1)?;
        let a = a.0[0].rem_euclid(self.m as i64);
        let b = b.0[0].rem_euclid(self.m as i64);
        self.canonical(&Elem::scalar(a * b))
    }

    fn canonical(&self, a: &Elem) -> Result<Elem> {
        expect_arity(a, 1)?;
        Ok(Elem::scalar(a.0[0].rem_euclid(self.m as i64)))
    }

    fn contains(&self, a: &Elem) -> bool {
        a.0.len() == 1
    }

    fn neutral(&self) -> Option<Elem> {
        Some(Elem::scalar(1i64.rem_euclid(self.m as i64)))
    }

    fn elements(&self) -> Option<Vec<Elem>> {
        Some((0..self.m as i64).map(Elem::scalar).collect())
    }

    fn describe(&self) -> String {
        format!("(Z/{}, *)", self.m)
    }
}

/// Naturals saturating at a cap: a + b = min(a + b, cap).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedNat {
    pub cap: u64,
}

impl Semigroup for TruncatedNat {
    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        let a = self.canonical(a)?;
        let b = self.canonical(b)?;
        Ok(Elem::scalar((a.0[0] + b.0[0]).min(self.cap as i64)))
    }

    fn canonical(&self, a: &Elem) -> Result<Elem> {
        expect_arity(a, 1)?;
        if !self.contains(a) {
            return Err(Error::ContextMismatch(format!(
                "{} outside the universe 0..={}",
                a, self.cap
            )));
        }
        Ok(a.clone())
    }

    fn contains(&self, a: &Elem) -> bool {
        a.0.len() == 1 && a.0[0] >= 0 && a.0[0] <= self.cap as i64
    }

    fn neutral(&self) -> Option<Elem> {
        Some(Elem::scalar(0))
    }

    fn elements(&self) -> Option<Vec<Elem>> {
        Some((0..=self.cap as i64).map(Elem::scalar).collect())
    }

    fn describe(&self) -> String {
        format!("naturals truncated at {}", self.cap)
    }
}

/// Finite structure given by its full operation table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyTableSemigroup {
    table: Vec<Vec<usize>>,
}

impl CayleyTableSemigroup {
    /// Accepts any well-formed square table over indices 0..n; whether it
    /// is a commutative semigroup is a separate question for `validate`.
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Schema("empty operation table".into()));
        }
        for row in &table {
            if row.len() != n {
                return Err(Error::Schema("operation table must be square".into()));
            }
            if let Some(&v) = row.iter().find(|&&v| v >= n) {
                return Err(Error::Schema(format!("table value {v} out of range 0..{n}")));
            }
        }
        Ok(CayleyTableSemigroup { table })
    }

    pub fn size(&self) -> usize {
        self.table.len()
    }
}

impl Semigroup for CayleyTableSemigroup {
    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        let a = self.canonical(a)?;
        let b = self.canonical(b)?;
        Ok(Elem::scalar(
            self.table[a.0[0] as usize][b.0[0] as usize] as i64,
        ))
    }

    fn canonical(&self, a: &Elem) -> Result<Elem> {
        expect_arity(a, 1)?;
        if !self.contains(a) {
            return Err(Error::ContextMismatch(format!(
                "{} outside the universe 0..{}",
                a,
                self.size()
            )));
        }
        Ok(a.clone())
    }

    fn contains(&self, a: &Elem) -> bool {
        a.0.len() == 1 && a.0[0] >= 0 && (a.0[0] as usize) < self.size()
    }

    fn neutral(&self) -> Option<Elem> {
        let n = self.size();
        (0..n)
            .find(|&e| (0..n).all(|x| self.table[e][x] == x && self.table[x][e] == x))
            .map(|e| Elem::scalar(e as i64))
    }

    fn elements(&self) -> Option<Vec<Elem>> {
        Some((0..self.size() as i64).map(Elem::scalar).collect())
    }

    fn describe(&self) -> String {
        format!("table structure on {} elements", self.size())
    }
}

/// Defect found in an operation table; the witness is the result, not an
/// error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableDefect {
    NonCommutative { a: usize, b: usize },
    NonAssociative { a: usize, b: usize, c: usize },
}

/// Exhaustive commutativity and associativity check.
pub fn validate_table(s: &CayleyTableSemigroup) -> Option<TableDefect> {
    let n = s.size();
    let t = &s.table;
    for a in 0..n {
        for b in 0..n {
            if t[a][b] != t[b][a] {
                return Some(TableDefect::NonCommutative { a, b });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if t[t[a][b]][c] != t[a][t[b][c]] {
                    return Some(TableDefect::NonAssociative { a, b, c });
                }
            }
        }
    }
    None
}

/// Closed set of instances for declaration-driven callers.
#[derive(Debug, Clone)]
pub enum AnySemigroup {
    ZdAdd(ZdAdd),
    ModAdd(ModAdd),
    ModMul(ModMul),
    TruncatedNat(TruncatedNat),
    Table(CayleyTableSemigroup),
}

macro_rules! delegate {
    ($self:expr, $g:ident => $body:expr) => {
        match $self {
            AnySemigroup::ZdAdd($g) => $body,
            AnySemigroup::ModAdd($g) => $body,
            AnySemigroup::ModMul($g) => $body,
            AnySemigroup::TruncatedNat($g) => $body,
            AnySemigroup::Table($g) => $body,
        }
    };
}

impl Semigroup for AnySemigroup {
    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        delegate!(self, g => g.add(a, b))
    }

    fn canonical(&self, a: &Elem) -> Result<Elem> {
        delegate!(self, g => g.canonical(a))
    }

    fn contains(&self, a: &Elem) -> bool {
        delegate!(self, g => g.contains(a))
    }

    fn neutral(&self) -> Option<Elem> {
        delegate!(self, g => g.neutral())
    }

    fn elements(&self) -> Option<Vec<Elem>> {
        delegate!(self, g => g.elements())
    }

    fn describe(&self) -> String {
        delegate!(self, g => g.describe())
    }
}

fn canonical_set<G: Semigroup>(g: &G, a: &BTreeSet<Elem>) -> Result<BTreeSet<Elem>> {
    a.iter().map(|x| g.canonical(x)).collect()
}

/// A + B = {a + b}.
pub fn sumset<G: Semigroup>(
    g: &G,
    a: &BTreeSet<Elem>,
    b: &BTreeSet<Elem>,
) -> Result<BTreeSet<Elem>> {
    let a = canonical_set(g, a)?;
    let b = canonical_set(g, b)?;
    let mut out = BTreeSet::new();
    for x in &a {
        for y in &b {
            out.insert(g.add(x, y)?);
        }
    }
    Ok(out)
}

/// n*A, with 0*A = {neutral} in a monoid.
pub fn n_fold_sumset<G: Semigroup>(
    g: &G,
    a: &BTreeSet<Elem>,
    n: u32,
) -> Result<BTreeSet<Elem>> {
    if n == 0 {
        let e = g.neutral().ok_or_else(|| {
            Error::Unsupported(format!(
                "0-fold sumset needs a neutral element, which {} lacks",
                g.describe()
            ))
        })?;
        return Ok([e].into_iter().collect());
    }
    let a = canonical_set(g, a)?;
    let mut acc = a.clone();
    for _ in 1..n {
        acc = sumset(g, &acc, &a)?;
    }
    Ok(acc)
}

/// n_1*A_1 + ... + n_l*A_l.
pub fn multi_sumset<G: Semigroup>(
    g: &G,
    sets: &[BTreeSet<Elem>],
    n: &[u32],
) -> Result<BTreeSet<Elem>> {
    if sets.len() != n.len() {
        return Err(Error::ArityMismatch { expected: sets.len(), got: n.len() });
    }
    let mut acc: Option<BTreeSet<Elem>> = None;
    for (a, &ni) in sets.iter().zip(n) {
        if ni == 0 {
            // 0*A is {neutral}; absorbing it is a no-op in a monoid.
            if g.neutral().is_none() {
                return Err(Error::Unsupported(format!(
                    "0-fold sumset needs a neutral element, which {} lacks",
                    g.describe()
                )));
            }
            continue;
        }
        let part = n_fold_sumset(g, a, ni)?;
        acc = Some(match acc {
            None => part,
            Some(s) => sumset(g, &s, &part)?,
        });
    }
    match acc {
        Some(s) => Ok(s),
        None => n_fold_sumset(g, &BTreeSet::new(), 0),
    }
}

/// Finite-order character: a multiplicative map into roots of unity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Character {
    /// psi(a) = zeta_order^{c_1 a_1 + ... + c_d a_d}.
    Linear { order: u64, coeffs: Vec<i64> },
    /// Exponent of zeta_order per element of a finite universe.
    Table { order: u64, exps: BTreeMap<Elem, u64> },
}

impl Character {
    pub fn trivial() -> Character {
        Character::Linear { order: 1, coeffs: Vec::new() }
    }

    pub fn order(&self) -> u64 {
        match self {
            Character::Linear { order, .. } | Character::Table { order, .. } => *order,
        }
    }

    pub fn eval<G: Semigroup>(&self, g: &G, a: &Elem) -> Result<Cyclotomic> {
        let a = g.canonical(a)?;
        match self {
            Character::Linear { order, coeffs } => {
                if !coeffs.is_empty() && coeffs.len() != a.0.len() {
                    return Err(Error::ArityMismatch {
                        expected: coeffs.len(),
                        got: a.0.len(),
                    });
                }
                let m = *order as i64;
                let mut exp = 0i64;
                for (c, v) in coeffs.iter().zip(&a.0) {
                    exp = (exp + (c.rem_euclid(m)) * (v.rem_euclid(m))).rem_euclid(m);
                }
                Ok(Cyclotomic::root_of_unity(*order, exp as u64))
            }
            Character::Table { order, exps } => {
                let e = exps.get(&a).ok_or_else(|| {
                    Error::ContextMismatch(format!("character undefined at {a}"))
                })?;
                Ok(Cyclotomic::root_of_unity(*order, *e % *order))
            }
        }
    }

    /// Multiplicativity check: exhaustive over a finite universe, or over
    /// the provided pairs otherwise. Returns a violating pair if any.
    pub fn validate<G: Semigroup>(
        &self,
        g: &G,
        extra_pairs: &[(Elem, Elem)],
    ) -> Result<Option<(Elem, Elem)>> {
        let mut pairs: Vec<(Elem, Elem)> = Vec::new();
        if let Some(universe) = g.elements() {
            for a in &universe {
                for b in &universe {
                    pairs.push((a.clone(), b.clone()));
                }
            }
        }
        pairs.extend(extra_pairs.iter().cloned());
        for (a, b) in pairs {
            let lhs = self.eval(g, &g.add(&a, &b)?)?;
            let rhs = self.eval(g, &a)? * self.eval(g, &b)?;
            if lhs != rhs {
                return Ok(Some((a, b)));
            }
        }
        Ok(None)
    }
}

/// Sum of character values over a finite set.
pub fn character_sum<G: Semigroup>(
    g: &G,
    s: &BTreeSet<Elem>,
    psi: &Character,
) -> Result<Cyclotomic> {
    let s = canonical_set(g, s)?;
    let mut acc = Cyclotomic::zero();
    for a in &s {
        acc = acc + psi.eval(g, a)?;
    }
    Ok(acc)
}
