//! Generalized orthants and the boolean algebra they generate.
//!
//! An orthant fixes some coordinates to exact values and bounds the rest
//! from below. Finite unions of orthants ("simple sets") are closed under
//! union, intersection, and complement, and have rational generating
//! functions with denominator dividing prod (1 - x_i).

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::gf::{Gf, GfTerm, WordEntry};
use crate::poly::{default_names, render_poly};
use crate::scalar::Scalar;
use crate::{Error, Rational, RationalGf, Result};

/// O_{s,I}: points x with x_i = s_i for frozen i and x_i >= s_i otherwise.
/// Never empty; s itself always belongs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Orthant {
    s: Vec<u32>,
    frozen: BTreeSet<usize>,
}

impl Orthant {
    pub fn new(s: Vec<u32>, frozen: BTreeSet<usize>) -> Result<Self> {
        if let Some(&i) = frozen.iter().find(|&&i| i >= s.len()) {
            return Err(Error::Schema(format!(
                "frozen index {i} out of range for {} coordinates",
                s.len()
            )));
        }
        Ok(Orthant { s, frozen })
    }

    /// Fully free orthant based at s.
    pub fn above(s: Vec<u32>) -> Self {
        Orthant { s, frozen: BTreeSet::new() }
    }

    /// The one-point orthant {s}.
    pub fn point(s: Vec<u32>) -> Self {
        let frozen = (0..s.len()).collect();
        Orthant { s, frozen }
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }

    pub fn base(&self) -> &[u32] {
        &self.s
    }

    pub fn frozen(&self) -> &BTreeSet<usize> {
        &self.frozen
    }

    pub fn contains(&self, x: &[u32]) -> Result<bool> {
        if x.len() != self.k() {
            return Err(Error::ArityMismatch { expected: self.k(), got: x.len() });
        }
        Ok(self.s.iter().enumerate().all(|(i, &s)| {
            if self.frozen.contains(&i) {
                x[i] == s
            } else {
                x[i] >= s
            }
        }))
    }

    /// Intersection with another orthant; None when empty.
    pub fn intersect(&self, other: &Orthant) -> Result<Option<Orthant>> {
        if other.k() != self.k() {
            return Err(Error::ArityMismatch { expected: self.k(), got: other.k() });
        }
        let mut s = Vec::with_capacity(self.k());
        let mut frozen = BTreeSet::new();
        for i in 0..self.k() {
            let a = (self.s[i], self.frozen.contains(&i));
            let b = (other.s[i], other.frozen.contains(&i));
            let merged = match (a, b) {
                ((va, true), (vb, true)) => (va == vb).then_some((va, true)),
                ((v, true), (lo, false)) | ((lo, false), (v, true)) => {
                    (v >= lo).then_some((v, true))
                }
                ((la, false), (lb, false)) => Some((la.max(lb), false)),
            };
            match merged {
                None => return Ok(None),
                Some((v, fr)) => {
                    s.push(v);
                    if fr {
                        frozen.insert(i);
                    }
                }
            }
        }
        Ok(Some(Orthant { s, frozen }))
    }

    /// Complement as a disjoint union of orthants, split by the first
    /// coordinate whose constraint fails.
    pub fn complement(&self) -> SimpleSet {
        let k = self.k();
        let mut parts = Vec::new();
        for i in 0..k {
            // Coordinates before i satisfy their constraints, coordinate i
            // takes one failure piece, later coordinates are unconstrained.
            let mut pieces: Vec<(u32, bool)> =
                (0..self.s[i]).map(|v| (v, true)).collect();
            if self.frozen.contains(&i) {
                pieces.push((self.s[i] + 1, false));
            }
            for (v, fr) in pieces {
                let mut s = Vec::with_capacity(k);
                let mut frozen = BTreeSet::new();
                for j in 0..k {
                    if j < i {
                        s.push(self.s[j]);
                        if self.frozen.contains(&j) {
                            frozen.insert(j);
                        }
                    } else if j == i {
                        s.push(v);
                        if fr {
                            frozen.insert(j);
                        }
                    } else {
                        s.push(0);
                    }
                }
                parts.push(Orthant { s, frozen });
            }
        }
        SimpleSet { k, orthants: normalize(parts) }
    }
}

fn normalize(mut orthants: Vec<Orthant>) -> Vec<Orthant> {
    orthants.sort();
    orthants.dedup();
    orthants
}

/// Finite union of generalized orthants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleSet {
    k: usize,
    orthants: Vec<Orthant>,
}

const UNION_CAP: usize = 4096;

impl SimpleSet {
    pub fn new(k: usize, orthants: Vec<Orthant>) -> Result<Self> {
        for o in &orthants {
            if o.k() != k {
                return Err(Error::ArityMismatch { expected: k, got: o.k() });
            }
        }
        if orthants.len() > UNION_CAP {
            return Err(Error::ResourceCap(format!("{} orthants in a union", orthants.len())));
        }
        Ok(SimpleSet { k, orthants: normalize(orthants) })
    }

    pub fn empty(k: usize) -> Self {
        SimpleSet { k, orthants: Vec::new() }
    }

    pub fn full(k: usize) -> Self {
        SimpleSet { k, orthants: vec![Orthant::above(vec![0; k])] }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn orthants(&self) -> &[Orthant] {
        &self.orthants
    }

    pub fn is_empty(&self) -> bool {
        // Orthants are never empty, so syntactic and semantic emptiness
        // coincide.
        self.orthants.is_empty()
    }

    pub fn contains(&self, x: &[u32]) -> Result<bool> {
        if x.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: x.len() });
        }
        for o in &self.orthants {
            if o.contains(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn union(&self, other: &SimpleSet) -> Result<SimpleSet> {
        if other.k != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: other.k });
        }
        let mut orthants = self.orthants.clone();
        orthants.extend(other.orthants.iter().cloned());
        SimpleSet::new(self.k, orthants)
    }

    pub fn intersect(&self, other: &SimpleSet) -> Result<SimpleSet> {
        if other.k != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: other.k });
        }
        if self.orthants.len().saturating_mul(other.orthants.len()) > UNION_CAP {
            return Err(Error::ResourceCap("intersection of large unions".into()));
        }
        let mut orthants = Vec::new();
        for a in &self.orthants {
            for b in &other.orthants {
                if let Some(c) = a.intersect(b)? {
                    orthants.push(c);
                }
            }
        }
        SimpleSet::new(self.k, orthants)
    }

    pub fn complement(&self) -> Result<SimpleSet> {
        let mut acc = SimpleSet::full(self.k);
        for o in &self.orthants {
            acc = acc.intersect(&o.complement())?;
        }
        Ok(acc)
    }
}

/// Pairwise incomparable points under the componentwise order; the
/// generator set of the upper ideal it spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Antichain {
    k: usize,
    points: Vec<Vec<u32>>,
}

fn le(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

impl Antichain {
    pub fn new(k: usize, points: Vec<Vec<u32>>) -> Result<Self> {
        for p in &points {
            if p.len() != k {
                return Err(Error::ArityMismatch { expected: k, got: p.len() });
            }
        }
        let mut points = points;
        points.sort();
        points.dedup();
        for i in 0..points.len() {
            for j in 0..points.len() {
                if i != j && le(&points[i], &points[j]) {
                    return Err(Error::Schema(format!(
                        "not an antichain: {:?} <= {:?}",
                        points[i], points[j]
                    )));
                }
            }
        }
        Ok(Antichain { k, points })
    }

    pub fn empty(k: usize) -> Self {
        Antichain { k, points: Vec::new() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn points(&self) -> &[Vec<u32>] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether x lies in the generated upper ideal.
    pub fn dominates(&self, x: &[u32]) -> bool {
        self.points.iter().any(|p| le(p, x))
    }

    /// The generated upper ideal as a union of free orthants.
    pub fn upper_set(&self) -> SimpleSet {
        SimpleSet {
            k: self.k,
            orthants: normalize(
                self.points.iter().map(|p| Orthant::above(p.clone())).collect(),
            ),
        }
    }
}

/// Lex-ascending points of the box prod [0, dims_i], first coordinate most
/// significant.
pub fn box_points(dims: &[u32]) -> impl Iterator<Item = Vec<u32>> + '_ {
    let mut next = Some(vec![0u32; dims.len()]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for i in (0..dims.len()).rev() {
            if succ[i] < dims[i] {
                succ[i] += 1;
                next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    })
}

const SCAN_CAP: u64 = 1 << 22;

/// Minimal members of an upward-closed set given by a membership oracle,
/// restricted to the box [0, bound]^k. The flag reports whether the oracle
/// agrees with the upward closure of the result on the whole box; false
/// means the box is too small or the oracle is not upward closed.
pub fn minimal_elements(
    k: usize,
    bound: u32,
    mut in_set: impl FnMut(&[u32]) -> Result<bool>,
) -> Result<(Antichain, bool)> {
    let size = (bound as u64 + 1).checked_pow(k as u32);
    if size.is_none_or(|s| s > SCAN_CAP) {
        return Err(Error::ResourceCap(format!(
            "box scan of ({bound} + 1)^{k} points"
        )));
    }
    let dims = vec![bound; k];
    let mut strides = vec![1u64; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * (bound as u64 + 1);
    }
    let rank =
        |x: &[u32]| -> usize { x.iter().zip(&strides).map(|(&v, s)| v as u64 * s).sum::<u64>() as usize };
    let mut member = Vec::with_capacity(size.unwrap() as usize);
    for x in box_points(&dims) {
        member.push(in_set(&x)?);
    }
    let mut candidates: Vec<Vec<u32>> = Vec::new();
    for x in box_points(&dims) {
        if !member[rank(&x)] {
            continue;
        }
        let mut minimal = true;
        for i in 0..k {
            if x[i] > 0 {
                let mut y = x.clone();
                y[i] -= 1;
                if member[rank(&y)] {
                    minimal = false;
                    break;
                }
            }
        }
        if minimal {
            candidates.push(x);
        }
    }
    // Locally minimal points of a non-upper set can still be comparable;
    // keep only the globally minimal ones so the result is an antichain.
    let minimal: Vec<Vec<u32>> = candidates
        .iter()
        .filter(|c| !candidates.iter().any(|d| d.as_slice() != c.as_slice() && le(d, c)))
        .cloned()
        .collect();
    let antichain = Antichain::new(k, minimal)?;
    let mut closed = true;
    for x in box_points(&dims) {
        if member[rank(&x)] != antichain.dominates(&x) {
            closed = false;
            break;
        }
    }
    Ok((antichain, closed))
}

const IE_CAP: usize = 20;

/// Generating function of a weighted union of orthants by
/// inclusion-exclusion. Each intersection orthant O_{s,I} contributes
/// weight(s) * x^s / prod_{i not in I} (1 - twist_i x_i); the weight
/// callback receives the base point. With unit weight and twists this is
/// the ordinary generating function of the set.
pub fn gf_of_simple_set_weighted<S: Scalar>(
    set: &SimpleSet,
    twist: &[S],
    mut weight: impl FnMut(&[u32]) -> Result<S>,
) -> Result<Gf<S>> {
    let k = set.k();
    if twist.len() != k {
        return Err(Error::ArityMismatch { expected: k, got: twist.len() });
    }
    let n = set.orthants().len();
    if n > IE_CAP {
        return Err(Error::ResourceCap(format!(
            "inclusion-exclusion over {n} orthants"
        )));
    }
    let mut terms: Vec<GfTerm<S>> = Vec::new();
    for mask in 1u32..(1 << n) {
        let mut cell: Option<Orthant> = None;
        for (i, o) in set.orthants().iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            cell = match cell {
                None => Some(o.clone()),
                Some(c) => match c.intersect(o)? {
                    None => None,
                    Some(c) => Some(c),
                },
            };
            if cell.is_none() {
                break;
            }
        }
        let Some(cell) = cell else { continue };
        let sign = if mask.count_ones() % 2 == 1 { S::one() } else { -S::one() };
        let gamma = sign * weight(cell.base())?;
        let mut alpha = Vec::with_capacity(k);
        let mut e = Vec::with_capacity(k);
        for i in 0..k {
            if cell.frozen().contains(&i) {
                alpha.push(S::one());
                e.push(0);
            } else {
                alpha.push(twist[i].clone());
                e.push(1);
            }
        }
        terms.push(GfTerm::new(gamma, cell.base().to_vec(), alpha, e));
    }
    Gf::new(k, terms)
}

pub fn gf_of_simple_set(set: &SimpleSet) -> Result<RationalGf> {
    let ones = vec![Rational::one(); set.k()];
    gf_of_simple_set_weighted(set, &ones, |_| Ok(Rational::one()))
}

/// Generating function of the upper ideal spanned by an antichain.
pub fn gf_of_upper_ideal(antichain: &Antichain) -> Result<RationalGf> {
    gf_of_simple_set(&antichain.upper_set())
}

/// Recovers a union of orthants from its generating function. The series
/// must have untwisted denominators and 0/1 coefficients; membership of a
/// point then depends only on which coordinates exceed the numerator
/// degree, and each constant-1 word cell becomes one orthant.
pub fn simple_set_from_gf(f: &RationalGf) -> Result<SimpleSet> {
    let sep = f.extract_sep()?;
    let c = sep.c();
    let mut orthants = Vec::new();
    for (word, entry) in sep.table() {
        let value = if entry.poly.is_constant() {
            entry.poly.eval_nat(&vec![0; entry.free.len()])
        } else {
            let names = default_names(entry.free.len());
            let rendered = render_poly(&entry.poly, &names);
            return Err(Error::NotIndicator {
                point: representative(word, c),
                value: format!("non-constant coefficient {rendered}"),
            });
        };
        if value == Rational::one() {
            let mut s = Vec::with_capacity(sep.l());
            let mut frozen = BTreeSet::new();
            for (i, w) in word.0.iter().enumerate() {
                match w {
                    WordEntry::Fixed(v) => {
                        s.push(*v);
                        frozen.insert(i);
                    }
                    WordEntry::Inf => s.push(c + 1),
                }
            }
            orthants.push(Orthant { s, frozen });
        } else if !value.is_zero() {
            return Err(Error::NotIndicator {
                point: representative(word, c),
                value: crate::scalar::render_rational(&value),
            });
        }
    }
    SimpleSet::new(f.k(), orthants)
}

fn representative(word: &crate::gf::Word, c: u32) -> Vec<i64> {
    word.0
        .iter()
        .map(|w| match w {
            WordEntry::Fixed(v) => *v as i64,
            WordEntry::Inf => c as i64 + 1,
        })
        .collect()
}
