//! Rational power series in k variables, represented as finite sums of
//! terms gamma * x^b / prod_i (1 - alpha_i x_i)^{e_i}.
//!
//! This closed class supports exact coefficient extraction, variable
//! identification along a partition (P-substitution), and extraction of
//! the eventual closed form: a word-indexed polynomial table when all
//! denominator twists are 1, or exponential polynomials when the twists
//! are roots of unity.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::linalg::{solve, LinSolve};
use crate::poly::{binomial_count, binomial_poly, uni, MultiPoly};
use crate::scalar::Scalar;
use crate::{Error, Rational, Result};

/// One summand gamma * x^b / prod (1 - alpha_i x_i)^{e_i}.
/// Coordinates with e_i = 0 carry alpha_i = 1 by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct GfTerm<S> {
    pub gamma: S,
    pub b: Vec<u32>,
    pub alpha: Vec<S>,
    pub e: Vec<u32>,
}

impl<S: Scalar> GfTerm<S> {
    pub fn new(gamma: S, b: Vec<u32>, alpha: Vec<S>, e: Vec<u32>) -> Self {
        GfTerm { gamma, b, alpha, e }
    }

    /// Term with untwisted denominator prod (1 - x_i)^{e_i}.
    pub fn plain(gamma: S, b: Vec<u32>, e: Vec<u32>) -> Self {
        let alpha = vec![S::one(); b.len()];
        GfTerm { gamma, b, alpha, e }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gf<S> {
    k: usize,
    terms: Vec<GfTerm<S>>,
}

const TERM_CAP: usize = 1 << 20;

impl<S: Scalar> Gf<S> {
    /// Builds a normalized series: all scalars rewritten in one context,
    /// terms with identical (b, alpha, e) merged, zero terms dropped.
    pub fn new(k: usize, terms: Vec<GfTerm<S>>) -> Result<Self> {
        if terms.len() > TERM_CAP {
            return Err(Error::ResourceCap(format!("{} series terms", terms.len())));
        }
        let mut order = 1u64;
        for t in &terms {
            if t.b.len() != k || t.alpha.len() != k || t.e.len() != k {
                return Err(Error::ArityMismatch { expected: k, got: t.b.len() });
            }
            order = order.lcm(&t.gamma.order());
            for a in &t.alpha {
                order = order.lcm(&a.order());
            }
        }
        let mut lifted: Vec<GfTerm<S>> = Vec::with_capacity(terms.len());
        for t in terms {
            let gamma = t.gamma.promote(order)?;
            if gamma.is_zero() {
                continue;
            }
            let mut alpha = Vec::with_capacity(k);
            for (i, a) in t.alpha.into_iter().enumerate() {
                if t.e[i] == 0 {
                    alpha.push(S::one().promote(order)?);
                } else {
                    alpha.push(a.promote(order)?);
                }
            }
            lifted.push(GfTerm { gamma, b: t.b, alpha, e: t.e });
        }
        lifted.sort_by(|x, y| term_key(x).cmp(&term_key(y)));
        let mut merged: Vec<GfTerm<S>> = Vec::new();
        for t in lifted {
            match merged.last_mut() {
                Some(last) if term_key(last) == term_key(&t) => {
                    last.gamma = last.gamma.clone() + t.gamma;
                }
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.gamma.is_zero());
        Ok(Gf { k, terms: merged })
    }

    pub fn zero(k: usize) -> Self {
        Gf { k, terms: Vec::new() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> &[GfTerm<S>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The series coefficient at x^n, a product of per-coordinate factors:
    /// binom(n_i - b_i + e_i - 1, e_i - 1) * alpha_i^{n_i - b_i} when
    /// e_i >= 1 and n_i >= b_i, the indicator [n_i = b_i] when e_i = 0,
    /// and 0 when n_i < b_i.
    pub fn coefficient(&self, n: &[u32]) -> Result<S> {
        if n.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: n.len() });
        }
        let mut acc = S::zero();
        'terms: for t in &self.terms {
            let mut factor = t.gamma.clone();
            for i in 0..self.k {
                if t.e[i] == 0 {
                    if n[i] != t.b[i] {
                        continue 'terms;
                    }
                } else {
                    if n[i] < t.b[i] {
                        continue 'terms;
                    }
                    let count = binomial_count(n[i], t.b[i], t.e[i]);
                    let twist = t.alpha[i].pow_u((n[i] - t.b[i]) as u64);
                    factor = factor * S::from_rational(count) * twist;
                }
            }
            acc = acc + factor;
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.k != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: other.k });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Gf::new(self.k, terms)
    }

    pub fn scalar_mul(&self, c: &S) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| GfTerm::new(c.clone() * t.gamma.clone(), t.b.clone(), t.alpha.clone(), t.e.clone()))
            .collect();
        Gf::new(self.k, terms)
    }

    /// Identifies variables along the blocks of `partition`: block j of the
    /// input variables becomes the single output variable y_j. The result
    /// aggregates coefficients along fibers of the block-sum statistic:
    /// [y^n] result = sum of [x^a] self over all a with block sums n.
    ///
    /// Distinct denominator twists inside one block are split by an exact
    /// partial-fraction decomposition so the result stays in term form.
    pub fn p_substitution(&self, partition: &[Vec<usize>]) -> Result<Gf<S>> {
        check_partition(self.k, partition)?;
        let l = partition.len();
        let mut out_terms: Vec<GfTerm<S>> = Vec::new();
        for t in &self.terms {
            // Per block: the new exponent and the denominator factor list.
            let mut b_new = vec![0u32; l];
            // Options per block: (alpha, e, extra scalar weight).
            let mut block_options: Vec<Vec<(S, u32, S)>> = Vec::with_capacity(l);
            for (j, block) in partition.iter().enumerate() {
                b_new[j] = block.iter().map(|&i| t.b[i]).sum();
                let mut factors: Vec<(S, u32)> = Vec::new();
                for &i in block {
                    if t.e[i] == 0 {
                        continue;
                    }
                    match factors
                        .iter_mut()
                        .find(|(a, _)| a.sort_key() == t.alpha[i].sort_key())
                    {
                        Some((_, m)) => *m += t.e[i],
                        None => factors.push((t.alpha[i].clone(), t.e[i])),
                    }
                }
                let options = if factors.is_empty() {
                    vec![(S::one(), 0, S::one())]
                } else if factors.len() == 1 {
                    let (a, m) = factors.into_iter().next().unwrap();
                    vec![(a, m, S::one())]
                } else {
                    partial_fractions(&factors)?
                };
                block_options.push(options);
            }
            // Expand the product of per-block sums.
            let mut expansion: Vec<(Vec<(S, u32)>, S)> = vec![(Vec::new(), t.gamma.clone())];
            for options in &block_options {
                let mut next = Vec::with_capacity(expansion.len() * options.len());
                for (prefix, w) in &expansion {
                    for (a, m, c) in options {
                        let mut p = prefix.clone();
                        p.push((a.clone(), *m));
                        next.push((p, w.clone() * c.clone()));
                    }
                }
                expansion = next;
                if expansion.len() > TERM_CAP {
                    return Err(Error::ResourceCap(
                        "partial-fraction expansion too large".into(),
                    ));
                }
            }
            for (factors, w) in expansion {
                let alpha: Vec<S> = factors.iter().map(|(a, _)| a.clone()).collect();
                let e: Vec<u32> = factors.iter().map(|(_, m)| *m).collect();
                out_terms.push(GfTerm::new(w, b_new.clone(), alpha, e));
            }
        }
        Gf::new(l, out_terms)
    }

    /// Largest numerator exponent over all terms and coordinates; the
    /// threshold below which coefficients are treated as transient.
    fn max_b(&self) -> u32 {
        self.terms
            .iter()
            .flat_map(|t| t.b.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// The word-indexed polynomial table of the series: threshold
    /// c = max numerator exponent; a coefficient at n is obtained from the
    /// word that keeps entries <= c and marks larger entries free. Exact
    /// at every point, not only eventually. Requires untwisted
    /// denominators and rational weights.
    pub fn extract_sep(&self) -> Result<SepDescription> {
        for t in &self.terms {
            for (i, a) in t.alpha.iter().enumerate() {
                if t.e[i] >= 1 && !a.is_one() {
                    return Err(Error::Unsupported(
                        "twisted denominator; extract the exponential-polynomial form instead"
                            .into(),
                    ));
                }
            }
            if t.gamma.as_rational().is_none() {
                return Err(Error::Unsupported(
                    "non-rational weight in word-table extraction".into(),
                ));
            }
        }
        let c = self.max_b();
        let words = (c as u64 + 2).checked_pow(self.k as u32);
        if words.is_none_or(|w| w > 200_000) {
            return Err(Error::ResourceCap(format!(
                "word table of ({} + 2)^{} entries",
                c, self.k
            )));
        }
        let mut table: BTreeMap<Word, SepEntry> = BTreeMap::new();
        for word in Word::all(self.k, c) {
            let free = word.free_positions();
            let mut poly = MultiPoly::<Rational>::zero(free.len());
            'terms: for t in &self.terms {
                let mut weight = t.gamma.as_rational().expect("checked rational above");
                for (i, entry) in word.0.iter().enumerate() {
                    let WordEntry::Fixed(v) = entry else { continue };
                    let f = if t.e[i] == 0 {
                        if *v == t.b[i] {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    } else {
                        binomial_count(*v, t.b[i], t.e[i])
                    };
                    if f.is_zero() {
                        continue 'terms;
                    }
                    weight = weight * f;
                }
                let mut term_poly = MultiPoly::<Rational>::constant(free.len(), weight);
                for (slot, &i) in free.iter().enumerate() {
                    if t.e[i] == 0 {
                        // Indicator factor [n_i = b_i] vanishes on the free
                        // range n_i > c >= b_i.
                        continue 'terms;
                    }
                    term_poly = term_poly.mul(&binomial_poly(free.len(), slot, t.b[i], t.e[i]));
                }
                poly = poly.add(&term_poly);
            }
            table.insert(word, SepEntry { free, poly });
        }
        Ok(SepDescription { l: self.k, c, table })
    }

    /// The eventual exponential-polynomial form: for every n with all
    /// coordinates above the reported threshold, the coefficient equals
    /// sum over summands of p_t(n) * zeta_m^{<t, n>}. Denominator twists
    /// must be roots of unity.
    pub fn extract_exp_poly(&self) -> Result<ExpPoly<S>> {
        let c = self.max_b();
        let mut order = 1u64;
        let mut logs: Vec<Vec<(u64, u64)>> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut row = Vec::with_capacity(self.k);
            for (i, a) in t.alpha.iter().enumerate() {
                if t.e[i] == 0 {
                    row.push((0, 1));
                    continue;
                }
                let Some((tt, m)) = a.unity_log() else {
                    return Err(Error::Unsupported(format!(
                        "denominator twist {a} is not a root of unity"
                    )));
                };
                order = order.lcm(&m);
                row.push((tt, m));
            }
            logs.push(row);
        }
        let mut summands: BTreeMap<Vec<u64>, MultiPoly<S>> = BTreeMap::new();
        for (t, row) in self.terms.iter().zip(&logs) {
            if t.e.iter().any(|&e| e == 0) {
                // An indicator factor [n_i = b_i] vanishes beyond the
                // threshold, so the whole term is transient.
                continue;
            }
            let tvec: Vec<u64> = row.iter().map(|(tt, m)| (tt * (order / m)) % order).collect();
            let dot_b: u64 = tvec
                .iter()
                .zip(&t.b)
                .map(|(t_i, b_i)| t_i * *b_i as u64)
                .sum();
            let phase = S::unity_root(order, (order - dot_b % order) % order)
                .expect("order was built from representable roots");
            let mut poly = MultiPoly::<S>::constant(self.k, t.gamma.clone() * phase);
            for i in 0..self.k {
                poly = poly.mul(&binomial_poly(self.k, i, t.b[i], t.e[i]));
            }
            match summands.remove(&tvec) {
                None => {
                    summands.insert(tvec, poly);
                }
                Some(old) => {
                    summands.insert(tvec, old.add(&poly));
                }
            }
        }
        summands.retain(|_, p| !p.is_zero());
        Ok(ExpPoly { l: self.k, order, c, summands: summands.into_iter().collect() })
    }
}

fn term_key<S: Scalar>(t: &GfTerm<S>) -> (Vec<u32>, Vec<u32>, Vec<Vec<Rational>>) {
    (
        t.b.clone(),
        t.e.clone(),
        t.alpha.iter().map(Scalar::sort_key).collect(),
    )
}

pub fn check_partition(k: usize, partition: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; k];
    for block in partition {
        if block.is_empty() {
            return Err(Error::NotAPartition("empty block".into()));
        }
        for &i in block {
            if i >= k {
                return Err(Error::NotAPartition(format!(
                    "index {i} out of range for {k} coordinates"
                )));
            }
            if seen[i] {
                return Err(Error::NotAPartition(format!("index {i} appears twice")));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|&s| !s) {
        return Err(Error::NotAPartition(format!("index {i} is not covered")));
    }
    Ok(())
}

/// Exact partial fractions of 1 / prod_t (1 - alpha_t y)^{m_t} for
/// pairwise distinct alphas: a list of (alpha_t, d, c_{t,d}) with
/// the fraction equal to sum c_{t,d} / (1 - alpha_t y)^d.
fn partial_fractions<S: Scalar>(factors: &[(S, u32)]) -> Result<Vec<(S, u32, S)>> {
    let n: u32 = factors.iter().map(|(_, m)| m).sum();
    // Unknowns (t, d): multiply the target identity through by the full
    // denominator and match coefficients of y^0 .. y^{n-1}.
    let mut unknowns: Vec<(usize, u32)> = Vec::new();
    for (t, (_, m)) in factors.iter().enumerate() {
        for d in 1..=*m {
            unknowns.push((t, d));
        }
    }
    let mut cols: Vec<Vec<S>> = Vec::with_capacity(unknowns.len());
    for &(t, d) in &unknowns {
        let mut poly = uni::one_minus_alpha_pow(&factors[t].0, factors[t].1 - d);
        for (u, (a, m)) in factors.iter().enumerate() {
            if u != t {
                poly = uni::mul(&poly, &uni::one_minus_alpha_pow(a, *m));
            }
        }
        poly.resize(n as usize, S::zero());
        cols.push(poly);
    }
    let rows: Vec<Vec<S>> = (0..n as usize)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    let mut rhs = vec![S::zero(); n as usize];
    rhs[0] = S::one();
    match solve(&rows, &rhs) {
        LinSolve::Unique(x) => Ok(unknowns
            .into_iter()
            .zip(x)
            .map(|((t, d), c)| (factors[t].0.clone(), d, c))
            .collect()),
        other => Err(Error::Internal(format!(
            "partial fractions must have a unique solution, got {other:?}"
        ))),
    }
}

/// Entry of a word: a concrete small value or the free marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WordEntry {
    Fixed(u32),
    Inf,
}

/// Word over V(l, c) = ({0..c} + {inf})^l.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Word(pub Vec<WordEntry>);

impl Word {
    pub fn of_point(n: &[u32], c: u32) -> Word {
        Word(
            n.iter()
                .map(|&v| if v <= c { WordEntry::Fixed(v) } else { WordEntry::Inf })
                .collect(),
        )
    }

    pub fn all(l: usize, c: u32) -> Vec<Word> {
        let mut words = vec![Vec::new()];
        for _ in 0..l {
            let mut next = Vec::with_capacity(words.len() * (c as usize + 2));
            for w in &words {
                for v in 0..=c {
                    let mut x = w.clone();
                    x.push(WordEntry::Fixed(v));
                    next.push(x);
                }
                let mut x = w.clone();
                x.push(WordEntry::Inf);
                next.push(x);
            }
            words = next;
        }
        words.into_iter().map(Word).collect()
    }

    pub fn free_positions(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, e)| matches!(e, WordEntry::Inf).then_some(i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SepEntry {
    /// Positions of the free coordinates, ascending; the polynomial's
    /// variables in order.
    pub free: Vec<usize>,
    pub poly: MultiPoly<Rational>,
}

/// Strongly-eventually-polynomial certificate: threshold c and one
/// polynomial per word in V(l, c).
#[derive(Debug, Clone, PartialEq)]
pub struct SepDescription {
    l: usize,
    c: u32,
    table: BTreeMap<Word, SepEntry>,
}

impl SepDescription {
    pub fn from_parts(l: usize, c: u32, table: BTreeMap<Word, SepEntry>) -> Result<Self> {
        let expect = (c as usize + 2).checked_pow(l as u32);
        if expect != Some(table.len()) {
            return Err(Error::Schema(format!(
                "word table must have (c+2)^l = {expect:?} entries, got {}",
                table.len()
            )));
        }
        for (w, entry) in &table {
            if w.0.len() != l {
                return Err(Error::ArityMismatch { expected: l, got: w.0.len() });
            }
            if w.free_positions() != entry.free {
                return Err(Error::Schema("entry free positions disagree with word".into()));
            }
            if entry.poly.vars() != entry.free.len() {
                return Err(Error::Schema("entry arity disagrees with free positions".into()));
            }
        }
        Ok(SepDescription { l, c, table })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn table(&self) -> &BTreeMap<Word, SepEntry> {
        &self.table
    }

    pub fn eval(&self, n: &[u32]) -> Result<Rational> {
        if n.len() != self.l {
            return Err(Error::ArityMismatch { expected: self.l, got: n.len() });
        }
        let w = Word::of_point(n, self.c);
        let entry = self
            .table
            .get(&w)
            .ok_or_else(|| Error::Internal(format!("word {w:?} missing from table")))?;
        let args: Vec<u32> = entry.free.iter().map(|&i| n[i]).collect();
        Ok(entry.poly.eval_nat(&args))
    }
}

/// Exponential-polynomial form: value at n is the sum over summands of
/// p_t(n) * zeta_order^{<t, n>}, valid once every coordinate exceeds c.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly<S> {
    l: usize,
    order: u64,
    c: u32,
    summands: Vec<(Vec<u64>, MultiPoly<S>)>,
}

impl<S: Scalar> ExpPoly<S> {
    pub fn from_parts(
        l: usize,
        order: u64,
        c: u32,
        summands: Vec<(Vec<u64>, MultiPoly<S>)>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::Schema("root order must be positive".into()));
        }
        for (t, p) in &summands {
            if t.len() != l || p.vars() != l {
                return Err(Error::ArityMismatch { expected: l, got: t.len() });
            }
            if t.iter().any(|&x| x >= order) {
                return Err(Error::Schema("root exponent out of range".into()));
            }
        }
        Ok(ExpPoly { l, order, c, summands })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn threshold(&self) -> u32 {
        self.c
    }

    pub fn summands(&self) -> &[(Vec<u64>, MultiPoly<S>)] {
        &self.summands
    }

    pub fn eval(&self, n: &[u32]) -> Result<S> {
        if n.len() != self.l {
            return Err(Error::ArityMismatch { expected: self.l, got: n.len() });
        }
        let mut acc = S::zero();
        for (t, p) in &self.summands {
            let dot: u64 = t
                .iter()
                .zip(n)
                .map(|(t_i, &n_i)| t_i * n_i as u64 % self.order)
                .sum();
            let root = S::unity_root(self.order, dot % self.order).ok_or_else(|| {
                Error::ContextMismatch(format!(
                    "order-{} root not representable in this scalar type",
                    self.order
                ))
            })?;
            acc = acc + p.eval_nat(n) * root;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_from_i64 as q;
    use crate::{Cyclotomic, RationalGf};

    fn gf1(terms: Vec<GfTerm<Rational>>) -> RationalGf {
        Gf::new(1, terms).unwrap()
    }

    #[test]
    fn coefficient_of_basic_terms() {
        // x^2/(1-x)^3 at n = 5 is binom(5, 2) = 10.
        let f = gf1(vec![GfTerm::plain(q(1), vec![2], vec![3])]);
        assert_eq!(f.coefficient(&[5]).unwrap(), q(10));
        // Constant series 1.
        let one = gf1(vec![GfTerm::plain(q(1), vec![0], vec![0])]);
        assert_eq!(one.coefficient(&[0]).unwrap(), q(1));
        assert_eq!(one.coefficient(&[3]).unwrap(), q(0));
        // 1/((1-x1)(1-x2)) has every coefficient 1.
        let g: RationalGf =
            Gf::new(2, vec![GfTerm::plain(q(1), vec![0, 0], vec![1, 1])]).unwrap();
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(g.coefficient(&[a, b]).unwrap(), q(1));
            }
        }
    }

    #[test]
    fn add_and_scalar_mul_are_coefficientwise() {
        let geo = gf1(vec![GfTerm::plain(q(1), vec![0], vec![1])]);
        let neg = geo.scalar_mul(&q(-1)).unwrap();
        let zero = geo.add(&neg).unwrap();
        assert!(zero.is_zero());

        let shifted = gf1(vec![GfTerm::plain(q(1), vec![1], vec![1])]);
        let s = geo.add(&shifted).unwrap();
        let expect = [1, 2, 2, 2, 2, 2];
        for (n, want) in expect.iter().enumerate() {
            assert_eq!(s.coefficient(&[n as u32]).unwrap(), q(*want));
        }

        let x = gf1(vec![GfTerm::plain(q(1), vec![1], vec![0])]);
        assert_eq!(x.scalar_mul(&q(3)).unwrap().coefficient(&[1]).unwrap(), q(3));
    }

    #[test]
    fn substitution_identifies_variables() {
        // 1/((1-x1)(1-x2)) under the single-block partition is 1/(1-y)^2.
        let g: RationalGf =
            Gf::new(2, vec![GfTerm::plain(q(1), vec![0, 0], vec![1, 1])]).unwrap();
        let s = g.p_substitution(&[vec![0, 1]]).unwrap();
        for n in 0..10u32 {
            assert_eq!(s.coefficient(&[n]).unwrap(), q(n as i64 + 1));
        }
        // Identity partition relabels only.
        let f: RationalGf =
            Gf::new(2, vec![GfTerm::plain(q(1), vec![1, 2], vec![1, 1])]).unwrap();
        let id = f.p_substitution(&[vec![0], vec![1]]).unwrap();
        assert_eq!(id, f);
    }

    #[test]
    fn substitution_splits_twisted_blocks() {
        // 1/((1-x1)(1+x2)) collapses to 1/((1-y)(1+y)): coefficients
        // 1, 0, 1, 0, ...
        let g: Gf<Rational> = Gf::new(
            2,
            vec![GfTerm::new(q(1), vec![0, 0], vec![q(1), q(-1)], vec![1, 1])],
        )
        .unwrap();
        let s = g.p_substitution(&[vec![0, 1]]).unwrap();
        for n in 0..12u32 {
            let want = if n % 2 == 0 { q(1) } else { q(0) };
            assert_eq!(s.coefficient(&[n]).unwrap(), want, "n = {n}");
        }
        // The split yields the two-term form (1/2)/(1-y) + (1/2)/(1+y).
        assert_eq!(s.terms().len(), 2);
    }

    #[test]
    fn substitution_law_on_a_box() {
        // coefficient(sub(F, P), n) = sum of coefficient(F, a) over block
        // sums equal to n.
        let f: Gf<Rational> = Gf::new(
            3,
            vec![
                GfTerm::plain(q(2), vec![1, 0, 2], vec![1, 2, 0]),
                GfTerm::new(q(-1), vec![0, 1, 0], vec![q(1), q(-1), q(1)], vec![2, 1, 1]),
            ],
        )
        .unwrap();
        let partition = vec![vec![0, 2], vec![1]];
        let s = f.p_substitution(&partition).unwrap();
        for n1 in 0..7u32 {
            for n2 in 0..7u32 {
                let mut want = q(0);
                for a0 in 0..=n1 {
                    let a2 = n1 - a0;
                    want = want + f.coefficient(&[a0, n2, a2]).unwrap();
                }
                assert_eq!(s.coefficient(&[n1, n2]).unwrap(), want, "n = ({n1},{n2})");
            }
        }
    }

    #[test]
    fn word_table_round_trip() {
        // x^2/(1-x): threshold 2, small entries 0,0,1 and free entry 1.
        let f = gf1(vec![GfTerm::plain(q(1), vec![2], vec![1])]);
        let sep = f.extract_sep().unwrap();
        assert_eq!(sep.c(), 2);
        for n in 0..12u32 {
            assert_eq!(sep.eval(&[n]).unwrap(), f.coefficient(&[n]).unwrap());
        }
        // 1/(1-x)^2: threshold 0, free polynomial n + 1.
        let g = gf1(vec![GfTerm::plain(q(1), vec![0], vec![2])]);
        let sep = g.extract_sep().unwrap();
        assert_eq!(sep.c(), 0);
        for n in 0..12u32 {
            assert_eq!(sep.eval(&[n]).unwrap(), q(n as i64 + 1));
        }
        // Zero series: every entry zero.
        let z = RationalGf::zero(2);
        let sep = z.extract_sep().unwrap();
        assert_eq!(sep.table().len(), 4);
        assert!(sep.table().values().all(|e| e.poly.is_zero()));
    }

    #[test]
    fn word_table_rejects_twists() {
        let f: Gf<Rational> =
            Gf::new(1, vec![GfTerm::new(q(1), vec![0], vec![q(-1)], vec![1])]).unwrap();
        assert!(matches!(f.extract_sep(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn exp_poly_of_alternating_series() {
        // (1/2)/(1-x) + (1/2)/(1+x): values (1 + (-1)^n)/2.
        let half = Rational::new(crate::Int::one(), crate::Int::from(2));
        let f: Gf<Rational> = Gf::new(
            1,
            vec![
                GfTerm::new(half.clone(), vec![0], vec![q(1)], vec![1]),
                GfTerm::new(half.clone(), vec![0], vec![q(-1)], vec![1]),
            ],
        )
        .unwrap();
        let ep = f.extract_exp_poly().unwrap();
        assert_eq!(ep.order(), 2);
        assert_eq!(ep.summands().len(), 2);
        for n in 0..9u32 {
            let want = if n % 2 == 0 { q(1) } else { q(0) };
            assert_eq!(ep.eval(&[n]).unwrap(), want);
            assert_eq!(f.coefficient(&[n]).unwrap(), want);
        }
    }

    #[test]
    fn exp_poly_with_multiplicity() {
        // 1/(1+x)^2: values (n+1)(-1)^n.
        let f: Gf<Rational> =
            Gf::new(1, vec![GfTerm::new(q(1), vec![0], vec![q(-1)], vec![2])]).unwrap();
        let ep = f.extract_exp_poly().unwrap();
        assert_eq!(ep.order(), 2);
        assert_eq!(ep.summands().len(), 1);
        assert_eq!(ep.summands()[0].0, vec![1]);
        let expect = [1i64, -2, 3, -4, 5, -6];
        for (n, want) in expect.iter().enumerate() {
            assert_eq!(ep.eval(&[n as u32]).unwrap(), q(*want));
        }
    }

    #[test]
    fn exp_poly_over_cyclotomics() {
        // 1/(1 - z3 x): values z3^n.
        let z3 = Cyclotomic::root_of_unity(3, 1);
        let f: Gf<Cyclotomic> = Gf::new(
            1,
            vec![GfTerm::new(Cyclotomic::one(), vec![0], vec![z3.clone()], vec![1])],
        )
        .unwrap();
        let ep = f.extract_exp_poly().unwrap();
        assert_eq!(ep.order(), 3);
        for n in 0..10u32 {
            assert_eq!(ep.eval(&[n]).unwrap(), Cyclotomic::root_of_unity(3, n as u64));
        }
    }

    #[test]
    fn exp_poly_rejects_non_unity_twists() {
        let f: Gf<Rational> =
            Gf::new(1, vec![GfTerm::new(q(1), vec![0], vec![q(2)], vec![1])]).unwrap();
        assert!(matches!(f.extract_exp_poly(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn normalization_merges_and_validates() {
        let f = Gf::new(
            1,
            vec![
                GfTerm::plain(q(2), vec![1], vec![1]),
                GfTerm::plain(q(3), vec![1], vec![1]),
            ],
        )
        .unwrap();
        assert_eq!(f.terms().len(), 1);
        assert_eq!(f.terms()[0].gamma, q(5));

        let bad = Gf::new(2, vec![GfTerm::plain(q(1), vec![0], vec![1])]);
        assert!(matches!(bad, Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn partition_validation() {
        assert!(check_partition(3, &[vec![0, 2], vec![1]]).is_ok());
        assert!(check_partition(3, &[vec![0], vec![1]]).is_err());
        assert!(check_partition(3, &[vec![0, 0, 1, 2]]).is_err());
        assert!(check_partition(2, &[vec![0, 1], vec![]]).is_err());
        assert!(check_partition(2, &[vec![0, 1, 2]]).is_err());
    }
}
