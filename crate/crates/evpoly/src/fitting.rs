//! Exact interpolation from sample oracles: polynomials,
//! quasipolynomials, word-indexed tables, and root-of-unity expansions.
//! All solving is over Q or Q(zeta); there is no tolerance anywhere.

use std::collections::BTreeMap;

use num_traits::One;

use crate::gf::{ExpPoly, SepDescription, SepEntry, Word, WordEntry};
use crate::linalg::{solve, LinSolve};
use crate::orthants::box_points;
use crate::poly::MultiPoly;
use crate::scalar::{render_rational, Cyclotomic};
use crate::{Error, Rational, Result};

pub type PolynomialQ = MultiPoly<Rational>;

/// f(n) = residues[n mod period](n).
#[derive(Debug, Clone, PartialEq)]
pub struct Quasipolynomial {
    period: u32,
    residues: Vec<PolynomialQ>,
}

impl Quasipolynomial {
    pub fn new(period: u32, residues: Vec<PolynomialQ>) -> Result<Self> {
        if period == 0 {
            return Err(Error::Schema("period must be positive".into()));
        }
        if residues.len() != period as usize {
            return Err(Error::Schema(format!(
                "period {period} needs {period} residue polynomials, got {}",
                residues.len()
            )));
        }
        if residues.iter().any(|p| p.vars() != 1) {
            return Err(Error::Schema("residue polynomials must be univariate".into()));
        }
        Ok(Quasipolynomial { period, residues })
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn residues(&self) -> &[PolynomialQ] {
        &self.residues
    }

    pub fn eval(&self, n: u32) -> Rational {
        self.residues[(n % self.period) as usize].eval_nat(&[n])
    }
}

/// Exponent vectors of total degree at most `degree`, ascending.
fn monomials(l: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..l {
        let mut next = Vec::new();
        for m in &out {
            let used: u32 = m.iter().sum();
            for e in 0..=(degree - used) {
                let mut x = m.clone();
                x.push(e);
                next.push(x);
            }
        }
        out = next;
    }
    out.sort();
    out
}

const UNKNOWN_CAP: usize = 4096;

/// Exact polynomial through the samples, or a structured failure:
/// samples that pin down no unique polynomial of the given degree are
/// underdetermined, samples no such polynomial passes through are
/// inconsistent.
pub fn fit_polynomial(
    l: usize,
    samples: &[(Vec<u32>, Rational)],
    degree: u32,
) -> Result<PolynomialQ> {
    for (p, _) in samples {
        if p.len() != l {
            return Err(Error::ArityMismatch { expected: l, got: p.len() });
        }
    }
    let monos = monomials(l, degree);
    if monos.len() > UNKNOWN_CAP {
        return Err(Error::ResourceCap(format!(
            "{} monomials of degree {degree} in {l} variables",
            monos.len()
        )));
    }
    let mut a = Vec::with_capacity(samples.len());
    let mut b = Vec::with_capacity(samples.len());
    for (p, v) in samples {
        let row = monos
            .iter()
            .map(|m| {
                let mono = MultiPoly::monomial(l, m.clone(), Rational::one());
                mono.eval_nat(p)
            })
            .collect();
        a.push(row);
        b.push(v.clone());
    }
    match solve(&a, &b) {
        LinSolve::Unique(coeffs) => {
            let mut poly = MultiPoly::zero(l);
            for (m, c) in monos.into_iter().zip(coeffs) {
                poly = poly.add(&MultiPoly::monomial(l, m, c));
            }
            Ok(poly)
        }
        LinSolve::Underdetermined => Err(Error::Underdetermined(format!(
            "{} samples do not pin down a degree-{degree} polynomial in {l} variables",
            samples.len()
        ))),
        LinSolve::Inconsistent => Err(Error::InconsistentSamples(format!(
            "no degree-{degree} polynomial passes through the {} samples",
            samples.len()
        ))),
    }
}

/// Per-residue interpolation of f(n) for n >= start, with each residue
/// class verified on 2(degree + 1) held-out points.
pub fn fit_quasipolynomial(
    mut oracle: impl FnMut(u32) -> Result<Rational>,
    period: u32,
    degree: u32,
    start: u32,
) -> Result<Quasipolynomial> {
    if period == 0 {
        return Err(Error::Schema("period must be positive".into()));
    }
    let mut residues = Vec::with_capacity(period as usize);
    for i in 0..period {
        let first = start + (i + period - start % period) % period;
        let mut samples = Vec::new();
        for j in 0..=degree {
            let n = first + j * period;
            samples.push((vec![n], oracle(n)?));
        }
        let poly = fit_polynomial(1, &samples, degree)?;
        for j in degree + 1..=3 * (degree + 1) {
            let n = first + j * period;
            let want = oracle(n)?;
            let got = poly.eval_nat(&[n]);
            if want != got {
                return Err(Error::InconsistentSamples(format!(
                    "residue {i} fit gives {} at n = {n}, but the oracle gives {}",
                    render_rational(&got),
                    render_rational(&want)
                )));
            }
        }
        residues.push(poly);
    }
    Quasipolynomial::new(period, residues)
}

/// Smallest threshold c <= c_limit whose full word table fits the
/// oracle: for every word, the polynomial interpolated on free
/// coordinates in (c, c + degree + 3] must also match a held-out shell
/// two layers further out and the corner where every free coordinate
/// equals c. The corner condition keeps the table tight; without it any
/// c past the fit window would be accepted.
pub fn fit_sep(
    l: usize,
    mut oracle: impl FnMut(&[u32]) -> Result<Rational>,
    degree: u32,
    c_limit: u32,
) -> Result<SepDescription> {
    if l == 0 {
        return Err(Error::Schema("a word table needs at least one coordinate".into()));
    }
    let mut cache: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    let mut get = |point: &[u32], oracle: &mut dyn FnMut(&[u32]) -> Result<Rational>| {
        if let Some(v) = cache.get(point) {
            return Ok(v.clone());
        }
        let v = oracle(point)?;
        cache.insert(point.to_vec(), v.clone());
        Ok(v)
    };
    'search: for c in 0..=c_limit {
        let mut table: BTreeMap<Word, SepEntry> = BTreeMap::new();
        for w in Word::all(l, c) {
            let free = w.free_positions();
            let assemble = |free_vals: &[u32]| -> Vec<u32> {
                let mut point = vec![0u32; l];
                let mut fi = 0;
                for (i, entry) in w.0.iter().enumerate() {
                    point[i] = match entry {
                        WordEntry::Fixed(v) => *v,
                        WordEntry::Inf => {
                            fi += 1;
                            free_vals[fi - 1]
                        }
                    };
                }
                point
            };
            if free.is_empty() {
                let v = get(&assemble(&[]), &mut oracle)?;
                table.insert(w.clone(), SepEntry { free, poly: MultiPoly::constant(0, v) });
                continue;
            }
            let f = free.len();
            let mut samples = Vec::new();
            for offsets in box_points(&vec![degree + 2; f]) {
                let vals: Vec<u32> = offsets.iter().map(|&o| c + 1 + o).collect();
                let v = get(&assemble(&vals), &mut oracle)?;
                samples.push((vals, v));
            }
            let poly = match fit_polynomial(f, &samples, degree) {
                Ok(p) => p,
                Err(Error::InconsistentSamples(_)) => continue 'search,
                Err(e) => return Err(e),
            };
            // Held-out shell two layers past the fit window.
            for offsets in box_points(&vec![1u32; f]) {
                let vals: Vec<u32> =
                    offsets.iter().map(|&o| c + degree + 4 + o).collect();
                if get(&assemble(&vals), &mut oracle)? != poly.eval_nat(&vals) {
                    continue 'search;
                }
            }
            let corner = vec![c; f];
            if get(&assemble(&corner), &mut oracle)? != poly.eval_nat(&corner) {
                continue 'search;
            }
            table.insert(w.clone(), SepEntry { free, poly });
        }
        return SepDescription::from_parts(l, c, table);
    }
    Err(Error::Inconclusive(format!(
        "no word table with threshold at most {c_limit} fits the oracle at degree {degree}"
    )))
}

/// Coefficient polynomials for sum_t p_t(n) zeta^<t, n> with the root
/// exponent vectors t given, solved exactly over Q(zeta_order) on a
/// sample grid past `start` and verified on a held-out shell.
pub fn fit_exp_poly(
    l: usize,
    mut oracle: impl FnMut(&[u32]) -> Result<Cyclotomic>,
    order: u64,
    candidates: &[Vec<u64>],
    degree: u32,
    start: u32,
) -> Result<ExpPoly<Cyclotomic>> {
    if order == 0 {
        return Err(Error::Schema("root order must be positive".into()));
    }
    if candidates.is_empty() {
        return Err(Error::Schema("at least one candidate root vector is required".into()));
    }
    let mut roots: Vec<Vec<u64>> = Vec::new();
    for t in candidates {
        if t.len() != l {
            return Err(Error::ArityMismatch { expected: l, got: t.len() });
        }
        let t: Vec<u64> = t.iter().map(|&x| x % order).collect();
        if !roots.contains(&t) {
            roots.push(t);
        }
    }
    roots.sort();
    let monos = monomials(l, degree);
    let unknowns = roots.len() * monos.len();
    if unknowns > UNKNOWN_CAP {
        return Err(Error::ResourceCap(format!("{unknowns} unknown coefficients")));
    }
    // One window per axis large enough to separate every root along it.
    let width = roots.len() as u32 * (degree + 1) + 1;
    let phase = |t: &[u64], n: &[u32]| -> Cyclotomic {
        let dot: u64 = t.iter().zip(n).map(|(ti, &ni)| ti * ni as u64 % order).sum();
        Cyclotomic::root_of_unity(order, dot % order)
    };
    let mut a = Vec::new();
    let mut b = Vec::new();
    for offsets in box_points(&vec![width - 1; l]) {
        let n: Vec<u32> = offsets.iter().map(|&o| start + 1 + o).collect();
        let mut row = Vec::with_capacity(unknowns);
        for t in &roots {
            let ph = phase(t, &n);
            for m in &monos {
                let mono = MultiPoly::monomial(l, m.clone(), Rational::one());
                row.push(ph.clone() * Cyclotomic::from_rational_in(1, mono.eval_nat(&n)));
            }
        }
        a.push(row);
        b.push(oracle(&n)?);
    }
    let coeffs = match solve(&a, &b) {
        LinSolve::Unique(c) => c,
        LinSolve::Underdetermined => {
            return Err(Error::Underdetermined(
                "sample grid does not separate the candidate roots".into(),
            ))
        }
        LinSolve::Inconsistent => {
            return Err(Error::InconsistentSamples(
                "no expansion over the candidate roots passes through the samples".into(),
            ))
        }
    };
    let mut summands = Vec::new();
    let mut it = coeffs.into_iter();
    for t in &roots {
        let mut poly = MultiPoly::zero(l);
        for m in &monos {
            poly = poly.add(&MultiPoly::monomial(l, m.clone(), it.next().unwrap()));
        }
        if !poly.is_zero() {
            summands.push((t.clone(), poly));
        }
    }
    let ep = ExpPoly::from_parts(l, order, start, summands)?;
    for offsets in box_points(&vec![1u32; l]) {
        let n: Vec<u32> = offsets.iter().map(|&o| start + width + 1 + o).collect();
        let want = oracle(&n)?;
        if ep.eval(&n)? != want {
            return Err(Error::InconsistentSamples(format!(
                "held-out point {n:?}: expansion gives {}, oracle gives {}",
                ep.eval(&n)?,
                want
            )));
        }
    }
    Ok(ep)
}

#[derive(Debug, Clone)]
pub enum Fitted<'a> {
    Polynomial(&'a PolynomialQ),
    Quasipolynomial(&'a Quasipolynomial),
    Sep(&'a SepDescription),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitMismatch {
    pub point: Vec<u32>,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitReport {
    pub checked: usize,
    pub mismatches: Vec<FitMismatch>,
}

impl FitReport {
    pub fn clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Exact comparison on every point of the box [0, dims_1] x ... ; every
/// mismatch is listed.
pub fn verify_fit(
    fit: &Fitted,
    mut oracle: impl FnMut(&[u32]) -> Result<Rational>,
    dims: &[u32],
) -> Result<FitReport> {
    let arity = match fit {
        Fitted::Polynomial(p) => p.vars(),
        Fitted::Quasipolynomial(_) => 1,
        Fitted::Sep(s) => s.l(),
    };
    if dims.len() != arity {
        return Err(Error::ArityMismatch { expected: arity, got: dims.len() });
    }
    let mut report = FitReport { checked: 0, mismatches: Vec::new() };
    for n in box_points(dims) {
        let got = match fit {
            Fitted::Polynomial(p) => p.eval_nat(&n),
            Fitted::Quasipolynomial(qp) => qp.eval(n[0]),
            Fitted::Sep(s) => s.eval(&n)?,
        };
        let want = oracle(&n)?;
        report.checked += 1;
        if got != want {
            report.mismatches.push(FitMismatch {
                point: n,
                expected: render_rational(&want),
                got: render_rational(&got),
            });
        }
    }
    Ok(report)
}

/// Same comparison for a root-of-unity expansion; points at or below the
/// threshold are outside its domain and are skipped.
pub fn verify_exp_poly(
    ep: &ExpPoly<Cyclotomic>,
    mut oracle: impl FnMut(&[u32]) -> Result<Cyclotomic>,
    dims: &[u32],
) -> Result<FitReport> {
    if dims.len() != ep.l() {
        return Err(Error::ArityMismatch { expected: ep.l(), got: dims.len() });
    }
    let mut report = FitReport { checked: 0, mismatches: Vec::new() };
    for n in box_points(dims) {
        if n.iter().any(|&v| v <= ep.threshold()) {
            continue;
        }
        let got = ep.eval(&n)?;
        let want = oracle(&n)?;
        report.checked += 1;
        if got != want {
            report.mismatches.push(FitMismatch {
                point: n,
                expected: want.to_string(),
                got: got.to_string(),
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_from_i64 as q;
    use crate::semigroups::{n_fold_sumset, Elem, ZdAdd};
    use std::collections::BTreeSet;

    #[test]
    fn polynomial_through_square_counts() {
        let samples: Vec<(Vec<u32>, Rational)> =
            (0..=2u32).map(|n| (vec![n], q((n as i64 + 1).pow(2)))).collect();
        let p = fit_polynomial(1, &samples, 2).unwrap();
        for n in 0..=10u32 {
            assert_eq!(p.eval_nat(&[n]), q((n as i64 + 1).pow(2)));
        }
        assert!(p.is_integral());
    }

    #[test]
    fn inconsistent_and_underdetermined_samples() {
        let bad = vec![(vec![0], q(0)), (vec![1], q(1)), (vec![2], q(5))];
        assert!(matches!(
            fit_polynomial(1, &bad, 1),
            Err(Error::InconsistentSamples(_))
        ));
        let thin = vec![(vec![0], q(0))];
        assert!(matches!(
            fit_polynomial(1, &thin, 1),
            Err(Error::Underdetermined(_))
        ));
    }

    #[test]
    fn quasipolynomial_of_floor_halves() {
        // floor(n/2) + 1: residue 0 gives n/2 + 1, residue 1 gives (n+1)/2.
        let qp = fit_quasipolynomial(|n| Ok(q(n as i64 / 2 + 1)), 2, 1, 0).unwrap();
        for n in 0..=20u32 {
            assert_eq!(qp.eval(n), q(n as i64 / 2 + 1), "n = {n}");
        }
        // Residue polynomials have half-integer coefficients.
        assert!(!qp.residues()[0].is_integral() || !qp.residues()[1].is_integral());
    }

    #[test]
    fn quasipolynomial_of_a_plain_polynomial() {
        let qp = fit_quasipolynomial(|n| Ok(q((n as i64) * 2 + 3)), 3, 1, 0).unwrap();
        assert_eq!(qp.residues()[0], qp.residues()[1]);
        assert_eq!(qp.residues()[1], qp.residues()[2]);
    }

    fn growth_oracle(gens: &[i64]) -> impl FnMut(&[u32]) -> Result<Rational> + '_ {
        let g = ZdAdd { d: 1 };
        move |n: &[u32]| {
            let a: BTreeSet<Elem> = gens.iter().map(|&v| Elem::scalar(v)).collect();
            Ok(q(n_fold_sumset(&g, &a, n[0])?.len() as i64))
        }
    }

    #[test]
    fn word_table_for_gapped_growth() {
        // |n * {0, 2, 3}| is 1, 3, 6, 9, ...: linear from n = 1 on, so the
        // corner condition forces threshold 1, not 0.
        let sep = fit_sep(1, growth_oracle(&[0, 2, 3]), 1, 6).unwrap();
        assert_eq!(sep.c(), 1);
        assert_eq!(sep.eval(&[0]).unwrap(), q(1));
        for n in 1..=12u32 {
            assert_eq!(sep.eval(&[n]).unwrap(), q(3 * n as i64));
        }
    }

    #[test]
    fn word_table_for_interval_growth() {
        let sep = fit_sep(1, growth_oracle(&[0, 1]), 1, 6).unwrap();
        assert_eq!(sep.c(), 0);
        for n in 0..=12u32 {
            assert_eq!(sep.eval(&[n]).unwrap(), q(n as i64 + 1));
        }
    }

    #[test]
    fn bivariate_word_table() {
        let g = ZdAdd { d: 1 };
        let a: BTreeSet<Elem> = [0i64, 1].iter().map(|&v| Elem::scalar(v)).collect();
        let b: BTreeSet<Elem> = [0i64, 2].iter().map(|&v| Elem::scalar(v)).collect();
        let oracle = |n: &[u32]| {
            let s = crate::semigroups::multi_sumset(&g, &[a.clone(), b.clone()], n)?;
            Ok(q(s.len() as i64))
        };
        let sep = fit_sep(2, oracle, 1, 4).unwrap();
        assert_eq!(sep.c(), 0);
        for n1 in 0..=6u32 {
            for n2 in 0..=6u32 {
                let want = if n1 == 0 && n2 == 0 {
                    q(1)
                } else if n1 == 0 {
                    q(n2 as i64 + 1)
                } else if n2 == 0 {
                    q(n1 as i64 + 1)
                } else {
                    q(n1 as i64 + 2 * n2 as i64 + 1)
                };
                assert_eq!(sep.eval(&[n1, n2]).unwrap(), want, "at ({n1}, {n2})");
            }
        }
    }

    #[test]
    fn word_table_is_stable_under_larger_windows() {
        // Fitting with a higher degree bound keeps every value.
        let lo = fit_sep(1, growth_oracle(&[0, 2, 3]), 1, 6).unwrap();
        let hi = fit_sep(1, growth_oracle(&[0, 2, 3]), 3, 6).unwrap();
        for n in 0..=15u32 {
            assert_eq!(lo.eval(&[n]).unwrap(), hi.eval(&[n]).unwrap());
        }
    }

    #[test]
    fn exp_poly_fit_of_parity_average() {
        // (1 + (-1)^n)/2 with candidate exponents {0, 1} of order 2.
        let oracle = |n: &[u32]| {
            let v = if n[0] % 2 == 0 { q(1) } else { q(0) };
            Ok(Cyclotomic::from_rational_in(1, v))
        };
        let ep = fit_exp_poly(1, oracle, 2, &[vec![0], vec![1]], 0, 0).unwrap();
        assert_eq!(ep.summands().len(), 2);
        for (_, p) in ep.summands() {
            assert!(p.is_constant());
        }
        for n in 1..=10u32 {
            let want = if n % 2 == 0 { q(1) } else { q(0) };
            assert_eq!(ep.eval(&[n]).unwrap(), Cyclotomic::from_rational_in(1, want));
        }
    }

    #[test]
    fn exp_poly_fit_of_pure_rotation() {
        let oracle = |n: &[u32]| Ok(Cyclotomic::root_of_unity(3, n[0] as u64 % 3));
        let ep = fit_exp_poly(1, oracle, 3, &[vec![1]], 0, 0).unwrap();
        assert_eq!(ep.summands().len(), 1);
        for n in 1..=9u32 {
            assert_eq!(
                ep.eval(&[n]).unwrap(),
                Cyclotomic::root_of_unity(3, n as u64 % 3)
            );
        }
    }

    #[test]
    fn exp_poly_fit_rejects_wrong_roots() {
        let oracle = |n: &[u32]| Ok(Cyclotomic::root_of_unity(3, n[0] as u64 % 3));
        assert!(matches!(
            fit_exp_poly(1, oracle, 2, &[vec![0], vec![1]], 1, 0),
            Err(Error::InconsistentSamples(_))
        ));
    }

    #[test]
    fn verification_reports_every_mismatch() {
        let p = fit_polynomial(
            1,
            &(0..=2u32).map(|n| (vec![n], q(n as i64 + 1))).collect::<Vec<_>>(),
            1,
        )
        .unwrap();
        let clean = verify_fit(&Fitted::Polynomial(&p), |n| Ok(q(n[0] as i64 + 1)), &[12])
            .unwrap();
        assert!(clean.clean());
        assert_eq!(clean.checked, 13);
        // Perturbed oracle: every even point now disagrees.
        let dirty = verify_fit(
            &Fitted::Polynomial(&p),
            |n| Ok(q(n[0] as i64 + 1 + (1 - n[0] as i64 % 2))),
            &[5],
        )
        .unwrap();
        assert_eq!(dirty.mismatches.len(), 3);
        assert_eq!(dirty.mismatches[0].point, vec![0]);
    }
}
