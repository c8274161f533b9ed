//! Rational polytopes in the nonnegative orthant: exact lattice-point
//! enumeration of dilations, dilation-count fits, the decomposition
//! identities relating nP to sumsets of smaller dilations, and color
//! counting through an additive coloring.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::colorings::Coloring;
use crate::fitting::{self, PolynomialQ, Quasipolynomial};
use crate::linalg::feasible_nonneg;
use crate::orthants::box_points;
use crate::scalar::{rational_floor_i64, rational_from_i64};
use crate::semigroups::{n_fold_sumset, sumset, Elem, Semigroup, ZdAdd};
use crate::{Error, Int, Rational, Result};

const BOX_CAP: u64 = 1 << 22;
const DENOMINATOR_CAP: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RationalPolytope {
    k: usize,
    vertices: Vec<Vec<Rational>>,
    /// Least common denominator: m * P has integer vertices.
    m: u32,
}

impl RationalPolytope {
    pub fn new(vertices: Vec<Vec<Rational>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Schema("a polytope needs at least one vertex".into()));
        }
        let k = vertices[0].len();
        if k == 0 {
            return Err(Error::Schema("polytope dimension must be positive".into()));
        }
        for v in &vertices {
            if v.len() != k {
                return Err(Error::ArityMismatch { expected: k, got: v.len() });
            }
            if v.iter().any(|c| c.is_negative()) {
                return Err(Error::Schema(
                    "vertex coordinates must be nonnegative; translate the polytope first"
                        .into(),
                ));
            }
        }
        let mut m = Int::one();
        for v in &vertices {
            for c in v {
                m = m.lcm(c.denom());
            }
        }
        let m = m
            .to_u64()
            .filter(|&m| m <= DENOMINATOR_CAP)
            .ok_or_else(|| {
                Error::ResourceCap(format!(
                    "common denominator exceeds {DENOMINATOR_CAP}"
                ))
            })? as u32;
        Ok(RationalPolytope { k, vertices, m })
    }

    /// Accepts arbitrary rational vertices by translating each coordinate
    /// down by the floor of its minimum. Integer translations leave all
    /// dilation counts unchanged, so the returned offset is bookkeeping
    /// for mapping points back.
    pub fn new_translated(vertices: Vec<Vec<Rational>>) -> Result<(Self, Vec<i64>)> {
        if vertices.is_empty() {
            return Err(Error::Schema("a polytope needs at least one vertex".into()));
        }
        let k = vertices[0].len();
        let mut offset = vec![0i64; k];
        for (i, off) in offset.iter_mut().enumerate() {
            let min = vertices
                .iter()
                .map(|v| v.get(i).cloned().unwrap_or_else(Rational::zero))
                .min()
                .unwrap();
            *off = rational_floor_i64(&min);
        }
        let shifted = vertices
            .into_iter()
            .map(|v| {
                v.into_iter()
                    .zip(&offset)
                    .map(|(c, &o)| c - rational_from_i64(o))
                    .collect()
            })
            .collect();
        Ok((RationalPolytope::new(shifted)?, offset))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn denominator(&self) -> u32 {
        self.m
    }

    /// Componentwise floor of the largest vertex coordinates in the n-th
    /// dilation; every lattice point of nP lies in this box.
    pub fn bbox_dims(&self, n: u32) -> Vec<u32> {
        (0..self.k)
            .map(|i| {
                let max = self.vertices.iter().map(|v| v[i].clone()).max().unwrap();
                rational_floor_i64(&(max * rational_from_i64(n as i64))) as u32
            })
            .collect()
    }

    /// x in nP, decided by feasibility of x as a convex combination of
    /// the dilated vertices (exact phase-one simplex).
    pub fn contains_lattice(&self, x: &[u32], n: u32) -> Result<bool> {
        if x.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: x.len() });
        }
        let cols = self.vertices.len();
        let mut a = Vec::with_capacity(self.k + 1);
        for i in 0..self.k {
            let row: Vec<Rational> = self
                .vertices
                .iter()
                .map(|v| v[i].clone() * rational_from_i64(n as i64))
                .collect();
            a.push(row);
        }
        a.push(vec![Rational::one(); cols]);
        let mut b: Vec<Rational> =
            x.iter().map(|&c| rational_from_i64(c as i64)).collect();
        b.push(Rational::one());
        Ok(feasible_nonneg(&a, &b))
    }

    /// nP intersected with the lattice, in ascending order.
    pub fn lattice_points(&self, n: u32) -> Result<Vec<Vec<u32>>> {
        let dims = self.bbox_dims(n);
        let size: u64 = dims.iter().map(|&d| d as u64 + 1).product();
        if size > BOX_CAP {
            return Err(Error::ResourceCap(format!(
                "bounding box of dilation {n} has {size} points"
            )));
        }
        let mut out = Vec::new();
        for x in box_points(&dims) {
            if self.contains_lattice(&x, n)? {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Dilation-count fit: a degree-k polynomial for lattice polytopes,
    /// a period-m quasipolynomial otherwise, verified on 2(k+1) extra
    /// points per residue class. A verification failure here means the
    /// enumeration itself is broken.
    pub fn ehrhart_fit(&self) -> Result<CountingFit> {
        let k = self.k as u32;
        let count = |n: u32| -> Result<Rational> {
            Ok(rational_from_i64(self.lattice_points(n)?.len() as i64))
        };
        if self.m == 1 {
            let mut samples = Vec::new();
            for n in 0..=k {
                samples.push((vec![n], count(n)?));
            }
            let poly = fitting::fit_polynomial(1, &samples, k)?;
            for n in k + 1..=3 * k + 2 {
                if poly.eval_nat(&[n]) != count(n)? {
                    return Err(Error::Internal(format!(
                        "dilation counts are not polynomial at n = {n}"
                    )));
                }
            }
            Ok(CountingFit::Polynomial(poly))
        } else {
            let qp = fitting::fit_quasipolynomial(count, self.m, k, 0).map_err(
                |e| match e {
                    Error::InconsistentSamples(msg) => Error::Internal(format!(
                        "dilation counts failed verification: {msg}"
                    )),
                    other => other,
                },
            )?;
            Ok(CountingFit::Quasipolynomial(qp))
        }
    }

    /// For a lattice polytope and n >= k, nP and (n-k)*(P cap Z^k) +
    /// (kP cap Z^k) contain the same lattice points; both sides are built
    /// exhaustively and compared.
    pub fn verify_decomposition(&self, n: u32) -> Result<SetIdentityCheck> {
        if self.m != 1 {
            return Err(Error::ContextMismatch(format!(
                "identity requires a lattice polytope, but the denominator is {}",
                self.m
            )));
        }
        let k = self.k as u32;
        if n < k {
            return Err(Error::ContextMismatch(format!(
                "identity requires n >= k = {k}, got {n}"
            )));
        }
        let g = ZdAdd { d: self.k };
        let a = to_elems(self.lattice_points(1)?);
        let b = to_elems(self.lattice_points(k)?);
        let rhs = sumset(&g, &n_fold_sumset(&g, &a, n - k)?, &b)?;
        let lhs = to_elems(self.lattice_points(n)?);
        Ok(compare_sets(&lhs, &rhs))
    }

    /// The rational analogue: with r = n mod m and n >= mk, nP matches
    /// ((n - mk - r)/m)*(mP cap Z^k) + ((mk + r)P cap Z^k).
    pub fn verify_rational_decomposition(&self, n: u32) -> Result<SetIdentityCheck> {
        let mk = self.m * self.k as u32;
        if n < mk {
            return Err(Error::ContextMismatch(format!(
                "identity requires n >= mk = {mk}, got {n}"
            )));
        }
        let r = n % self.m;
        let folds = (n - mk - r) / self.m;
        let g = ZdAdd { d: self.k };
        let a = to_elems(self.lattice_points(self.m)?);
        let b = to_elems(self.lattice_points(mk + r)?);
        let rhs = sumset(&g, &n_fold_sumset(&g, &a, folds)?, &b)?;
        let lhs = to_elems(self.lattice_points(n)?);
        Ok(compare_sets(&lhs, &rhs))
    }

    /// Number of distinct colors over the lattice points of nP.
    pub fn color_count<G: Semigroup>(
        &self,
        chi: &Coloring<G>,
        n: u32,
    ) -> Result<usize> {
        if chi.k() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: chi.k() });
        }
        let mut colors = BTreeSet::new();
        for x in self.lattice_points(n)? {
            colors.insert(chi.color(&x)?);
        }
        Ok(colors.len())
    }

    /// Color counts are eventually given by a degree-bounded polynomial
    /// (quasipolynomial of period m for rational P): search the smallest
    /// sampled threshold from which a fit verifies on held-out points.
    /// The reported threshold is where sampling first succeeds, with no
    /// claim that it is the true one.
    pub fn color_count_fit<G: Semigroup>(
        &self,
        chi: &Coloring<G>,
        degree: Option<u32>,
        threshold_limit: u32,
    ) -> Result<ColorCountFit> {
        chi.ensure_additive()?;
        let d = degree.unwrap_or(self.k as u32);
        let mut cache: Vec<Option<Rational>> = Vec::new();
        let mut oracle = |n: u32| -> Result<Rational> {
            if cache.len() <= n as usize {
                cache.resize(n as usize + 1, None);
            }
            if let Some(v) = &cache[n as usize] {
                return Ok(v.clone());
            }
            let v = rational_from_i64(self.color_count(chi, n)? as i64);
            cache[n as usize] = Some(v.clone());
            Ok(v)
        };
        let mut found = None;
        'thresholds: for n0 in 0..=threshold_limit {
            if self.m == 1 {
                let mut samples = Vec::new();
                for n in n0..=n0 + d {
                    samples.push((vec![n], oracle(n)?));
                }
                let poly = match fitting::fit_polynomial(1, &samples, d) {
                    Ok(p) => p,
                    Err(Error::InconsistentSamples(_)) => continue,
                    Err(e) => return Err(e),
                };
                for n in n0 + d + 1..=n0 + 3 * (d + 1) {
                    if poly.eval_nat(&[n]) != oracle(n)? {
                        continue 'thresholds;
                    }
                }
                found = Some((n0, CountingFit::Polynomial(poly)));
                break;
            } else {
                match fitting::fit_quasipolynomial(&mut oracle, self.m, d, n0) {
                    Ok(qp) => {
                        found = Some((n0, CountingFit::Quasipolynomial(qp)));
                        break;
                    }
                    Err(Error::InconsistentSamples(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
        }
        let Some((threshold, fit)) = found else {
            return Err(Error::Inconclusive(format!(
                "color counts fit no degree-{d} form from any threshold up to {threshold_limit}"
            )));
        };
        self.check_color_reduction(chi, threshold)?;
        Ok(ColorCountFit { threshold, fit })
    }

    /// Cross-check for colorings that live in a semigroup: applying the
    /// coloring to the decomposition identity turns the color set of nP
    /// into a sumset of the color sets of two fixed dilations.
    fn check_color_reduction<G: Semigroup>(
        &self,
        chi: &Coloring<G>,
        threshold: u32,
    ) -> Result<()> {
        let Some(g) = chi.semigroup() else {
            return Ok(());
        };
        let k = self.k as u32;
        let low = self.m * k;
        let colors_of = |pts: Vec<Vec<u32>>| -> Result<BTreeSet<Elem>> {
            pts.iter().map(|x| chi.color(x).map(|c| Elem(c.0))).collect()
        };
        let a = colors_of(self.lattice_points(self.m)?)?;
        for n in low.max(threshold)..low.max(threshold) + 3 {
            let r = n % self.m;
            let folds = (n - low - r) / self.m;
            let b = colors_of(self.lattice_points(low + r)?)?;
            let rhs = sumset(g, &n_fold_sumset(g, &a, folds)?, &b)?;
            if rhs.len() != self.color_count(chi, n)? {
                return Err(Error::Internal(format!(
                    "color-set reduction fails at n = {n}: {} direct colors vs {} through the identity",
                    self.color_count(chi, n)?,
                    rhs.len()
                )));
            }
        }
        Ok(())
    }
}

fn to_elems(points: Vec<Vec<u32>>) -> BTreeSet<Elem> {
    points
        .into_iter()
        .map(|x| Elem(x.into_iter().map(|c| c as i64).collect()))
        .collect()
}

fn compare_sets(lhs: &BTreeSet<Elem>, rhs: &BTreeSet<Elem>) -> SetIdentityCheck {
    if let Some(p) = lhs.difference(rhs).next() {
        return SetIdentityCheck::Counterexample {
            point: p.0.clone(),
            in_dilation: true,
        };
    }
    if let Some(p) = rhs.difference(lhs).next() {
        return SetIdentityCheck::Counterexample {
            point: p.0.clone(),
            in_dilation: false,
        };
    }
    SetIdentityCheck::Holds
}

#[derive(Debug, Clone, PartialEq)]
pub enum CountingFit {
    Polynomial(PolynomialQ),
    Quasipolynomial(Quasipolynomial),
}

impl CountingFit {
    pub fn eval(&self, n: u32) -> Rational {
        match self {
            CountingFit::Polynomial(p) => p.eval_nat(&[n]),
            CountingFit::Quasipolynomial(qp) => qp.eval(n),
        }
    }

    pub fn period(&self) -> u32 {
        match self {
            CountingFit::Polynomial(_) => 1,
            CountingFit::Quasipolynomial(qp) => qp.period(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetIdentityCheck {
    Holds,
    /// `in_dilation` marks which side the stray point came from: the
    /// dilation nP, or the sumset it should equal.
    Counterexample { point: Vec<i64>, in_dilation: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorCountFit {
    /// Smallest sampled n from which the fit held.
    pub threshold: u32,
    pub fit: CountingFit,
}
