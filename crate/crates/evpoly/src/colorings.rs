//! Additive colorings of N_0^k and what they buy: shift-stability
//! checking, substantial points, and the pipelines that turn sumset
//! growth and character sums into closed forms.
//!
//! A coloring is additive when the color of a sum depends only on the
//! colors of the summands; equivalently it is shift-stable. The
//! associated coloring of a generator sequence a_1..a_k sends v to
//! v_1 a_1 + ... + v_k a_k and is additive by construction.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use crate::gf::{check_partition, ExpPoly, Gf, GfTerm, SepDescription};
use crate::orthants::{
    box_points, gf_of_simple_set_weighted, gf_of_upper_ideal, minimal_elements, Antichain,
};
use crate::scalar::Cyclotomic;
use crate::semigroups::{character_sum, multi_sumset, Character, Elem, Semigroup};
use crate::{Error, Rational, Result};

/// Opaque color handle; equal handles mean equal colors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Color(pub Vec<i64>);

#[derive(Debug, Clone)]
enum Backing<G> {
    Associated { semigroup: G, gens: Vec<Elem> },
    Explicit { bound: u32, table: BTreeMap<Vec<u32>, u32>, validated: bool },
}

#[derive(Debug, Clone)]
pub struct Coloring<G> {
    k: usize,
    backing: Backing<G>,
}

const GRID_CAP: u64 = 1 << 22;

impl<G: Semigroup> Coloring<G> {
    /// chi(v) = v_1 a_1 + ... + v_k a_k. Requires a monoid so that the
    /// empty sum has a value.
    pub fn associated(semigroup: G, gens: Vec<Elem>) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::Schema("a coloring needs at least one generator".into()));
        }
        if semigroup.neutral().is_none() {
            return Err(Error::Unsupported(format!(
                "associated colorings need a neutral element, which {} lacks",
                semigroup.describe()
            )));
        }
        let gens = gens
            .iter()
            .map(|a| semigroup.canonical(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Coloring { k: gens.len(), backing: Backing::Associated { semigroup, gens } })
    }

    /// Total color table on the box [0, bound]^k. Additivity is not
    /// assumed; run the shift-stability check to promote it.
    pub fn explicit(k: usize, bound: u32, table: BTreeMap<Vec<u32>, u32>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Schema("coloring arity must be positive".into()));
        }
        let points = (bound as u64 + 1).checked_pow(k as u32);
        if points.is_none_or(|p| p > GRID_CAP) {
            return Err(Error::ResourceCap(format!(
                "explicit table over ({bound} + 1)^{k} points"
            )));
        }
        if table.len() as u64 != points.unwrap() {
            return Err(Error::Schema(format!(
                "explicit coloring must be total on its box: expected {} entries, got {}",
                points.unwrap(),
                table.len()
            )));
        }
        for v in table.keys() {
            if v.len() != k || v.iter().any(|&x| x > bound) {
                return Err(Error::Schema(format!("table key {v:?} outside the box")));
            }
        }
        Ok(Coloring { k, backing: Backing::Explicit { bound, table, validated: false } })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Box bound of an explicit coloring; None for associated ones, which
    /// are total on all of N_0^k.
    pub fn domain_bound(&self) -> Option<u32> {
        match &self.backing {
            Backing::Associated { .. } => None,
            Backing::Explicit { bound, .. } => Some(*bound),
        }
    }

    pub fn generators(&self) -> Option<&[Elem]> {
        match &self.backing {
            Backing::Associated { gens, .. } => Some(gens),
            Backing::Explicit { .. } => None,
        }
    }

    pub fn semigroup(&self) -> Option<&G> {
        match &self.backing {
            Backing::Associated { semigroup, .. } => Some(semigroup),
            Backing::Explicit { .. } => None,
        }
    }

    pub fn color(&self, v: &[u32]) -> Result<Color> {
        if v.len() != self.k {
            return Err(Error::ArityMismatch { expected: self.k, got: v.len() });
        }
        match &self.backing {
            Backing::Associated { semigroup, gens } => {
                let mut acc = semigroup.neutral().expect("checked at construction");
                for (x, a) in v.iter().zip(gens) {
                    for _ in 0..*x {
                        acc = semigroup.add(&acc, a)?;
                    }
                }
                Ok(Color(acc.0))
            }
            Backing::Explicit { bound, table, .. } => {
                if v.iter().any(|&x| x > *bound) {
                    return Err(Error::ContextMismatch(format!(
                        "point {v:?} outside the declared box [0, {bound}]^{}",
                        self.k
                    )));
                }
                let id = table.get(v).ok_or_else(|| {
                    Error::Internal(format!("total table is missing {v:?}"))
                })?;
                Ok(Color(vec![*id as i64]))
            }
        }
    }

    /// Dense color array over [0, dims_i] in box_points order.
    fn color_grid(&self, dims: &[u32]) -> Result<Vec<Color>> {
        let size: u64 = dims.iter().map(|&d| d as u64 + 1).product();
        if size > GRID_CAP {
            return Err(Error::ResourceCap(format!("color grid of {size} points")));
        }
        box_points(dims).map(|v| self.color(&v)).collect()
    }

    /// Shift-stability on the box: whenever chi(a) = chi(c), also
    /// chi(a + b) = chi(c + b), for a, c, b in [0, n]^k. Triples whose
    /// sums leave an explicit table's box are skipped. Returns the first
    /// violation (a, c, b) in scan order, or None.
    pub fn check_shift_stability(&self, n: u32) -> Result<Option<[Vec<u32>; 3]>> {
        let scan = match self.domain_bound() {
            Some(bound) => n.min(bound),
            None => n,
        };
        let value_bound = match self.domain_bound() {
            Some(bound) => bound,
            None => 2 * scan,
        };
        let dims = vec![value_bound; self.k];
        let grid = self.color_grid(&dims)?;
        let points: Vec<Vec<u32>> = box_points(&vec![scan; self.k]).collect();
        if (points.len() as u64).pow(3) > 1 << 32 {
            return Err(Error::ResourceCap(format!(
                "shift-stability scan over {} triples",
                points.len().pow(3)
            )));
        }
        let strides = grid_strides(&dims);
        let rank = |v: &[u32]| -> usize {
            v.iter().zip(&strides).map(|(&x, s)| x as u64 * s).sum::<u64>() as usize
        };
        let in_domain =
            |v: &[u32]| -> bool { v.iter().all(|&x| x <= value_bound) };
        let mut sum = vec![0u32; self.k];
        for a in &points {
            for c in &points {
                if grid[rank(a)] != grid[rank(c)] {
                    continue;
                }
                for b in &points {
                    for i in 0..self.k {
                        sum[i] = a[i] + b[i];
                    }
                    if !in_domain(&sum) {
                        continue;
                    }
                    let ab = grid[rank(&sum)].clone();
                    for i in 0..self.k {
                        sum[i] = c[i] + b[i];
                    }
                    if !in_domain(&sum) {
                        continue;
                    }
                    if ab != grid[rank(&sum)] {
                        return Ok(Some([a.clone(), c.clone(), b.clone()]));
                    }
                }
            }
        }
        Ok(None)
    }

    /// The stronger condition: chi(a) = chi(c) and chi(b) = chi(d) imply
    /// chi(a + b) = chi(c + d), scanned over [0, n]^k with out-of-domain
    /// sums skipped. Shift-stable colorings must pass this too.
    pub fn check_full_additivity(&self, n: u32) -> Result<Option<[Vec<u32>; 4]>> {
        let scan = match self.domain_bound() {
            Some(bound) => n.min(bound),
            None => n,
        };
        let value_bound = match self.domain_bound() {
            Some(bound) => bound,
            None => 2 * scan,
        };
        let dims = vec![value_bound; self.k];
        let grid = self.color_grid(&dims)?;
        let points: Vec<Vec<u32>> = box_points(&vec![scan; self.k]).collect();
        if (points.len() as u64).pow(4) > 1 << 32 {
            return Err(Error::ResourceCap(format!(
                "additivity scan over {} quadruples",
                points.len().pow(4)
            )));
        }
        let strides = grid_strides(&dims);
        let rank = |v: &[u32]| -> usize {
            v.iter().zip(&strides).map(|(&x, s)| x as u64 * s).sum::<u64>() as usize
        };
        let in_domain =
            |v: &[u32]| -> bool { v.iter().all(|&x| x <= value_bound) };
        let mut sum = vec![0u32; self.k];
        for a in &points {
            for b in &points {
                for c in &points {
                    if grid[rank(a)] != grid[rank(c)] {
                        continue;
                    }
                    for d in &points {
                        if grid[rank(b)] != grid[rank(d)] {
                            continue;
                        }
                        for i in 0..self.k {
                            sum[i] = a[i] + b[i];
                        }
                        if !in_domain(&sum) {
                            continue;
                        }
                        let ab = grid[rank(&sum)].clone();
                        for i in 0..self.k {
                            sum[i] = c[i] + d[i];
                        }
                        if !in_domain(&sum) {
                            continue;
                        }
                        if ab != grid[rank(&sum)] {
                            return Ok(Some([a.clone(), b.clone(), c.clone(), d.clone()]));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// Promotes an explicit coloring to additive status after a passing
    /// shift-stability scan; a violation is an error carrying the witness.
    pub fn validated(self, scan: Option<u32>) -> Result<Self> {
        match &self.backing {
            Backing::Associated { .. } => Ok(self),
            Backing::Explicit { bound, .. } => {
                let n = scan.unwrap_or(*bound);
                match self.check_shift_stability(n)? {
                    Some([a, c, b]) => Err(Error::NonAdditive(format!(
                        "chi(a) = chi(c) but chi(a+b) != chi(c+b) for a = {a:?}, c = {c:?}, b = {b:?}"
                    ))),
                    None => {
                        let Backing::Explicit { bound, table, .. } = self.backing else {
                            unreachable!()
                        };
                        Ok(Coloring {
                            k: self.k,
                            backing: Backing::Explicit { bound, table, validated: true },
                        })
                    }
                }
            }
        }
    }

    pub fn ensure_additive(&self) -> Result<()> {
        match &self.backing {
            Backing::Associated { .. } => Ok(()),
            Backing::Explicit { validated: true, .. } => Ok(()),
            Backing::Explicit { .. } => Err(Error::Unsupported(
                "explicit coloring must pass the shift-stability check before substantial-point operations".into(),
            )),
        }
    }

    /// Lex-minimal representative of every color on the slice
    /// {x : block sums of x = norm}. One point per color appearing there.
    pub fn substantial_points(
        &self,
        partition: &[Vec<usize>],
        norm: &[u32],
    ) -> Result<Vec<Vec<u32>>> {
        self.ensure_additive()?;
        check_partition(self.k, partition)?;
        if norm.len() != partition.len() {
            return Err(Error::ArityMismatch { expected: partition.len(), got: norm.len() });
        }
        guard_slice_size(partition, norm)?;
        let shape = SliceShape::new(self.k, partition);
        let mut first_seen: BTreeMap<Color, Vec<u32>> = BTreeMap::new();
        shape.walk(norm, &mut |x| {
            let color = self.color(x)?;
            first_seen.entry(color).or_insert_with(|| x.to_vec());
            Ok(())
        })?;
        let mut points: Vec<Vec<u32>> = first_seen.into_values().collect();
        points.sort();
        Ok(points)
    }

    /// Classifies the whole box [0, N]^k, checks that the non-substantial
    /// points are upward closed in it, and reports their minimal elements.
    pub fn substantial_upper_ideal(
        &self,
        partition: &[Vec<usize>],
        bound: u32,
    ) -> Result<SubstantialReport> {
        self.ensure_additive()?;
        check_partition(self.k, partition)?;
        let l = partition.len();
        let shape = SliceShape::new(self.k, partition);
        // Every box point lies on a slice whose block sums are at most
        // |P_j| * N; scanning those slices in full classifies the box.
        let norm_dims: Vec<u32> =
            partition.iter().map(|b| b.len() as u32 * bound).collect();
        let slice_count: u64 = norm_dims.iter().map(|&d| d as u64 + 1).product();
        if slice_count > 1 << 20 {
            return Err(Error::ResourceCap(format!("{slice_count} slices to classify")));
        }
        let mut total_size: u128 = 0;
        for norm in box_points(&norm_dims) {
            total_size += slice_size(partition, &norm);
            if total_size > GRID_CAP as u128 {
                return Err(Error::ResourceCap(format!(
                    "slice classification over more than {GRID_CAP} points"
                )));
            }
        }
        let mut substantial: BTreeSet<Vec<u32>> = BTreeSet::new();
        let mut non_substantial: BTreeSet<Vec<u32>> = BTreeSet::new();
        let _ = l;
        for norm in box_points(&norm_dims) {
            let mut first_seen: BTreeMap<Color, Vec<u32>> = BTreeMap::new();
            let mut boxed: Vec<(Vec<u32>, Color)> = Vec::new();
            shape.walk(&norm, &mut |x| {
                let color = self.color(x)?;
                if x.iter().all(|&v| v <= bound) {
                    boxed.push((x.to_vec(), color.clone()));
                }
                first_seen.entry(color).or_insert_with(|| x.to_vec());
                Ok(())
            })?;
            for (x, color) in boxed {
                if first_seen[&color] == x {
                    substantial.insert(x);
                } else {
                    non_substantial.insert(x);
                }
            }
        }
        // Upward closure inside the box; a violation means the coloring
        // is not actually additive.
        for v in &non_substantial {
            for i in 0..self.k {
                let mut w = v.clone();
                w[i] += 1;
                if w[i] <= bound && substantial.contains(&w) {
                    return Err(Error::Internal(format!(
                        "non-substantial points are not upward closed: {v:?} is below {w:?}"
                    )));
                }
            }
        }
        let (antichain, closed) =
            minimal_elements(self.k, bound, |x| Ok(non_substantial.contains(x)))?;
        Ok(SubstantialReport {
            bound,
            substantial: substantial.into_iter().collect(),
            minimal_non_substantial: antichain,
            closed,
        })
    }
}

fn grid_strides(dims: &[u32]) -> Vec<u64> {
    let k = dims.len();
    let mut strides = vec![1u64; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * (dims[i + 1] as u64 + 1);
    }
    strides
}

/// Per-block coordinate sums.
pub fn block_norm(v: &[u32], partition: &[Vec<usize>]) -> Result<Vec<u32>> {
    check_partition(v.len(), partition)?;
    Ok(partition
        .iter()
        .map(|block| block.iter().map(|&i| v[i]).sum())
        .collect())
}

/// Walks a slice {x : block sums = norm} in lex order.
struct SliceShape {
    block_of: Vec<usize>,
    last_in_block: Vec<bool>,
}

impl SliceShape {
    fn new(k: usize, partition: &[Vec<usize>]) -> SliceShape {
        let mut block_of = vec![0usize; k];
        let mut last = vec![0usize; partition.len()];
        for (j, block) in partition.iter().enumerate() {
            for &i in block {
                block_of[i] = j;
            }
            last[j] = *block.iter().max().expect("blocks are nonempty");
        }
        let last_in_block = (0..k).map(|i| last[block_of[i]] == i).collect();
        SliceShape { block_of, last_in_block }
    }

    fn walk(&self, norm: &[u32], f: &mut impl FnMut(&[u32]) -> Result<()>) -> Result<()> {
        let mut rem = norm.to_vec();
        let mut buf = Vec::with_capacity(self.block_of.len());
        self.rec(0, &mut rem, &mut buf, f)
    }

    fn rec(
        &self,
        i: usize,
        rem: &mut Vec<u32>,
        buf: &mut Vec<u32>,
        f: &mut impl FnMut(&[u32]) -> Result<()>,
    ) -> Result<()> {
        if i == self.block_of.len() {
            return f(buf);
        }
        let j = self.block_of[i];
        if self.last_in_block[i] {
            let v = rem[j];
            buf.push(v);
            rem[j] = 0;
            self.rec(i + 1, rem, buf, f)?;
            rem[j] = v;
            buf.pop();
        } else {
            for v in 0..=rem[j] {
                buf.push(v);
                rem[j] -= v;
                self.rec(i + 1, rem, buf, f)?;
                rem[j] += v;
                buf.pop();
            }
        }
        Ok(())
    }
}

fn binom_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j as u128 + 1);
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}

fn slice_size(partition: &[Vec<usize>], norm: &[u32]) -> u128 {
    partition
        .iter()
        .zip(norm)
        .map(|(block, &n)| binom_u128(n as u64 + block.len() as u64 - 1, block.len() as u64 - 1))
        .product()
}

fn guard_slice_size(partition: &[Vec<usize>], norm: &[u32]) -> Result<()> {
    if slice_size(partition, norm) > GRID_CAP as u128 {
        return Err(Error::ResourceCap(format!(
            "slice of norm {norm:?} has too many points"
        )));
    }
    Ok(())
}

/// Classification of a box: the substantial points, the minimal
/// non-substantial elements, and whether the antichain explains the whole
/// box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstantialReport {
    pub bound: u32,
    pub substantial: Vec<Vec<u32>>,
    pub minimal_non_substantial: Antichain,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineOutcome {
    Completed,
    /// Carries the reason; partial data stays in the report.
    Inconclusive(String),
}

struct Stabilization {
    boxes: Vec<u32>,
    report: SubstantialReport,
    stable: bool,
    note: Option<String>,
}

/// Grows the classification box by 2 until the minimal non-substantial
/// antichain is unchanged across two consecutive enlargements and the
/// last box is fully explained by it.
fn stabilize<G: Semigroup>(
    coloring: &Coloring<G>,
    partition: &[Vec<usize>],
    box_limit: u32,
) -> Result<Stabilization> {
    let mut boxes: Vec<u32> = Vec::new();
    let mut history: Vec<SubstantialReport> = Vec::new();
    let mut n = 2u32.min(box_limit);
    loop {
        match coloring.substantial_upper_ideal(partition, n) {
            Ok(report) => {
                boxes.push(n);
                history.push(report);
            }
            Err(Error::ResourceCap(msg)) if !history.is_empty() => {
                return Ok(Stabilization {
                    boxes,
                    report: history.pop().unwrap(),
                    stable: false,
                    note: Some(format!("box {n} exceeds resource caps: {msg}")),
                });
            }
            Err(e) => return Err(e),
        }
        if history.len() >= 3 {
            let h = &history[history.len() - 3..];
            if h[0].minimal_non_substantial == h[1].minimal_non_substantial
                && h[1].minimal_non_substantial == h[2].minimal_non_substantial
                && h[2].closed
            {
                return Ok(Stabilization {
                    boxes,
                    report: history.pop().unwrap(),
                    stable: true,
                    note: None,
                });
            }
        }
        if n >= box_limit {
            return Ok(Stabilization {
                boxes,
                report: history.pop().unwrap(),
                stable: false,
                note: Some(format!(
                    "minimal non-substantial antichain did not stabilize within box limit {box_limit}"
                )),
            });
        }
        n = (n + 2).min(box_limit);
    }
}

#[derive(Debug, Clone)]
pub struct SumsetSepReport {
    pub outcome: PipelineOutcome,
    pub semigroup: String,
    /// Total coordinates k = |A_1| + ... + |A_l|, kept with multiplicity.
    pub coordinates: usize,
    pub partition: Vec<Vec<usize>>,
    pub boxes: Vec<u32>,
    pub minimal_non_substantial: Antichain,
    pub closed: bool,
    pub sep: Option<SepDescription>,
    /// All table polynomials have integer coefficients.
    pub integral: bool,
    pub verified_grid: u32,
}

/// |n_1*A_1 + ... + n_l*A_l| as a word-indexed polynomial table, produced
/// through the associated coloring, verified against direct enumeration
/// on [0, grid]^l.
pub fn sumset_growth_sep<G: Semigroup + Clone>(
    g: &G,
    sets: &[Vec<Elem>],
    box_limit: u32,
    grid: u32,
) -> Result<SumsetSepReport> {
    let (coloring, partition) = sumset_coloring(g, sets)?;
    let k = coloring.k();
    let stab = stabilize(&coloring, &partition, box_limit)?;
    if !stab.stable {
        return Ok(SumsetSepReport {
            outcome: PipelineOutcome::Inconclusive(
                stab.note.unwrap_or_else(|| "stabilization failed".into()),
            ),
            semigroup: g.describe(),
            coordinates: k,
            partition,
            boxes: stab.boxes,
            minimal_non_substantial: stab.report.minimal_non_substantial,
            closed: stab.report.closed,
            sep: None,
            integral: true,
            verified_grid: 0,
        });
    }
    let antichain = stab.report.minimal_non_substantial;
    // F_substantial = 1/prod(1 - x_i) - F_ideal.
    let full: Gf<Rational> = Gf::new(
        k,
        vec![GfTerm::plain(Rational::one(), vec![0; k], vec![1; k])],
    )?;
    let ideal = gf_of_upper_ideal(&antichain)?;
    let f_s = full.add(&ideal.scalar_mul(&-Rational::one())?)?;
    let sep = f_s.p_substitution(&partition)?.extract_sep()?;
    let set_views: Vec<BTreeSet<Elem>> =
        sets.iter().map(|a| a.iter().cloned().collect()).collect();
    for n in box_points(&vec![grid; sets.len()]) {
        let direct = multi_sumset(g, &set_views, &n)?.len();
        let table = sep.eval(&n)?;
        if table != Rational::from_integer((direct as i64).into()) {
            return Err(Error::Internal(format!(
                "table value {table} disagrees with enumerated size {direct} at {n:?}"
            )));
        }
    }
    let integral = sep.table().values().all(|e| e.poly.is_integral());
    Ok(SumsetSepReport {
        outcome: PipelineOutcome::Completed,
        semigroup: g.describe(),
        coordinates: k,
        partition,
        boxes: stab.boxes,
        minimal_non_substantial: antichain,
        closed: true,
        sep: Some(sep),
        integral,
        verified_grid: grid,
    })
}

#[derive(Debug, Clone)]
pub struct CharacterSumReport {
    pub outcome: PipelineOutcome,
    pub semigroup: String,
    pub coordinates: usize,
    pub partition: Vec<Vec<usize>>,
    pub boxes: Vec<u32>,
    pub minimal_non_substantial: Antichain,
    pub closed: bool,
    pub exp_poly: Option<ExpPoly<Cyclotomic>>,
    pub verified_grid: u32,
}

/// Character sum over n_1*A_1 + ... + n_l*A_l as an exponential
/// polynomial: the substantial set is decomposed into orthants, each
/// weighted by psi at its base and twisted by psi of the generators.
pub fn character_sumset_exp_poly<G: Semigroup + Clone>(
    g: &G,
    sets: &[Vec<Elem>],
    psi: &Character,
    box_limit: u32,
    grid: u32,
) -> Result<CharacterSumReport> {
    let (coloring, partition) = sumset_coloring(g, sets)?;
    let k = coloring.k();
    let gens: Vec<Elem> = coloring.generators().expect("associated").to_vec();
    // Multiplicativity of psi, exhaustive on finite instances and on a
    // deterministic closure sample otherwise.
    let mut base: Vec<Elem> = gens.clone();
    for a in &gens {
        for b in &gens {
            base.push(g.add(a, b)?);
        }
    }
    let mut pairs = Vec::new();
    for a in &base {
        for b in &base {
            pairs.push((a.clone(), b.clone()));
        }
    }
    if let Some((a, b)) = psi.validate(g, &pairs)? {
        return Err(Error::Schema(format!(
            "not a character: psi(a+b) != psi(a) psi(b) at a = {a}, b = {b}"
        )));
    }
    let stab = stabilize(&coloring, &partition, box_limit)?;
    if !stab.stable {
        return Ok(CharacterSumReport {
            outcome: PipelineOutcome::Inconclusive(
                stab.note.unwrap_or_else(|| "stabilization failed".into()),
            ),
            semigroup: g.describe(),
            coordinates: k,
            partition,
            boxes: stab.boxes,
            minimal_non_substantial: stab.report.minimal_non_substantial,
            closed: stab.report.closed,
            exp_poly: None,
            verified_grid: 0,
        });
    }
    let antichain = stab.report.minimal_non_substantial;
    let substantial_set = antichain.upper_set().complement()?;
    let twists = gens
        .iter()
        .map(|a| psi.eval(g, a))
        .collect::<Result<Vec<Cyclotomic>>>()?;
    let weighted = gf_of_simple_set_weighted(&substantial_set, &twists, |s| {
        let color = coloring.color(s)?;
        psi.eval(g, &Elem(color.0))
    })?;
    let ep = weighted.p_substitution(&partition)?.extract_exp_poly()?;
    // Functional form: each summand's root in block j must be psi of a
    // generator of A_j.
    for (t, _) in ep.summands() {
        for (j, &tj) in t.iter().enumerate() {
            let root = Cyclotomic::root_of_unity(ep.order(), tj);
            let ok = partition[j]
                .iter()
                .any(|&i| twists[i] == root);
            if !ok {
                return Err(Error::Internal(format!(
                    "summand root {root} in block {j} is not a generator character value"
                )));
            }
        }
    }
    let set_views: Vec<BTreeSet<Elem>> =
        sets.iter().map(|a| a.iter().cloned().collect()).collect();
    for n in box_points(&vec![grid; sets.len()]) {
        if n.iter().any(|&v| v <= ep.threshold()) {
            continue;
        }
        let s = multi_sumset(g, &set_views, &n)?;
        let direct = character_sum(g, &s, psi)?;
        let value = ep.eval(&n)?;
        if value != direct {
            return Err(Error::Internal(format!(
                "exponential polynomial gives {value} but the direct sum is {direct} at {n:?}"
            )));
        }
    }
    Ok(CharacterSumReport {
        outcome: PipelineOutcome::Completed,
        semigroup: g.describe(),
        coordinates: k,
        partition,
        boxes: stab.boxes,
        minimal_non_substantial: antichain,
        closed: true,
        exp_poly: Some(ep),
        verified_grid: grid,
    })
}

/// Associated coloring on one coordinate per set element (multiplicities
/// kept), with the partition induced by set membership.
fn sumset_coloring<G: Semigroup + Clone>(
    g: &G,
    sets: &[Vec<Elem>],
) -> Result<(Coloring<G>, Vec<Vec<usize>>)> {
    if sets.is_empty() {
        return Err(Error::Schema("at least one generating set is required".into()));
    }
    let mut gens = Vec::new();
    let mut partition = Vec::new();
    for a in sets {
        if a.is_empty() {
            return Err(Error::Schema("generating sets must be nonempty".into()));
        }
        let start = gens.len();
        gens.extend(a.iter().cloned());
        partition.push((start..gens.len()).collect());
    }
    Ok((Coloring::associated(g.clone(), gens)?, partition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational_from_i64 as q;
    use crate::semigroups::{ModAdd, ZdAdd};

    fn z() -> ZdAdd {
        ZdAdd { d: 1 }
    }

    fn assoc(gens: &[i64]) -> Coloring<ZdAdd> {
        Coloring::associated(z(), gens.iter().map(|&v| Elem::scalar(v)).collect()).unwrap()
    }

    #[test]
    fn associated_color_formula() {
        let chi = assoc(&[1, 2]);
        assert_eq!(chi.color(&[3, 1]).unwrap(), Color(vec![5]));
        assert_eq!(chi.color(&[0, 0]).unwrap(), Color(vec![0]));
        assert!(chi.color(&[1]).is_err());
    }

    #[test]
    fn associated_color_matches_modular_table() {
        let g = ModAdd { m: 4 };
        let chi = Coloring::associated(
            g.clone(),
            vec![Elem::scalar(1), Elem::scalar(3)],
        )
        .unwrap();
        for v in box_points(&[5, 5]) {
            let want = ((v[0] as i64 + 3 * v[1] as i64) % 4 + 4) % 4;
            assert_eq!(chi.color(&v).unwrap(), Color(vec![want]), "at {v:?}");
        }
    }

    #[test]
    fn explicit_coloring_box_discipline() {
        let table: BTreeMap<Vec<u32>, u32> =
            (0..=3u32).map(|v| (vec![v], v % 2)).collect();
        let chi: Coloring<ZdAdd> = Coloring::explicit(1, 3, table).unwrap();
        assert_eq!(chi.color(&[2]).unwrap(), Color(vec![0]));
        assert!(matches!(chi.color(&[4]), Err(Error::ContextMismatch(_))));
        // Totality is enforced.
        let partial: BTreeMap<Vec<u32>, u32> = [(vec![0u32], 0)].into_iter().collect();
        assert!(Coloring::<ZdAdd>::explicit(1, 3, partial).is_err());
    }

    #[test]
    fn shift_stability_scan() {
        // Injective coloring: trivially stable.
        let chi = assoc(&[1]);
        assert_eq!(chi.check_shift_stability(6).unwrap(), None);
        // Parity is stable.
        let parity: BTreeMap<Vec<u32>, u32> =
            (0..=8u32).map(|v| (vec![v], v % 2)).collect();
        let chi: Coloring<ZdAdd> = Coloring::explicit(1, 8, parity).unwrap();
        assert_eq!(chi.check_shift_stability(8).unwrap(), None);
        assert!(chi.validated(None).is_ok());
        // A, B, A, A on [0, 3]: the first witness in scan order.
        let table: BTreeMap<Vec<u32>, u32> =
            [(vec![0u32], 0), (vec![1], 1), (vec![2], 0), (vec![3], 0)]
                .into_iter()
                .collect();
        let chi: Coloring<ZdAdd> = Coloring::explicit(1, 3, table).unwrap();
        assert_eq!(
            chi.check_shift_stability(3).unwrap(),
            Some([vec![0], vec![2], vec![1]])
        );
        assert!(matches!(
            chi.validated(None),
            Err(Error::NonAdditive(_))
        ));
    }

    #[test]
    fn shift_stable_colorings_are_fully_additive() {
        let parity2: BTreeMap<Vec<u32>, u32> = box_points(&[6, 6])
            .map(|v| {
                let c = (v[0] + 2 * v[1]) % 4;
                (v, c)
            })
            .collect();
        let chi: Coloring<ZdAdd> = Coloring::explicit(2, 6, parity2).unwrap();
        assert_eq!(chi.check_shift_stability(3).unwrap(), None);
        assert_eq!(chi.check_full_additivity(3).unwrap(), None);
    }

    #[test]
    fn block_norm_examples() {
        assert_eq!(block_norm(&[2, 5], &[vec![0], vec![1]]).unwrap(), vec![2, 5]);
        assert_eq!(block_norm(&[2, 5, 1], &[vec![0, 1, 2]]).unwrap(), vec![8]);
        assert_eq!(
            block_norm(&[2, 5, 1], &[vec![0, 2], vec![1]]).unwrap(),
            vec![3, 5]
        );
    }

    #[test]
    fn substantial_points_per_slice() {
        // chi(v) = v1 + v2: one color per slice, lex-min is (0, n).
        let chi = assoc(&[1, 1]);
        for n in 0..6u32 {
            assert_eq!(
                chi.substantial_points(&[vec![0, 1]], &[n]).unwrap(),
                vec![vec![0, n]]
            );
        }
        // Injective coloring: every slice point is substantial.
        let chi2 = Coloring::associated(
            ZdAdd { d: 2 },
            vec![Elem(vec![1, 0]), Elem(vec![0, 1])],
        )
        .unwrap();
        let pts = chi2.substantial_points(&[vec![0, 1]], &[4]).unwrap();
        assert_eq!(pts.len(), 5);
        // chi(v) = v1 + 2 v2: all n + 1 colors on the slice are distinct.
        let chi3 = assoc(&[1, 2]);
        for n in 0..6u32 {
            let pts = chi3.substantial_points(&[vec![0, 1]], &[n]).unwrap();
            assert_eq!(pts.len(), n as usize + 1);
        }
    }

    #[test]
    fn substantial_count_equals_color_count() {
        let chi = assoc(&[0, 2, 3]);
        let p = vec![vec![0, 1, 2]];
        for n in 0..=8u32 {
            let subs = chi.substantial_points(&p, &[n]).unwrap();
            let mut colors = BTreeSet::new();
            SliceShape::new(3, &p)
                .walk(&[n], &mut |x| {
                    colors.insert(chi.color(x).unwrap());
                    Ok(())
                })
                .unwrap();
            assert_eq!(subs.len(), colors.len(), "slice {n}");
        }
    }

    #[test]
    fn upper_ideal_of_collapsing_coloring() {
        let chi = assoc(&[1, 1]);
        let report = chi.substantial_upper_ideal(&[vec![0, 1]], 6).unwrap();
        assert_eq!(report.minimal_non_substantial.points(), &[vec![1, 0]]);
        assert!(report.closed);
        // Injective: nothing is non-substantial.
        let chi2 = assoc(&[1]);
        let report = chi2.substantial_upper_ideal(&[vec![0]], 6).unwrap();
        assert!(report.minimal_non_substantial.is_empty());
        assert!(report.closed);
        assert_eq!(report.substantial.len(), 7);
    }

    #[test]
    fn upper_ideal_of_twofold_generators() {
        // Generators (0, 2, 3) with one block: a point is redundant
        // exactly when it can shed (1, 0, 2) for (0, 3, 0).
        let chi = assoc(&[0, 2, 3]);
        let report = chi.substantial_upper_ideal(&[vec![0, 1, 2]], 4).unwrap();
        assert_eq!(report.minimal_non_substantial.points(), &[vec![1, 0, 2]]);
        assert!(report.closed);
    }

    #[test]
    fn sumset_pipeline_single_set() {
        let sets = vec![vec![Elem::scalar(0), Elem::scalar(1)]];
        let report = sumset_growth_sep(&z(), &sets, 12, 8).unwrap();
        assert_eq!(report.outcome, PipelineOutcome::Completed);
        let sep = report.sep.unwrap();
        assert_eq!(sep.c(), 0);
        for n in 0..=15u32 {
            assert_eq!(sep.eval(&[n]).unwrap(), q(n as i64 + 1));
        }
        assert!(report.integral);
    }

    #[test]
    fn sumset_pipeline_gapped_set() {
        let sets = vec![vec![Elem::scalar(0), Elem::scalar(2), Elem::scalar(3)]];
        let report = sumset_growth_sep(&z(), &sets, 12, 8).unwrap();
        assert_eq!(report.outcome, PipelineOutcome::Completed);
        assert_eq!(
            report.minimal_non_substantial.points(),
            &[vec![1, 0, 2]]
        );
        let sep = report.sep.unwrap();
        let expect = [1i64, 3, 6, 9, 12, 15, 18];
        for (n, want) in expect.iter().enumerate() {
            assert_eq!(sep.eval(&[n as u32]).unwrap(), q(*want), "n = {n}");
        }
    }

    #[test]
    fn sumset_pipeline_inconclusive_when_boxes_too_small() {
        let sets = vec![vec![Elem::scalar(0), Elem::scalar(2), Elem::scalar(3)]];
        let report = sumset_growth_sep(&z(), &sets, 3, 6).unwrap();
        assert!(matches!(report.outcome, PipelineOutcome::Inconclusive(_)));
        assert!(report.sep.is_none());
    }

    #[test]
    fn character_pipeline_alternating_sign() {
        let sets = vec![vec![Elem::scalar(0), Elem::scalar(1)]];
        let psi = Character::Linear { order: 2, coeffs: vec![1] };
        let report = character_sumset_exp_poly(&z(), &sets, &psi, 12, 12).unwrap();
        assert_eq!(report.outcome, PipelineOutcome::Completed);
        let ep = report.exp_poly.unwrap();
        assert_eq!(ep.order(), 2);
        for n in 1..=12u32 {
            let want = if n % 2 == 0 { q(1) } else { q(0) };
            assert_eq!(
                ep.eval(&[n]).unwrap(),
                Cyclotomic::from_rational_in(1, want),
                "n = {n}"
            );
        }
    }

    #[test]
    fn character_pipeline_cyclic_rotation() {
        let g = ModAdd { m: 3 };
        let sets = vec![vec![Elem::scalar(1)]];
        let psi = Character::Linear { order: 3, coeffs: vec![1] };
        let report = character_sumset_exp_poly(&g, &sets, &psi, 12, 12).unwrap();
        assert_eq!(report.outcome, PipelineOutcome::Completed);
        let ep = report.exp_poly.unwrap();
        assert_eq!(ep.order(), 3);
        for n in 1..=12u32 {
            assert_eq!(
                ep.eval(&[n]).unwrap(),
                Cyclotomic::root_of_unity(3, n as u64 % 3),
                "n = {n}"
            );
        }
    }

    #[test]
    fn character_pipeline_rejects_non_characters() {
        let g = ModAdd { m: 3 };
        let sets = vec![vec![Elem::scalar(1)]];
        let bad = Character::Linear { order: 2, coeffs: vec![1] };
        assert!(matches!(
            character_sumset_exp_poly(&g, &sets, &bad, 8, 8),
            Err(Error::Schema(_))
        ));
    }
}
