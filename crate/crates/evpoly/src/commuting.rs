//! Families of commuting maps on a finite ground set: exact iterated
//! images over a block-partitioned exponent grid, the square-dimension
//! coloring that encodes them, and the fitted table form of the image
//! sizes.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use crate::colorings::PipelineOutcome;
use crate::fitting;
use crate::gf::{check_partition, Gf, GfTerm, SepDescription};
use crate::orthants::{gf_of_upper_ideal, minimal_elements, Antichain, Orthant};
use crate::scalar::rational_from_i64;
use crate::{Error, Rational, Result};

const ROUND_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapFamily {
    size: usize,
    maps: Vec<Vec<usize>>,
    partition: Vec<Vec<usize>>,
}

impl MapFamily {
    pub fn new(
        size: usize,
        maps: Vec<Vec<usize>>,
        partition: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::Schema("ground set must be nonempty".into()));
        }
        if maps.is_empty() {
            return Err(Error::Schema("at least one map is required".into()));
        }
        for (i, f) in maps.iter().enumerate() {
            if f.len() != size {
                return Err(Error::Schema(format!(
                    "map {i} has {} entries for a ground set of {size}",
                    f.len()
                )));
            }
            if let Some(&y) = f.iter().find(|&&y| y >= size) {
                return Err(Error::Schema(format!(
                    "map {i} sends a point to {y}, outside the ground set"
                )));
            }
        }
        check_partition(maps.len(), &partition)?;
        Ok(MapFamily { size, maps, partition })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    pub fn partition(&self) -> &[Vec<usize>] {
        &self.partition
    }

    pub fn blocks(&self) -> usize {
        self.partition.len()
    }

    /// First (i, j, x) with f_i(f_j(x)) != f_j(f_i(x)), scan order.
    pub fn validate_commuting(&self) -> Option<(usize, usize, usize)> {
        for i in 0..self.maps.len() {
            for j in i + 1..self.maps.len() {
                for x in 0..self.size {
                    if self.maps[i][self.maps[j][x]] != self.maps[j][self.maps[i][x]] {
                        return Some((i, j, x));
                    }
                }
            }
        }
        None
    }

    pub fn ensure_commuting(&self) -> Result<()> {
        match self.validate_commuting() {
            Some((f, g, x)) => Err(Error::NonCommuting { f, g, x }),
            None => Ok(()),
        }
    }

    /// Union of images of B under all compositions using exactly n_r
    /// applications from block r. By commutativity a whole block is one
    /// operator applied n_r times, so this is a round-based sweep.
    pub fn iterated_image(&self, b: &[usize], n: &[u32]) -> Result<Vec<usize>> {
        self.ensure_commuting()?;
        if n.len() != self.blocks() {
            return Err(Error::ArityMismatch { expected: self.blocks(), got: n.len() });
        }
        if let Some(&x) = b.iter().find(|&&x| x >= self.size) {
            return Err(Error::Schema(format!("{x} is outside the ground set")));
        }
        let rounds: u64 = n.iter().map(|&v| v as u64).sum();
        if rounds * self.size as u64 > ROUND_CAP {
            return Err(Error::ResourceCap(format!(
                "{rounds} application rounds over {} points",
                self.size
            )));
        }
        let mut cur = vec![false; self.size];
        for &x in b {
            cur[x] = true;
        }
        for (block, &reps) in self.partition.iter().zip(n) {
            for _ in 0..reps {
                let mut next = vec![false; self.size];
                for (x, _) in cur.iter().enumerate().filter(|(_, &v)| v) {
                    for &j in block {
                        next[self.maps[j][x]] = true;
                    }
                }
                cur = next;
            }
        }
        Ok(cur
            .iter()
            .enumerate()
            .filter_map(|(x, &v)| v.then_some(x))
            .collect())
    }
}

/// The proof object behind the table form of image sizes: k maps and k
/// base points give a partial coloring of N_0^{k*k} whose colored points
/// split into one generalized orthant per base point, with column j of
/// the coordinate square driven by map j.
#[derive(Debug, Clone)]
pub struct EncodedColoring {
    k: usize,
    size: usize,
    maps: Vec<Vec<usize>>,
    b: Vec<usize>,
    /// Partition of the padded maps; blocks of the original partition,
    /// with padded copies joining the block of the map they repeat.
    partition: Vec<Vec<usize>>,
    induced: Vec<Vec<usize>>,
    orthants: Vec<Orthant>,
}

impl EncodedColoring {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.k * self.k
    }

    pub fn ground_size(&self) -> usize {
        self.size
    }

    pub fn induced_partition(&self) -> &[Vec<usize>] {
        &self.induced
    }

    /// One generalized orthant per base point: row i at least one
    /// everywhere, every other row frozen at zero.
    pub fn colored_blocks(&self) -> &[Orthant] {
        &self.orthants
    }

    /// Color of a point, None when uncolored. A point of block i with
    /// row entries z gets the image of b_i under each map j applied
    /// z_j - 1 times.
    pub fn color(&self, x: &[u32]) -> Result<Option<usize>> {
        let k = self.k;
        if x.len() != k * k {
            return Err(Error::ArityMismatch { expected: k * k, got: x.len() });
        }
        let mut row = None;
        for i in 0..k {
            let occupied = (0..k).any(|j| x[i * k + j] > 0);
            if occupied {
                if row.is_some() {
                    return Ok(None);
                }
                row = Some(i);
            }
        }
        let Some(i) = row else { return Ok(None) };
        if (0..k).any(|j| x[i * k + j] == 0) {
            return Ok(None);
        }
        let z: Vec<u32> = (0..k).map(|j| x[i * k + j]).collect();
        Ok(Some(self.color_of_row(i, &z)))
    }

    fn color_of_row(&self, i: usize, z: &[u32]) -> usize {
        let mut y = self.b[i];
        for (j, &zj) in z.iter().enumerate() {
            for _ in 1..zj {
                y = self.maps[j][y];
            }
        }
        y
    }

    /// Colored points of the slice with the given block norms, as
    /// (flat point, color), ascending by point.
    fn colored_slice(&self, norm: &[u32]) -> Vec<(Vec<u32>, usize)> {
        let k = self.k;
        // Exponents per block, each entry at least 1.
        let mut choices: Vec<Vec<Vec<u32>>> = Vec::new();
        for (block, &n) in self.partition.iter().zip(norm) {
            choices.push(compositions_min_one(n, block.len()));
        }
        let mut out = Vec::new();
        let mut pick = vec![0usize; choices.len()];
        if choices.iter().any(|c| c.is_empty()) {
            return out;
        }
        loop {
            let mut z = vec![0u32; k];
            for (r, block) in self.partition.iter().enumerate() {
                for (t, &j) in block.iter().enumerate() {
                    z[j] = choices[r][pick[r]][t];
                }
            }
            for i in 0..k {
                let mut x = vec![0u32; k * k];
                for (j, &zj) in z.iter().enumerate() {
                    x[i * k + j] = zj;
                }
                let color = self.color_of_row(i, &z);
                out.push((x, color));
            }
            // Odometer over the per-block composition choices.
            let mut r = 0;
            loop {
                if r == pick.len() {
                    out.sort();
                    return out;
                }
                pick[r] += 1;
                if pick[r] < choices[r].len() {
                    break;
                }
                pick[r] = 0;
                r += 1;
            }
        }
    }

    /// Block-wise minimum norms below which no colored point exists.
    fn norm_offsets(&self) -> Vec<u32> {
        self.partition.iter().map(|b| b.len() as u32).collect()
    }
}

fn compositions_min_one(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if (total as usize) < parts {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    fn rec(rem: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 1..=rem + 1 - left as u32 {
            cur.push(v);
            rec(rem - v, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(total, parts, &mut cur, &mut out);
    out
}

/// Builds the encoding for the family and base points, padding maps or
/// points by repetition until there are k of each, and verifies both the
/// key transport property and the slice identity against direct images.
pub fn encode_as_coloring(family: &MapFamily, b: &[usize]) -> Result<EncodedColoring> {
    family.ensure_commuting()?;
    if b.is_empty() {
        return Err(Error::Schema("at least one base point is required".into()));
    }
    if let Some(&x) = b.iter().find(|&&x| x >= family.size) {
        return Err(Error::Schema(format!("{x} is outside the ground set")));
    }
    let mut b: Vec<usize> = b.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut maps = family.maps.to_vec();
    let mut partition = family.partition.to_vec();
    let k = maps.len().max(b.len());
    while maps.len() < k {
        let last = maps.len() - 1;
        maps.push(maps[last].clone());
        let home = partition.iter_mut().find(|blk| blk.contains(&last)).unwrap();
        home.push(last + 1);
    }
    while b.len() < k {
        b.push(*b.last().unwrap());
    }
    let induced = partition
        .iter()
        .map(|block| {
            let mut coords: Vec<usize> = (0..k)
                .flat_map(|i| block.iter().map(move |&j| i * k + j))
                .collect();
            coords.sort();
            coords
        })
        .collect();
    let orthants = (0..k)
        .map(|i| {
            let mut base = vec![0u32; k * k];
            let mut frozen = BTreeSet::new();
            for c in 0..k * k {
                if c / k == i {
                    base[c] = 1;
                } else {
                    frozen.insert(c);
                }
            }
            Orthant::new(base, frozen)
        })
        .collect::<Result<Vec<_>>>()?;
    let enc = EncodedColoring { k, size: family.size, maps, b, partition, induced, orthants };
    check_key_property(&enc)?;
    check_slice_identity(&enc, family)?;
    Ok(enc)
}

/// Transport property: if x <= y sit in block i and x' is any colored
/// point of the same color as x, then adding y - x to the row of x'
/// recolors it the same way as y.
fn check_key_property(enc: &EncodedColoring) -> Result<()> {
    let k = enc.k;
    let bound = if k <= 2 { 4 } else { 2 };
    let mut colored: Vec<(usize, Vec<u32>, usize)> = Vec::new();
    let mut grid = vec![vec![1u32; k]];
    for j in 0..k {
        grid = grid
            .iter()
            .flat_map(|z| {
                (1..=bound).map(move |v| {
                    let mut z = z.clone();
                    z[j] = v;
                    z
                })
            })
            .collect();
    }
    grid.sort();
    grid.dedup();
    for i in 0..k {
        for z in &grid {
            colored.push((i, z.clone(), enc.color_of_row(i, z)));
        }
    }
    for (i, z, color) in &colored {
        for (i2, w, _) in &colored {
            if i2 != i || z.iter().zip(w).any(|(a, b)| a > b) {
                continue;
            }
            let wanted = enc.color_of_row(*i, w);
            for (j, z2, color2) in &colored {
                if color2 != color {
                    continue;
                }
                let moved: Vec<u32> =
                    z2.iter().zip(w.iter().zip(z)).map(|(a, (b, c))| a + b - c).collect();
                let got = enc.color_of_row(*j, &moved);
                if got != wanted {
                    return Err(Error::Internal(format!(
                        "transport property fails: block {i} rows {z:?} -> {w:?} \
                         against block {j} row {z2:?} recolors {got}, expected {wanted}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// On every slice the colored colors are exactly the direct image of the
/// base points at the norm shifted down by one application per map.
fn check_slice_identity(enc: &EncodedColoring, family: &MapFamily) -> Result<()> {
    let offsets = enc.norm_offsets();
    let l = offsets.len();
    let grid = 6u32;
    let mut norm = vec![0u32; l];
    loop {
        let colors: BTreeSet<usize> =
            enc.colored_slice(&norm).into_iter().map(|(_, c)| c).collect();
        let expected: BTreeSet<usize> =
            if norm.iter().zip(&offsets).all(|(&n, &o)| n >= o) {
                let shifted: Vec<u32> =
                    norm.iter().zip(&offsets).map(|(&n, &o)| n - o).collect();
                family.iterated_image(&enc.b, &shifted)?.into_iter().collect()
            } else {
                BTreeSet::new()
            };
        if colors != expected {
            return Err(Error::Internal(format!(
                "slice {norm:?} carries colors {colors:?}, expected {expected:?}"
            )));
        }
        let mut r = 0;
        loop {
            if r == l {
                return Ok(());
            }
            norm[r] += 1;
            if norm[r] <= grid {
                break;
            }
            norm[r] = 0;
            r += 1;
        }
    }
}

/// Search controls for the table form of image sizes.
#[derive(Debug, Clone)]
pub struct SepSearch {
    pub degree: u32,
    pub c_limit: u32,
    /// Verification grid: every point of [0, grid]^l is compared against
    /// the direct image.
    pub grid: u32,
    /// The encoding route runs only when the padded square dimension
    /// k*k stays within this cap.
    pub structural_dimension_cap: usize,
    /// Box limit for stabilizing the encoding's redundancy structure.
    pub box_limit: u32,
}

impl Default for SepSearch {
    fn default() -> Self {
        SepSearch {
            degree: 1,
            c_limit: 12,
            grid: 12,
            structural_dimension_cap: 4,
            box_limit: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImageSepReport {
    pub outcome: PipelineOutcome,
    pub blocks: usize,
    pub sep: Option<SepDescription>,
    pub verified_grid: u32,
    /// Whether the encoding route also ran and agreed.
    pub structural_checked: bool,
}

/// Image sizes as a word-indexed polynomial table, fitted from direct
/// evaluations. Where the padded dimension allows, the encoding route
/// (orthant series, substitution, extraction) is run as an independent
/// derivation and compared.
pub fn iterated_image_sep(
    family: &MapFamily,
    b: &[usize],
    search: &SepSearch,
) -> Result<ImageSepReport> {
    family.ensure_commuting()?;
    let l = family.blocks();
    let oracle = |n: &[u32]| {
        Ok(rational_from_i64(family.iterated_image(b, n)?.len() as i64))
    };
    let sep = match fitting::fit_sep(l, oracle, search.degree, search.c_limit) {
        Ok(sep) => sep,
        Err(Error::Inconclusive(msg)) => {
            return Ok(ImageSepReport {
                outcome: PipelineOutcome::Inconclusive(msg),
                blocks: l,
                sep: None,
                verified_grid: 0,
                structural_checked: false,
            })
        }
        Err(e) => return Err(e),
    };
    let mut n = vec![0u32; l];
    loop {
        let direct = family.iterated_image(b, &n)?.len();
        if sep.eval(&n)? != rational_from_i64(direct as i64) {
            return Ok(ImageSepReport {
                outcome: PipelineOutcome::Inconclusive(format!(
                    "fitted table disagrees with the direct image at {n:?}; \
                     raise the threshold limit"
                )),
                blocks: l,
                sep: None,
                verified_grid: 0,
                structural_checked: false,
            });
        }
        let mut r = 0;
        loop {
            if r == l {
                break;
            }
            n[r] += 1;
            if n[r] <= search.grid {
                break;
            }
            n[r] = 0;
            r += 1;
        }
        if n.iter().all(|&v| v == 0) {
            break;
        }
    }
    let padded_k = family.maps.len().max(b.iter().copied().collect::<BTreeSet<_>>().len());
    let mut structural_checked = false;
    if padded_k * padded_k <= search.structural_dimension_cap {
        let enc = encode_as_coloring(family, b)?;
        let structural = structural_sep(&enc, search.box_limit)?;
        let offsets = enc.norm_offsets();
        let mut n = vec![0u32; l];
        loop {
            let shifted: Vec<u32> = n.iter().zip(&offsets).map(|(&v, &o)| v + o).collect();
            let direct = family.iterated_image(b, &n)?.len();
            if structural.eval(&shifted)? != rational_from_i64(direct as i64) {
                return Err(Error::Inconclusive(format!(
                    "encoding route disagrees with the direct image at {n:?}; \
                     stabilization boxes were likely too small"
                )));
            }
            let mut r = 0;
            loop {
                if r == l {
                    break;
                }
                n[r] += 1;
                if n[r] <= search.grid {
                    break;
                }
                n[r] = 0;
                r += 1;
            }
            if n.iter().all(|&v| v == 0) {
                break;
            }
        }
        structural_checked = true;
    }
    Ok(ImageSepReport {
        outcome: PipelineOutcome::Completed,
        blocks: l,
        sep: Some(sep),
        verified_grid: search.grid,
        structural_checked,
    })
}

/// The encoding route: classify colored points by redundancy (a colored
/// point is redundant when an earlier colored point of its slice carries
/// the same color), stabilize the per-block minimal redundant elements,
/// and extract the table from the orthant series of the surviving
/// points.
fn structural_sep(enc: &EncodedColoring, box_limit: u32) -> Result<SepDescription> {
    let k = enc.k;
    let mut history: Vec<(Vec<Antichain>, bool)> = Vec::new();
    let mut bound = 2u32.min(box_limit);
    loop {
        let classified = classify_rows(enc, bound)?;
        history.push(classified);
        if history.len() >= 3 {
            let h = &history[history.len() - 3..];
            if h[0].0 == h[1].0 && h[1].0 == h[2].0 && h[2].1 {
                break;
            }
        }
        if bound >= box_limit {
            return Err(Error::Inconclusive(format!(
                "redundancy structure of the encoding did not stabilize within \
                 box limit {box_limit}"
            )));
        }
        bound = (bound + 2).min(box_limit);
    }
    let antichains = &history.last().unwrap().0;
    // Series of the surviving colored points: per row, everything minus
    // the redundant upper set, shifted into the row and pinned to zero
    // elsewhere.
    let full: Gf<Rational> = Gf::new(
        k,
        vec![GfTerm::plain(Rational::one(), vec![0; k], vec![1; k])],
    )?;
    let mut terms: Vec<GfTerm<Rational>> = Vec::new();
    for (i, antichain) in antichains.iter().enumerate() {
        let ideal = gf_of_upper_ideal(antichain)?;
        let row = full.add(&ideal.scalar_mul(&-Rational::one())?)?;
        for t in row.terms() {
            let mut base = vec![0u32; k * k];
            let mut exps = vec![0u32; k * k];
            for j in 0..k {
                base[i * k + j] = t.b[j] + 1;
                exps[i * k + j] = t.e[j];
            }
            terms.push(GfTerm::plain(t.gamma.clone(), base, exps));
        }
    }
    Gf::new(k * k, terms)?
        .p_substitution(&enc.induced)?
        .extract_sep()
}

/// Redundancy classification of every row box [0, bound]^k: returns the
/// minimal redundant elements per row and whether the boxes are fully
/// explained by them.
fn classify_rows(enc: &EncodedColoring, bound: u32) -> Result<(Vec<Antichain>, bool)> {
    let k = enc.k;
    let offsets = enc.norm_offsets();
    let l = offsets.len();
    // Largest slice norms that can touch a row box: each of the k row
    // entries is at most bound + 1.
    let dims: Vec<u32> = enc
        .partition
        .iter()
        .map(|b| b.len() as u32 * (bound + 1))
        .collect();
    let mut redundant: Vec<BTreeSet<Vec<u32>>> = vec![BTreeSet::new(); k];
    let mut norm = vec![0u32; l];
    'slices: loop {
        let pts = enc.colored_slice(&norm);
        let mut first: BTreeMap<usize, &Vec<u32>> = BTreeMap::new();
        for (x, color) in &pts {
            match first.get(color) {
                None => {
                    first.insert(*color, x);
                }
                Some(_) => {
                    // x is redundant; record it if its row entries fit the box.
                    let i = (0..k * k).find(|&c| x[c] > 0).unwrap() / k;
                    let w: Vec<u32> = (0..k).map(|j| x[i * k + j] - 1).collect();
                    if w.iter().all(|&v| v <= bound) {
                        redundant[i].insert(w);
                    }
                }
            }
        }
        let mut r = 0;
        loop {
            if r == l {
                break 'slices;
            }
            norm[r] += 1;
            if norm[r] <= dims[r] {
                break;
            }
            norm[r] = 0;
            r += 1;
        }
    }
    let mut antichains = Vec::with_capacity(k);
    let mut closed = true;
    for set in &redundant {
        // Redundancy must be upward closed row-wise.
        for w in set {
            for j in 0..k {
                let mut up = w.clone();
                up[j] += 1;
                if up[j] <= bound && !set.contains(&up) {
                    return Err(Error::Internal(format!(
                        "redundant points are not upward closed at {w:?} -> {up:?}"
                    )));
                }
            }
        }
        let (antichain, complete) = minimal_elements(k, bound, |w| Ok(set.contains(w)))?;
        antichains.push(antichain);
        closed &= complete;
    }
    Ok((antichains, closed))
}
