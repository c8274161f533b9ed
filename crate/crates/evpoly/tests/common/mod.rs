#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use evpoly::linalg::{solve, LinSolve};
use evpoly::orthants::box_points;
use evpoly::{Rational, RationalGf};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Truncated-series oracle: every denominator factor 1/(1 - a x)^e is
/// expanded by e-fold convolution of the geometric series, so no closed
/// binomial formula is shared with the library's coefficient routine.
pub fn series_box(gf: &RationalGf, dims: &[u32]) -> BTreeMap<Vec<u32>, Rational> {
    let k = gf.k();
    assert_eq!(k, dims.len());
    let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    for t in gf.terms() {
        let mut factors: Vec<Vec<Rational>> = Vec::with_capacity(k);
        for i in 0..k {
            let len = dims[i] as usize + 1;
            let mut f = vec![Rational::zero(); len];
            if t.e[i] == 0 {
                if (t.b[i] as usize) < len {
                    f[t.b[i] as usize] = Rational::one();
                }
            } else {
                let mut geo = vec![Rational::zero(); len];
                let mut p = Rational::one();
                for v in 0..len {
                    geo[v] = p.clone();
                    p *= &t.alpha[i];
                }
                let mut conv = vec![Rational::zero(); len];
                conv[0] = Rational::one();
                for _ in 0..t.e[i] {
                    let mut next = vec![Rational::zero(); len];
                    for (a, ca) in conv.iter().enumerate() {
                        if ca.is_zero() {
                            continue;
                        }
                        for b in 0..len - a {
                            next[a + b] += ca * &geo[b];
                        }
                    }
                    conv = next;
                }
                for (v, slot) in f.iter_mut().enumerate() {
                    if v >= t.b[i] as usize {
                        *slot = conv[v - t.b[i] as usize].clone();
                    }
                }
            }
            factors.push(f);
        }
        for n in box_points(dims) {
            let mut c = t.gamma.clone();
            for i in 0..k {
                c *= &factors[i][n[i] as usize];
            }
            if !c.is_zero() {
                *acc.entry(n).or_insert_with(Rational::zero) += c;
            }
        }
    }
    acc.retain(|_, v| !v.is_zero());
    acc
}

/// Membership of x in the n-th dilation by convex-combination search:
/// some subset of at most k+1 scaled vertices must combine to x with
/// nonnegative weights summing to one. Exercises the dense solver, not
/// the feasibility routine the library uses.
pub fn in_dilation_by_subsets(vertices: &[Vec<Rational>], x: &[u32], n: u32) -> bool {
    let k = x.len();
    let m = vertices.len();
    let scaled: Vec<Vec<Rational>> = vertices
        .iter()
        .map(|v| v.iter().map(|c| c * q(n as i64, 1)).collect())
        .collect();
    let target: Vec<Rational> = x
        .iter()
        .map(|&c| q(c as i64, 1))
        .chain(std::iter::once(Rational::one()))
        .collect();
    let mut subset: Vec<usize> = Vec::new();
    fn search(
        scaled: &[Vec<Rational>],
        target: &[Rational],
        k: usize,
        from: usize,
        subset: &mut Vec<usize>,
    ) -> bool {
        if !subset.is_empty() {
            let rows = k + 1;
            let a: Vec<Vec<Rational>> = (0..rows)
                .map(|r| {
                    subset
                        .iter()
                        .map(|&j| {
                            if r < k {
                                scaled[j][r].clone()
                            } else {
                                Rational::one()
                            }
                        })
                        .collect()
                })
                .collect();
            if let LinSolve::Unique(lambda) = solve(&a, target) {
                if lambda.iter().all(|l| l >= &Rational::zero()) {
                    return true;
                }
            }
        }
        if subset.len() == k + 1 {
            return false;
        }
        for j in from..scaled.len() {
            subset.push(j);
            if search(scaled, target, k, j + 1, subset) {
                return true;
            }
            subset.pop();
        }
        false
    }
    let _ = m;
    search(&scaled, &target, k, 0, &mut subset)
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let pool = [(1, 1), (-1, 1), (2, 1), (1, 2), (-1, 2), (3, 1)];
    let (n, d) = pool[rng.gen_range(0..pool.len())];
    q(n, d)
}

/// Twists for denominators, biased toward 1 so geometric-free cases stay
/// common.
pub fn random_twist(rng: &mut ChaCha8Rng) -> Rational {
    let pool = [(1, 1), (1, 1), (1, 1), (-1, 1), (1, 2)];
    let (n, d) = pool[rng.gen_range(0..pool.len())];
    q(n, d)
}

/// All set partitions of {0, .., k-1}, smallest-element-first within and
/// across blocks.
pub fn all_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut cur: Vec<Vec<usize>> = Vec::new();
    fn rec(i: usize, k: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == k {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, k, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, k, cur, out);
        cur.pop();
    }
    rec(0, k, &mut cur, &mut out);
    out
}

/// Vectors with the given coordinate sums on each block of the partition.
pub fn slice_points(k: usize, partition: &[Vec<usize>], norm: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; k]];
    for (block, &n) in partition.iter().zip(norm) {
        let mut next = Vec::new();
        for base in &out {
            let mut comps = vec![(base.clone(), n)];
            for (idx, &coord) in block.iter().enumerate() {
                let mut step = Vec::new();
                for (v, rem) in &comps {
                    if idx + 1 == block.len() {
                        let mut v = v.clone();
                        v[coord] = *rem;
                        step.push((v, 0));
                    } else {
                        for take in 0..=*rem {
                            let mut v = v.clone();
                            v[coord] = take;
                            step.push((v, rem - take));
                        }
                    }
                }
                comps = step;
            }
            next.extend(comps.into_iter().map(|(v, _)| v));
        }
        out = next;
    }
    out
}
