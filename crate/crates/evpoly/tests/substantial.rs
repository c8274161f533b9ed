//! Slice-wise color representatives and the ideal structure of the
//! points they exclude, cross-checked against direct color enumeration.

mod common;

use common::rng;
use rand::Rng;
use std::collections::BTreeSet;

use evpoly::colorings::{block_norm, Color, Coloring};
use evpoly::orthants::box_points;
use evpoly::semigroups::{Elem, ModAdd, ZdAdd};

fn gens(vals: &[i64]) -> Vec<Elem> {
    vals.iter().map(|&v| Elem::scalar(v)).collect()
}

#[test]
fn representatives_count_the_colors_on_each_slice() {
    let mut rng = rng(0x5b57);
    for round in 0..15 {
        let k = rng.gen_range(2..=3usize);
        let vals: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=5i64)).collect();
        let coloring = Coloring::associated(ZdAdd { d: 1 }, gens(&vals)).unwrap();
        let partition: Vec<Vec<usize>> = vec![(0..k).collect()];
        for n in 0..=8u32 {
            let reps = coloring.substantial_points(&partition, &[n]).unwrap();
            let mut colors = BTreeSet::new();
            let mut count = 0u64;
            for x in box_points(&vec![n; k]) {
                if x.iter().sum::<u32>() == n {
                    colors.insert(coloring.color(&x).unwrap());
                    count += 1;
                }
            }
            assert_eq!(
                reps.len(),
                colors.len(),
                "round {round}, gens {vals:?}, n = {n}"
            );
            assert!(reps.len() as u64 <= count.max(1));
            // Each representative is lex-minimal among points of its color
            // on the slice.
            for rep in &reps {
                let color = coloring.color(rep).unwrap();
                for x in box_points(&vec![n; k]) {
                    if x.iter().sum::<u32>() == n
                        && coloring.color(&x).unwrap() == color
                    {
                        assert!(rep <= &x, "rep {rep:?} not minimal at {x:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn excluded_points_form_an_upper_ideal() {
    let mut rng = rng(0x1dea1);
    for round in 0..12 {
        let k = rng.gen_range(2..=3usize);
        let vals: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=4i64)).collect();
        let m = rng.gen_range(2..=6u64);
        let coloring = Coloring::associated(ModAdd { m }, gens(&vals)).unwrap();
        let partition: Vec<Vec<usize>> = vec![(0..k).collect()];
        let report = coloring.substantial_upper_ideal(&partition, 6).unwrap();
        let antichain = &report.minimal_non_substantial;
        // Non-substantial points in the box are exactly the dominated ones.
        for x in box_points(&vec![6u32; k]) {
            let n = x.iter().sum::<u32>();
            let reps = coloring.substantial_points(&partition, &[n]).unwrap();
            let substantial = reps.contains(&x);
            if antichain.dominates(&x) {
                assert!(
                    !substantial,
                    "round {round}, gens {vals:?} mod {m}: dominated {x:?} is a representative"
                );
            } else {
                assert!(
                    substantial,
                    "round {round}, gens {vals:?} mod {m}: free point {x:?} is redundant"
                );
            }
        }
    }
}

#[test]
fn block_norms_split_by_partition() {
    let v = [2u32, 5, 1, 0];
    assert_eq!(
        block_norm(&v, &[vec![0, 2], vec![1], vec![3]]).unwrap(),
        vec![3, 5, 0]
    );
    assert_eq!(block_norm(&v, &[vec![0, 1, 2, 3]]).unwrap(), vec![8]);
}

#[test]
fn collapsing_generators_exclude_late_coordinates() {
    // Two equal generators: on slice n the color is constant, so only
    // (0, n) survives and everything with a positive first coordinate is
    // excluded.
    let coloring =
        Coloring::associated(ZdAdd { d: 1 }, gens(&[1, 1])).unwrap();
    let partition = vec![vec![0, 1]];
    for n in 1..=7u32 {
        let reps = coloring.substantial_points(&partition, &[n]).unwrap();
        assert_eq!(reps, vec![vec![0, n]]);
    }
    let report = coloring.substantial_upper_ideal(&partition, 8).unwrap();
    assert!(report.closed);
    assert_eq!(report.minimal_non_substantial.points(), &[vec![1, 0]]);
}

#[test]
fn injective_colorings_keep_every_point() {
    let coloring = Coloring::associated(ZdAdd { d: 2 }, vec![
        Elem(vec![1, 0]),
        Elem(vec![0, 1]),
    ])
    .unwrap();
    let partition = vec![vec![0, 1]];
    let report = coloring.substantial_upper_ideal(&partition, 7).unwrap();
    assert!(report.closed);
    assert!(report.minimal_non_substantial.is_empty());
    for n in 0..=7u32 {
        let reps = coloring.substantial_points(&partition, &[n]).unwrap();
        assert_eq!(reps.len(), n as usize + 1);
    }
}

#[test]
fn finer_partitions_refine_the_slices() {
    // Same generators, two blocks: slices are indexed by pairs, and
    // representatives are counted against colors per pair.
    let coloring =
        Coloring::associated(ZdAdd { d: 1 }, gens(&[2, 3])).unwrap();
    let partition = vec![vec![0], vec![1]];
    for n0 in 0..=6u32 {
        for n1 in 0..=6u32 {
            let reps = coloring.substantial_points(&partition, &[n0, n1]).unwrap();
            // The slice is the single point (n0, n1).
            assert_eq!(reps, vec![vec![n0, n1]]);
        }
    }
    let mixed = Coloring::associated(ZdAdd { d: 1 }, gens(&[2, 2, 5])).unwrap();
    let partition = vec![vec![0, 1], vec![2]];
    for n0 in 0..=5u32 {
        for n1 in 0..=5u32 {
            let reps = mixed.substantial_points(&partition, &[n0, n1]).unwrap();
            let mut colors = BTreeSet::new();
            for a in 0..=n0 {
                colors.insert(Color(vec![
                    2 * a as i64 + 2 * (n0 - a) as i64 + 5 * n1 as i64,
                ]));
            }
            assert_eq!(reps.len(), colors.len());
        }
    }
}
