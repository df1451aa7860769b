//! Species-level integration tests: labeled quotients against the direct
//! enumerators for the Lagrange-Good flavor and for sourced reversion
//! types, plus relabelling invariance of amplitudes.

use std::collections::BTreeMap;

use diagrams::labeled::{
    amplitude_rev_labeled, canonical_lg_class, canonical_rev_class, enumerate_paired,
    labeled_aut_order, realize_rev, PairedFlavor,
};
use diagrams::lg::{aut_order_lg_circuit, aut_order_lg_tree, enumerate_lg_circuits, enumerate_lg_trees, LgCircuitClass, LgTreeClass};
use diagrams::rev_circuit::{aut_order_rev_circuit, enumerate_rev_circuits, RevCircuitClass};
use diagrams::tree::{aut_order_tree, enumerate_trees_with_sources, TreeClass};
use mps_core::sample::Sampler;
use wick::CovarianceSpec;

fn factorial(m: u128) -> u128 {
    (1..=m).product::<u128>().max(1)
}

#[test]
fn lg_labeled_quotient_matches_direct_enumerators() {
    // LG trees with m nodes realize on ground sets of size 2m; circuits
    // likewise. Check classes and aut orders for k <= 6.
    let trees = enumerate_lg_trees(3);
    let circuits = enumerate_lg_circuits(3);
    for k in (0..=6usize).step_by(2) {
        // one-point structures
        let labeled = enumerate_paired(k, 1, 0, PairedFlavor::LagrangeGood).unwrap();
        let mut by_class: BTreeMap<(Vec<LgTreeClass>, Vec<LgCircuitClass>), u128> =
            BTreeMap::new();
        for s in &labeled {
            assert!(s.validate(PairedFlavor::LagrangeGood, 1, 0));
            *by_class.entry(canonical_lg_class(s)).or_insert(0) += 1;
        }
        let units = k / 2;
        // direct: a tree at the root plus vacuum circuits
        let mut direct: BTreeMap<(Vec<LgTreeClass>, Vec<LgCircuitClass>), u128> = BTreeMap::new();
        if units >= 1 {
            for t in &trees {
                let tn = t.node_count() as usize;
                if tn > units {
                    continue;
                }
                assemble_circuits(&circuits, units - tn, &mut |cs| {
                    let mut aut = aut_order_lg_tree(t);
                    aut *= grouped_circuit_aut(cs);
                    direct.insert((vec![t.clone()], cs.to_vec()), aut);
                });
            }
        }
        assert_eq!(
            by_class.keys().cloned().collect::<Vec<_>>(),
            direct.keys().cloned().collect::<Vec<_>>(),
            "k={k}"
        );
        for (key, count) in &by_class {
            assert_eq!(factorial(k as u128) / count, direct[key], "k={k}");
        }
    }
}

fn grouped_circuit_aut(cs: &[LgCircuitClass]) -> u128 {
    let mut total = 1u128;
    let mut i = 0;
    while i < cs.len() {
        let mut j = i;
        while j < cs.len() && cs[j] == cs[i] {
            j += 1;
        }
        total *= aut_order_lg_circuit(&cs[i]).pow((j - i) as u32) * factorial((j - i) as u128);
        i = j;
    }
    total
}

fn assemble_circuits(
    pool: &[LgCircuitClass],
    budget: usize,
    sink: &mut impl FnMut(&[LgCircuitClass]),
) {
    fn rec(
        pool: &[LgCircuitClass],
        start: usize,
        left: usize,
        cur: &mut Vec<LgCircuitClass>,
        sink: &mut impl FnMut(&[LgCircuitClass]),
    ) {
        if left == 0 {
            let mut sorted = cur.clone();
            sorted.sort();
            sink(&sorted);
            return;
        }
        for i in start..pool.len() {
            let c = pool[i].degree() as usize;
            if c <= left {
                cur.push(pool[i].clone());
                rec(pool, i, left - c, cur, sink);
                cur.pop();
            }
        }
    }
    rec(pool, 0, budget, &mut Vec::new(), sink);
}

#[test]
fn sourced_reversion_quotient_matches_direct_enumerators() {
    // type ([1], [1]) at small ground sizes: trees carrying the single
    // external ubar source
    for k in (2..=6usize).step_by(2) {
        let labeled = enumerate_paired(k, 1, 1, PairedFlavor::Reversion).unwrap();
        let mut by_class: BTreeMap<(Vec<TreeClass>, Vec<RevCircuitClass>), u128> = BTreeMap::new();
        for s in &labeled {
            assert!(s.validate(PairedFlavor::Reversion, 1, 1));
            *by_class.entry(canonical_rev_class(s)).or_insert(0) += 1;
        }
        // every class of this size: the source sits in the root tree or
        // in a circuit component
        let units = k / 2;
        let trees_src = enumerate_trees_with_sources(units as u32, &[0]);
        let trees_plain = diagrams::tree::enumerate_reversion_trees(units as u32);
        let circuits_plain = enumerate_rev_circuits(units as u32, &[]);
        let circuits_src = enumerate_rev_circuits(units as u32, &[0]);
        let mut direct: BTreeMap<(Vec<TreeClass>, Vec<RevCircuitClass>), u128> = BTreeMap::new();
        // source in the tree, plain circuits
        for t in trees_src.iter().filter(|t| t.vertex_count() <= units) {
            rev_assemble(&circuits_plain, units - t.vertex_count(), &mut |cs| {
                direct.insert(
                    (vec![t.clone()], cs.to_vec()),
                    aut_order_tree(t) * rev_grouped_aut(cs),
                );
            });
        }
        // plain tree, source in one circuit
        for t in trees_plain.iter().filter(|t| t.vertex_count() < units) {
            for c_src in circuits_src
                .iter()
                .filter(|c| c.vertex_count() <= units - t.vertex_count())
            {
                rev_assemble(
                    &circuits_plain,
                    units - t.vertex_count() - c_src.vertex_count(),
                    &mut |cs| {
                        let mut all = cs.to_vec();
                        all.push(c_src.clone());
                        all.sort();
                        // the sourced circuit is unique in the multiset
                        let aut = aut_order_tree(t)
                            * aut_order_rev_circuit(c_src)
                            * rev_grouped_aut(cs);
                        direct.insert((vec![t.clone()], all), aut);
                    },
                );
            }
        }
        assert_eq!(
            by_class.keys().cloned().collect::<Vec<_>>(),
            direct.keys().cloned().collect::<Vec<_>>(),
            "k={k}"
        );
        for (key, count) in &by_class {
            assert_eq!(factorial(k as u128) / count, direct[key], "k={k} {key:?}");
        }
    }
}

fn rev_grouped_aut(cs: &[RevCircuitClass]) -> u128 {
    let mut total = 1u128;
    let mut i = 0;
    while i < cs.len() {
        let mut j = i;
        while j < cs.len() && cs[j] == cs[i] {
            j += 1;
        }
        total *= aut_order_rev_circuit(&cs[i]).pow((j - i) as u32) * factorial((j - i) as u128);
        i = j;
    }
    total
}

fn rev_assemble(
    pool: &[RevCircuitClass],
    budget: usize,
    sink: &mut impl FnMut(&[RevCircuitClass]),
) {
    fn rec(
        pool: &[RevCircuitClass],
        start: usize,
        left: usize,
        cur: &mut Vec<RevCircuitClass>,
        sink: &mut impl FnMut(&[RevCircuitClass]),
    ) {
        if left == 0 {
            let mut sorted = cur.clone();
            sorted.sort();
            sink(&sorted);
            return;
        }
        for i in start..pool.len() {
            let c = pool[i].vertex_count();
            if c <= left {
                cur.push(pool[i].clone());
                rec(pool, i, left - c, cur, sink);
                cur.pop();
            }
        }
    }
    rec(pool, 0, budget, &mut Vec::new(), sink);
}

#[test]
fn amplitudes_are_relabelling_invariant() {
    // two isomorphic labeled realizations give equal amplitudes
    let mut rng = Sampler::new(414);
    let f = rng.invertible_system(2, 4, 3);
    let cov = CovarianceSpec::new(f.linear_part()).unwrap();
    for t in diagrams::tree::enumerate_reversion_trees(3) {
        let s = realize_rev(std::slice::from_ref(&t), &[]);
        // an arbitrary relabelling
        let sigma: Vec<usize> = (0..s.k).map(|x| (x * 5 + 2) % s.k).collect();
        let mut sorted = sigma.clone();
        sorted.sort_unstable();
        if sorted != (0..s.k).collect::<Vec<_>>() {
            continue; // not a bijection for this k; skip
        }
        let moved = s.transport(&sigma);
        for root in 0..2 {
            let a = amplitude_rev_labeled(&s, &f, &cov, &[root], &[], 4).unwrap();
            let b = amplitude_rev_labeled(&moved, &f, &cov, &[root], &[], 4).unwrap();
            assert_eq!(a, b, "tree {}", t.encode());
        }
        assert_eq!(labeled_aut_order(&s), labeled_aut_order(&moved));
    }
}

#[test]
fn canonicalization_is_idempotent_on_realizations() {
    for t in diagrams::tree::enumerate_reversion_trees(4) {
        assert!(t.is_canonical());
        assert_eq!(t.canonicalize(), t);
        let s = realize_rev(std::slice::from_ref(&t), &[]);
        let (trees, circuits) = canonical_rev_class(&s);
        assert_eq!(trees, vec![t]);
        assert!(circuits.is_empty());
    }
}
