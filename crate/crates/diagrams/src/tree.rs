//! Reversion-flavor tree classes.
//!
//! A tree class is the isomorphism class of a tree-like connected diagram
//! of type `([1], J)`: internal H-vertices with at least two offspring,
//! leaves that are either Y-vertices or (for correlation functions) the
//! distinguishable external ubar-sources. Canonical form stores children
//! sorted, so structural equality is class equality.

use std::collections::BTreeSet;

use mps_core::rat::Rat;
use mps_core::{MultiIndex, Series, SeriesSystem};
use wick::CovarianceSpec;

use crate::error::DiagramError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeClass {
    /// Y-vertex leaf.
    Leaf,
    /// External ubar-source leaf, fixed pointwise by automorphisms.
    Source(usize),
    /// H-vertex with its multiset of subtrees (kept sorted).
    Node(Vec<TreeClass>),
}

impl TreeClass {
    /// H-vertex constructor; sorts children into canonical order.
    pub fn node(mut children: Vec<TreeClass>) -> TreeClass {
        assert!(children.len() >= 2, "H-vertices have at least two offspring");
        children.sort();
        TreeClass::Node(children)
    }

    pub fn is_canonical(&self) -> bool {
        match self {
            TreeClass::Leaf | TreeClass::Source(_) => true,
            TreeClass::Node(cs) => {
                cs.len() >= 2
                    && cs.windows(2).all(|w| w[0] <= w[1])
                    && cs.iter().all(|c| c.is_canonical())
            }
        }
    }

    pub fn canonicalize(&self) -> TreeClass {
        match self {
            TreeClass::Leaf => TreeClass::Leaf,
            TreeClass::Source(j) => TreeClass::Source(*j),
            TreeClass::Node(cs) => {
                TreeClass::node(cs.iter().map(|c| c.canonicalize()).collect())
            }
        }
    }

    /// Number of Y-vertex leaves (the Y-grading of the amplitude).
    pub fn y_leaves(&self) -> u32 {
        match self {
            TreeClass::Leaf => 1,
            TreeClass::Source(_) => 0,
            TreeClass::Node(cs) => cs.iter().map(|c| c.y_leaves()).sum(),
        }
    }

    pub fn sources(&self) -> BTreeSet<usize> {
        match self {
            TreeClass::Leaf => BTreeSet::new(),
            TreeClass::Source(j) => std::iter::once(*j).collect(),
            TreeClass::Node(cs) => cs.iter().flat_map(|c| c.sources()).collect(),
        }
    }

    /// Vertices this tree contributes to the derived graph: H-vertices
    /// plus all leaves (the root source of a standalone diagram is not
    /// counted; it is one extra vertex).
    pub fn vertex_count(&self) -> usize {
        match self {
            TreeClass::Leaf | TreeClass::Source(_) => 1,
            TreeClass::Node(cs) => 1 + cs.iter().map(|c| c.vertex_count()).sum::<usize>(),
        }
    }

    pub fn max_arity(&self) -> u32 {
        match self {
            TreeClass::Leaf | TreeClass::Source(_) => 0,
            TreeClass::Node(cs) => (cs.len() as u32)
                .max(cs.iter().map(|c| c.max_arity()).max().unwrap_or(0)),
        }
    }

    pub fn encode(&self) -> String {
        match self {
            TreeClass::Leaf => "Y".to_string(),
            TreeClass::Source(j) => format!("S{j}"),
            TreeClass::Node(cs) => {
                let inner: Vec<String> = cs.iter().map(|c| c.encode()).collect();
                format!("H({})", inner.join(","))
            }
        }
    }
}

/// `#Aut` of the class: at each vertex, identical child subtrees can be
/// exchanged and each child contributes its own automorphisms, giving
/// `prod_c aut(c)^{m_c} * m_c!` over distinct child classes.
pub fn aut_order_tree(t: &TreeClass) -> u128 {
    match t {
        TreeClass::Leaf | TreeClass::Source(_) => 1,
        TreeClass::Node(cs) => aut_of_grouped(cs),
    }
}

/// Shared with circuits: the exchange/inner factor of a sorted multiset.
pub(crate) fn aut_of_grouped(sorted: &[TreeClass]) -> u128 {
    let mut total: u128 = 1;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let m = (j - i) as u128;
        let inner = aut_order_tree(&sorted[i]);
        total *= inner.pow((j - i) as u32) * factorial_u128(m);
        i = j;
    }
    total
}

pub(crate) fn factorial_u128(m: u128) -> u128 {
    (1..=m).product::<u128>().max(1)
}

/// All canonical tree classes with at most `max_leaves` Y-leaves and no
/// sources: grown to a fixpoint, every tree's children being smaller
/// trees already in the set.
pub fn enumerate_reversion_trees(max_leaves: u32) -> Vec<TreeClass> {
    grow_trees(max_leaves, &[])
        .into_iter()
        .filter(|t| t.sources().is_empty())
        .collect()
}

/// Tree classes using each of the given source labels exactly once and at
/// most `max_y` Y-leaves.
pub fn enumerate_trees_with_sources(max_y: u32, source_labels: &[usize]) -> Vec<TreeClass> {
    let want: BTreeSet<usize> = source_labels.iter().copied().collect();
    grow_trees(max_y, source_labels)
        .into_iter()
        .filter(|t| t.sources() == want)
        .collect()
}

/// All trees over the atoms `{Leaf} U {Source(j)}` with y-leaf count
/// <= max_y, each source label used at most once.
pub(crate) fn grow_trees(max_y: u32, source_labels: &[usize]) -> Vec<TreeClass> {
    let mut set: BTreeSet<TreeClass> = BTreeSet::new();
    if max_y >= 1 {
        set.insert(TreeClass::Leaf);
    }
    for &j in source_labels {
        set.insert(TreeClass::Source(j));
    }
    loop {
        let current: Vec<TreeClass> = set.iter().cloned().collect();
        let mut added = false;
        let max_children = (max_y as usize) + source_labels.len();
        for combo in multisets(&current, 2, max_children, &mut |chosen| {
            weight_ok(chosen, max_y)
        }) {
            let t = TreeClass::node(combo);
            if set.insert(t) {
                added = true;
            }
        }
        if !added {
            return set.into_iter().collect();
        }
    }
}

fn weight_ok(chosen: &[TreeClass], max_y: u32) -> bool {
    let y: u32 = chosen.iter().map(|c| c.y_leaves()).sum();
    if y > max_y {
        return false;
    }
    // source labels pairwise disjoint
    let mut seen = BTreeSet::new();
    for c in chosen {
        for s in c.sources() {
            if !seen.insert(s) {
                return false;
            }
        }
    }
    true
}

/// Non-decreasing selections (multisets) from a sorted candidate list,
/// between `min_len` and `max_len` items, pruned by `ok` on the partial
/// selection.
pub(crate) fn multisets<T: Clone + Ord>(
    candidates: &[T],
    min_len: usize,
    max_len: usize,
    ok: &mut impl FnMut(&[T]) -> bool,
) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut cur: Vec<T> = Vec::new();
    fn rec<T: Clone + Ord>(
        candidates: &[T],
        start: usize,
        cur: &mut Vec<T>,
        min_len: usize,
        max_len: usize,
        ok: &mut impl FnMut(&[T]) -> bool,
        out: &mut Vec<Vec<T>>,
    ) {
        if cur.len() >= min_len {
            out.push(cur.clone());
        }
        if cur.len() == max_len {
            return;
        }
        for i in start..candidates.len() {
            cur.push(candidates[i].clone());
            if ok(cur) {
                rec(candidates, i, cur, min_len, max_len, ok, out);
            }
            cur.pop();
        }
    }
    rec(candidates, 0, &mut cur, min_len, max_len, ok, &mut out);
    out
}

/// `val[j]`: the subtree value when its top ubar leg carries index `j`
/// (vertex tensors and descendant edges included, the edge above not).
fn tree_val_vec(
    t: &TreeClass,
    f: &SeriesSystem,
    cov: &CovarianceSpec,
    tau_ubar: &[usize],
    out_trunc: u32,
    cache: &mut std::collections::BTreeMap<TreeClass, Vec<Series>>,
) -> Result<Vec<Series>, DiagramError> {
    let n = f.n_vars();
    match t {
        TreeClass::Leaf => Ok((0..n).map(|j| Series::var(n, out_trunc, j)).collect()),
        TreeClass::Source(s) => Ok((0..n)
            .map(|j| {
                if j == tau_ubar[*s] {
                    Series::one(n, out_trunc)
                } else {
                    Series::zero(n, out_trunc)
                }
            })
            .collect()),
        TreeClass::Node(cs) => {
            let p = cs.len();
            let child_amps: Vec<Vec<Series>> = cs
                .iter()
                .map(|c| tree_amp_vec_cached(c, f, cov, tau_ubar, out_trunc, cache))
                .collect::<Result<_, _>>()?;
            let mut vals = vec![Series::zero(n, out_trunc); n];
            // sum over ordered covariant slots beta in [n]^p
            let mut beta = vec![0usize; p];
            loop {
                let mu = mps_core::tensor::multiplicity_index(&beta, n)?;
                let mut tensors: Vec<Rat> = Vec::with_capacity(n);
                for fj in f.components() {
                    tensors.push(tensor_element_at(fj, &mu)?);
                }
                if tensors.iter().any(|t| !num::Zero::is_zero(t)) {
                    let mut prod = Series::one(n, out_trunc);
                    for (nu, &b) in beta.iter().enumerate() {
                        prod = prod.mul(&child_amps[nu][b]);
                        if prod.is_zero() {
                            break;
                        }
                    }
                    if !prod.is_zero() {
                        for (j, tj) in tensors.iter().enumerate() {
                            if !num::Zero::is_zero(tj) {
                                // H-vertex factor is -F^{[p]}
                                vals[j] = vals[j].add(&prod.scale(&-tj.clone()));
                            }
                        }
                    }
                }
                if !advance(&mut beta, n) {
                    break;
                }
            }
            Ok(vals)
        }
    }
}

fn tensor_element_at(f: &Series, mu: &MultiIndex) -> Result<Rat, DiagramError> {
    Ok(mps_core::tensor::tensor_element_at(f, mu)?)
}

pub(crate) fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Amplitude vectors for all root assignments at once: entry `i` is the
/// amplitude of the class rooted with `tau_u(1) = i`.
pub fn tree_amp_vec(
    t: &TreeClass,
    f: &SeriesSystem,
    cov: &CovarianceSpec,
    tau_ubar: &[usize],
    out_trunc: u32,
) -> Result<Vec<Series>, DiagramError> {
    let mut cache = std::collections::BTreeMap::new();
    tree_amp_vec_cached(t, f, cov, tau_ubar, out_trunc, &mut cache)
}

/// Memoized recursion over subtree classes: repeated subtrees across a
/// class sum are evaluated once.
pub fn tree_amp_vec_cached(
    t: &TreeClass,
    f: &SeriesSystem,
    cov: &CovarianceSpec,
    tau_ubar: &[usize],
    out_trunc: u32,
    cache: &mut std::collections::BTreeMap<TreeClass, Vec<Series>>,
) -> Result<Vec<Series>, DiagramError> {
    if let Some(v) = cache.get(t) {
        return Ok(v.clone());
    }
    let n = f.n_vars();
    let vals = tree_val_vec(t, f, cov, tau_ubar, out_trunc, cache)?;
    let amps: Vec<Series> = (0..n)
        .map(|i| {
            let mut acc = Series::zero(n, out_trunc);
            for (j, v) in vals.iter().enumerate() {
                if !v.is_zero() {
                    acc = acc.add(&v.scale(&cov.inverse()[i][j]));
                }
            }
            acc
        })
        .collect();
    cache.insert(t.clone(), amps.clone());
    Ok(amps)
}

/// Feynman amplitude of a source-free tree class: covariance factor per
/// edge, `-F^{[p]}` per internal p-ary vertex, `Y_j` per leaf (summed),
/// homogeneous in Y of degree = leaf count.
pub fn amplitude_tree(
    t: &TreeClass,
    f: &SeriesSystem,
    cov: &CovarianceSpec,
    root: usize,
) -> Result<Series, DiagramError> {
    amplitude_tree_sourced(t, f, cov, root, &[])
}

/// As `amplitude_tree` with external ubar-sources assigned indices
/// `tau_ubar[j]`.
pub fn amplitude_tree_sourced(
    t: &TreeClass,
    f: &SeriesSystem,
    cov: &CovarianceSpec,
    root: usize,
    tau_ubar: &[usize],
) -> Result<Series, DiagramError> {
    let amps = tree_amp_vec(t, f, cov, tau_ubar, f.trunc_degree())?;
    Ok(amps[root].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use mps_core::rat::rat_int;
    use mps_core::sample::Sampler;

    fn leafs(k: usize) -> Vec<TreeClass> {
        vec![TreeClass::Leaf; k]
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_reversion_trees(1), vec![TreeClass::Leaf]);
        let two = enumerate_reversion_trees(2);
        assert_eq!(two.len(), 2);
        assert!(two.contains(&TreeClass::node(leafs(2))));
        assert_eq!(enumerate_reversion_trees(3).len(), 4);
        assert_eq!(enumerate_reversion_trees(4).len(), 9);
    }

    #[test]
    fn aut_orders() {
        assert_eq!(aut_order_tree(&TreeClass::Leaf), 1);
        assert_eq!(aut_order_tree(&TreeClass::node(leafs(2))), 2);
        let h2 = TreeClass::node(leafs(2));
        let squared = TreeClass::node(vec![h2.clone(), h2.clone()]);
        assert_eq!(aut_order_tree(&squared), 8);
        let mixed = TreeClass::node(vec![h2, TreeClass::Leaf]);
        assert_eq!(aut_order_tree(&mixed), 2);
        assert_eq!(aut_order_tree(&TreeClass::node(leafs(3))), 6);
    }

    #[test]
    fn canonical_idempotent_and_order_insensitive() {
        let a = TreeClass::node(vec![TreeClass::node(leafs(2)), TreeClass::Leaf]);
        let b = TreeClass::node(vec![TreeClass::Leaf, TreeClass::node(leafs(2))]);
        assert_eq!(a, b);
        assert_eq!(a.canonicalize(), a);
        assert!(a.is_canonical());
    }

    #[test]
    fn bare_propagator_amplitude() {
        // Leaf rooted at i: sum_j Ainv[i][j] Y_j
        let mut rng = Sampler::new(12);
        let f = rng.invertible_system(2, 3, 2);
        let cov = CovarianceSpec::new(f.linear_part()).unwrap();
        for i in 0..2 {
            let amp = amplitude_tree(&TreeClass::Leaf, &f, &cov, i).unwrap();
            let mut expect = Series::zero(2, 3);
            for j in 0..2 {
                expect = expect.add(&Series::var(2, 3, j).scale(&cov.inverse()[i][j]));
            }
            assert_eq!(amp, expect);
        }
    }

    #[test]
    fn quadratic_vertex_amplitude() {
        // F = X - X^2: H{Y,Y} has amplitude 2 Y^2
        let f = SeriesSystem::new(vec![Series::var(1, 3, 0).sub(&Series::monomial(
            1,
            3,
            MultiIndex::new(vec![2]),
            rat_int(1),
        ))]);
        let cov = CovarianceSpec::new(f.linear_part()).unwrap();
        let amp = amplitude_tree(&TreeClass::node(leafs(2)), &f, &cov, 0).unwrap();
        assert_eq!(
            amp,
            Series::monomial(1, 3, MultiIndex::new(vec![2]), rat_int(2))
        );
        // a vertex whose tensor vanishes kills the tree
        let cubic = TreeClass::node(leafs(3));
        assert!(amplitude_tree(&cubic, &f, &cov, 0).unwrap().is_zero());
    }

    #[test]
    fn sourced_trees_use_every_label_once() {
        let ts = enumerate_trees_with_sources(2, &[0]);
        for t in &ts {
            assert_eq!(t.sources().len(), 1);
            assert!(t.is_canonical());
        }
        // the bare source S0 itself is a class (the straight-through line)
        assert!(ts.contains(&TreeClass::Source(0)));
    }
}
