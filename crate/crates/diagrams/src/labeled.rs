//! Labeled diagram structures on explicit ground sets: the species oracle.
//!
//! A paired structure on `[k]` is the literal bulleted data of the
//! reversion / Lagrange-Good grammars: a ubar/u split, external source
//! elements, the vertex partition of the internal elements, and the
//! contraction bijection. Exhaustive enumeration over small `[k]`,
//! quotiented by isomorphism, is the ground truth that the direct class
//! enumerators and the closed automorphism formulas are tested against
//! (`aut = k! / orbit size`).

use std::collections::{BTreeMap, BTreeSet};

use mps_core::rat::Rat;
use mps_core::{MultiIndex, Series, SeriesSystem};
use num::Zero;
use wick::CovarianceSpec;

use crate::error::DiagramError;
use crate::rev_circuit::RevCircuitClass;
use crate::lg::{LgCircuitClass, LgTreeClass};
use crate::tree::{advance, TreeClass};

pub const LABELED_GUARD: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairedFlavor {
    /// H-vertices: one ubar leg, zero (Y-vertex) or at least two u legs.
    Reversion,
    /// XG-vertices: one ubar leg, any number of u legs.
    LagrangeGood,
}

/// A labeled pre-Feynman + contraction structure of type `(I, J)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairedLabeled {
    pub k: usize,
    /// Field type per element of `[k]`.
    pub is_ubar: Vec<bool>,
    /// `rho_u` images in I-order (u-type, external).
    pub ext_u: Vec<usize>,
    /// `rho_ubar` images in J-order (ubar-type, external).
    pub ext_ubar: Vec<usize>,
    /// Vertex blocks `(ubar owner, sorted u elements)`, sorted by owner.
    /// An empty u-list is a Y-vertex (reversion) or an XG leaf (LG).
    pub blocks: Vec<(usize, Vec<usize>)>,
    /// The contraction bijection as sorted pairs `(ubar elt, u elt)`.
    pub pairing: Vec<(usize, usize)>,
}

impl PairedLabeled {
    /// Mechanical check of every structural constraint of the grammar.
    pub fn validate(&self, flavor: PairedFlavor, i_count: usize, j_count: usize) -> bool {
        let k = self.k;
        if self.is_ubar.len() != k {
            return false;
        }
        let ubar: BTreeSet<usize> = (0..k).filter(|&x| self.is_ubar[x]).collect();
        let u: BTreeSet<usize> = (0..k).filter(|&x| !self.is_ubar[x]).collect();
        // external maps: injective, right field type, right cardinality
        if self.ext_u.len() != i_count || self.ext_ubar.len() != j_count {
            return false;
        }
        let ext_u: BTreeSet<usize> = self.ext_u.iter().copied().collect();
        let ext_ubar: BTreeSet<usize> = self.ext_ubar.iter().copied().collect();
        if ext_u.len() != i_count || !ext_u.iter().all(|x| u.contains(x)) {
            return false;
        }
        if ext_ubar.len() != j_count || !ext_ubar.iter().all(|x| ubar.contains(x)) {
            return false;
        }
        // blocks partition the internal elements, one ubar owner each
        let mut covered: BTreeSet<usize> = BTreeSet::new();
        for (owner, us) in &self.blocks {
            if !ubar.contains(owner) || ext_ubar.contains(owner) {
                return false;
            }
            if !covered.insert(*owner) {
                return false;
            }
            for uu in us {
                if !u.contains(uu) || ext_u.contains(uu) || !covered.insert(*uu) {
                    return false;
                }
            }
            match flavor {
                PairedFlavor::Reversion => {
                    if us.len() == 1 {
                        return false;
                    }
                }
                PairedFlavor::LagrangeGood => {}
            }
        }
        let internal: BTreeSet<usize> = (0..k)
            .filter(|x| !ext_u.contains(x) && !ext_ubar.contains(x))
            .collect();
        if covered != internal {
            return false;
        }
        // contraction is a bijection E_ubar -> E_u
        if self.pairing.len() != ubar.len() || ubar.len() != u.len() {
            return false;
        }
        let from: BTreeSet<usize> = self.pairing.iter().map(|p| p.0).collect();
        let to: BTreeSet<usize> = self.pairing.iter().map(|p| p.1).collect();
        from == ubar && to == u
    }

    fn pairing_map(&self) -> BTreeMap<usize, usize> {
        self.pairing.iter().copied().collect()
    }

    fn block_of(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.k];
        for (b, (owner, us)) in self.blocks.iter().enumerate() {
            out[*owner] = Some(b);
            for &u in us {
                out[u] = Some(b);
            }
        }
        out
    }

    /// Ground size, contraction-line count, derived-graph vertex count,
    /// Y-vertex count and `#(J)` - the quantities in the grading bounds.
    pub fn size_stats(&self) -> SizeStats {
        SizeStats {
            ground: self.k,
            links: self.pairing.len(),
            derived_vertices: self.blocks.len() + self.ext_u.len() + self.ext_ubar.len(),
            y_vertices: self.blocks.iter().filter(|(_, us)| us.is_empty()).count(),
            j_count: self.ext_ubar.len(),
        }
    }

    /// Transport of structure along a bijection of `[k]`.
    pub fn transport(&self, sigma: &[usize]) -> PairedLabeled {
        assert_eq!(sigma.len(), self.k);
        let mut is_ubar = vec![false; self.k];
        for x in 0..self.k {
            is_ubar[sigma[x]] = self.is_ubar[x];
        }
        let mut blocks: Vec<(usize, Vec<usize>)> = self
            .blocks
            .iter()
            .map(|(o, us)| {
                let mut v: Vec<usize> = us.iter().map(|&x| sigma[x]).collect();
                v.sort_unstable();
                (sigma[*o], v)
            })
            .collect();
        blocks.sort();
        let mut pairing: Vec<(usize, usize)> = self
            .pairing
            .iter()
            .map(|&(a, b)| (sigma[a], sigma[b]))
            .collect();
        pairing.sort_unstable();
        PairedLabeled {
            k: self.k,
            is_ubar,
            ext_u: self.ext_u.iter().map(|&x| sigma[x]).collect(),
            ext_ubar: self.ext_ubar.iter().map(|&x| sigma[x]).collect(),
            blocks,
            pairing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeStats {
    pub ground: usize,
    pub links: usize,
    pub derived_vertices: usize,
    pub y_vertices: usize,
    pub j_count: usize,
}

/// Exhaustive enumeration of every structure of type `(|I|, |J|)` on the
/// ground set `[k]`. Guarded: the search is exponential in `k`.
pub fn enumerate_paired(
    k: usize,
    i_count: usize,
    j_count: usize,
    flavor: PairedFlavor,
) -> Result<Vec<PairedLabeled>, DiagramError> {
    if k > LABELED_GUARD {
        return Err(DiagramError::GroundSetTooLarge {
            k,
            max: LABELED_GUARD,
        });
    }
    let mut out = Vec::new();
    if !k.is_multiple_of(2) {
        return Ok(out);
    }
    let half = k / 2;
    for ubar_set in subsets_of_size(k, half) {
        let u_set: Vec<usize> = (0..k).filter(|x| !ubar_set.contains(x)).collect();
        let ubar_vec: Vec<usize> = ubar_set.iter().copied().collect();
        for ext_u in ordered_injections(&u_set, i_count) {
            for ext_ubar in ordered_injections(&ubar_vec, j_count) {
                let internal_u: Vec<usize> = u_set
                    .iter()
                    .copied()
                    .filter(|x| !ext_u.contains(x))
                    .collect();
                let internal_ubar: Vec<usize> = ubar_vec
                    .iter()
                    .copied()
                    .filter(|x| !ext_ubar.contains(x))
                    .collect();
                if internal_ubar.is_empty() && !internal_u.is_empty() {
                    continue;
                }
                for assignment in block_assignments(&internal_u, &internal_ubar, flavor) {
                    for perm in permutations(&u_set) {
                        let mut pairing: Vec<(usize, usize)> = ubar_vec
                            .iter()
                            .copied()
                            .zip(perm.iter().copied())
                            .collect();
                        pairing.sort_unstable();
                        let mut is_ubar = vec![false; k];
                        for &x in &ubar_vec {
                            is_ubar[x] = true;
                        }
                        out.push(PairedLabeled {
                            k,
                            is_ubar,
                            ext_u: ext_u.clone(),
                            ext_ubar: ext_ubar.clone(),
                            blocks: assignment.clone(),
                            pairing,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn subsets_of_size(k: usize, size: usize) -> Vec<BTreeSet<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn rec(k: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<BTreeSet<usize>>) {
        if cur.len() == size {
            out.push(cur.iter().copied().collect());
            return;
        }
        for x in start..k {
            if k - x < size - cur.len() {
                break;
            }
            cur.push(x);
            rec(k, size, x + 1, cur, out);
            cur.pop();
        }
    }
    rec(k, size, 0, &mut cur, &mut out);
    out
}

fn ordered_injections(pool: &[usize], len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(pool: &[usize], len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for &x in pool {
            if !cur.contains(&x) {
                cur.push(x);
                rec(pool, len, cur, out);
                cur.pop();
            }
        }
    }
    rec(pool, len, &mut cur, &mut out);
    out
}

fn permutations(pool: &[usize]) -> Vec<Vec<usize>> {
    ordered_injections(pool, pool.len())
}

/// All ways to distribute the internal u elements among the internal ubar
/// owners, subject to the flavor's block-shape rule. Owners with no
/// assigned u element become Y-vertices / XG leaves.
fn block_assignments(
    internal_u: &[usize],
    internal_ubar: &[usize],
    flavor: PairedFlavor,
) -> Vec<Vec<(usize, Vec<usize>)>> {
    let mut out = Vec::new();
    if internal_ubar.is_empty() {
        if internal_u.is_empty() {
            out.push(Vec::new());
        }
        return out;
    }
    let m = internal_ubar.len();
    let mut digits = vec![0usize; internal_u.len()];
    loop {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (pos, &d) in digits.iter().enumerate() {
            groups[d].push(internal_u[pos]);
        }
        let valid = match flavor {
            PairedFlavor::Reversion => groups.iter().all(|g| g.len() != 1),
            PairedFlavor::LagrangeGood => true,
        };
        if valid {
            let mut blocks: Vec<(usize, Vec<usize>)> = internal_ubar
                .iter()
                .copied()
                .zip(groups)
                .collect();
            blocks.sort();
            out.push(blocks);
        }
        if digits.is_empty() || !advance(&mut digits, m) {
            break;
        }
    }
    out
}

// ---------------------------------------------------------------------
// Canonical classes via the derived digraph
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DerivedVertex {
    USource(usize),
    UbarSource(usize),
    Block(usize),
}

struct DerivedGraph {
    verts: Vec<DerivedVertex>,
    /// out-edge target per vertex (None for u-sources, which have no ubar leg)
    out_edge: Vec<Option<usize>>,
    /// feeders of each vertex's u elements, in block u-list order
    children: Vec<Vec<usize>>,
}

fn derived_graph(s: &PairedLabeled) -> DerivedGraph {
    let mut verts = Vec::new();
    let mut vertex_of_elt: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, &x) in s.ext_u.iter().enumerate() {
        vertex_of_elt.insert(x, verts.len());
        verts.push(DerivedVertex::USource(i));
    }
    for (j, &x) in s.ext_ubar.iter().enumerate() {
        vertex_of_elt.insert(x, verts.len());
        verts.push(DerivedVertex::UbarSource(j));
    }
    for (b, (owner, us)) in s.blocks.iter().enumerate() {
        let v = verts.len();
        vertex_of_elt.insert(*owner, v);
        for &u in us {
            vertex_of_elt.insert(u, v);
        }
        verts.push(DerivedVertex::Block(b));
    }
    let pmap = s.pairing_map();
    let mut inv_p: BTreeMap<usize, usize> = BTreeMap::new();
    for (&a, &b) in &pmap {
        inv_p.insert(b, a);
    }
    let mut out_edge = vec![None; verts.len()];
    let mut children = vec![Vec::new(); verts.len()];
    for (v, dv) in verts.iter().enumerate() {
        let (ubar_elt, u_elts): (Option<usize>, Vec<usize>) = match *dv {
            DerivedVertex::USource(i) => (None, vec![s.ext_u[i]]),
            DerivedVertex::UbarSource(j) => (Some(s.ext_ubar[j]), Vec::new()),
            DerivedVertex::Block(b) => (Some(s.blocks[b].0), s.blocks[b].1.clone()),
        };
        if let Some(x) = ubar_elt {
            out_edge[v] = Some(vertex_of_elt[&pmap[&x]]);
        }
        children[v] = u_elts.iter().map(|u| vertex_of_elt[&inv_p[u]]).collect();
    }
    DerivedGraph {
        verts,
        out_edge,
        children,
    }
}

fn build_rev_tree(g: &DerivedGraph, v: usize, visited: &mut Vec<bool>) -> TreeClass {
    visited[v] = true;
    match g.verts[v] {
        DerivedVertex::UbarSource(j) => TreeClass::Source(j),
        DerivedVertex::Block(_) => {
            if g.children[v].is_empty() {
                TreeClass::Leaf
            } else {
                TreeClass::node(
                    g.children[v]
                        .iter()
                        .map(|&c| build_rev_tree(g, c, visited))
                        .collect(),
                )
            }
        }
        DerivedVertex::USource(_) => unreachable!("u-sources are roots, never children"),
    }
}

fn build_lg_tree(g: &DerivedGraph, v: usize, visited: &mut Vec<bool>) -> LgTreeClass {
    visited[v] = true;
    match g.verts[v] {
        DerivedVertex::Block(_) => LgTreeClass::node(
            g.children[v]
                .iter()
                .map(|&c| build_lg_tree(g, c, visited))
                .collect(),
        ),
        _ => unreachable!("LG canonicalization is used without external sources"),
    }
}

/// Canonical class of a reversion-flavor structure: one tree per
/// u-source (in I order) and the sorted multiset of vacuum circuits.
pub fn canonical_rev_class(s: &PairedLabeled) -> (Vec<TreeClass>, Vec<RevCircuitClass>) {
    let g = derived_graph(s);
    let mut visited = vec![false; g.verts.len()];
    let mut trees = Vec::new();
    for (v, dv) in g.verts.iter().enumerate() {
        if let DerivedVertex::USource(_) = dv {
            visited[v] = true;
            let child = g.children[v][0];
            trees.push(build_rev_tree(&g, child, &mut visited));
        }
    }
    let mut circuits: Vec<RevCircuitClass> = collect_circuits(&g, &mut visited, |g, v, visited| {
        build_rev_tree(g, v, visited)
    })
    .into_iter()
    .map(RevCircuitClass::new)
    .collect();
    circuits.sort();
    (trees, circuits)
}

/// Canonical class of an LG-flavor structure without external ubar
/// sources.
pub fn canonical_lg_class(s: &PairedLabeled) -> (Vec<LgTreeClass>, Vec<LgCircuitClass>) {
    assert!(s.ext_ubar.is_empty());
    let g = derived_graph(s);
    let mut visited = vec![false; g.verts.len()];
    let mut trees = Vec::new();
    for (v, dv) in g.verts.iter().enumerate() {
        if let DerivedVertex::USource(_) = dv {
            visited[v] = true;
            let child = g.children[v][0];
            trees.push(build_lg_tree(&g, child, &mut visited));
        }
    }
    let mut circuits: Vec<LgCircuitClass> = collect_circuits(&g, &mut visited, |g, v, visited| {
        build_lg_tree(g, v, visited)
    })
    .into_iter()
    .map(LgCircuitClass::new)
    .collect();
    circuits.sort();
    (trees, circuits)
}

/// Extract the remaining (circuit-like) components: for each cycle, the
/// per-vertex decorations in cycle order, decorated by hooked subtrees.
fn collect_circuits<T>(
    g: &DerivedGraph,
    visited: &mut Vec<bool>,
    mut build: impl FnMut(&DerivedGraph, usize, &mut Vec<bool>) -> T,
) -> Vec<Vec<Vec<T>>> {
    let mut out = Vec::new();
    for start in 0..g.verts.len() {
        if visited[start] {
            continue;
        }
        // walk out-edges until a repeat: the repeat closes the cycle
        let mut order: Vec<usize> = Vec::new();
        let mut pos: BTreeMap<usize, usize> = BTreeMap::new();
        let mut v = start;
        let cycle: Vec<usize> = loop {
            if visited[v] {
                // reached a previously handled component; the walk from
                // `start` merged into it, so no new cycle here
                break Vec::new();
            }
            if let Some(&p) = pos.get(&v) {
                break order[p..].to_vec();
            }
            pos.insert(v, order.len());
            order.push(v);
            v = g.out_edge[v].expect("non-root vertices have an out-edge");
        };
        if cycle.is_empty() {
            continue;
        }
        for &w in &cycle {
            visited[w] = true;
        }
        let cycle_set: BTreeSet<usize> = cycle.iter().copied().collect();
        let mut decorations: Vec<Vec<T>> = Vec::with_capacity(cycle.len());
        for (idx, &w) in cycle.iter().enumerate() {
            let prev = cycle[(idx + cycle.len() - 1) % cycle.len()];
            let mut hooked = Vec::new();
            let mut prev_seen = false;
            for &c in &g.children[w] {
                if c == prev && !prev_seen && cycle_set.contains(&c) {
                    prev_seen = true; // the incoming cycle line
                    continue;
                }
                hooked.push(build(g, c, visited));
            }
            decorations.push(hooked);
        }
        out.push(decorations);
    }
    out
}

// ---------------------------------------------------------------------
// Automorphism counting by backtracking (the orbit-stabilizer oracle)
// ---------------------------------------------------------------------

/// Count structure-preserving bijections of the ground set directly, by
/// backtracking over images with consistency pruning. Independent of the
/// closed product formulas.
pub fn labeled_aut_order(s: &PairedLabeled) -> u128 {
    let k = s.k;
    let block_of = s.block_of();
    let pmap = s.pairing_map();
    let mut inv_p: BTreeMap<usize, usize> = BTreeMap::new();
    for (&a, &b) in &pmap {
        inv_p.insert(b, a);
    }
    let mut ext_fixed = vec![false; k];
    for &x in s.ext_u.iter().chain(s.ext_ubar.iter()) {
        ext_fixed[x] = true;
    }
    let block_size = |x: usize| -> Option<usize> { block_of[x].map(|b| s.blocks[b].1.len()) };
    let is_owner = |x: usize| -> bool {
        block_of[x]
            .map(|b| s.blocks[b].0 == x)
            .unwrap_or(false)
    };

    let mut sigma: Vec<Option<usize>> = vec![None; k];
    let mut used = vec![false; k];
    let mut count: u128 = 0;

    fn consistent(
        s: &PairedLabeled,
        block_of: &[Option<usize>],
        pmap: &BTreeMap<usize, usize>,
        inv_p: &BTreeMap<usize, usize>,
        sigma: &[Option<usize>],
        x: usize,
        y: usize,
    ) -> bool {
        // same-block elements must map into one block
        if let Some(bx) = block_of[x] {
            let by = match block_of[y] {
                Some(b) => b,
                None => return false,
            };
            let (ox, usx) = &s.blocks[bx];
            let (oy, usy) = &s.blocks[by];
            if usx.len() != usy.len() {
                return false;
            }
            if (*ox == x) != (*oy == y) {
                return false;
            }
            // every already-mapped member of bx must land in by
            for &z in std::iter::once(ox).chain(usx.iter()) {
                if let Some(zy) = sigma[z] {
                    if z != x && block_of[zy] != Some(by) {
                        return false;
                    }
                }
            }
        } else if block_of[y].is_some() {
            return false;
        }
        // pairing equivariance where both endpoints are known
        if let Some(&t) = pmap.get(&x) {
            if let Some(ty) = sigma[t] {
                if pmap.get(&y) != Some(&ty) {
                    return false;
                }
            }
        }
        if let Some(&src) = inv_p.get(&x) {
            if let Some(sy) = sigma[src] {
                if pmap.get(&sy) != Some(&y) {
                    return false;
                }
            }
        }
        true
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        s: &PairedLabeled,
        block_of: &[Option<usize>],
        pmap: &BTreeMap<usize, usize>,
        inv_p: &BTreeMap<usize, usize>,
        ext_fixed: &[bool],
        block_size: &dyn Fn(usize) -> Option<usize>,
        is_owner: &dyn Fn(usize) -> bool,
        x: usize,
        sigma: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        count: &mut u128,
    ) {
        let k = s.k;
        if x == k {
            *count += 1;
            return;
        }
        let candidates: Vec<usize> = if ext_fixed[x] {
            vec![x]
        } else {
            (0..k)
                .filter(|&y| {
                    !used[y]
                        && !ext_fixed[y]
                        && s.is_ubar[y] == s.is_ubar[x]
                        && block_size(y) == block_size(x)
                        && is_owner(y) == is_owner(x)
                })
                .collect()
        };
        for y in candidates {
            if used[y] {
                continue;
            }
            if !consistent(s, block_of, pmap, inv_p, sigma, x, y) {
                continue;
            }
            sigma[x] = Some(y);
            used[y] = true;
            rec(
                s, block_of, pmap, inv_p, ext_fixed, block_size, is_owner, x + 1, sigma, used,
                count,
            );
            sigma[x] = None;
            used[y] = false;
        }
    }

    rec(
        s,
        &block_of,
        &pmap,
        &inv_p,
        &ext_fixed,
        &block_size,
        &is_owner,
        0,
        &mut sigma,
        &mut used,
        &mut count,
    );
    count
}

// ---------------------------------------------------------------------
// Labeled amplitudes (Definition-style sums over index attributions)
// ---------------------------------------------------------------------

/// Reversion-flavor Feynman amplitude of a labeled structure: the sum
/// over index attributions of covariance edge factors, `-F^{[p]}` vertex
/// tensors and `Y` leaf variables.
pub fn amplitude_rev_labeled(
    s: &PairedLabeled,
    f: &SeriesSystem,
    cov: &CovarianceSpec,
    tau_u: &[usize],
    tau_ubar: &[usize],
    out_trunc: u32,
) -> Result<Series, DiagramError> {
    let n = f.n_vars();
    let free: Vec<usize> = (0..s.k)
        .filter(|x| !s.ext_u.contains(x) && !s.ext_ubar.contains(x))
        .collect();
    let mut attribution = vec![0usize; s.k];
    for (i, &x) in s.ext_u.iter().enumerate() {
        attribution[x] = tau_u[i];
    }
    for (j, &x) in s.ext_ubar.iter().enumerate() {
        attribution[x] = tau_ubar[j];
    }
    let mut out = Series::zero(n, out_trunc);
    let mut digits = vec![0usize; free.len()];
    loop {
        for (pos, &x) in free.iter().enumerate() {
            attribution[x] = digits[pos];
        }
        let mut scalar = Rat::from_integer(1.into());
        let mut y_exp = vec![0u32; n];
        // edge factors
        for &(a, b) in &s.pairing {
            scalar *= &cov.inverse()[attribution[b]][attribution[a]];
            if scalar.is_zero() {
                break;
            }
        }
        if !scalar.is_zero() {
            for (owner, us) in &s.blocks {
                if us.is_empty() {
                    y_exp[attribution[*owner]] += 1;
                } else {
                    let js: Vec<usize> = us.iter().map(|&u| attribution[u]).collect();
                    let mu = mps_core::tensor::multiplicity_index(&js, n)?;
                    let t =
                        mps_core::tensor::tensor_element_at(f.component(attribution[*owner]), &mu)?;
                    scalar *= -t;
                    if scalar.is_zero() {
                        break;
                    }
                }
            }
        }
        if !scalar.is_zero() {
            let idx = MultiIndex::new(y_exp);
            if idx.degree() <= out_trunc {
                out = out.add(&Series::monomial(n, out_trunc, idx, scalar));
            }
        }
        if digits.is_empty() || !advance(&mut digits, n) {
            break;
        }
    }
    Ok(out)
}

/// LG-flavor amplitude: Kronecker edges, `X_i G^{[p]}` vertices.
pub fn amplitude_lg_labeled(
    s: &PairedLabeled,
    g: &SeriesSystem,
    tau_u: &[usize],
    out_trunc: u32,
) -> Result<Series, DiagramError> {
    assert!(s.ext_ubar.is_empty());
    let n = g.n_vars();
    let free: Vec<usize> = (0..s.k).filter(|x| !s.ext_u.contains(x)).collect();
    let mut attribution = vec![0usize; s.k];
    for (i, &x) in s.ext_u.iter().enumerate() {
        attribution[x] = tau_u[i];
    }
    let mut out = Series::zero(n, out_trunc);
    let mut digits = vec![0usize; free.len()];
    loop {
        for (pos, &x) in free.iter().enumerate() {
            attribution[x] = digits[pos];
        }
        let mut ok = true;
        for &(a, b) in &s.pairing {
            if attribution[a] != attribution[b] {
                ok = false;
                break;
            }
        }
        if ok {
            let mut scalar = Rat::from_integer(1.into());
            let mut x_exp = vec![0u32; n];
            for (owner, us) in &s.blocks {
                let oi = attribution[*owner];
                x_exp[oi] += 1;
                let js: Vec<usize> = us.iter().map(|&u| attribution[u]).collect();
                let mu = mps_core::tensor::multiplicity_index(&js, n)?;
                let t = mps_core::tensor::tensor_element_at(g.component(oi), &mu)?;
                scalar *= t;
                if scalar.is_zero() {
                    break;
                }
            }
            if !scalar.is_zero() {
                let idx = MultiIndex::new(x_exp);
                if idx.degree() <= out_trunc {
                    out = out.add(&Series::monomial(n, out_trunc, idx, scalar));
                }
            }
        }
        if digits.is_empty() || !advance(&mut digits, n) {
            break;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Realizations: one labeled representative of a class
// ---------------------------------------------------------------------

struct Builder {
    next: usize,
    is_ubar: Vec<bool>,
    blocks: Vec<(usize, Vec<usize>)>,
    pairing: Vec<(usize, usize)>,
    ext_ubar_slots: BTreeMap<usize, usize>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            next: 0,
            is_ubar: Vec::new(),
            blocks: Vec::new(),
            pairing: Vec::new(),
            ext_ubar_slots: BTreeMap::new(),
        }
    }

    fn elt(&mut self, ubar: bool) -> usize {
        let x = self.next;
        self.next += 1;
        self.is_ubar.push(ubar);
        x
    }

    fn build_tree(&mut self, t: &TreeClass, target_u: usize) {
        match t {
            TreeClass::Leaf => {
                let x = self.elt(true);
                self.blocks.push((x, Vec::new()));
                self.pairing.push((x, target_u));
            }
            TreeClass::Source(j) => {
                let x = self.elt(true);
                self.ext_ubar_slots.insert(*j, x);
                self.pairing.push((x, target_u));
            }
            TreeClass::Node(cs) => {
                let x = self.elt(true);
                let us: Vec<usize> = cs.iter().map(|_| self.elt(false)).collect();
                self.blocks.push((x, us.clone()));
                self.pairing.push((x, target_u));
                for (c, &u) in cs.iter().zip(us.iter()) {
                    self.build_tree(c, u);
                }
            }
        }
    }
}

/// A labeled representative of a reversion class: trees rooted at the
/// u-sources (in I order) plus vacuum circuits.
pub fn realize_rev(trees: &[TreeClass], circuits: &[RevCircuitClass]) -> PairedLabeled {
    let mut b = Builder::new();
    let mut ext_u = Vec::new();
    for t in trees {
        let root = b.elt(false);
        ext_u.push(root);
        b.build_tree(t, root);
    }
    for c in circuits {
        let p = c.verts().len();
        // one ubar owner and one cycle-entry u element per cycle vertex
        let owners: Vec<usize> = (0..p).map(|_| b.elt(true)).collect();
        let entries: Vec<usize> = (0..p).map(|_| b.elt(false)).collect();
        for q in 0..p {
            let trees_q = &c.verts()[q];
            let roots: Vec<usize> = trees_q.iter().map(|_| b.elt(false)).collect();
            let mut us = vec![entries[q]];
            us.extend(roots.iter().copied());
            us.sort_unstable();
            b.blocks.push((owners[q], us));
            // vertex q's ubar feeds vertex q+1's entry
            b.pairing.push((owners[q], entries[(q + 1) % p]));
            for (t, &r) in trees_q.iter().zip(roots.iter()) {
                b.build_tree(t, r);
            }
        }
    }
    let mut blocks = b.blocks;
    blocks.sort();
    for (_, us) in blocks.iter_mut() {
        us.sort_unstable();
    }
    let mut pairing = b.pairing;
    pairing.sort_unstable();
    let ext_ubar: Vec<usize> = b.ext_ubar_slots.values().copied().collect();
    PairedLabeled {
        k: b.next,
        is_ubar: b.is_ubar,
        ext_u,
        ext_ubar,
        blocks,
        pairing,
    }
}

/// A labeled representative of an LG class (trees at u-sources plus
/// circuits), built through the reversion builder on the shared shape.
/// XG leaves are carried as `Leaf`, arity-one XG vertices as raw
/// single-child nodes (the builder only walks the shape).
pub fn realize_lg(trees: &[LgTreeClass], circuits: &[LgCircuitClass]) -> PairedLabeled {
    fn to_shape(t: &LgTreeClass) -> TreeClass {
        if t.children().is_empty() {
            TreeClass::Leaf
        } else {
            let mut cs: Vec<TreeClass> = t.children().iter().map(to_shape).collect();
            cs.sort();
            TreeClass::Node(cs)
        }
    }
    let shape_trees: Vec<TreeClass> = trees.iter().map(to_shape).collect();
    let mut b = Builder::new();
    let mut ext_u = Vec::new();
    for t in &shape_trees {
        let root = b.elt(false);
        ext_u.push(root);
        b.build_tree(t, root);
    }
    for c in circuits {
        let p = c.verts().len();
        let owners: Vec<usize> = (0..p).map(|_| b.elt(true)).collect();
        let entries: Vec<usize> = (0..p).map(|_| b.elt(false)).collect();
        for q in 0..p {
            let trees_q: Vec<TreeClass> = c.verts()[q].iter().map(to_shape).collect();
            let roots: Vec<usize> = trees_q.iter().map(|_| b.elt(false)).collect();
            let mut us = vec![entries[q]];
            us.extend(roots.iter().copied());
            us.sort_unstable();
            b.blocks.push((owners[q], us));
            b.pairing.push((owners[q], entries[(q + 1) % p]));
            for (t, &r) in trees_q.iter().zip(roots.iter()) {
                b.build_tree(t, r);
            }
        }
    }
    let mut blocks = b.blocks;
    blocks.sort();
    for (_, us) in blocks.iter_mut() {
        us.sort_unstable();
    }
    let mut pairing = b.pairing;
    pairing.sort_unstable();
    PairedLabeled {
        k: b.next,
        is_ubar: b.is_ubar,
        ext_u,
        ext_ubar: Vec::new(),
        blocks,
        pairing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    
    use mps_core::sample::Sampler;

    #[test]
    fn empty_structure_exists_for_vacuum_type() {
        let all = enumerate_paired(0, 0, 0, PairedFlavor::Reversion).unwrap();
        assert_eq!(all.len(), 1);
        assert!(all[0].validate(PairedFlavor::Reversion, 0, 0));
        let (trees, circuits) = canonical_rev_class(&all[0]);
        assert!(trees.is_empty());
        assert!(circuits.is_empty());
        assert_eq!(labeled_aut_order(&all[0]), 1);
    }

    #[test]
    fn bare_propagator_count_and_aut() {
        // k=2, type ([1], {}): two labeled structures, one class, aut 1
        let all = enumerate_paired(2, 1, 0, PairedFlavor::Reversion).unwrap();
        assert_eq!(all.len(), 2);
        for s in &all {
            assert!(s.validate(PairedFlavor::Reversion, 1, 0));
            let (trees, circuits) = canonical_rev_class(s);
            assert_eq!(trees, vec![TreeClass::Leaf]);
            assert!(circuits.is_empty());
            assert_eq!(labeled_aut_order(s), 1);
        }
    }

    #[test]
    fn no_odd_or_starved_structures() {
        assert!(enumerate_paired(3, 1, 0, PairedFlavor::Reversion)
            .unwrap()
            .is_empty());
        // k=2 vacuum: the lone u element cannot join any legal block
        assert!(enumerate_paired(2, 0, 0, PairedFlavor::Reversion)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn transport_preserves_class_and_amplitude() {
        let t = TreeClass::node(vec![TreeClass::Leaf, TreeClass::node(vec![TreeClass::Leaf, TreeClass::Leaf])]);
        let s = realize_rev(std::slice::from_ref(&t), &[]);
        assert!(s.validate(PairedFlavor::Reversion, 1, 0));
        let sigma: Vec<usize> = (0..s.k).map(|x| (x + 3) % s.k).collect();
        let moved = s.transport(&sigma);
        assert!(moved.validate(PairedFlavor::Reversion, 1, 0));
        assert_eq!(canonical_rev_class(&moved).0, vec![t.clone()]);
        let mut rng = Sampler::new(91);
        let f = rng.invertible_system(2, 4, 3);
        let cov = CovarianceSpec::new(f.linear_part()).unwrap();
        let a1 = amplitude_rev_labeled(&s, &f, &cov, &[0], &[], 4).unwrap();
        let a2 = amplitude_rev_labeled(&moved, &f, &cov, &[0], &[], 4).unwrap();
        assert_eq!(a1, a2);
    }

    #[test]
    fn realization_aut_matches_formula() {
        for t in crate::tree::enumerate_reversion_trees(4) {
            let s = realize_rev(std::slice::from_ref(&t), &[]);
            assert_eq!(
                labeled_aut_order(&s),
                crate::tree::aut_order_tree(&t),
                "tree {}",
                t.encode()
            );
        }
    }

    #[test]
    fn circuit_realization_aut_matches_formula() {
        for c in crate::rev_circuit::enumerate_rev_circuits(3, &[]) {
            let s = realize_rev(&[], std::slice::from_ref(&c));
            assert!(s.validate(PairedFlavor::Reversion, 0, 0), "{}", c.encode());
            assert_eq!(
                labeled_aut_order(&s),
                crate::rev_circuit::aut_order_rev_circuit(&c),
                "circuit {}",
                c.encode()
            );
            let (trees, circuits) = canonical_rev_class(&s);
            assert!(trees.is_empty());
            assert_eq!(circuits, vec![c.clone()]);
        }
    }

    #[test]
    fn lg_realization_aut_matches_formula() {
        for t in crate::lg::enumerate_lg_trees(4) {
            let s = realize_lg(std::slice::from_ref(&t), &[]);
            assert!(s.validate(PairedFlavor::LagrangeGood, 1, 0));
            assert_eq!(
                labeled_aut_order(&s),
                crate::lg::aut_order_lg_tree(&t),
                "lg tree {}",
                t.encode()
            );
            let (trees, circuits) = canonical_lg_class(&s);
            assert_eq!(trees, vec![t.clone()]);
            assert!(circuits.is_empty());
        }
        for c in crate::lg::enumerate_lg_circuits(3) {
            let s = realize_lg(&[], std::slice::from_ref(&c));
            assert_eq!(
                labeled_aut_order(&s),
                crate::lg::aut_order_lg_circuit(&c),
                "lg circuit {}",
                c.encode()
            );
            let (_, circuits) = canonical_lg_class(&s);
            assert_eq!(circuits, vec![c.clone()]);
        }
    }

    #[test]
    fn labeled_amplitude_matches_class_amplitude() {
        // Prop-style check: the recursive class amplitude equals the
        // attribution-sum amplitude on a realization
        let mut rng = Sampler::new(17);
        let f = rng.invertible_system(2, 4, 3);
        let cov = CovarianceSpec::new(f.linear_part()).unwrap();
        for t in crate::tree::enumerate_reversion_trees(3) {
            let s = realize_rev(std::slice::from_ref(&t), &[]);
            for root in 0..2 {
                let via_class = crate::tree::amplitude_tree(&t, &f, &cov, root).unwrap();
                let via_labeled = amplitude_rev_labeled(&s, &f, &cov, &[root], &[], 4).unwrap();
                assert_eq!(via_class, via_labeled, "tree {} root {root}", t.encode());
            }
        }
    }

    #[test]
    fn labeled_circuit_amplitude_matches_class_amplitude() {
        // circuits of Y-degree <= 3 touch tensors up to degree 4, so the
        // system must be known one degree past the output window
        let mut rng = Sampler::new(19);
        let f = rng.invertible_system(2, 4, 3);
        let cov = CovarianceSpec::new(f.linear_part()).unwrap();
        for c in crate::rev_circuit::enumerate_rev_circuits(3, &[]) {
            let s = realize_rev(&[], std::slice::from_ref(&c));
            let via_class =
                crate::rev_circuit::amplitude_rev_circuit(&c, &f, &cov, &[]).unwrap();
            let via_labeled = amplitude_rev_labeled(&s, &f, &cov, &[], &[], 4).unwrap();
            assert_eq!(via_class, via_labeled, "circuit {}", c.encode());
        }
    }

    #[test]
    fn hand_count_h2_aut() {
        let s = realize_rev(
            &[TreeClass::node(vec![TreeClass::Leaf, TreeClass::Leaf])],
            &[],
        );
        assert_eq!(s.k, 6);
        assert_eq!(labeled_aut_order(&s), 2);
        let stats = s.size_stats();
        assert_eq!(stats.links, 3);
        assert_eq!(stats.derived_vertices, 4);
        assert_eq!(stats.y_vertices, 2);
    }

    #[test]
    fn guard_rejects_large_ground_sets() {
        assert!(matches!(
            enumerate_paired(12, 0, 0, PairedFlavor::Reversion),
            Err(DiagramError::GroundSetTooLarge { .. })
        ));
    }

    #[test]
    fn lg_amplitude_labeled_matches_class() {
        let mut rng = Sampler::new(23);
        let g = rng.polynomial_system(2, 3, 4, true);
        for t in crate::lg::enumerate_lg_trees(3) {
            let s = realize_lg(std::slice::from_ref(&t), &[]);
            for root in 0..2 {
                let via_class = crate::lg::amplitude_lg_tree(&t, &g, root).unwrap();
                let via_labeled = amplitude_lg_labeled(&s, &g, &[root], 3).unwrap();
                assert_eq!(via_class, via_labeled, "lg tree {} root {root}", t.encode());
            }
        }
    }
}
