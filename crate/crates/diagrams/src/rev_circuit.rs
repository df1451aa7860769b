//! Reversion-flavor vacuum circuits: a directed cycle of H-vertices with
//! trees hooked on. Each circuit vertex keeps one u-leg for the incoming
//! cycle line, so it carries at least one hooked tree (arity >= 2).
//! Canonical form is the lexicographically minimal rotation; the cycle is
//! oriented, reflections are distinct classes.

use std::collections::{BTreeMap, BTreeSet};

use mps_core::{Series, SeriesSystem};
use wick::CovarianceSpec;

use crate::error::DiagramError;
use crate::tree::{advance, aut_of_grouped, grow_trees, multisets, TreeClass};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RevCircuitClass {
    /// One sorted, nonempty multiset of hooked trees per cycle vertex, in
    /// cycle order (vertex q's ubar line feeds vertex q+1 mod p).
    verts: Vec<Vec<TreeClass>>,
}

impl RevCircuitClass {
    pub fn new(verts: Vec<Vec<TreeClass>>) -> Self {
        assert!(!verts.is_empty());
        for v in &verts {
            assert!(!v.is_empty(), "circuit H-vertices carry at least one tree");
        }
        let mut verts: Vec<Vec<TreeClass>> = verts
            .into_iter()
            .map(|mut v| {
                v.sort();
                v
            })
            .collect();
        let best = minimal_rotation(&verts);
        verts.rotate_left(best);
        RevCircuitClass { verts }
    }

    pub fn verts(&self) -> &[Vec<TreeClass>] {
        &self.verts
    }

    pub fn cycle_len(&self) -> usize {
        self.verts.len()
    }

    pub fn y_degree(&self) -> u32 {
        self.verts
            .iter()
            .flat_map(|v| v.iter())
            .map(|t| t.y_leaves())
            .sum()
    }

    pub fn sources(&self) -> BTreeSet<usize> {
        self.verts
            .iter()
            .flat_map(|v| v.iter())
            .flat_map(|t| t.sources())
            .collect()
    }

    /// Derived-graph vertex count: cycle vertices plus hooked trees.
    pub fn vertex_count(&self) -> usize {
        self.verts.len()
            + self
                .verts
                .iter()
                .flat_map(|v| v.iter())
                .map(|t| t.vertex_count())
                .sum::<usize>()
    }

    pub fn encode(&self) -> String {
        let vs: Vec<String> = self
            .verts
            .iter()
            .map(|v| {
                let ts: Vec<String> = v.iter().map(|t| t.encode()).collect();
                format!("{{{}}}", ts.join(","))
            })
            .collect();
        format!("O[{}]", vs.join(";"))
    }
}

pub(crate) fn minimal_rotation<T: Ord>(seq: &[T]) -> usize {
    let mut best = 0;
    for r in 1..seq.len() {
        if rotation_cmp(seq, r, best) == std::cmp::Ordering::Less {
            best = r;
        }
    }
    best
}

fn rotation_cmp<T: Ord>(seq: &[T], a: usize, b: usize) -> std::cmp::Ordering {
    let p = seq.len();
    for k in 0..p {
        let ord = seq[(a + k) % p].cmp(&seq[(b + k) % p]);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// Rotations fixing the decorated cycle, times per-vertex branch exchange
/// and branch-internal factors. The cycle orientation is directed, so no
/// reflection enters.
pub fn aut_order_rev_circuit(c: &RevCircuitClass) -> u128 {
    let p = c.verts.len();
    let rot = (0..p)
        .filter(|&r| (0..p).all(|k| c.verts[(k + r) % p] == c.verts[k]))
        .count() as u128;
    let branches: u128 = c.verts.iter().map(|v| aut_of_grouped(v)).product();
    rot * branches
}

/// All circuit classes with total Y-degree at most `max_y` (at least one
/// Y-leaf unless sources are present) and each given source label used
/// exactly once across all hooked trees.
pub fn enumerate_rev_circuits(max_y: u32, source_labels: &[usize]) -> Vec<RevCircuitClass> {
    let trees = grow_trees(max_y, source_labels);
    let max_branches = (max_y as usize) + source_labels.len();
    let vertex_choices: Vec<Vec<TreeClass>> = multisets(&trees, 1, max_branches, &mut |chosen| {
        decoration_ok(chosen, max_y)
    });
    let budgets: Vec<(u32, BTreeSet<usize>)> = vertex_choices
        .iter()
        .map(|v| {
            (
                v.iter().map(|t| t.y_leaves()).sum(),
                v.iter().flat_map(|t| t.sources()).collect(),
            )
        })
        .collect();
    let want: BTreeSet<usize> = source_labels.iter().copied().collect();
    // every vertex costs at least one unit of (Y + source) budget
    let max_p = (max_y as usize) + source_labels.len();
    let mut out = BTreeSet::new();
    let mut seq: Vec<usize> = Vec::new();
    build_cycles(
        &vertex_choices,
        &budgets,
        max_y,
        &want,
        max_p,
        &mut seq,
        &mut out,
    );
    out.into_iter().collect()
}

#[allow(clippy::too_many_arguments)]
fn build_cycles(
    choices: &[Vec<TreeClass>],
    budgets: &[(u32, BTreeSet<usize>)],
    max_y: u32,
    want: &BTreeSet<usize>,
    max_p: usize,
    seq: &mut Vec<usize>,
    out: &mut BTreeSet<RevCircuitClass>,
) {
    let used_y: u32 = seq.iter().map(|&i| budgets[i].0).sum();
    let mut used_src: BTreeSet<usize> = BTreeSet::new();
    for &i in seq.iter() {
        for s in &budgets[i].1 {
            if !used_src.insert(*s) {
                return; // duplicate source label
            }
        }
    }
    if used_y > max_y {
        return;
    }
    if !seq.is_empty() && &used_src == want {
        out.insert(RevCircuitClass::new(
            seq.iter().map(|&i| choices[i].clone()).collect(),
        ));
    }
    if seq.len() == max_p {
        return;
    }
    for i in 0..choices.len() {
        seq.push(i);
        build_cycles(choices, budgets, max_y, want, max_p, seq, out);
        seq.pop();
    }
}

fn decoration_ok(chosen: &[TreeClass], max_y: u32) -> bool {
    let y: u32 = chosen.iter().map(|c| c.y_leaves()).sum();
    if y > max_y {
        return false;
    }
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

/// Feynman amplitude of a vacuum circuit: the trace around the cycle of
/// per-vertex transfer matrices `U_q[x][y] = sum_b Ainv[x][b] *
/// (-F^{[k+1]}_{b,(y,i..)}) * prod tree-amplitudes`.
pub fn amplitude_rev_circuit(
    c: &RevCircuitClass,
    f: &SeriesSystem,
    cov: &CovarianceSpec,
    tau_ubar: &[usize],
) -> Result<Series, DiagramError> {
    let mut cache = RevAmpCache::default();
    amplitude_rev_circuit_at(c, f, cov, tau_ubar, f.trunc_degree(), &mut cache)
}

/// As `amplitude_rev_circuit`, with an explicit output window (tensor
/// lookups still use the full window of `f`) and reuse of hooked-tree
/// amplitude vectors across calls; the same subtree classes recur in
/// many circuits.
pub fn amplitude_rev_circuit_at(
    c: &RevCircuitClass,
    f: &SeriesSystem,
    cov: &CovarianceSpec,
    tau_ubar: &[usize],
    out_trunc: u32,
    cache: &mut RevAmpCache,
) -> Result<Series, DiagramError> {
    let n = f.n_vars();
    let d = out_trunc;
    let mut product: Option<Vec<Vec<Series>>> = None;
    for trees in &c.verts {
        if let Some(u) = cache.vertex.get(trees) {
            let u = u.clone();
            product = Some(match product {
                None => u,
                Some(m) => mat_mul_series(&u, &m, n, d),
            });
            continue;
        }
        let k = trees.len();
        let mut amps: Vec<Vec<Series>> = Vec::with_capacity(k);
        for t in trees {
            amps.push(crate::tree::tree_amp_vec_cached(
                t,
                f,
                cov,
                tau_ubar,
                d,
                &mut cache.tree,
            )?);
        }
        // vertex tensor with covariant slots (cycle-u, tree roots)
        let mut vertex = vec![vec![Series::zero(n, d); n]; n]; // [b][y]
        let mut slots = vec![0usize; k + 1];
        loop {
            let mu = mps_core::tensor::multiplicity_index(&slots, n)?;
            let y = slots[0];
            let mut prod = Series::one(n, d);
            for (nu, &i) in slots[1..].iter().enumerate() {
                prod = prod.mul(&amps[nu][i]);
                if prod.is_zero() {
                    break;
                }
            }
            if !prod.is_zero() {
                for b in 0..n {
                    let t = mps_core::tensor::tensor_element_at(f.component(b), &mu)?;
                    if !num::Zero::is_zero(&t) {
                        vertex[b][y] = vertex[b][y].add(&prod.scale(&-t));
                    }
                }
            }
            if !advance(&mut slots, n) {
                break;
            }
        }
        // U[x][y] = sum_b Ainv[x][b] vertex[b][y]
        let mut u = vec![vec![Series::zero(n, d); n]; n];
        for (x, ux) in u.iter_mut().enumerate() {
            for (y, uxy) in ux.iter_mut().enumerate() {
                let mut acc = Series::zero(n, d);
                for (b, row) in vertex.iter().enumerate() {
                    if !row[y].is_zero() {
                        acc = acc.add(&row[y].scale(&cov.inverse()[x][b]));
                    }
                }
                *uxy = acc;
            }
        }
        cache.vertex.insert(trees.clone(), u.clone());
        product = Some(match product {
            None => u,
            Some(m) => mat_mul_series(&u, &m, n, d),
        });
    }
    let m = product.expect("circuit has at least one vertex");
    let mut tr = Series::zero(n, d);
    for (i, row) in m.iter().enumerate() {
        tr = tr.add(&row[i]);
    }
    Ok(tr)
}

/// Memoized subvalues shared across the circuit classes of one sum:
/// hooked-tree amplitude vectors and whole vertex transfer matrices
/// (keyed by the sorted decoration multiset).
#[derive(Debug, Default)]
pub struct RevAmpCache {
    tree: BTreeMap<TreeClass, Vec<Series>>,
    vertex: BTreeMap<Vec<TreeClass>, Vec<Vec<Series>>>,
}

fn mat_mul_series(a: &[Vec<Series>], b: &[Vec<Series>], n: usize, d: u32) -> Vec<Vec<Series>> {
    let n_vars = a[0][0].n_vars();
    let mut out = vec![vec![Series::zero(n_vars, d); n]; n];
    for (i, oi) in out.iter_mut().enumerate() {
        for (j, oij) in oi.iter_mut().enumerate() {
            let mut acc = Series::zero(n_vars, d);
            for (k, bk) in b.iter().enumerate() {
                if !a[i][k].is_zero() && !bk[j].is_zero() {
                    acc = acc.add(&a[i][k].mul(&bk[j]));
                }
            }
            *oij = acc;
        }
    }
    out
}
