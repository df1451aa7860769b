//! Lagrange-Good diagram classes: XG-vertex trees and circuits.
//!
//! An XG-vertex carries one ubar leg and any number of u legs, zero
//! included (the tree leaves). Contraction lines are Kronecker deltas, so
//! amplitudes contract without covariance factors; every vertex brings
//! one factor of its own `X` variable, which makes the X-degree of an
//! amplitude the vertex count.

use std::collections::BTreeSet;

use mps_core::{Series, SeriesSystem};

use crate::error::DiagramError;
use crate::rev_circuit::minimal_rotation;
use crate::tree::advance;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LgTreeClass {
    /// Sorted multiset of subtrees; empty for a leaf vertex.
    children: Vec<LgTreeClass>,
}

impl LgTreeClass {
    pub fn leaf() -> Self {
        LgTreeClass { children: Vec::new() }
    }

    pub fn node(mut children: Vec<LgTreeClass>) -> Self {
        children.sort();
        LgTreeClass { children }
    }

    pub fn children(&self) -> &[LgTreeClass] {
        &self.children
    }

    pub fn arity(&self) -> usize {
        self.children.len()
    }

    /// Total vertex count; equals the X-degree of the amplitude.
    pub fn node_count(&self) -> u32 {
        1 + self.children.iter().map(|c| c.node_count()).sum::<u32>()
    }

    pub fn is_canonical(&self) -> bool {
        self.children.windows(2).all(|w| w[0] <= w[1])
            && self.children.iter().all(|c| c.is_canonical())
    }

    pub fn encode(&self) -> String {
        if self.children.is_empty() {
            "G".to_string()
        } else {
            let inner: Vec<String> = self.children.iter().map(|c| c.encode()).collect();
            format!("G({})", inner.join(","))
        }
    }
}

/// Same recursion as the reversion trees: identical branches exchange.
pub fn aut_order_lg_tree(t: &LgTreeClass) -> u128 {
    let mut total: u128 = 1;
    let cs = &t.children;
    let mut i = 0;
    while i < cs.len() {
        let mut j = i;
        while j < cs.len() && cs[j] == cs[i] {
            j += 1;
        }
        let m = (j - i) as u128;
        total *= aut_order_lg_tree(&cs[i]).pow((j - i) as u32) * factorial(m);
        i = j;
    }
    total
}

fn factorial(m: u128) -> u128 {
    (1..=m).product::<u128>().max(1)
}

/// All canonical XG-tree classes with at most `max_nodes` vertices.
pub fn enumerate_lg_trees(max_nodes: u32) -> Vec<LgTreeClass> {
    let mut set: BTreeSet<LgTreeClass> = BTreeSet::new();
    if max_nodes >= 1 {
        set.insert(LgTreeClass::leaf());
    }
    loop {
        let current: Vec<LgTreeClass> = set.iter().cloned().collect();
        let mut added = false;
        for combo in crate::tree::multisets(&current, 1, max_nodes as usize, &mut |chosen| {
            chosen.iter().map(|c| c.node_count()).sum::<u32>() < max_nodes
        }) {
            let t = LgTreeClass::node(combo);
            if t.node_count() <= max_nodes && set.insert(t) {
                added = true;
            }
        }
        if !added {
            return set.into_iter().collect();
        }
    }
}

/// Tree amplitude under the XG Feynman rules: vertex `X_i G^{[p]}_{i,..}`,
/// Kronecker edges. `amp[i]` is the value with root ubar index `i`.
pub fn lg_tree_amp_vec(
    t: &LgTreeClass,
    g: &SeriesSystem,
    out_trunc: u32,
) -> Result<Vec<Series>, DiagramError> {
    let n = g.n_vars();
    let p = t.children.len();
    let child_amps: Vec<Vec<Series>> = t
        .children
        .iter()
        .map(|c| lg_tree_amp_vec(c, g, out_trunc))
        .collect::<Result<_, _>>()?;
    let mut out = vec![Series::zero(n, out_trunc); n];
    let mut beta = vec![0usize; p];
    loop {
        let mu = mps_core::tensor::multiplicity_index(&beta, n)?;
        let mut prod = Series::one(n, out_trunc);
        for (nu, &b) in beta.iter().enumerate() {
            prod = prod.mul(&child_amps[nu][b]);
            if prod.is_zero() {
                break;
            }
        }
        if !prod.is_zero() {
            for (i, oi) in out.iter_mut().enumerate() {
                let tens = mps_core::tensor::tensor_element_at(g.component(i), &mu)?;
                if !num::Zero::is_zero(&tens) {
                    *oi = oi.add(&prod.scale(&tens));
                }
            }
        }
        if !advance(&mut beta, n) {
            break;
        }
    }
    // the vertex's own X factor
    for (i, oi) in out.iter_mut().enumerate() {
        *oi = oi.mul(&Series::var(n, out_trunc, i));
    }
    Ok(out)
}

pub fn amplitude_lg_tree(
    t: &LgTreeClass,
    g: &SeriesSystem,
    root: usize,
) -> Result<Series, DiagramError> {
    Ok(lg_tree_amp_vec(t, g, g.trunc_degree())?[root].clone())
}

/// A directed necklace of XG-vertices, each decorated with a (possibly
/// empty) multiset of hooked trees; canonical up to rotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LgCircuitClass {
    verts: Vec<Vec<LgTreeClass>>,
}

impl LgCircuitClass {
    pub fn new(verts: Vec<Vec<LgTreeClass>>) -> Self {
        assert!(!verts.is_empty());
        let mut verts: Vec<Vec<LgTreeClass>> = verts
            .into_iter()
            .map(|mut v| {
                v.sort();
                v
            })
            .collect();
        let best = minimal_rotation(&verts);
        verts.rotate_left(best);
        LgCircuitClass { verts }
    }

    pub fn verts(&self) -> &[Vec<LgTreeClass>] {
        &self.verts
    }

    pub fn cycle_len(&self) -> usize {
        self.verts.len()
    }

    /// Total X-degree: cycle vertices plus all hooked-tree vertices.
    pub fn degree(&self) -> u32 {
        self.verts.len() as u32
            + self
                .verts
                .iter()
                .flat_map(|v| v.iter())
                .map(|t| t.node_count())
                .sum::<u32>()
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

pub fn aut_order_lg_circuit(c: &LgCircuitClass) -> u128 {
    let p = c.verts.len();
    let rot = (0..p)
        .filter(|&r| (0..p).all(|k| c.verts[(k + r) % p] == c.verts[k]))
        .count() as u128;
    let mut branches: u128 = 1;
    for v in &c.verts {
        let mut i = 0;
        while i < v.len() {
            let mut j = i;
            while j < v.len() && v[j] == v[i] {
                j += 1;
            }
            branches *= aut_order_lg_tree(&v[i]).pow((j - i) as u32) * factorial((j - i) as u128);
            i = j;
        }
    }
    rot * branches
}

/// All circuit classes of total X-degree at most `max_degree`.
pub fn enumerate_lg_circuits(max_degree: u32) -> Vec<LgCircuitClass> {
    if max_degree == 0 {
        return Vec::new();
    }
    let trees = enumerate_lg_trees(max_degree.saturating_sub(1));
    let vertex_choices: Vec<Vec<LgTreeClass>> =
        crate::tree::multisets(&trees, 0, max_degree as usize, &mut |chosen| {
            chosen.iter().map(|c| c.node_count()).sum::<u32>() < max_degree
        });
    let costs: Vec<u32> = vertex_choices
        .iter()
        .map(|v| 1 + v.iter().map(|t| t.node_count()).sum::<u32>())
        .collect();
    let mut out = BTreeSet::new();
    let mut seq: Vec<usize> = Vec::new();
    fn rec(
        choices: &[Vec<LgTreeClass>],
        costs: &[u32],
        budget: u32,
        seq: &mut Vec<usize>,
        out: &mut BTreeSet<LgCircuitClass>,
    ) {
        let used: u32 = seq.iter().map(|&i| costs[i]).sum();
        if used > budget {
            return;
        }
        if !seq.is_empty() {
            out.insert(LgCircuitClass::new(
                seq.iter().map(|&i| choices[i].clone()).collect(),
            ));
        }
        if used == budget {
            return;
        }
        for i in 0..choices.len() {
            if used + costs[i] <= budget {
                seq.push(i);
                rec(choices, costs, budget, seq, out);
                seq.pop();
            }
        }
    }
    rec(&vertex_choices, &costs, max_degree, &mut seq, &mut out);
    out.into_iter().collect()
}

/// Circuit amplitude: the trace of per-vertex transfer matrices
/// `U_q[x][y] = X_x G^{[k+1]}_{x,(y,i..)} * prod hooked-tree amplitudes`
/// (the Kronecker edge identifies the vertex ubar index with the next
/// vertex's slot).
pub fn amplitude_lg_circuit(
    c: &LgCircuitClass,
    g: &SeriesSystem,
) -> Result<Series, DiagramError> {
    let n = g.n_vars();
    let d = g.trunc_degree();
    let mut product: Option<Vec<Vec<Series>>> = None;
    for trees in &c.verts {
        let k = trees.len();
        let amps: Vec<Vec<Series>> = trees
            .iter()
            .map(|t| lg_tree_amp_vec(t, g, d))
            .collect::<Result<_, _>>()?;
        let mut u = vec![vec![Series::zero(n, d); n]; n]; // [x][y]
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
                for (x, ux) in u.iter_mut().enumerate() {
                    let tens = mps_core::tensor::tensor_element_at(g.component(x), &mu)?;
                    if !num::Zero::is_zero(&tens) {
                        ux[y] = ux[y].add(&prod.scale(&tens));
                    }
                }
            }
            if !advance(&mut slots, n) {
                break;
            }
        }
        for (x, ux) in u.iter_mut().enumerate() {
            let xvar = Series::var(n, d, x);
            for uxy in ux.iter_mut() {
                *uxy = uxy.mul(&xvar);
            }
        }
        product = Some(match product {
            None => u,
            Some(m) => mat_mul(&u, &m, n, d),
        });
    }
    let m = product.expect("nonempty circuit");
    let mut tr = Series::zero(n, d);
    for (i, row) in m.iter().enumerate() {
        tr = tr.add(&row[i]);
    }
    Ok(tr)
}

fn mat_mul(a: &[Vec<Series>], b: &[Vec<Series>], n: usize, d: u32) -> Vec<Vec<Series>> {
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

#[cfg(test)]
mod tests {
    use super::*;
    use mps_core::rat::rat_int;
    use mps_core::MultiIndex;

    fn leaf() -> LgTreeClass {
        LgTreeClass::leaf()
    }

    fn chain(k: u32) -> LgTreeClass {
        let mut t = leaf();
        for _ in 1..k {
            t = LgTreeClass::node(vec![t]);
        }
        t
    }

    #[test]
    fn tree_enumeration_counts() {
        assert_eq!(enumerate_lg_trees(1), vec![leaf()]);
        // sizes: 1 -> leaf; 2 -> chain(2); 3 -> chain(3) and the 2-star
        let upto3 = enumerate_lg_trees(3);
        assert_eq!(upto3.len(), 4);
        let exactly3: Vec<_> = upto3.iter().filter(|t| t.node_count() == 3).collect();
        assert_eq!(exactly3.len(), 2);
    }

    #[test]
    fn three_star_tree_symmetry_factor() {
        // root with three branches: a chain into a 3-star, a bare leaf,
        // and a 3-star; aut = 3! * 3! = 36
        let star3 = LgTreeClass::node(vec![leaf(), leaf(), leaf()]);
        let chain_star = LgTreeClass::node(vec![star3.clone()]);
        let t = LgTreeClass::node(vec![chain_star, leaf(), star3]);
        assert_eq!(aut_order_lg_tree(&t), 36);
    }

    #[test]
    fn three_level_amplitude_matches_displayed_contraction() {
        // the same tree evaluated two ways: the recursive amplitude and a
        // literal sum over all ten internal indices of
        //   X_i G3_{i,a1 a2 a3}
        //   * (X_{a1} G1_{a1,a4} X_{a4} G3_{a4,a5 a6 a7} X_{a5}G0 X_{a6}G0 X_{a7}G0)
        //   * (X_{a2} G0_{a2})
        //   * (X_{a3} G3_{a3,a8 a9 a10} X_{a8}G0 X_{a9}G0 X_{a10}G0)
        // with randomized tensors
        let n = 2usize;
        let window = 11u32; // the amplitude is X-homogeneous of degree 11
        let mut rng = mps_core::sample::Sampler::new(3636);
        let g = SeriesSystem::new(
            (0..n)
                .map(|_| {
                    let mut s = Series::zero(n, window);
                    for a in mps_core::MultiIndex::all_up_to_degree(n, 3) {
                        s.set_coeff(a, rng.small_rat());
                    }
                    s
                })
                .collect(),
        );
        let star3 = LgTreeClass::node(vec![leaf(), leaf(), leaf()]);
        let chain_star = LgTreeClass::node(vec![star3.clone()]);
        let t = LgTreeClass::node(vec![chain_star, leaf(), star3]);

        let g0 = |i: usize| {
            mps_core::tensor::tensor_element_at(g.component(i), &MultiIndex::zero(n)).unwrap()
        };
        let g1 = |i: usize, j: usize| {
            mps_core::tensor::tensor_element_at(g.component(i), &MultiIndex::unit(n, j)).unwrap()
        };
        let g3 = |i: usize, js: [usize; 3]| {
            let mu = mps_core::tensor::multiplicity_index(&js, n).unwrap();
            mps_core::tensor::tensor_element_at(g.component(i), &mu).unwrap()
        };
        for i in 0..n {
            let mut direct = Series::zero(n, window);
            let mut a = [0usize; 10];
            loop {
                let coeff = g3(i, [a[0], a[1], a[2]])
                    * g1(a[0], a[3])
                    * g3(a[3], [a[4], a[5], a[6]])
                    * g0(a[4])
                    * g0(a[5])
                    * g0(a[6])
                    * g0(a[1])
                    * g3(a[2], [a[7], a[8], a[9]])
                    * g0(a[7])
                    * g0(a[8])
                    * g0(a[9]);
                if !num::Zero::is_zero(&coeff) {
                    let mut exps = vec![0u32; n];
                    exps[i] += 1;
                    for &idx in &a {
                        exps[idx] += 1;
                    }
                    direct = direct.add(&Series::monomial(
                        n,
                        window,
                        MultiIndex::new(exps),
                        coeff,
                    ));
                }
                if !advance(&mut a, n) {
                    break;
                }
            }
            assert_eq!(amplitude_lg_tree(&t, &g, i).unwrap(), direct, "root {i}");
        }
    }

    #[test]
    fn leaf_amplitude_is_constant_part_times_x() {
        // n=1, G = 2 + u: leaf amplitude X * G(0) = 2X
        let g = SeriesSystem::new(vec![Series::constant(1, 3, rat_int(2))
            .add(&Series::var(1, 3, 0))]);
        let amp = amplitude_lg_tree(&leaf(), &g, 0).unwrap();
        assert_eq!(amp, Series::var(1, 3, 0).scale(&rat_int(2)));
    }

    #[test]
    fn chain_amplitude() {
        // n=1, G = 1 + u: chain of 2 gives X*(X*1)*1 = X^2
        let g = SeriesSystem::new(vec![Series::one(1, 3).add(&Series::var(1, 3, 0))]);
        let amp = amplitude_lg_tree(&chain(2), &g, 0).unwrap();
        assert_eq!(amp, Series::monomial(1, 3, MultiIndex::new(vec![2]), rat_int(1)));
    }

    #[test]
    fn circuit_enumeration_and_auts() {
        let deg1 = enumerate_lg_circuits(1);
        assert_eq!(deg1.len(), 1);
        assert_eq!(deg1[0].cycle_len(), 1);
        assert_eq!(aut_order_lg_circuit(&deg1[0]), 1);
        let two_cycle = LgCircuitClass::new(vec![vec![], vec![]]);
        assert_eq!(aut_order_lg_circuit(&two_cycle), 2);
        // degree <= 2: 1-cycle, 2-cycle, 1-cycle with one leaf hooked
        assert_eq!(enumerate_lg_circuits(2).len(), 3);
        // degree <= 3 adds: 3-cycle, 2-cycle + leaf, 1-cycle + {leaf,leaf},
        // 1-cycle + {chain2}
        assert_eq!(enumerate_lg_circuits(3).len(), 7);
    }

    #[test]
    fn one_cycle_amplitude_is_trace_of_xg1() {
        // n=1, G = 1 + u: 1-cycle amplitude X * G^{[1]} = X
        let g = SeriesSystem::new(vec![Series::one(1, 3).add(&Series::var(1, 3, 0))]);
        let c = LgCircuitClass::new(vec![vec![]]);
        let amp = amplitude_lg_circuit(&c, &g).unwrap();
        assert_eq!(amp, Series::var(1, 3, 0));
    }
}
