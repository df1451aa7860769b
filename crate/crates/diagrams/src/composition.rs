//! Composition diagram classes.
//!
//! The contributing shapes at X-degree d have a single F-vertex over a
//! family of G-vertices whose u-leg counts form an integer partition of
//! d; the class is that partition in multiplicity form.

use std::collections::BTreeMap;

use mps_core::rat::Rat;
use mps_core::tensor::tensor_element_at;
use mps_core::{Series, SeriesSystem};

use crate::error::DiagramError;
use crate::tree::advance;

/// `g_profile[q] = m_{G,q}`: the number of G-vertices with q u-legs.
/// Only nonzero multiplicities are stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CompositionClass {
    g_profile: BTreeMap<u32, u32>,
}

impl CompositionClass {
    pub fn new(g_profile: BTreeMap<u32, u32>) -> Self {
        assert!(!g_profile.is_empty());
        assert!(g_profile.iter().all(|(&q, &m)| q >= 1 && m >= 1));
        CompositionClass { g_profile }
    }

    pub fn profile(&self) -> &BTreeMap<u32, u32> {
        &self.g_profile
    }

    /// Number of G-vertices, which is also the F-vertex arity.
    pub fn m(&self) -> u32 {
        self.g_profile.values().sum()
    }

    /// X-degree `d = sum q * m_q`.
    pub fn degree(&self) -> u32 {
        self.g_profile.iter().map(|(&q, &m)| q * m).sum()
    }

    /// Parts in weakly decreasing order, one entry per G-vertex.
    pub fn parts(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (&q, &m) in self.g_profile.iter().rev() {
            out.extend(std::iter::repeat_n(q, m as usize));
        }
        out
    }

    pub fn encode(&self) -> String {
        let parts: Vec<String> = self.parts().iter().map(|p| p.to_string()).collect();
        parts.join("+")
    }
}

/// The classes of degree exactly `d`: integer partitions of `d` in
/// multiplicity form.
pub fn enumerate_composition_classes(d: u32) -> Vec<CompositionClass> {
    assert!(d >= 1);
    let mut out = Vec::new();
    let mut parts: Vec<u32> = Vec::new();
    fn rec(remaining: u32, max_part: u32, parts: &mut Vec<u32>, out: &mut Vec<CompositionClass>) {
        if remaining == 0 {
            let mut profile = BTreeMap::new();
            for &p in parts.iter() {
                *profile.entry(p).or_insert(0) += 1;
            }
            out.push(CompositionClass::new(profile));
            return;
        }
        for p in (1..=max_part.min(remaining)).rev() {
            parts.push(p);
            rec(remaining - p, p, parts, out);
            parts.pop();
        }
    }
    rec(d, d, &mut parts, &mut out);
    out
}

/// Pre-Feynman automorphism order with the single F-vertex of arity `m`:
/// `m! * prod_q m_q! (q!)^{m_q}`.
pub fn aut_order_composition(c: &CompositionClass) -> u128 {
    let mut total = factorial(c.m() as u128);
    for (&q, &m) in c.profile() {
        total *= factorial(m as u128) * factorial(q as u128).pow(m);
    }
    total
}

fn factorial(m: u128) -> u128 {
    (1..=m).product::<u128>().max(1)
}

/// The symmetrized class amplitude: for parts `w_1 >= ... >= w_m`,
/// `sum_a F^{[m]}_{i,a_1..a_m} prod_nu (w_nu! * G_{a_nu}^(w_nu))`,
/// X-homogeneous of degree d. Dividing by `aut/m!` and summing over the
/// classes of each degree reproduces the direct composition.
pub fn amplitude_composition(
    c: &CompositionClass,
    f: &SeriesSystem,
    g: &SeriesSystem,
    i: usize,
    out_trunc: u32,
) -> Result<Series, DiagramError> {
    assert!(out_trunc <= g.trunc_degree());
    let n = f.n_vars();
    let mut out = Series::zero(n, out_trunc);
    if c.degree() > out_trunc {
        return Ok(out);
    }
    let parts = c.parts();
    let m = parts.len();
    // w! * homogeneous degree-w part of G_j, the G-vertex leg sums
    let mut leg: Vec<Vec<Series>> = Vec::with_capacity(m);
    for &w in &parts {
        let factor = Rat::from_integer(factorial(w as u128).into());
        leg.push(
            (0..n)
                .map(|j| {
                    g.component(j)
                        .homogeneous_part(w)
                        .truncated_to(out_trunc)
                        .scale(&factor)
                })
                .collect(),
        );
    }
    let mut alpha = vec![0usize; m];
    loop {
        let mu = mps_core::tensor::multiplicity_index(&alpha, n)?;
        let tens = tensor_element_at(f.component(i), &mu)?;
        if !num::Zero::is_zero(&tens) {
            let mut prod = Series::constant(n, out_trunc, tens);
            for (nu, &a) in alpha.iter().enumerate() {
                prod = prod.mul(&leg[nu][a]);
                if prod.is_zero() {
                    break;
                }
            }
            out = out.add(&prod);
        }
        if !advance(&mut alpha, n) {
            break;
        }
    }
    Ok(out)
}
