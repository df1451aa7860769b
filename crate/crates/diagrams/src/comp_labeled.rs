//! Labeled composition-flavor structures: six field types, one layer of
//! F-vertices over G-vertices, and three contraction schemes. Used as
//! the oracle for the composition classes and for the bridge between the
//! diagrammatic sum and the three-block Gaussian integral.

use std::collections::{BTreeMap, BTreeSet};

use mps_core::rat::Rat;
use mps_core::SeriesSystem;
use num::Zero;
use wick::{gaussian_integral_triple, CovarianceSpec};

use crate::error::DiagramError;
use crate::tree::advance;

pub const COMP_LABELED_GUARD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CompField {
    SBar,
    S,
    TBar,
    T,
    UBar,
    U,
}

/// A labeled pre-Feynman composition structure. The external elements
/// are exactly the single s and the d ubar legs; everything else is
/// internal and partitioned into F-vertices (one sbar, >= 1 t) and
/// G-vertices (one tbar, >= 1 u).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompLabeled {
    pub k: usize,
    pub field: Vec<CompField>,
    pub ext_s: usize,
    pub ext_ubar: Vec<usize>,
    pub f_blocks: Vec<(usize, Vec<usize>)>,
    pub g_blocks: Vec<(usize, Vec<usize>)>,
}

/// The three contraction schemes of a Feynman structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompContraction {
    pub c_s: Vec<(usize, usize)>,
    pub c_t: Vec<(usize, usize)>,
    pub c_u: Vec<(usize, usize)>,
}

impl CompLabeled {
    pub fn elements_of(&self, f: CompField) -> Vec<usize> {
        (0..self.k).filter(|&x| self.field[x] == f).collect()
    }

    pub fn validate(&self) -> bool {
        let k = self.k;
        if self.field.len() != k {
            return false;
        }
        if self.field[self.ext_s] != CompField::S {
            return false;
        }
        let ext_ubar: BTreeSet<usize> = self.ext_ubar.iter().copied().collect();
        if ext_ubar.len() != self.ext_ubar.len()
            || !self
                .ext_ubar
                .iter()
                .all(|&x| self.field[x] == CompField::UBar)
        {
            return false;
        }
        // exactly one external s and only the listed external ubar legs
        if self.elements_of(CompField::S) != vec![self.ext_s] {
            return false;
        }
        if self.elements_of(CompField::UBar).len() != self.ext_ubar.len() {
            return false;
        }
        // blocks partition the internal elements with the right shapes
        let mut covered: BTreeSet<usize> = BTreeSet::new();
        for (owner, ts) in &self.f_blocks {
            if self.field[*owner] != CompField::SBar || ts.is_empty() || !covered.insert(*owner) {
                return false;
            }
            for &t in ts {
                if self.field[t] != CompField::T || !covered.insert(t) {
                    return false;
                }
            }
        }
        for (owner, us) in &self.g_blocks {
            if self.field[*owner] != CompField::TBar || us.is_empty() || !covered.insert(*owner) {
                return false;
            }
            for &u in us {
                if self.field[u] != CompField::U || !covered.insert(u) {
                    return false;
                }
            }
        }
        let internal: BTreeSet<usize> = (0..k)
            .filter(|&x| x != self.ext_s && !ext_ubar.contains(&x))
            .collect();
        covered == internal
    }

    /// `(sorted F-vertex t-leg counts, sorted G-vertex u-leg counts)`:
    /// the isomorphism-class key of a pre-Feynman structure.
    pub fn profile(&self) -> (Vec<usize>, Vec<usize>) {
        let mut f: Vec<usize> = self.f_blocks.iter().map(|(_, ts)| ts.len()).collect();
        let mut g: Vec<usize> = self.g_blocks.iter().map(|(_, us)| us.len()).collect();
        f.sort_unstable();
        g.sort_unstable();
        (f, g)
    }

    /// A contraction triple exists exactly when each barred field set
    /// matches its unbarred partner in size.
    pub fn admits_contraction(&self) -> bool {
        self.elements_of(CompField::SBar).len() == 1
            && self.elements_of(CompField::TBar).len() == self.elements_of(CompField::T).len()
            && self.ext_ubar.len() == self.elements_of(CompField::U).len()
    }

    /// All contraction triples (bijections per field pair).
    pub fn contractions(&self) -> Vec<CompContraction> {
        if !self.admits_contraction() {
            return Vec::new();
        }
        let sbar = self.elements_of(CompField::SBar);
        let s = self.elements_of(CompField::S);
        let tbar = self.elements_of(CompField::TBar);
        let t = self.elements_of(CompField::T);
        let ubar = self.elements_of(CompField::UBar);
        let u = self.elements_of(CompField::U);
        let mut out = Vec::new();
        for ps in bijections(&sbar, &s) {
            for pt in bijections(&tbar, &t) {
                for pu in bijections(&ubar, &u) {
                    out.push(CompContraction {
                        c_s: ps.clone(),
                        c_t: pt.clone(),
                        c_u: pu.clone(),
                    });
                }
            }
        }
        out
    }
}

fn bijections(from: &[usize], to: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if from.len() != to.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..to.len()).collect();
    permute(&mut perm, 0, &mut |p| {
        out.push(
            from.iter()
                .copied()
                .zip(p.iter().map(|&i| to[i]))
                .collect(),
        );
    });
    out
}

fn permute<F: FnMut(&[usize])>(p: &mut Vec<usize>, k: usize, f: &mut F) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// General pre-Feynman automorphism order from the block profile:
/// `prod_p m_{F,p}! (p!)^{m_{F,p}} * prod_q m_{G,q}! (q!)^{m_{G,q}}`.
pub fn comp_aut_formula(profile: &(Vec<usize>, Vec<usize>)) -> u128 {
    let factor = |sizes: &[usize]| -> u128 {
        let mut mult: BTreeMap<usize, u128> = BTreeMap::new();
        for &p in sizes {
            *mult.entry(p).or_insert(0) += 1;
        }
        mult.iter()
            .map(|(&p, &m)| factorial(m) * factorial(p as u128).pow(m as u32))
            .product()
    };
    factor(&profile.0) * factor(&profile.1)
}

fn factorial(m: u128) -> u128 {
    (1..=m).product::<u128>().max(1)
}

/// Automorphisms by literal brute force: every permutation of the
/// internal label set (extended by the identity on the external legs) is
/// tested for structure preservation.
pub fn comp_labeled_aut_order(s: &CompLabeled) -> u128 {
    let internal: Vec<usize> = (0..s.k)
        .filter(|&x| x != s.ext_s && !s.ext_ubar.contains(&x))
        .collect();
    let f_set: BTreeSet<(usize, Vec<usize>)> = s.f_blocks.iter().cloned().collect();
    let g_set: BTreeSet<(usize, Vec<usize>)> = s.g_blocks.iter().cloned().collect();
    let mut count: u128 = 0;
    let mut perm: Vec<usize> = (0..internal.len()).collect();
    permute(&mut perm, 0, &mut |p| {
        // sigma maps internal[i] -> internal[p[i]], identity elsewhere
        let mut sigma: Vec<usize> = (0..s.k).collect();
        for (i, &pi) in p.iter().enumerate() {
            sigma[internal[i]] = internal[pi];
        }
        for x in &internal {
            if s.field[sigma[*x]] != s.field[*x] {
                return;
            }
        }
        for (owner, ts) in &s.f_blocks {
            let mut img: Vec<usize> = ts.iter().map(|&t| sigma[t]).collect();
            img.sort_unstable();
            if !f_set.contains(&(sigma[*owner], img)) {
                return;
            }
        }
        for (owner, us) in &s.g_blocks {
            let mut img: Vec<usize> = us.iter().map(|&u| sigma[u]).collect();
            img.sort_unstable();
            if !g_set.contains(&(sigma[*owner], img)) {
                return;
            }
        }
        count += 1;
    });
    count
}

/// The worked 16-element example structure: one F-vertex with two t-legs
/// over G-vertices of arities three and two, with five external ubar
/// legs (0-based labels).
pub fn worked_composition_example() -> CompLabeled {
    use CompField::*;
    let field = vec![
        S,    // 0  external root leg
        SBar, // 1
        T,    // 2
        T,    // 3
        TBar, // 4
        U,    // 5
        U,    // 6
        U,    // 7
        TBar, // 8
        U,    // 9
        U,    // 10
        UBar, // 11
        UBar, // 12
        UBar, // 13
        UBar, // 14
        UBar, // 15
    ];
    CompLabeled {
        k: 16,
        field,
        ext_s: 0,
        ext_ubar: vec![11, 12, 13, 14, 15],
        f_blocks: vec![(1, vec![2, 3])],
        g_blocks: vec![(4, vec![5, 6, 7]), (8, vec![9, 10])],
    }
}

/// Exhaustive enumeration of pre-Feynman composition structures on `[k]`
/// of type `([1], [d])`.
pub fn enumerate_comp(k: usize, d: usize) -> Result<Vec<CompLabeled>, DiagramError> {
    if k > COMP_LABELED_GUARD {
        return Err(DiagramError::GroundSetTooLarge {
            k,
            max: COMP_LABELED_GUARD,
        });
    }
    let mut out = Vec::new();
    if k < 1 + d {
        return Ok(out);
    }
    for ext_s in 0..k {
        let rest: Vec<usize> = (0..k).filter(|&x| x != ext_s).collect();
        for ext_ubar in ordered_injections(&rest, d) {
            let internal: Vec<usize> = rest
                .iter()
                .copied()
                .filter(|x| !ext_ubar.contains(x))
                .collect();
            let m = internal.len();
            let mut digits = vec![0usize; m];
            loop {
                let mut field = vec![CompField::S; k];
                field[ext_s] = CompField::S;
                for &x in &ext_ubar {
                    field[x] = CompField::UBar;
                }
                for (pos, &x) in internal.iter().enumerate() {
                    field[x] = [CompField::SBar, CompField::T, CompField::TBar, CompField::U]
                        [digits[pos]];
                }
                let sbar: Vec<usize> = internal
                    .iter()
                    .copied()
                    .filter(|&x| field[x] == CompField::SBar)
                    .collect();
                let t: Vec<usize> = internal
                    .iter()
                    .copied()
                    .filter(|&x| field[x] == CompField::T)
                    .collect();
                let tbar: Vec<usize> = internal
                    .iter()
                    .copied()
                    .filter(|&x| field[x] == CompField::TBar)
                    .collect();
                let u: Vec<usize> = internal
                    .iter()
                    .copied()
                    .filter(|&x| field[x] == CompField::U)
                    .collect();
                for f_assign in owner_assignments(&t, &sbar) {
                    for g_assign in owner_assignments(&u, &tbar) {
                        let s = CompLabeled {
                            k,
                            field: field.clone(),
                            ext_s,
                            ext_ubar: ext_ubar.clone(),
                            f_blocks: f_assign.clone(),
                            g_blocks: g_assign.clone(),
                        };
                        debug_assert!(s.validate());
                        out.push(s);
                    }
                }
                if digits.is_empty() || !advance(&mut digits, 4) {
                    break;
                }
            }
        }
    }
    Ok(out)
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

/// Distribute legs among owners so every owner gets at least one leg.
fn owner_assignments(legs: &[usize], owners: &[usize]) -> Vec<Vec<(usize, Vec<usize>)>> {
    let mut out = Vec::new();
    if owners.is_empty() {
        if legs.is_empty() {
            out.push(Vec::new());
        }
        return out;
    }
    if legs.len() < owners.len() {
        return out;
    }
    let m = owners.len();
    let mut digits = vec![0usize; legs.len()];
    loop {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (pos, &d) in digits.iter().enumerate() {
            groups[d].push(legs[pos]);
        }
        if groups.iter().all(|g| !g.is_empty()) {
            let mut blocks: Vec<(usize, Vec<usize>)> = owners
                .iter()
                .copied()
                .zip(groups)
                .collect();
            blocks.sort();
            out.push(blocks);
        }
        if !advance(&mut digits, m) {
            break;
        }
    }
    out
}

/// Feynman amplitude of `(structure, contraction)` with external indices
/// `tau_s` (root) and `tau_ubar`: Kronecker edges, `F^{[p]}`/`G^{[q]}`
/// vertex tensors, a scalar in the ground ring.
pub fn comp_feynman_amplitude(
    s: &CompLabeled,
    c: &CompContraction,
    f: &SeriesSystem,
    g: &SeriesSystem,
    tau_s: usize,
    tau_ubar: &[usize],
) -> Result<Rat, DiagramError> {
    let n = f.n_vars();
    let internal: Vec<usize> = (0..s.k)
        .filter(|&x| x != s.ext_s && !s.ext_ubar.contains(&x))
        .collect();
    let mut attribution = vec![0usize; s.k];
    attribution[s.ext_s] = tau_s;
    for (j, &x) in s.ext_ubar.iter().enumerate() {
        attribution[x] = tau_ubar[j];
    }
    let mut total = Rat::zero();
    let mut digits = vec![0usize; internal.len()];
    loop {
        for (pos, &x) in internal.iter().enumerate() {
            attribution[x] = digits[pos];
        }
        let deltas_ok = c
            .c_s
            .iter()
            .chain(c.c_t.iter())
            .chain(c.c_u.iter())
            .all(|&(a, b)| attribution[a] == attribution[b]);
        if deltas_ok {
            let mut prod = Rat::from_integer(1.into());
            for (owner, ts) in &s.f_blocks {
                let js: Vec<usize> = ts.iter().map(|&t| attribution[t]).collect();
                let mu = mps_core::tensor::multiplicity_index(&js, n)?;
                prod *= mps_core::tensor::tensor_element_at(
                    f.component(attribution[*owner]),
                    &mu,
                )?;
                if prod.is_zero() {
                    break;
                }
            }
            if !prod.is_zero() {
                for (owner, us) in &s.g_blocks {
                    let js: Vec<usize> = us.iter().map(|&u| attribution[u]).collect();
                    let mu = mps_core::tensor::multiplicity_index(&js, n)?;
                    prod *= mps_core::tensor::tensor_element_at(
                        g.component(attribution[*owner]),
                        &mu,
                    )?;
                    if prod.is_zero() {
                        break;
                    }
                }
            }
            total += prod;
        }
        if digits.is_empty() || !advance(&mut digits, n) {
            break;
        }
    }
    Ok(total)
}

/// The three-block Gaussian integral of the pre-Feynman amplitude: sum
/// over index attributions of tensor products times the monomial
/// integral of the six field groups. Equals the sum of the Feynman
/// amplitudes over all contraction triples (and is zero when none
/// exist).
#[allow(clippy::too_many_arguments)]
pub fn comp_prefey_integral(
    s: &CompLabeled,
    cov_a: &CovarianceSpec,
    cov_b: &CovarianceSpec,
    cov_c: &CovarianceSpec,
    f: &SeriesSystem,
    g: &SeriesSystem,
    tau_s: usize,
    tau_ubar: &[usize],
) -> Result<Rat, DiagramError> {
    let n = f.n_vars();
    let internal: Vec<usize> = (0..s.k)
        .filter(|&x| x != s.ext_s && !s.ext_ubar.contains(&x))
        .collect();
    let mut attribution = vec![0usize; s.k];
    attribution[s.ext_s] = tau_s;
    for (j, &x) in s.ext_ubar.iter().enumerate() {
        attribution[x] = tau_ubar[j];
    }
    let mut total = Rat::zero();
    let mut digits = vec![0usize; internal.len()];
    loop {
        for (pos, &x) in internal.iter().enumerate() {
            attribution[x] = digits[pos];
        }
        let mut prod = Rat::from_integer(1.into());
        for (owner, ts) in &s.f_blocks {
            let js: Vec<usize> = ts.iter().map(|&t| attribution[t]).collect();
            let mu = mps_core::tensor::multiplicity_index(&js, n)?;
            prod *= mps_core::tensor::tensor_element_at(f.component(attribution[*owner]), &mu)?;
            if prod.is_zero() {
                break;
            }
        }
        if !prod.is_zero() {
            for (owner, us) in &s.g_blocks {
                let js: Vec<usize> = us.iter().map(|&u| attribution[u]).collect();
                let mu = mps_core::tensor::multiplicity_index(&js, n)?;
                prod *=
                    mps_core::tensor::tensor_element_at(g.component(attribution[*owner]), &mu)?;
                if prod.is_zero() {
                    break;
                }
            }
        }
        if !prod.is_zero() {
            let mu_of = |want: CompField| -> MultiIndexResult {
                let js: Vec<usize> = (0..s.k)
                    .filter(|&x| s.field[x] == want)
                    .map(|x| attribution[x])
                    .collect();
                mps_core::tensor::multiplicity_index(&js, n)
            };
            let alphas = [
                mu_of(CompField::SBar)?,
                mu_of(CompField::S)?,
                mu_of(CompField::TBar)?,
                mu_of(CompField::T)?,
                mu_of(CompField::UBar)?,
                mu_of(CompField::U)?,
            ];
            let w = gaussian_integral_triple(cov_a, cov_b, cov_c, &alphas);
            total += prod * w;
        }
        if digits.is_empty() || !advance(&mut digits, n) {
            break;
        }
    }
    Ok(total)
}

type MultiIndexResult = Result<mps_core::MultiIndex, mps_core::CoreError>;
