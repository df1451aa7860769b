//! Correlation functions of the reversion field theory and the
//! moment-cumulant (cluster) identity.
//!
//! Connected correlations are diagram sums: tree classes when there is
//! one u-source, circuit classes when there are none, zero for two or
//! more u-sources (no connected shape carries more than one root).
//! Unnormalized correlations are computed by direct termwise Gaussian
//! integration - no diagrams - so the cluster identity is a genuine
//! cross-check between two independent routes.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use diagrams::rev_circuit::{
    aut_order_rev_circuit, enumerate_rev_circuits, RevCircuitClass,
};
use diagrams::tree::{
    aut_order_tree, enumerate_trees_with_sources, TreeClass,
};
use mps_core::rat::Rat;
use mps_core::{Series, SeriesSystem};
use wick::integrate_exp_interaction;

use crate::error::InversionError;
use crate::revert::linear_covariance;
use crate::zw::{free_energy_w, partition_function_z, reversion_interaction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    Unnormalized,
    Normalized,
    Connected,
}

/// Index assignments for the external legs: `u_indices[i] = tau_u(i)`,
/// `ubar_indices[j] = tau_ubar(j)`, all 0-based component indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationSpec {
    pub u_indices: Vec<usize>,
    pub ubar_indices: Vec<usize>,
    pub kind: CorrelationKind,
}

fn window_needed(d: u32, j_count: usize) -> u32 {
    d + j_count as u32 + 1
}

fn check_window(f: &SeriesSystem, d: u32, j_count: usize) -> Result<(), InversionError> {
    let need = window_needed(d, j_count);
    if f.trunc_degree() < need {
        return Err(InversionError::TruncationInsufficient {
            need,
            have: f.trunc_degree(),
        });
    }
    Ok(())
}

type TreeCache = BTreeMap<(u32, usize), Arc<Vec<(TreeClass, u128)>>>;
type CircuitCache = BTreeMap<(u32, usize), Arc<Vec<(RevCircuitClass, u128)>>>;

fn sourced_trees(d: u32, j_count: usize) -> Arc<Vec<(TreeClass, u128)>> {
    static CACHE: OnceLock<Mutex<TreeCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((d, j_count))
        .or_insert_with(|| {
            let labels: Vec<usize> = (0..j_count).collect();
            Arc::new(
                enumerate_trees_with_sources(d, &labels)
                    .into_iter()
                    .map(|t| {
                        let aut = aut_order_tree(&t);
                        (t, aut)
                    })
                    .collect(),
            )
        })
        .clone()
}

fn sourced_circuits(d: u32, j_count: usize) -> Arc<Vec<(RevCircuitClass, u128)>> {
    static CACHE: OnceLock<Mutex<CircuitCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((d, j_count))
        .or_insert_with(|| {
            let labels: Vec<usize> = (0..j_count).collect();
            Arc::new(
                enumerate_rev_circuits(d, &labels)
                    .into_iter()
                    .map(|c| {
                        let aut = aut_order_rev_circuit(&c);
                        (c, aut)
                    })
                    .collect(),
            )
        })
        .clone()
}

/// Sum over connected diagram classes of the given type. Exact; zero for
/// two or more u-sources.
pub fn connected_correlation(
    f: &SeriesSystem,
    tau_u: &[usize],
    tau_ubar: &[usize],
    d: u32,
) -> Result<Series, InversionError> {
    let n = f.n_vars();
    check_window(f, d, tau_ubar.len())?;
    let cov = linear_covariance(f)?;
    let window = f.truncated_to(window_needed(d, tau_ubar.len()));
    match tau_u.len() {
        0 => {
            if tau_ubar.is_empty() {
                // the connected vacuum sum is the free energy
                return free_energy_w(f, d);
            }
            let mut acc = Series::zero(n, d);
            let mut amp_cache = diagrams::rev_circuit::RevAmpCache::default();
            for (c, aut) in sourced_circuits(d, tau_ubar.len()).iter() {
                let amp = diagrams::rev_circuit::amplitude_rev_circuit_at(
                    c, &window, &cov, tau_ubar, d, &mut amp_cache,
                )?;
                if !amp.is_zero() {
                    let weight =
                        Rat::from_integer(1.into()) / Rat::from_integer((*aut).into());
                    acc = acc.add(&amp.scale(&weight));
                }
            }
            Ok(acc)
        }
        1 => {
            let mut acc = Series::zero(n, d);
            let mut tree_cache = BTreeMap::new();
            for (t, aut) in sourced_trees(d, tau_ubar.len()).iter() {
                let amp = diagrams::tree::tree_amp_vec_cached(
                    t, &window, &cov, tau_ubar, d, &mut tree_cache,
                )?[tau_u[0]]
                .clone();
                if !amp.is_zero() {
                    let weight =
                        Rat::from_integer(1.into()) / Rat::from_integer((*aut).into());
                    acc = acc.add(&amp.scale(&weight));
                }
            }
            Ok(acc)
        }
        _ => Ok(Series::zero(n, d)),
    }
}

/// Unnormalized correlation by the Wick route:
/// `det A * integral of (prod u)(prod ubar) exp(ubar H + ubar Y)`.
pub fn unnormalized_correlation(
    f: &SeriesSystem,
    tau_u: &[usize],
    tau_ubar: &[usize],
    d: u32,
) -> Result<Series, InversionError> {
    if !f.is_constant_free() {
        return Err(mps_core::CoreError::ConstantTermPresent.into());
    }
    if f.trunc_degree() < d + 1 {
        return Err(InversionError::TruncationInsufficient {
            need: d + 1,
            have: f.trunc_degree(),
        });
    }
    let n = f.n_vars();
    let cov = linear_covariance(f)?;
    let interaction = reversion_interaction(f, d);
    let pre_u = mps_core::tensor::multiplicity_index(tau_u, n)?;
    let pre_ubar = mps_core::tensor::multiplicity_index(tau_ubar, n)?;
    let raw = integrate_exp_interaction(&cov, &interaction, &pre_ubar, &pre_u)?;
    Ok(raw.scale(cov.det()))
}

/// Dispatch on the requested kind. Normalized divides the Wick-route
/// unnormalized value by `Z` from the same route.
pub fn correlation(
    f: &SeriesSystem,
    spec: &CorrelationSpec,
    d: u32,
) -> Result<Series, InversionError> {
    match spec.kind {
        CorrelationKind::Connected => {
            connected_correlation(f, &spec.u_indices, &spec.ubar_indices, d)
        }
        CorrelationKind::Unnormalized => {
            unnormalized_correlation(f, &spec.u_indices, &spec.ubar_indices, d)
        }
        CorrelationKind::Normalized => {
            let unnorm = unnormalized_correlation(f, &spec.u_indices, &spec.ubar_indices, d)?;
            let z = crate::zw::partition_function_z_wick(f, d)?;
            Ok(unnorm.mul(&z.reciprocal()?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterReport {
    pub lhs: Series,
    pub rhs: Series,
    pub holds: bool,
}

/// Reusable cluster-identity checker for one system: computes `Z` and
/// the capped interaction exponential once, and memoizes connected
/// correlations under the relabelling invariance of source legs (the
/// value depends only on the assignment multisets).
pub struct ClusterChecker<'a> {
    f: &'a SeriesSystem,
    d: u32,
    z: Series,
    cov: wick::CovarianceSpec,
    expd: wick::MixedSeries,
    connected: BTreeMap<(Vec<usize>, Vec<usize>), Series>,
}

impl<'a> ClusterChecker<'a> {
    /// `max_sources` is the largest `|J|` that will be probed; the shared
    /// exponential is expanded under the caps that bound every such probe.
    pub fn new(f: &'a SeriesSystem, d: u32, max_sources: usize) -> Result<Self, InversionError> {
        let z = partition_function_z(f, d)?;
        let cov = linear_covariance(f)?;
        let interaction = reversion_interaction(f, d);
        let cap = 2 * (d + max_sources as u32);
        // the loosest balance target over probes with at most
        // `max_sources` ubar legs keeps a superset of every probe's terms
        let expd = interaction.exp_interaction_balanced(cap, cap, max_sources as i64)?;
        Ok(ClusterChecker {
            f,
            d,
            z,
            cov,
            expd,
            connected: BTreeMap::new(),
        })
    }

    fn connected_cached(
        &mut self,
        tau_u: &[usize],
        tau_ubar: &[usize],
    ) -> Result<Series, InversionError> {
        let mut key_u = tau_u.to_vec();
        let mut key_ubar = tau_ubar.to_vec();
        key_u.sort_unstable();
        key_ubar.sort_unstable();
        let key = (key_u, key_ubar);
        if let Some(v) = self.connected.get(&key) {
            return Ok(v.clone());
        }
        let v = connected_correlation(self.f, &key.0, &key.1, self.d)?;
        self.connected.insert(key, v.clone());
        Ok(v)
    }

    /// Wick-route unnormalized correlation through the shared exponential.
    pub fn unnormalized(
        &self,
        tau_u: &[usize],
        tau_ubar: &[usize],
    ) -> Result<Series, InversionError> {
        let n = self.f.n_vars();
        let pre_u = mps_core::tensor::multiplicity_index(tau_u, n)?;
        let pre_ubar = mps_core::tensor::multiplicity_index(tau_ubar, n)?;
        let full = self.expd.mul_field_monomial(&pre_ubar, &pre_u);
        Ok(wick::gaussian_integral_series(&self.cov, &full).scale(self.cov.det()))
    }

    /// One probe: Wick-route unnormalized against `Z * cluster sum`.
    pub fn check(
        &mut self,
        tau_u: &[usize],
        tau_ubar: &[usize],
    ) -> Result<ClusterReport, InversionError> {
        let n = self.f.n_vars();
        let lhs = self.unnormalized(tau_u, tau_ubar)?;
        let mut cluster = Series::zero(n, self.d);
        for pi in pair_partition_sets(tau_u.len(), tau_ubar.len()) {
            let mut prod = Series::one(n, self.d);
            for (i_part, j_part) in &pi {
                let sub_u: Vec<usize> = i_part.iter().map(|&p| tau_u[p]).collect();
                let sub_ubar: Vec<usize> = j_part.iter().map(|&p| tau_ubar[p]).collect();
                let conn = self.connected_cached(&sub_u, &sub_ubar)?;
                prod = prod.mul(&conn);
                if prod.is_zero() {
                    break;
                }
            }
            cluster = cluster.add(&prod);
        }
        let rhs = self.z.mul(&cluster);
        let holds = lhs == rhs;
        Ok(ClusterReport { lhs, rhs, holds })
    }
}

/// The cluster identity: unnormalized = Z * sum over pair-partition sets
/// of products of connected correlations. The left side is the Wick
/// route, the right side is built entirely from diagram sums.
pub fn moment_cumulant_check(
    f: &SeriesSystem,
    tau_u: &[usize],
    tau_ubar: &[usize],
    d: u32,
) -> Result<ClusterReport, InversionError> {
    ClusterChecker::new(f, d, tau_ubar.len())?.check(tau_u, tau_ubar)
}

/// All sets `pi` of pairs `(I~, J~)` of position subsets: the nonempty
/// first components partition `I`, the nonempty second components
/// partition `J`, and no pair is doubly empty. Enumerated as a pair of
/// set partitions plus a partial matching between their blocks; the
/// empty `pi` exists exactly when both sides are empty.
pub fn pair_partition_sets(
    i_count: usize,
    j_count: usize,
) -> Vec<Vec<(Vec<usize>, Vec<usize>)>> {
    let mut out = Vec::new();
    for pi_i in set_partitions(i_count) {
        for pi_j in set_partitions(j_count) {
            for matching in partial_matchings(pi_i.len(), pi_j.len()) {
                let mut pairs: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
                let mut used_j = vec![false; pi_j.len()];
                for (bi, block) in pi_i.iter().enumerate() {
                    match matching[bi] {
                        Some(bj) => {
                            used_j[bj] = true;
                            pairs.push((block.clone(), pi_j[bj].clone()));
                        }
                        None => pairs.push((block.clone(), Vec::new())),
                    }
                }
                for (bj, block) in pi_j.iter().enumerate() {
                    if !used_j[bj] {
                        pairs.push((Vec::new(), block.clone()));
                    }
                }
                out.push(pairs);
            }
        }
    }
    out
}

/// Set partitions of `{0..k}` as sorted blocks (restricted growth).
fn set_partitions(k: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    fn rec(k: usize, next: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if next == k {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(next);
            rec(k, next + 1, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![next]);
        rec(k, next + 1, blocks, out);
        blocks.pop();
    }
    rec(k, 0, &mut blocks, &mut out);
    out
}

/// All injective partial maps `[r] -> [s]` (None = unmatched).
fn partial_matchings(r: usize, s: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = Vec::new();
    let mut cur: Vec<Option<usize>> = Vec::new();
    fn rec(r: usize, s: usize, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        cur.push(None);
        rec(r, s, cur, out);
        cur.pop();
        for j in 0..s {
            if !cur.contains(&Some(j)) {
                cur.push(Some(j));
                rec(r, s, cur, out);
                cur.pop();
            }
        }
    }
    rec(r, s, &mut cur, &mut out);
    out
}
