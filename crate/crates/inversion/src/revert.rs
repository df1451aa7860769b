//! Compositional reversion.
//!
//! Three routes to `F^{-1}`:
//! - `revert`: the fixed-point recursion `phi <- Ainv (Y - N(phi))`, one
//!   pass per degree (the nonlinear part starts at degree two, so each
//!   pass stabilizes one more degree),
//! - `revert_by_trees`: the explicit sum over tree classes weighted by
//!   inverse automorphism orders,
//! - `revert_oracle`: undetermined coefficients, one homogeneous layer at
//!   a time, with no diagram or fixed-point content.

use diagrams::{amplitude_tree, aut_order_tree, enumerate_reversion_trees};
use mps_core::rat::Rat;
use mps_core::{Series, SeriesSystem};
use wick::CovarianceSpec;

use crate::error::InversionError;

/// Per-degree class statistics of the tree expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeDiagnostics {
    pub degree: u32,
    pub class_count: usize,
    pub aut_sum: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InversionResult {
    pub series: SeriesSystem,
    pub diagnostics: Vec<DegreeDiagnostics>,
}

/// Covariance data built from the linear part; errors if singular.
pub(crate) fn linear_covariance(f: &SeriesSystem) -> Result<CovarianceSpec, InversionError> {
    CovarianceSpec::new(f.linear_part()).map_err(|_| InversionError::SingularLinearPart)
}

fn check_preconditions(f: &SeriesSystem, d: u32) -> Result<(), InversionError> {
    if !f.is_constant_free() {
        return Err(mps_core::CoreError::ConstantTermPresent.into());
    }
    if f.trunc_degree() < d {
        return Err(InversionError::TruncationInsufficient {
            need: d,
            have: f.trunc_degree(),
        });
    }
    Ok(())
}

/// The nonlinear part `N = F - L` (so `F(X) = L(X) + N(X)`).
fn nonlinear_part(f: &SeriesSystem) -> SeriesSystem {
    let n = f.n_vars();
    let d = f.trunc_degree();
    SeriesSystem::new(
        f.components()
            .iter()
            .map(|fi| {
                let mut s = fi.clone();
                for j in 0..n {
                    let e = mps_core::MultiIndex::unit(n, j);
                    s.set_coeff(e, Rat::from_integer(0.into()));
                }
                s.truncated_to(d)
            })
            .collect(),
    )
}

fn apply_matrix(m: &[Vec<Rat>], v: &SeriesSystem) -> SeriesSystem {
    let n = v.n_components();
    SeriesSystem::new(
        (0..n)
            .map(|i| {
                let mut acc = Series::zero(v.n_vars(), v.trunc_degree());
                for (j, mj) in m[i].iter().enumerate() {
                    acc = acc.add(&v.component(j).scale(mj));
                }
                acc
            })
            .collect(),
    )
}

fn tree_diagnostics(d: u32) -> Vec<DegreeDiagnostics> {
    let trees = enumerate_reversion_trees(d);
    (1..=d)
        .map(|deg| {
            let of_deg: Vec<_> = trees.iter().filter(|t| t.y_leaves() == deg).collect();
            DegreeDiagnostics {
                degree: deg,
                class_count: of_deg.len(),
                aut_sum: of_deg.iter().map(|t| aut_order_tree(t)).sum(),
            }
        })
        .collect()
}

/// Compositional inverse by fixed-point iteration, exact through degree
/// `d`: `F(result) = Y` and `result(F) = X` modulo degree `d + 1`.
pub fn revert(f: &SeriesSystem, d: u32) -> Result<InversionResult, InversionError> {
    check_preconditions(f, d)?;
    let cov = linear_covariance(f)?;
    let f = f.truncated_to(d);
    let n = f.n_vars();
    let nonlin = nonlinear_part(&f);
    let y = SeriesSystem::identity(n, d);
    let mut phi = SeriesSystem::zero(n, n, d);
    for _ in 0..d {
        let correction = substitute_system(&nonlin, &phi)?;
        phi = apply_matrix(cov.inverse(), &y.sub(&correction));
    }
    Ok(InversionResult {
        series: phi,
        diagnostics: tree_diagnostics(d),
    })
}

pub(crate) fn substitute_system(
    f: &SeriesSystem,
    args: &SeriesSystem,
) -> Result<SeriesSystem, InversionError> {
    let composed = f
        .components()
        .iter()
        .map(|fi| fi.substitute(args.components()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SeriesSystem::new(composed))
}

/// The literal tree-class expansion of the inverse: for each component,
/// `sum over classes of amplitude / aut`, classes bounded by `d` leaves.
pub fn revert_by_trees(f: &SeriesSystem, d: u32) -> Result<SeriesSystem, InversionError> {
    check_preconditions(f, d)?;
    let cov = linear_covariance(f)?;
    let f = f.truncated_to(d);
    let n = f.n_vars();
    let trees = enumerate_reversion_trees(d);
    let mut components = vec![Series::zero(n, d); n];
    for t in &trees {
        let weight = Rat::from_integer(1.into()) / Rat::from_integer(aut_order_tree(t).into());
        for (i, comp) in components.iter_mut().enumerate() {
            let amp = amplitude_tree(t, &f, &cov, i)?;
            if !amp.is_zero() {
                *comp = comp.add(&amp.scale(&weight));
            }
        }
    }
    Ok(SeriesSystem::new(components))
}

/// Undetermined coefficients: solve `F(phi) = Y` one homogeneous layer at
/// a time, each layer a linear solve by the inverse of the linear part.
pub fn revert_oracle(f: &SeriesSystem, d: u32) -> Result<SeriesSystem, InversionError> {
    check_preconditions(f, d)?;
    let cov = linear_covariance(f)?;
    let f = f.truncated_to(d);
    let n = f.n_vars();
    let nonlin = nonlinear_part(&f);
    let y = SeriesSystem::identity(n, d);
    // layer 1
    let mut phi = apply_matrix(cov.inverse(), &y);
    for deg in 2..=d {
        // the degree-deg defect of F(phi) = Y using layers < deg only
        let defect = substitute_system(&nonlin, &phi)?;
        let layer = SeriesSystem::new(
            defect
                .components()
                .iter()
                .map(|s| s.homogeneous_part(deg))
                .collect(),
        );
        let correction = apply_matrix(cov.inverse(), &layer);
        phi = phi.sub(&correction);
    }
    Ok(phi)
}
