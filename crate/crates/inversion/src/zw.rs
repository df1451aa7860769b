//! Free energy and partition function of the reversion field theory.
//!
//! `W` is the sum over nonempty connected vacuum circuit classes of
//! amplitude / aut, graded by Y; `Z = exp(W)` has constant term one.
//! Circuits of Y-degree `d` touch tensors of degree up to `d + 1`, so
//! the system must be known one degree past the output window.
//!
//! `partition_function_z_wick` recomputes `Z` by termwise formal
//! Gaussian integration of `exp(ubar H(u) + ubar Y)` - a route with no
//! diagram content, kept as the oracle.

use diagrams::rev_circuit::{aut_order_rev_circuit, enumerate_rev_circuits};
use mps_core::rat::Rat;
use mps_core::{MultiIndex, Series, SeriesSystem};
use wick::{integrate_exp_interaction, MixedSeries};

use crate::error::InversionError;
use crate::revert::linear_covariance;

fn check_window(f: &SeriesSystem, d: u32) -> Result<(), InversionError> {
    if f.trunc_degree() < d + 1 {
        return Err(InversionError::TruncationInsufficient {
            need: d + 1,
            have: f.trunc_degree(),
        });
    }
    if !f.is_constant_free() {
        return Err(mps_core::CoreError::ConstantTermPresent.into());
    }
    Ok(())
}

/// The free energy: vacuum circuit classes of Y-degree 1..=d, each
/// weighted by its inverse automorphism order. Constant-free.
pub fn free_energy_w(f: &SeriesSystem, d: u32) -> Result<Series, InversionError> {
    check_window(f, d)?;
    let cov = linear_covariance(f)?;
    let window = f.truncated_to(d + 1);
    let n = f.n_vars();
    let mut w = Series::zero(n, d);
    let mut cache = diagrams::rev_circuit::RevAmpCache::default();
    for c in enumerate_rev_circuits(d, &[]) {
        let amp = diagrams::rev_circuit::amplitude_rev_circuit_at(
            &c,
            &window,
            &cov,
            &[],
            d,
            &mut cache,
        )?;
        if !amp.is_zero() {
            let weight =
                Rat::from_integer(1.into()) / Rat::from_integer(aut_order_rev_circuit(&c).into());
            w = w.add(&amp.scale(&weight));
        }
    }
    Ok(w)
}

/// `Z = exp(W)` truncated at degree `d`; constant term is one.
pub fn partition_function_z(f: &SeriesSystem, d: u32) -> Result<Series, InversionError> {
    let w = free_energy_w(f, d)?;
    Ok(w.exp()?)
}

/// The interaction `ubar H(u) + ubar Y` of the reversion field theory as
/// a mixed series (H is the negated nonlinear part of F, so its tensors
/// are `-F^{[p]}` and the plain coefficients are `-c_alpha`).
pub fn reversion_interaction(f: &SeriesSystem, d: u32) -> MixedSeries {
    let n = f.n_vars();
    let mut w = MixedSeries::zero(n, n, d);
    for i in 0..n {
        // ubar_i H_i(u): H = L - F has the degree >= 2 monomials of -F
        for (alpha, c) in f.component(i).terms() {
            if alpha.degree() >= 2 {
                w.add_term(
                    MultiIndex::unit(n, i),
                    alpha.clone(),
                    Series::constant(n, d, -c.clone()),
                );
            }
        }
        // ubar_i Y_i
        w.add_term(
            MultiIndex::unit(n, i),
            MultiIndex::zero(n),
            Series::var(n, d, i),
        );
    }
    w
}

/// The oracle route: `Z = det A * integral of exp(ubar H + ubar Y)`
/// against the Gaussian with covariance `A^{-1}`, integrated termwise.
pub fn partition_function_z_wick(f: &SeriesSystem, d: u32) -> Result<Series, InversionError> {
    check_window(f, d)?;
    let cov = linear_covariance(f)?;
    let n = f.n_vars();
    let interaction = reversion_interaction(f, d);
    let raw = integrate_exp_interaction(
        &cov,
        &interaction,
        &MultiIndex::zero(n),
        &MultiIndex::zero(n),
    )?;
    Ok(raw.scale(cov.det()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mps_core::rat::rat_int;
    use mps_core::sample::Sampler;

    #[test]
    fn linear_system_has_trivial_z() {
        let f = SeriesSystem::new(vec![
            Series::var(2, 4, 0).scale(&rat_int(2)).add(&Series::var(2, 4, 1)),
            Series::var(2, 4, 1).scale(&rat_int(3)),
        ]);
        assert!(free_energy_w(&f, 3).unwrap().is_zero());
        assert_eq!(partition_function_z(&f, 3).unwrap(), Series::one(2, 3));
        assert_eq!(partition_function_z_wick(&f, 3).unwrap(), Series::one(2, 3));
    }

    #[test]
    fn quadratic_example_matches_wick_route() {
        // F = X - X^2 at output degree 2
        let f = SeriesSystem::new(vec![Series::var(1, 3, 0).sub(&Series::monomial(
            1,
            3,
            MultiIndex::new(vec![2]),
            rat_int(1),
        ))]);
        let z = partition_function_z(&f, 2).unwrap();
        let z_wick = partition_function_z_wick(&f, 2).unwrap();
        assert_eq!(z, z_wick);
        assert!(z.constant_term() == rat_int(1));
        // log returns W
        let w = free_energy_w(&f, 2).unwrap();
        assert_eq!(z.log().unwrap(), w);
    }

    #[test]
    fn random_systems_route_agreement() {
        let mut rng = Sampler::new(555);
        for n in 1..=2usize {
            for _ in 0..3 {
                let f = rng.invertible_system(n, 4, 3);
                let z = partition_function_z(&f, 3).unwrap();
                let z_wick = partition_function_z_wick(&f, 3).unwrap();
                assert_eq!(z, z_wick);
                assert_eq!(z.log().unwrap(), free_energy_w(&f, 3).unwrap());
            }
        }
    }

    #[test]
    fn z_is_det_a_times_jacobian_det_of_the_inverse() {
        // the change-of-variables form: Z(Y) = det A * det dPhi(Y) with
        // Phi the compositional inverse, a third fully independent route
        let mut rng = Sampler::new(556);
        for n in 1..=2usize {
            let f = rng.invertible_system(n, 5, 3);
            let d = 3;
            let phi = crate::revert::revert(&f, d + 1).unwrap().series;
            let det_a = wick::CovarianceSpec::new(f.linear_part())
                .unwrap()
                .det()
                .clone();
            let via_jacobian = phi.jacobian().det().scale(&det_a);
            assert_eq!(via_jacobian, partition_function_z(&f, d).unwrap());
        }
    }
}
