//! Composition through diagram classes.
//!
//! The degree-d homogeneous part of `(F o G)_i` is the sum over the
//! integer-partition classes of d of the symmetrized class amplitude
//! divided by `prod_q m_q! (q!)^{m_q}` (the class's automorphism order
//! with the F-vertex exchange factor `m!` cancelled by the contraction
//! count). Must agree with direct substitution exactly.

use diagrams::{amplitude_composition, aut_order_composition, enumerate_composition_classes};
use mps_core::rat::Rat;
use mps_core::{Series, SeriesSystem};

use crate::error::InversionError;

pub fn compose_diagrammatic(
    f: &SeriesSystem,
    g: &SeriesSystem,
) -> Result<SeriesSystem, InversionError> {
    if g.n_components() != f.n_vars() {
        return Err(mps_core::CoreError::DimensionMismatch {
            expected: f.n_vars(),
            found: g.n_components(),
        }
        .into());
    }
    if !g.is_constant_free() {
        return Err(mps_core::CoreError::ConstantTermPresent.into());
    }
    if f.trunc_degree() != g.trunc_degree() {
        return Err(InversionError::TruncationInsufficient {
            need: f.trunc_degree().max(g.trunc_degree()),
            have: f.trunc_degree().min(g.trunc_degree()),
        });
    }
    let d = f.trunc_degree();
    let n_out = g.n_vars();
    let mut components = Vec::with_capacity(f.n_components());
    for i in 0..f.n_components() {
        let mut acc = Series::zero(n_out, d);
        for deg in 1..=d {
            for class in enumerate_composition_classes(deg) {
                let amp = amplitude_composition(&class, f, g, i, d)?;
                if amp.is_zero() {
                    continue;
                }
                // aut = m! * prod, and the m! cancels against the
                // contraction-scheme count
                let m_fact: u128 = (1..=class.m() as u128).product::<u128>().max(1);
                let weight = Rat::from_integer(m_fact.into())
                    / Rat::from_integer(aut_order_composition(&class).into());
                acc = acc.add(&amp.scale(&weight));
            }
        }
        components.push(acc);
    }
    Ok(SeriesSystem::new(components))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mps_core::rat::rat_int;
    use mps_core::sample::Sampler;
    use mps_core::{compose_direct, MultiIndex};

    #[test]
    fn linear_systems_give_matrix_product() {
        let f = SeriesSystem::new(vec![
            Series::var(2, 3, 0).scale(&rat_int(2)),
            Series::var(2, 3, 0).add(&Series::var(2, 3, 1)),
        ]);
        let g = SeriesSystem::new(vec![
            Series::var(2, 3, 1).scale(&rat_int(3)),
            Series::var(2, 3, 0),
        ]);
        assert_eq!(
            compose_diagrammatic(&f, &g).unwrap(),
            compose_direct(&f, &g).unwrap()
        );
    }

    #[test]
    fn one_dimensional_example() {
        // F = X + X^2, G = X + X^3 at degree 4
        let f = SeriesSystem::new(vec![Series::var(1, 4, 0).add(&Series::monomial(
            1,
            4,
            MultiIndex::new(vec![2]),
            rat_int(1),
        ))]);
        let g = SeriesSystem::new(vec![Series::var(1, 4, 0).add(&Series::monomial(
            1,
            4,
            MultiIndex::new(vec![3]),
            rat_int(1),
        ))]);
        assert_eq!(
            compose_diagrammatic(&f, &g).unwrap(),
            compose_direct(&f, &g).unwrap()
        );
    }

    #[test]
    fn random_sparse_systems_agree_with_direct_route() {
        let mut rng = Sampler::new(4242);
        for _ in 0..6 {
            let f = rng.constant_free_system(2, 4, 4);
            let g = rng.constant_free_system(2, 4, 4);
            assert_eq!(
                compose_diagrammatic(&f, &g).unwrap(),
                compose_direct(&f, &g).unwrap()
            );
        }
    }

    #[test]
    fn rejects_constant_terms_in_g() {
        let f = SeriesSystem::identity(1, 2);
        let g = SeriesSystem::new(vec![Series::one(1, 2)]);
        assert!(compose_diagrammatic(&f, &g).is_err());
    }
}
