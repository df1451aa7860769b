//! Covariance data, pairing sums and Wick moments.
//!
//! `I_A(t1, t2) = sum over bijections s of prod_k Ainv[t2(s(k)), t1(k)]`,
//! which is a permanent of covariance entries. Relabelling either index
//! map by a permutation leaves the sum unchanged.

use mps_core::rat::Rat;
use mps_core::system::invert_rat_matrix;
use mps_core::MultiIndex;
use num::Zero;

use crate::error::WickError;
use crate::permanent::{permanent, permanent_naive};

/// A map `[k] -> [n]` assigning a field component to each leg. 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexMap(Vec<usize>);

impl IndexMap {
    pub fn new(values: Vec<usize>, n: usize) -> Result<Self, WickError> {
        for &v in &values {
            if v >= n {
                return Err(WickError::IndexOutOfRange { index: v, bound: n });
            }
        }
        Ok(IndexMap(values))
    }

    /// The weakly increasing representative of a multiplicity multiindex.
    pub fn representative(alpha: &MultiIndex) -> Self {
        IndexMap(alpha.representative_indices())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

/// An invertible rational matrix `A` with its exact inverse and
/// determinant cached. `A * A_inv = I` exactly by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovarianceSpec {
    n: usize,
    a: Vec<Vec<Rat>>,
    a_inv: Vec<Vec<Rat>>,
    det_a: Rat,
}

impl CovarianceSpec {
    pub fn new(a: Vec<Vec<Rat>>) -> Result<Self, WickError> {
        let n = a.len();
        for row in &a {
            assert_eq!(row.len(), n, "covariance matrix must be square");
        }
        let (a_inv, det_a) = invert_rat_matrix(&a).ok_or(WickError::SingularCovariance)?;
        Ok(CovarianceSpec { n, a, a_inv, det_a })
    }

    pub fn identity(n: usize) -> Self {
        let a: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Rat::from_integer(1.into())
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(a).expect("identity is invertible")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.a
    }

    pub fn inverse(&self) -> &[Vec<Rat>] {
        &self.a_inv
    }

    pub fn det(&self) -> &Rat {
        &self.det_a
    }
}

fn pairing_matrix(a_inv: &[Vec<Rat>], tau1: &IndexMap, tau2: &IndexMap) -> Vec<Vec<Rat>> {
    let k = tau1.len();
    (0..k)
        .map(|a| {
            (0..k)
                .map(|b| a_inv[tau2.values()[b]][tau1.values()[a]].clone())
                .collect()
        })
        .collect()
}

/// The pairing sum via the fast permanent kernel. Zero when the leg
/// counts differ (no bijection exists).
pub fn pairing_sum(a_inv: &[Vec<Rat>], tau1: &IndexMap, tau2: &IndexMap) -> Rat {
    if tau1.len() != tau2.len() {
        return Rat::zero();
    }
    permanent(&pairing_matrix(a_inv, tau1, tau2))
}

/// Oracle route: the literal sum over all bijections.
pub fn pairing_sum_naive(a_inv: &[Vec<Rat>], tau1: &IndexMap, tau2: &IndexMap) -> Rat {
    if tau1.len() != tau2.len() {
        return Rat::zero();
    }
    permanent_naive(&pairing_matrix(a_inv, tau1, tau2))
}

/// Gaussian moment of `u_{i_1}..u_{i_p} ubar_{j_1}..ubar_{j_q}` under the
/// normalized Gaussian: zero when `p != q`, else the permanent of
/// `(Ainv_{i_a j_b})_{a,b}`.
pub fn wick_moment(cov: &CovarianceSpec, is: &IndexMap, js: &IndexMap) -> Rat {
    if is.len() != js.len() {
        return Rat::zero();
    }
    let k = is.len();
    let m: Vec<Vec<Rat>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| cov.inverse()[is.values()[a]][js.values()[b]].clone())
                .collect()
        })
        .collect();
    permanent(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mps_core::rat::{rat, rat_int};
    use mps_core::sample::Sampler;

    fn imap(v: Vec<usize>, n: usize) -> IndexMap {
        IndexMap::new(v, n).unwrap()
    }

    #[test]
    fn covariance_invariants() {
        let mut rng = Sampler::new(77);
        let a = rng.invertible_matrix(3);
        let cov = CovarianceSpec::new(a.clone()).unwrap();
        // A * A_inv = I exactly
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Rat::zero();
                for k in 0..3 {
                    acc += &a[i][k] * &cov.inverse()[k][j];
                }
                assert_eq!(acc, if i == j { rat_int(1) } else { rat_int(0) });
            }
        }
        let singular = vec![
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(2), rat_int(4)],
        ];
        assert_eq!(
            CovarianceSpec::new(singular).unwrap_err(),
            WickError::SingularCovariance
        );
    }

    #[test]
    fn single_kronecker_pairing() {
        let cov = CovarianceSpec::identity(1);
        assert_eq!(
            pairing_sum(cov.inverse(), &imap(vec![0], 1), &imap(vec![0], 1)),
            rat_int(1)
        );
    }

    #[test]
    fn crossed_pairing_under_identity() {
        let cov = CovarianceSpec::identity(2);
        // tau1=[1,2], tau2=[2,1] forces the antidiagonal permanent
        assert_eq!(
            pairing_sum(cov.inverse(), &imap(vec![0, 1], 2), &imap(vec![1, 0], 2)),
            rat_int(1)
        );
    }

    #[test]
    fn naive_equals_ryser_route_k3() {
        let mut rng = Sampler::new(101);
        for _ in 0..10 {
            let a = rng.invertible_matrix(2);
            let cov = CovarianceSpec::new(a).unwrap();
            let t1 = imap(vec![0, 1, 1], 2);
            let t2 = imap(vec![1, 0, 0], 2);
            assert_eq!(
                pairing_sum_naive(cov.inverse(), &t1, &t2),
                pairing_sum(cov.inverse(), &t1, &t2)
            );
        }
    }

    #[test]
    fn length_mismatch_is_zero() {
        let cov = CovarianceSpec::identity(2);
        assert_eq!(
            pairing_sum(cov.inverse(), &imap(vec![0], 2), &imap(vec![0, 1], 2)),
            Rat::zero()
        );
        assert_eq!(
            wick_moment(&cov, &imap(vec![0], 2), &imap(vec![0, 1], 2)),
            Rat::zero()
        );
    }

    #[test]
    fn all_ones_moment() {
        let cov = CovarianceSpec::identity(1);
        let m = wick_moment(&cov, &imap(vec![0, 0], 1), &imap(vec![0, 0], 1));
        assert_eq!(m, rat_int(2));
    }

    #[test]
    fn moment_matches_naive_bijection_sum() {
        let a = vec![vec![rat_int(2), rat_int(1)], vec![rat_int(1), rat_int(1)]];
        let cov = CovarianceSpec::new(a).unwrap();
        let is = imap(vec![0, 1], 2);
        let js = imap(vec![0, 1], 2);
        // wick_moment pairs u-legs (is) against ubar-legs (js); in pairing
        // terms that is tau1 = js (ubar), tau2 = is (u)
        assert_eq!(
            wick_moment(&cov, &is, &js),
            pairing_sum_naive(cov.inverse(), &js, &is)
        );
    }

    #[test]
    fn relabelling_invariance_exhaustive() {
        // Lemma-style invariance: composing either index map with any
        // permutation leaves the pairing sum unchanged, k <= 4
        let mut rng = Sampler::new(404);
        let a = rng.invertible_matrix(2);
        let cov = CovarianceSpec::new(a).unwrap();
        for k in 0..=4usize {
            let t1: Vec<usize> = (0..k).map(|_| rng.below(2)).collect();
            let t2: Vec<usize> = (0..k).map(|_| rng.below(2)).collect();
            let base = pairing_sum(
                cov.inverse(),
                &imap(t1.clone(), 2),
                &imap(t2.clone(), 2),
            );
            let mut perm: Vec<usize> = (0..k).collect();
            permute_all(&mut perm, 0, &mut |p| {
                let t1p: Vec<usize> = p.iter().map(|&r| t1[r]).collect();
                let t2p: Vec<usize> = p.iter().map(|&r| t2[r]).collect();
                assert_eq!(
                    pairing_sum(cov.inverse(), &imap(t1p, 2), &imap(t2.clone(), 2)),
                    base
                );
                assert_eq!(
                    pairing_sum(cov.inverse(), &imap(t1.clone(), 2), &imap(t2p, 2)),
                    base
                );
            });
        }
    }

    fn permute_all<F: FnMut(&[usize])>(p: &mut Vec<usize>, k: usize, f: &mut F) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute_all(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn one_dim_rational_entries() {
        let cov = CovarianceSpec::new(vec![vec![rat(3, 2)]]).unwrap();
        assert_eq!(cov.inverse()[0][0], rat(2, 3));
        assert_eq!(*cov.det(), rat(3, 2));
    }
}
