//! Deterministic sampling of rationals, series and systems for tests and
//! acceptance corpora. A fixed seed reproduces the exact same corpus on
//! every run, so frozen expected values stay valid.

use num::{One, Zero};

use crate::index::MultiIndex;
use crate::rat::{rat, Rat};
use crate::series::Series;
use crate::system::{invert_rat_matrix, SeriesSystem};

/// splitmix64; small, seedable, good enough to scatter test coefficients.
#[derive(Debug, Clone)]
pub struct Sampler {
    state: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// A small nonzero rational with numerator in -4..=4 and denominator
    /// in 1..=3.
    pub fn small_rat(&mut self) -> Rat {
        loop {
            let p = (self.below(9) as i64) - 4;
            let q = (self.below(3) as i64) + 1;
            let r = rat(p, q);
            if !r.is_zero() {
                return r;
            }
        }
    }

    /// Sparse series with up to `max_terms` nonzero terms of degree
    /// <= `trunc_degree` (degree >= 1 when `constant_free`).
    pub fn series(
        &mut self,
        n_vars: usize,
        trunc_degree: u32,
        max_terms: usize,
        constant_free: bool,
    ) -> Series {
        let pool: Vec<MultiIndex> = MultiIndex::all_up_to_degree(n_vars, trunc_degree)
            .into_iter()
            .filter(|a| !constant_free || a.degree() >= 1)
            .collect();
        let mut s = Series::zero(n_vars, trunc_degree);
        for _ in 0..max_terms {
            let a = pool[self.below(pool.len())].clone();
            s.set_coeff(a, self.small_rat());
        }
        s
    }

    /// A constant-free square system with sparse entries; no invertibility
    /// guarantee.
    pub fn constant_free_system(&mut self, n: usize, trunc_degree: u32, max_terms: usize) -> SeriesSystem {
        SeriesSystem::new(
            (0..n)
                .map(|_| self.series(n, trunc_degree, max_terms, true))
                .collect(),
        )
    }

    /// A constant-free system whose linear part is invertible over the
    /// rationals: random linear part (resampled until nonsingular) plus
    /// sparse nonlinear terms.
    pub fn invertible_system(&mut self, n: usize, trunc_degree: u32, max_terms: usize) -> SeriesSystem {
        let linear: Vec<Vec<Rat>> = loop {
            let a: Vec<Vec<Rat>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if self.below(3) == 0 {
                                Rat::zero()
                            } else {
                                self.small_rat()
                            }
                        })
                        .collect()
                })
                .collect();
            if invert_rat_matrix(&a).is_some() {
                break a;
            }
        };
        let components = (0..n)
            .map(|i| {
                let mut s = Series::zero(n, trunc_degree);
                for (j, linear_ij) in linear[i].iter().enumerate() {
                    s.set_coeff(MultiIndex::unit(n, j), linear_ij.clone());
                }
                // sparse nonlinear tail, degrees 2..=trunc_degree
                let pool: Vec<MultiIndex> = MultiIndex::all_up_to_degree(n, trunc_degree)
                    .into_iter()
                    .filter(|a| a.degree() >= 2)
                    .collect();
                if !pool.is_empty() {
                    for _ in 0..max_terms {
                        let a = pool[self.below(pool.len())].clone();
                        s.set_coeff(a, self.small_rat());
                    }
                }
                s
            })
            .collect();
        SeriesSystem::new(components)
    }

    /// A random rational matrix resampled until invertible; returned with
    /// entries only (callers build their own covariance data).
    pub fn invertible_matrix(&mut self, n: usize) -> Vec<Vec<Rat>> {
        loop {
            let a: Vec<Vec<Rat>> = (0..n)
                .map(|_| (0..n).map(|_| self.small_rat()).collect())
                .collect();
            if let Some((_, det)) = invert_rat_matrix(&a) {
                if !det.is_zero() {
                    return a;
                }
            }
        }
    }

    /// A polynomial system allowed to carry constant terms (for the
    /// Lagrange-Good side, where `G_i(0)` may be nonzero).
    pub fn polynomial_system(
        &mut self,
        n: usize,
        trunc_degree: u32,
        max_terms: usize,
        nonzero_at_origin: bool,
    ) -> SeriesSystem {
        SeriesSystem::new(
            (0..n)
                .map(|_| {
                    let mut s = self.series(n, trunc_degree, max_terms, false);
                    if nonzero_at_origin && s.constant_term().is_zero() {
                        s.set_coeff(MultiIndex::zero(n), Rat::one());
                    }
                    s
                })
                .collect(),
        )
    }
}
