//! Formal Gaussian integration over exact rationals.
//!
//! No analytic integration happens anywhere: a Gaussian "integral" of a
//! monomial in paired variables is a permanent of covariance entries,
//! normalized by 1/det A, and integrals of series are termwise sums that
//! are checked to be finite before they are expanded.

pub mod error;
pub mod integral;
pub mod pairing;
pub mod permanent;

pub use error::WickError;
pub use integral::{
    gaussian_integral_monomial, gaussian_integral_series, gaussian_integral_triple,
    integrate_exp_interaction, MixedSeries,
};
pub use pairing::{pairing_sum, pairing_sum_naive, wick_moment, CovarianceSpec, IndexMap};
pub use permanent::{permanent, permanent_naive, permanent_ryser};
