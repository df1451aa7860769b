//! Exact truncated multivariate formal power series.
//!
//! Everything here is computed over arbitrary-precision rationals; there is
//! no floating point anywhere. A [`Series`] is a sparse map from exponent
//! vectors to nonzero coefficients, truncated by total degree: coefficients
//! of degree `<= trunc_degree` are exact, everything above is unknown.
//!
//! Coefficients are stored plain (`F = sum c_a X^a`). The divided form
//! `u_a = a! * c_a` used by the tensorial view lives entirely in
//! [`tensor`], which is the only place factorials are handled.

pub mod error;
pub mod index;
pub mod json;
pub mod rat;
pub mod sample;
pub mod series;
pub mod system;
pub mod tensor;

pub use error::CoreError;
pub use index::MultiIndex;
pub use rat::Rat;
pub use series::Series;
pub use system::{compose_chain, compose_direct, SeriesMatrix, SeriesSystem};
pub use tensor::{multiplicity_index, tensor_element};
