//! Tensorial view of a series: `F^[d]_{i, j_1...j_d} = mu(js)! * c_mu(js)`.
//!
//! All factorial bookkeeping between plain and divided coefficients lives
//! here. Index lists are 0-based.

use crate::error::CoreError;
use crate::index::{multiplicity_index_raw, MultiIndex};
use crate::rat::Rat;
use crate::series::Series;
use crate::system::SeriesSystem;

/// The multiplicity multiindex `mu(js)` of an index list.
pub fn multiplicity_index(js: &[usize], n_vars: usize) -> Result<MultiIndex, CoreError> {
    multiplicity_index_raw(js, n_vars)
}

/// Tensor element of one series: symmetric in `js` by construction.
pub fn tensor_element_series(f: &Series, js: &[usize]) -> Result<Rat, CoreError> {
    let mu = multiplicity_index(js, f.n_vars())?;
    if mu.degree() > f.trunc_degree() {
        return Err(CoreError::DegreeAboveTruncation {
            degree: mu.degree(),
            trunc: f.trunc_degree(),
        });
    }
    Ok(mu.factorial_rat() * f.coeff(&mu))
}

/// Tensor element `F^[d]_{i, js}` of component `i` of a system.
pub fn tensor_element(f: &SeriesSystem, i: usize, js: &[usize]) -> Result<Rat, CoreError> {
    if i >= f.n_components() {
        return Err(CoreError::IndexOutOfRange {
            index: i,
            bound: f.n_components(),
        });
    }
    tensor_element_series(f.component(i), js)
}

/// Tensor element addressed by a multiindex instead of an index list.
pub fn tensor_element_at(f: &Series, mu: &MultiIndex) -> Result<Rat, CoreError> {
    if mu.degree() > f.trunc_degree() {
        return Err(CoreError::DegreeAboveTruncation {
            degree: mu.degree(),
            trunc: f.trunc_degree(),
        });
    }
    Ok(mu.factorial_rat() * f.coeff(mu))
}
