//! Composition, reversion, cumulants and Lagrange-Good inversion as
//! user-facing algorithms, each paired with an independent oracle.
//!
//! Every operation here exists in at least two computational routes with
//! different failure modes: a fast recursion extracted from the fixed
//! point structure, and an explicit sum over diagram classes weighted by
//! inverse automorphism orders. The test suites assert exact agreement.

pub mod compose;
pub mod correl;
pub mod error;
pub mod lg;
pub mod revert;
pub mod zw;

pub use compose::compose_diagrammatic;
pub use correl::{
    connected_correlation, correlation, moment_cumulant_check, ClusterChecker, ClusterReport,
    CorrelationKind, CorrelationSpec,
};
pub use error::InversionError;
pub use lg::{
    lg_identity_check, lg_matrix_identity_check, lg_matrix_solve, lg_partition_z, lg_solve,
    lg_solve_by_trees, lg_solve_oracle, LgIdentityReport, LgMatrixReport, ZRoutes,
};
pub use revert::{revert, revert_by_trees, revert_oracle, DegreeDiagnostics, InversionResult};
pub use zw::{free_energy_w, partition_function_z, partition_function_z_wick};
