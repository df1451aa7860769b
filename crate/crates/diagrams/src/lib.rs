//! The combinatorial-species layer: isomorphism classes of diagram
//! structures, their exact automorphism orders, and amplitude evaluation
//! by the Feynman rules.
//!
//! Three diagram grammars live here:
//! - reversion trees and vacuum circuits (H-vertices of arity >= 2,
//!   Y-vertex leaves, covariance edges),
//! - Lagrange-Good trees and circuits (XG-vertices of any arity,
//!   Kronecker edges),
//! - composition shapes (one F-vertex layer over G-vertices).
//!
//! Classes carry closed-form automorphism orders; a labeled brute-force
//! enumerator over small ground sets is kept as the species oracle that
//! every closed formula is checked against.

pub mod composition;
pub mod comp_labeled;
pub mod error;
pub mod labeled;
pub mod lg;
pub mod rev_circuit;
pub mod tree;

pub use composition::{
    amplitude_composition, aut_order_composition, enumerate_composition_classes, CompositionClass,
};
pub use error::DiagramError;
pub use lg::{
    amplitude_lg_circuit, amplitude_lg_tree, aut_order_lg_circuit, aut_order_lg_tree,
    enumerate_lg_circuits, enumerate_lg_trees, LgCircuitClass, LgTreeClass,
};
pub use rev_circuit::{
    amplitude_rev_circuit, aut_order_rev_circuit, enumerate_rev_circuits, RevCircuitClass,
};
pub use tree::{
    amplitude_tree, amplitude_tree_sourced, aut_order_tree, enumerate_reversion_trees,
    enumerate_trees_with_sources, tree_amp_vec, TreeClass,
};
