//! Finite-scale computations on generalized Ważewski dendrites.
//!
//! A [`tree::Dendrite`] is a finite metric tree whose nodes carry the branch
//! order they are meant to have in the limit object. Everything else is built
//! on top of it: subcontinua ([`tree::Subdendrite`]), Hausdorff distances,
//! fullness predicates, maximal order arcs ([`chain::Chain`]), back-and-forth
//! isomorphisms and nerve computations for finite metric graphs.

pub mod backforth;
pub mod chain;
pub mod dot;
pub mod error;
pub mod fullness;
pub mod hyperspace;
pub mod io;
pub mod nerve;
pub mod rational;
pub mod tree;
pub mod wazewski;

pub use error::{Error, Result};
pub use rational::Rational;
pub use tree::{Dendrite, NodeId, Order, Point, Subdendrite};
