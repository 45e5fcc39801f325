//! Symbolic calculus for mapping class groups of reducible 3-manifolds.
//!
//! A manifold W is given by its prime decomposition: irreducible summands
//! carrying group oracles for pi1 and the mapping class group, plus a
//! number of S^2 x S^1 summands. Generator words act on pi1(W) and on
//! sphere systems encoded as laminar families of boundary labels. The
//! eduction map projects words to the mapping class group of the disjoint
//! union V of irreducible summands.

pub mod classify;
pub mod error;
pub mod family;
pub mod fpword;
pub mod group;
pub mod manifold;
pub mod pi1;
pub mod sample;
pub mod sequence;
pub mod spotted;
pub mod suites;
pub mod systems;
pub mod words;

pub use error::{Error, Result};

/// Two copies of a summand with pi1 = Z/2 and mcg = Z/2, plus two
/// S^2 x S^1 summands. Six boundary labels.
pub const REFERENCE_MANIFOLD: &str = "type A pi1=Z/2<g1> mcg=Z/2<tau> act=tau:g1
summand 1 A
summand 2 A
handles 2
";
