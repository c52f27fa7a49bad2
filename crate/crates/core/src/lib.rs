//! Exact numerical laboratory for deterministic walks on groups driven by
//! finite-memory Gibbs-Markov systems.

pub mod arith;
pub mod catalog;
pub mod error;
pub mod gm_system;
pub mod groups;
pub mod lattice;
pub mod oracle;
pub mod pressure;
pub mod spectral;
pub mod walkdist;

pub use arith::{Arith, Exact, Mode, Value};
pub use error::{Error, Result};
pub use gm_system::{Cocycle, GibbsMarkovSystem, SymmetryInvolution};
pub use groups::{GroupElement, GroupSpec};
