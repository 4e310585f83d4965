//! Lyndon-Demuškin complexes over `Z/p^s`: Fox calculus, abelian and class-2
//! nilpotent coefficient systems, cup-product Gram matrices, unipotent power
//! formulas and finite-precision cocycle lifting.

pub mod abelian;
mod error;
pub mod free_group;
pub mod lifting;
pub mod linalg;
pub mod nilpotent;
#[cfg(test)]
mod proptests;
pub mod sampling;
pub mod systems;
pub mod unipotent;

pub use error::{Error, Result};
pub use free_group::{build_relator, evaluate, fox_derivative, DemuskinPresentation, GroupRingElt, Word};
pub use linalg::{Matrix, ModuleProfile, RingModulus};
pub use systems::{AbelianSystem, LeviData, NilpotentSystem};
