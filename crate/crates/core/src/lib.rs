//! Permutation stability toolkit: finite permutation metrics, enumerated
//! finite groups, Kazhdan constant brackets, almost-invariant sets, explicit
//! almost-commuting permutation families, and rounding of almost-actions to
//! actions.

mod error;
pub mod asymhom;
pub mod foelner;
pub mod group;
pub mod lab;
pub mod perm;
pub mod rounding;
pub mod spectral;

pub use error::{Error, Result};
pub use group::{FinGroup, GroupCaps, GroupHom, MarkedGroup, MarkedHom, MarkedMap, PermAction, Word};
pub use perm::{commutator_defect, hamming, hs_distance, PartialInjection, Perm};

/// Exact rational numbers used for all distances and densities.
pub type Rational = num_rational::Ratio<i64>;
