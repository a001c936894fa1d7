//! Non-Hermitian symmetry classes: relations, classification, Hermitization
//! and constructions from Hermitian ensembles.

pub mod classes;
pub mod classify;
pub mod ensembles;
pub mod hermitize;
pub mod ops;
pub mod recipes;

pub use classes::{counterpart, lookup, ClassRecord, DimRule, EnergyKind, SymmetryClassTag, CLASSES};
pub use classify::classify;
pub use hermitize::{hermitize, HermitizedPair};
pub use ops::{verify, OpKind, SymmetryOp};
pub use recipes::{construct_from_hermitian, AiBasis, Construction, Recipe, RecipeInput};
