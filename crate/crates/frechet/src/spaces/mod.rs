//! Index sets, space terms, and concrete vector values.

mod index;
mod space;
mod vector;

pub use index::{IndexSet, IndexValue, Relation};
pub use space::SpaceTerm;
pub use vector::{basis, random_vector, TensorTerm, Vector};
