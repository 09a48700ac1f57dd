//! Measurement semantics for scale values.
//!
//! Quantities are scalars, integer powers of a family's difference unit, or
//! points of an affine family. The crate provides the value algebra over those
//! sorts, a registry of families and scales with the admissible
//! transformations between them, a small checkable expression language, a
//! randomized meaningfulness oracle and an admissible-statistics engine.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod lang;
pub mod meaning;
pub mod numfmt;
pub mod quantity;
pub mod registry;
pub mod sort;
pub mod stats;
pub mod transform;

pub use error::{ErrorCode, MeasureError};
pub use quantity::{apply_binary, mix, negate, power_int, sqrt_even_power, Quantity};
pub use registry::{FamilyId, FamilyKind, Registry, ScaleId};
pub use sort::{BinOp, Sort};
pub use transform::Transformation;
