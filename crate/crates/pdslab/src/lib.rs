//! Partial difference sets, strongly regular Cayley graphs, amorphic
//! association schemes, and regular 2-group actions, all built from
//! quadratic forms over GF(4) and verified by exhaustive counting.
//!
//! The library works at desk scale: ambient groups have order `16^n`
//! for 1 <= n <= 6, elements are dense indices, and every claimed
//! parameter or group invariant is recomputed from the group operation
//! rather than trusted.

pub mod bitset;
pub mod endo;
pub mod families;
pub mod forms;
pub mod gf4;
pub mod group_table;
pub mod pds;
pub mod regular;
pub mod report;
pub mod schemes;
pub mod twisted;

pub use bitset::IndexSet;
pub use endo::EndoMap;
pub use forms::FormSpec;
pub use gf4::GF4;
pub use group_table::{AbelianType, DenseGroup, FiniteGroup, TwistedTable};
pub use pds::{classify_ls_nls, expected_params, verify_pds, Classification, PdsParams};
pub use regular::RegularGroup;
pub use twisted::{GroupContext, Subgroup, TwistedElement};

/// Maximum supported block count; 16^6 indices keep dense tables affordable.
pub const MAX_BLOCKS: usize = 6;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("element index {index} out of range for group of order {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("invalid literal: {0:?}")]
    InvalidLiteral(String),
    #[error("context must have between 1 and {MAX_BLOCKS} blocks, got {0}")]
    BadBlockCount(usize),
    #[error("membership set is not a subgroup (witness index {witness})")]
    NotASubgroup { witness: usize },
    #[error("map is not a homomorphism: f({u} + {v}) != f({u}) + f({v})")]
    NotHomomorphism { u: usize, v: usize },
    #[error("map is not an automorphism")]
    NotAutomorphism,
    #[error("expected map of order {expected}, got {got}")]
    WrongOrder { expected: u32, got: u32 },
    #[error("context shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("scheme class {class} is empty")]
    EmptySchemeClass { class: usize },
    #[error("invalid scheme partition: {0}")]
    InvalidScheme(String),
    #[error("group construction rejected: {0}")]
    BuildRejected(String),
    #[error("search discrepancy: {0}")]
    SearchDiscrepancy(String),
    #[error("invalid family spec: {0}")]
    FamilySpec(String),
    #[error("group table is inconsistent: {0}")]
    BadGroupTable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
