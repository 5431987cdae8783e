//! Foundational types and elementary functions: coefficient vectors and
//! their norms, sign and soft-threshold maps, supports, design and Gram
//! matrices, Gram partitioning, null spaces and extreme eigenvalues.
//!
//! Everything here is immutable after construction and purely functional;
//! values can be shared freely across threads.

mod matrices;
mod vectors;

pub use matrices::{
    gram, min_eigen, null_space_basis, partition_gram, DesignMatrix, GramMatrix, PartitionedGram,
};
pub use vectors::{
    norms, sign_vector, soft_threshold, support_of, CoefVector, Norms, SignVector, Support,
};
pub(crate) use vectors::soft_threshold_unchecked;

/// Default tolerance below which a solver coefficient counts as zero when
/// extracting supports.
pub const SUPPORT_TOL: f64 = 1e-8;
