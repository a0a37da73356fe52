//! Instrumented shared-memory kernels.
//!
//! Every kernel reports an [`InstrumentedRun`]: `ops` counts applications of
//! the binary operator or comparator, `depth` is the longest chain of
//! dependent applications ending in an output, and `rounds` counts the
//! algorithm's phases of mutually independent operations.

mod bitonic;
mod merge;
mod partition;
mod scan;
mod sieve;

pub use bitonic::{bitonic_merge, BitonicMerge};
pub use merge::{corank, merge, rank, rank_counted, Corank, CorankPair, MergeVariant, Merged};
pub use partition::{parallel_partition, quicksort, Partitioned, QUICKSORT_CUTOFF};
pub use scan::{scan, ScanMode, ScanVariant};
pub use sieve::{prime_sieve, Sieve};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InstrumentedRun {
    pub ops: u64,
    pub depth: u64,
    pub rounds: u64,
}

impl InstrumentedRun {
    /// Counters of `self` followed by `next`, where `next` depends on all of `self`.
    pub fn then(self, next: InstrumentedRun) -> InstrumentedRun {
        InstrumentedRun { ops: self.ops + next.ops, depth: self.depth + next.depth, rounds: self.rounds + next.rounds }
    }
}
