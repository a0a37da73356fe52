//! Instrumented parallel algorithms, analytic cost models and a
//! deterministic message-passing simulator.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collectives;
pub mod distapps;
pub mod kernels;
pub mod matrix;
pub mod netsim;
pub mod perfcalc;
pub mod pram;
pub mod taskgraph;
pub mod util;

pub use matrix::Matrix;
