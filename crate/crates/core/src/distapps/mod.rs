//! Distributed kernels run as simulated process programs, each with a
//! sequential oracle.
//!
//! Every kernel takes global inputs, distributes them, runs one simulated
//! world and reassembles the global result. Local work is charged to the
//! process clocks at `op_time` per elementary operation.

mod graph;
mod linalg;
mod sort;
mod stencil;

pub use graph::{bfs_levelwise, bfs_seq, fw_seq, INF_DIST, INF_WEIGHT};
pub use linalg::{matvec_colwise, matvec_rowwise, matvec_seq, summa};
pub use sort::{counting_sort, counting_sort_seq, dist_quicksort, Origin, QuicksortRun};
pub use stencil::{stencil_iterate, stencil_seq, Boundary, HaloScheme, StencilResult};

use crate::netsim::{CostModel, SimError, SimTrace, World};

/// Simulated machine plus the price of one local operation.
#[derive(Debug, Clone)]
pub struct AppEnv {
    pub world: World,
    pub op_time: f64,
}

impl AppEnv {
    pub fn new(p: usize, model: CostModel) -> Result<Self, SimError> {
        Ok(AppEnv { world: World::new(p, model)?, op_time: 0.0 })
    }

    pub fn with_op_time(mut self, t: f64) -> Self {
        self.op_time = t;
        self
    }

    pub fn p(&self) -> usize {
        self.world.size()
    }
}

#[derive(Debug, Clone)]
pub struct AppRun<R> {
    pub output: R,
    pub trace: SimTrace,
    /// Local operations charged per rank.
    pub local_ops: Vec<u64>,
}

fn divides(p: usize, n: usize, what: &str) -> Result<(), SimError> {
    if !n.is_multiple_of(p) {
        return Err(SimError::Domain(format!("{p} processes do not divide {what} = {n}")));
    }
    Ok(())
}

/// `√p` when `p` is a perfect square.
fn grid_side(p: usize) -> Result<usize, SimError> {
    let q = (p as f64).sqrt().round() as usize;
    if q * q != p {
        return Err(SimError::Domain(format!("{p} processes do not form a square grid")));
    }
    Ok(q)
}
