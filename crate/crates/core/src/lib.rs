//! Minibatch force-directed graph layout.
//!
//! The crate is organised around the pipeline a layout run goes through:
//!
//! * [`graph`] reads Matrix Market files into an immutable [`CsrGraph`].
//! * [`init`] produces a starting [`Layout`] (seeded random or greedy DFS placement).
//! * [`exact`] runs the O(n²) minibatch loop with cache-blocked force tiles.
//! * [`bh`] runs the O(n log n) variant backed by a Morton-ordered quad-tree.
//! * [`metrics`] scores a finished layout (stress, edge uniformity, neighborhood preservation).
//! * [`output`] writes coordinate files and SVG drawings.
//!
//! Both engines share the force kernels in [`model`] and guarantee that the
//! final layout is bit-identical for every worker-thread count.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bh;
mod driver;
pub mod error;
pub mod exact;
pub mod generators;
pub mod graph;
pub mod init;
pub mod metrics;
pub mod model;
pub mod output;

pub use bh::{layout_bh, BhConfig, QuadTree};
pub use error::{LayoutError, Result};
pub use exact::{layout_exact, reference_sequential, BatchConfig};
pub use graph::{CsrGraph, GraphMeta};
pub use init::{greedy_init, random_init, InitConfig, InitMode, Layout};
pub use metrics::{MetricReport, PairBudget};
pub use model::{ConvergenceTracker, EnergyModel, ForceSum, ModelVariant, StepScheduler, Vec2};

/// Outcome of an engine run.
#[derive(Debug, Clone)]
pub struct LayoutRun {
    pub layout: Layout,
    /// Iterations actually executed.
    pub iterations: usize,
    /// Energy of the last executed iteration (0 when no iteration ran).
    pub energy: f64,
    /// Energy of the iteration before the last one.
    pub previous_energy: Option<f64>,
    /// Energy of the first executed iteration.
    pub initial_energy: Option<f64>,
}
