//! Barnes-Hut minibatch layout.
//!
//! Each iteration rebuilds a Morton-ordered quad-tree from the current
//! coordinates. Batch vertices then sum exact attraction over their CSR
//! neighbours and approximate repulsion from the tree: a cell whose centroid
//! is far enough away (`theta > D / distance`) contributes a single
//! count-weighted term. The tree covers every vertex, so the repulsion it
//! reports for a vertex's own neighbours is subtracted again, leaving the
//! same split between attraction and repulsion as the exact engine.

mod morton;
mod tree;

use std::ops::Range;

use rayon::prelude::*;

pub use morton::{interleave, morton_code, morton_keys, morton_sort, BoundingBox, MortonKey, AXIS_BITS};
pub use tree::{QuadNode, QuadTree, TraversalStats, MAX_DEPTH};

use crate::driver::{self, ForcePhase};
use crate::error::{LayoutError, Result};
use crate::exact::BatchConfig;
use crate::graph::CsrGraph;
use crate::init::Layout;
use crate::model::{ConvergenceTracker, EnergyModel, ForceSum, StepScheduler, Vec2};
use crate::LayoutRun;

/// Vertices per parallel work item in the force phase.
const FORCE_CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BhConfig {
    /// Multipole acceptance threshold. 0 disables approximation entirely.
    pub theta: f64,
    pub max_depth: usize,
}

impl Default for BhConfig {
    fn default() -> Self {
        BhConfig {
            theta: 1.2,
            max_depth: MAX_DEPTH,
        }
    }
}

impl BhConfig {
    pub fn with_theta(theta: f64) -> Self {
        BhConfig {
            theta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(LayoutError::InvalidConfig(format!(
                "theta must be a finite non-negative number, got {}",
                self.theta
            )));
        }
        if self.max_depth == 0 || self.max_depth > MAX_DEPTH {
            return Err(LayoutError::InvalidConfig(format!(
                "tree depth must lie in 1..={MAX_DEPTH}, got {}",
                self.max_depth
            )));
        }
        Ok(())
    }
}

/// Approximate repulsion on vertex `i` at `ci` from all other vertices in `tree`.
pub fn repulsive_bh(tree: &QuadTree, i: usize, ci: Vec2, model: &EnergyModel, cfg: &BhConfig) -> Vec2 {
    tree.repulsive_force(i, ci, model, cfg.theta)
}

struct BhPhase<'a> {
    g: &'a CsrGraph,
    model: EnergyModel,
    bh: BhConfig,
    tree: Option<QuadTree>,
}

impl BhPhase<'_> {
    fn vertex_force(&self, tree: &QuadTree, coords: &[Vec2], i: usize) -> Vec2 {
        let ci = coords[i];
        let mut force = ForceSum::ZERO;
        for &j in self.g.neighbors(i) {
            let (j, cj) = (j as usize, coords[j as usize]);
            force += self.model.vertex_force(i, ci, j, cj, true);
            force -= self.model.vertex_force(i, ci, j, cj, false);
        }
        tree.add_repulsion_live(i, ci, coords, &self.model, self.bh.theta, &mut force);
        force.value()
    }
}

impl ForcePhase for BhPhase<'_> {
    fn begin_iteration(&mut self, coords: &[Vec2]) {
        self.tree = Some(QuadTree::build(coords, self.bh.max_depth));
    }

    fn batch_forces(&self, coords: &[Vec2], batch: Range<usize>, ct: &mut [Vec2]) {
        let tree = self.tree.as_ref().expect("tree is built at the start of every iteration");
        let start = batch.start;
        let work = |(c, chunk): (usize, &mut [Vec2])| {
            for (x, f) in chunk.iter_mut().enumerate() {
                *f = self.vertex_force(tree, coords, start + c * FORCE_CHUNK + x);
            }
        };
        if ct.len() <= FORCE_CHUNK {
            ct.chunks_mut(FORCE_CHUNK).enumerate().for_each(work);
        } else {
            ct.par_chunks_mut(FORCE_CHUNK).enumerate().for_each(work);
        }
    }
}

/// Runs the Barnes-Hut minibatch engine until `conv` says stop.
pub fn layout_bh(
    g: &CsrGraph,
    init: &Layout,
    model: &EnergyModel,
    cfg: &BatchConfig,
    bh: &BhConfig,
    sched: StepScheduler,
    conv: ConvergenceTracker,
) -> Result<LayoutRun> {
    init.check_against(g)?;
    cfg.validate()?;
    bh.validate()?;
    let mut phase = BhPhase {
        g,
        model: *model,
        bh: *bh,
        tree: None,
    };
    let pool = cfg.pool()?;
    Ok(pool.install(|| driver::run(init, cfg, sched, conv, &mut phase)))
}
