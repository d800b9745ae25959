//! Exact O(n²) minibatch layout with cache-blocked force tiles.
//!
//! Forces for a minibatch are computed in parallel against coordinates that
//! stay frozen until the whole batch is done, then the batch is moved. Each
//! vertex accumulates its pair terms in ascending source order no matter how
//! the work is tiled or distributed, so results are bit-identical across
//! thread counts and a batch size of 1 reproduces the plain sequential loop.

use std::ops::Range;

use rayon::prelude::*;

use crate::driver::{self, ForcePhase};
use crate::error::{LayoutError, Result};
use crate::graph::CsrGraph;
use crate::init::Layout;
use crate::model::{apply_update, ConvergenceTracker, EnergyModel, ForceSum, StepScheduler, Vec2};
use crate::LayoutRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchConfig {
    /// Vertices per minibatch.
    pub batch_size: usize,
    /// Tile height: batch vertices handled together by one worker.
    pub block_rows: usize,
    /// Tile width: source vertices swept per tile.
    pub block_cols: usize,
    /// Worker threads.
    pub threads: usize,
    /// Shuffle the batch order each iteration with this seed. Off by default.
    pub shuffle_seed: Option<u64>,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            batch_size: 256,
            block_rows: 8,
            block_cols: 512,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            shuffle_seed: None,
        }
    }
}

impl BatchConfig {
    /// Defaults with the given batch size; tile height is capped at the batch size.
    pub fn with_batch(batch_size: usize) -> Self {
        let d = BatchConfig::default();
        BatchConfig {
            batch_size,
            block_rows: d.block_rows.min(batch_size.max(1)),
            ..d
        }
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LayoutError::InvalidConfig(msg));
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if self.block_rows == 0 || self.block_cols == 0 {
            return bad("tile dimensions must be at least 1".into());
        }
        if self.block_rows > self.batch_size {
            return bad(format!(
                "tile height {} exceeds batch size {}",
                self.block_rows, self.batch_size
            ));
        }
        if self.threads == 0 {
            return bad("thread count must be at least 1".into());
        }
        Ok(())
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new().num_threads(self.threads).build()?)
    }
}

/// Adds the forces that sources `j0..j0 + q` exert on targets `i0..i0 + p`
/// into the accumulators `ct[..p]`.
///
/// `cursors[x]` must point at the first CSR slot of row `i0 + x` whose column
/// is `>= j0`; it is advanced past every neighbour consumed by this tile, so
/// sweeping consecutive tiles left to right keeps the cursors in step.
#[allow(clippy::too_many_arguments)]
pub fn batch_force_tile(
    g: &CsrGraph,
    coords: &[Vec2],
    i0: usize,
    p: usize,
    j0: usize,
    q: usize,
    model: &EnergyModel,
    ct: &mut [ForceSum],
    cursors: &mut [usize],
) {
    let rowptr = g.rowptr();
    let colids = g.colids();
    let sources = &coords[j0..j0 + q];
    for x in 0..p {
        let i = i0 + x;
        let ci = coords[i];
        let row_end = rowptr[i + 1];
        let mut k = cursors[x];
        debug_assert!(k >= rowptr[i] && k <= row_end);
        debug_assert!(k == row_end || colids[k] as usize >= j0, "cursor behind tile");
        let mut acc = ct[x];
        for (y, &cj) in sources.iter().enumerate() {
            let j = j0 + y;
            if j == i {
                continue;
            }
            let adjacent = k < row_end && colids[k] as usize == j;
            if adjacent {
                k += 1;
            }
            acc += model.vertex_force(i, ci, j, cj, adjacent);
        }
        ct[x] = acc;
        cursors[x] = k;
    }
}

/// Net force on every vertex of `targets`, tiled `block_cols` sources at a time.
pub(crate) fn exact_forces(
    g: &CsrGraph,
    coords: &[Vec2],
    targets: Range<usize>,
    block_cols: usize,
    model: &EnergyModel,
    ct: &mut [Vec2],
) {
    let n = g.n();
    let p = targets.len();
    let mut cursors: Vec<usize> = targets.clone().map(|i| g.rowptr()[i]).collect();
    let mut sums = vec![ForceSum::ZERO; p];
    let mut j0 = 0;
    while j0 < n {
        let q = block_cols.min(n - j0);
        batch_force_tile(g, coords, targets.start, p, j0, q, model, &mut sums, &mut cursors);
        j0 += q;
    }
    for (f, sum) in ct.iter_mut().zip(sums) {
        *f = sum.value();
    }
}

struct ExactPhase<'a> {
    g: &'a CsrGraph,
    model: EnergyModel,
    block_rows: usize,
    block_cols: usize,
}

impl ForcePhase for ExactPhase<'_> {
    fn batch_forces(&self, coords: &[Vec2], batch: Range<usize>, ct: &mut [Vec2]) {
        let start = batch.start;
        let p = self.block_rows;
        let work = |(c, chunk): (usize, &mut [Vec2])| {
            let i0 = start + c * p;
            exact_forces(self.g, coords, i0..i0 + chunk.len(), self.block_cols, &self.model, chunk);
        };
        if ct.len() <= p {
            ct.chunks_mut(p).enumerate().for_each(work);
        } else {
            ct.par_chunks_mut(p).enumerate().for_each(work);
        }
    }
}

/// Runs the cache-blocked minibatch engine until `conv` says stop.
pub fn layout_exact(
    g: &CsrGraph,
    init: &Layout,
    model: &EnergyModel,
    cfg: &BatchConfig,
    sched: StepScheduler,
    conv: ConvergenceTracker,
) -> Result<LayoutRun> {
    init.check_against(g)?;
    cfg.validate()?;
    let mut phase = ExactPhase {
        g,
        model: *model,
        block_rows: cfg.block_rows,
        block_cols: cfg.block_cols,
    };
    let pool = cfg.pool()?;
    Ok(pool.install(|| driver::run(init, cfg, sched, conv, &mut phase)))
}

/// Plain sequential force-directed loop: each vertex is moved as soon as its
/// force is known, so later vertices see the update. Default step schedule.
pub fn reference_sequential(
    g: &CsrGraph,
    init: &Layout,
    model: &EnergyModel,
    iterations: usize,
) -> Result<Layout> {
    init.check_against(g)?;
    let mut c = init.coords.clone();
    let mut sched = StepScheduler::default();
    let n = g.n();
    for _ in 0..iterations {
        let mut energy = 0.0;
        for i in 0..n {
            let mut sum = ForceSum::ZERO;
            for j in 0..n {
                if j == i {
                    continue;
                }
                sum += model.vertex_force(i, c[i], j, c[j], g.is_adjacent(i, j));
            }
            let f = sum.value();
            c[i] = apply_update(c[i], f, sched.step());
            energy += f.norm_sq();
        }
        debug_assert!(energy.is_finite());
        sched.advance();
    }
    Ok(Layout::new(c))
}
