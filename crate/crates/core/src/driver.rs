//! The minibatch iteration loop shared by both engines.

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exact::BatchConfig;
use crate::init::Layout;
use crate::model::{apply_update, ConvergenceTracker, StepScheduler, Vec2};
use crate::LayoutRun;

/// Computes net forces for one minibatch against frozen coordinates.
pub(crate) trait ForcePhase: Sync {
    /// Called once per iteration before the first batch.
    fn begin_iteration(&mut self, _coords: &[Vec2]) {}

    /// Writes the net force of every vertex in `batch` into `ct`
    /// (`ct.len() == batch.len()`). Must not depend on the worker count.
    fn batch_forces(&self, coords: &[Vec2], batch: Range<usize>, ct: &mut [Vec2]);
}

pub(crate) fn run<P: ForcePhase>(
    init: &Layout,
    cfg: &BatchConfig,
    mut sched: StepScheduler,
    mut conv: ConvergenceTracker,
    phase: &mut P,
) -> LayoutRun {
    let mut coords = init.coords.clone();
    let n = coords.len();
    let bs = cfg.batch_size;
    let batches = n.div_ceil(bs);
    let mut order: Vec<usize> = (0..batches).collect();
    let mut shuffler = cfg.shuffle_seed.map(ChaCha8Rng::seed_from_u64);
    let mut ct = vec![Vec2::ZERO; bs.min(n)];

    let mut iterations = 0;
    let mut energy = 0.0;
    let mut previous_energy = None;
    let mut initial_energy = None;

    while !conv.exhausted() {
        phase.begin_iteration(&coords);
        if let Some(rng) = shuffler.as_mut() {
            order.shuffle(rng);
        }
        let step = sched.step();
        let mut iter_energy = 0.0;
        for &b in &order {
            let batch = b * bs..((b + 1) * bs).min(n);
            let forces = &mut ct[..batch.len()];
            forces.fill(Vec2::ZERO);
            phase.batch_forces(&coords, batch.clone(), forces);
            // sequential update keeps the energy sum order fixed
            for (f, i) in forces.iter().zip(batch) {
                coords[i] = apply_update(coords[i], *f, step);
                iter_energy += f.norm_sq();
            }
        }
        sched.advance();
        iterations += 1;
        previous_energy = (iterations > 1).then_some(energy);
        energy = iter_energy;
        initial_energy.get_or_insert(iter_energy);
        if conv.converged(iter_energy) {
            break;
        }
    }

    LayoutRun {
        layout: Layout::new(coords),
        iterations,
        energy,
        previous_energy,
        initial_energy,
    }
}
