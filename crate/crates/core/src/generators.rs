//! Synthetic graphs for tests, benchmarks and the CLI bench mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::CsrGraph;
use crate::model::Vec2;

pub fn path(n: usize) -> CsrGraph {
    CsrGraph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("n >= 1")
}

/// Vertex 0 joined to `leaves` leaves.
pub fn star(leaves: usize) -> CsrGraph {
    CsrGraph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).expect("n >= 1")
}

/// `w` × `h` 4-neighbour lattice, vertex `(x, y)` at id `y * w + x`.
pub fn grid(w: usize, h: usize) -> CsrGraph {
    let id = |x: usize, y: usize| y * w + x;
    let mut edges = Vec::with_capacity(2 * w * h);
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    CsrGraph::from_edges(w * h, edges).expect("w, h >= 1")
}

/// Triangulated lattice: a [`grid`] plus one diagonal per cell.
pub fn triangular_mesh(w: usize, h: usize) -> CsrGraph {
    let id = |x: usize, y: usize| y * w + x;
    let base = grid(w, h);
    let diagonals = (0..h.saturating_sub(1))
        .flat_map(|y| (0..w.saturating_sub(1)).map(move |x| (id(x, y), id(x + 1, y + 1))));
    CsrGraph::from_edges(w * h, base.edges().chain(diagonals)).expect("w, h >= 1")
}

/// Connected random graph: a random spanning tree plus `extra` random edges.
/// Hexagonal lattice drawn as a brick wall: every vertex links to its right
/// neighbour, and to the one above when `x + y` is even. Interior degree 3,
/// like the dual of a triangulated mesh.
pub fn honeycomb(w: usize, h: usize) -> CsrGraph {
    let id = |x: usize, y: usize| y * w + x;
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h && (x + y) % 2 == 0 {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    CsrGraph::from_edges(w * h, edges).expect("w, h >= 1")
}

pub fn random_connected(n: usize, extra: usize, seed: u64) -> CsrGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    if n > 1 {
        edges.extend((0..extra).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))));
    }
    CsrGraph::from_edges(n, edges).expect("n >= 1")
}

/// Erdős–Rényi G(n, p).
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> CsrGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    CsrGraph::from_edges(n, edges).expect("n >= 1")
}

/// `n` points uniform in `[-half, half]²`.
pub fn random_points(n: usize, half: f64, seed: u64) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Vec2::new(rng.gen_range(-half..=half), rng.gen_range(-half..=half)))
        .collect()
}
