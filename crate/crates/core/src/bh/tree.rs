use rayon::prelude::*;

use super::morton::{morton_keys, BoundingBox, MortonKey, AXIS_BITS};
use crate::model::{EnergyModel, ForceSum, Vec2, DISTANCE_EPSILON};

/// Ranges larger than this build their children on separate tasks.
const PARALLEL_CUTOFF: usize = 4096;

/// Deepest level the 32-bit keys can split to.
pub const MAX_DEPTH: usize = AXIS_BITS as usize;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadNode {
    /// Mean coordinate of every vertex below this node.
    pub centroid: Vec2,
    pub count: u32,
    /// Side length of the node's square cell.
    pub diameter: f64,
    /// Lower-left corner of the cell.
    pub cell_min: Vec2,
    /// Half-open range into [`QuadTree::order`].
    pub start: u32,
    pub end: u32,
    /// Child node indices by quadrant: 0 lower-left, 1 lower-right, 2 upper-left, 3 upper-right.
    pub children: [Option<u32>; 4],
}

impl QuadNode {
    pub fn is_leaf(&self) -> bool {
        self.children.iter().all(Option::is_none)
    }

    pub fn cell_contains(&self, p: Vec2) -> bool {
        p.x >= self.cell_min.x
            && p.y >= self.cell_min.y
            && p.x <= self.cell_min.x + self.diameter
            && p.y <= self.cell_min.y + self.diameter
    }
}

/// Quad-tree over a Morton-sorted snapshot of the coordinates.
///
/// Nodes are stored in pre-order with the root at index 0. Every node covers
/// a contiguous run of the Morton order. Leaves normally hold one vertex; a
/// leaf holds several only when their quantised positions coincide or the
/// depth cap is reached.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadTree {
    nodes: Vec<QuadNode>,
    order: Vec<u32>,
    codes: Vec<u32>,
    /// Snapshot coordinates in Morton order.
    points: Vec<Vec2>,
}

/// Per-query traversal statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraversalStats {
    pub nodes_visited: usize,
    pub approximated: usize,
    pub exact_pairs: usize,
}

struct Builder<'a> {
    codes: &'a [u32],
    points: &'a [Vec2],
    max_depth: usize,
}

impl Builder<'_> {
    fn build(&self, start: usize, end: usize, level: usize, cell_min: Vec2, diameter: f64) -> Vec<QuadNode> {
        let mut root = QuadNode {
            centroid: Vec2::ZERO,
            count: (end - start) as u32,
            diameter,
            cell_min,
            start: start as u32,
            end: end as u32,
            children: [None; 4],
        };
        if end - start == 1 || level >= self.max_depth || self.codes[start] == self.codes[end - 1] {
            let sum = self.points[start..end].iter().fold(Vec2::ZERO, |acc, &p| acc + p);
            root.centroid = sum * (1.0 / (end - start) as f64);
            return vec![root];
        }

        let shift = 2 * (AXIS_BITS as usize - 1 - level);
        let quadrant = |code: u32| (code >> shift) & 3;
        let slice = &self.codes[start..end];
        let mut bounds = [start; 5];
        for q in 1..4 {
            bounds[q] = start + slice.partition_point(|&c| quadrant(c) < q as u32);
        }
        bounds[4] = end;

        let half = diameter * 0.5;
        let parts: Vec<(usize, usize, usize, Vec2)> = (0..4)
            .filter(|&q| bounds[q] < bounds[q + 1])
            .map(|q| {
                let offset = Vec2::new((q & 1) as f64 * half, (q >> 1) as f64 * half);
                (q, bounds[q], bounds[q + 1], cell_min + offset)
            })
            .collect();
        let make = |&(_, s, e, min): &(usize, usize, usize, Vec2)| self.build(s, e, level + 1, min, half);
        let subtrees: Vec<Vec<QuadNode>> = if end - start > PARALLEL_CUTOFF {
            parts.par_iter().map(make).collect()
        } else {
            parts.iter().map(make).collect()
        };

        let total: usize = 1 + subtrees.iter().map(Vec::len).sum::<usize>();
        let mut nodes = Vec::with_capacity(total);
        nodes.push(root);
        let mut weighted = Vec2::ZERO;
        for ((q, ..), sub) in parts.iter().zip(subtrees) {
            let offset = nodes.len() as u32;
            weighted += sub[0].centroid * sub[0].count as f64;
            nodes[0].children[*q] = Some(offset);
            nodes.extend(sub.into_iter().map(|mut node| {
                for child in node.children.iter_mut().flatten() {
                    *child += offset;
                }
                node
            }));
        }
        nodes[0].centroid = weighted * (1.0 / (end - start) as f64);
        nodes
    }
}

impl QuadTree {
    /// Builds the tree over `coords`: square bounding box, Morton sort, then
    /// recursive four-way splits of the sorted order.
    pub fn build(coords: &[Vec2], max_depth: usize) -> Self {
        let bbox = BoundingBox::of(coords).square();
        let keys = morton_keys(coords, &bbox);
        Self::from_sorted_keys(coords, &keys, bbox.min, bbox.diameter(), max_depth)
    }

    /// Builds from keys already in Z-order. `root_min` and `root_diameter`
    /// describe the square the keys were quantised over.
    pub fn from_sorted_keys(
        coords: &[Vec2],
        keys: &[MortonKey],
        root_min: Vec2,
        root_diameter: f64,
        max_depth: usize,
    ) -> Self {
        assert_eq!(coords.len(), keys.len(), "one key per coordinate");
        let order: Vec<u32> = keys.iter().map(|k| k.vertex).collect();
        let codes: Vec<u32> = keys.iter().map(|k| k.code).collect();
        let points: Vec<Vec2> = order.iter().map(|&v| coords[v as usize]).collect();
        let nodes = if keys.is_empty() {
            Vec::new()
        } else {
            Builder {
                codes: &codes,
                points: &points,
                max_depth: max_depth.min(MAX_DEPTH),
            }
            .build(0, keys.len(), 0, root_min, root_diameter)
        };
        QuadTree {
            nodes,
            order,
            codes,
            points,
        }
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn root(&self) -> Option<&QuadNode> {
        self.nodes.first()
    }

    /// Vertex ids in Z-order.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn children<'a>(&'a self, node: &'a QuadNode) -> impl Iterator<Item = (usize, &'a QuadNode)> + 'a {
        node.children
            .iter()
            .enumerate()
            .filter_map(|(q, c)| c.map(|c| (q, &self.nodes[c as usize])))
    }

    /// Vertices stored under `node`.
    pub fn vertices(&self, node: &QuadNode) -> &[u32] {
        &self.order[node.start as usize..node.end as usize]
    }

    /// Repulsion on vertex `i` at `ci` from every other vertex, using the
    /// snapshot coordinates the tree was built from.
    pub fn repulsive_force(&self, i: usize, ci: Vec2, model: &EnergyModel, theta: f64) -> Vec2 {
        self.repulsive_with_stats(i, ci, model, theta).0
    }

    pub fn repulsive_with_stats(
        &self,
        i: usize,
        ci: Vec2,
        model: &EnergyModel,
        theta: f64,
    ) -> (Vec2, TraversalStats) {
        let mut force = ForceSum::ZERO;
        let stats = self.traverse(i, ci, model, theta, |k| self.points[k], &mut force);
        (force.value(), stats)
    }

    /// Adds the repulsion on vertex `i` at `ci` into `force`. Leaf vertices
    /// are read from `coords`, so exact terms use current positions while
    /// approximated cells use their snapshot centroids.
    pub fn add_repulsion_live(
        &self,
        i: usize,
        ci: Vec2,
        coords: &[Vec2],
        model: &EnergyModel,
        theta: f64,
        force: &mut ForceSum,
    ) {
        self.traverse(i, ci, model, theta, |k| coords[self.order[k] as usize], force);
    }

    fn traverse(
        &self,
        i: usize,
        ci: Vec2,
        model: &EnergyModel,
        theta: f64,
        position: impl Fn(usize) -> Vec2,
        force: &mut ForceSum,
    ) -> TraversalStats {
        let mut stats = TraversalStats::default();
        if !self.nodes.is_empty() {
            self.visit(0, i as u32, ci, model, theta, &position, force, &mut stats);
        }
        stats
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        idx: usize,
        i: u32,
        ci: Vec2,
        model: &EnergyModel,
        theta: f64,
        position: &impl Fn(usize) -> Vec2,
        force: &mut ForceSum,
        stats: &mut TraversalStats,
    ) {
        let node = &self.nodes[idx];
        stats.nodes_visited += 1;
        if node.is_leaf() {
            for k in node.start as usize..node.end as usize {
                let j = self.order[k];
                if j != i {
                    *force += model.vertex_force(i as usize, ci, j as usize, position(k), false);
                    stats.exact_pairs += 1;
                }
            }
            return;
        }
        let d = node.centroid.dist(ci).max(DISTANCE_EPSILON);
        if theta > node.diameter / d && !node.cell_contains(ci) {
            *force += model.lumped_repulsion(ci, node.centroid, node.count as f64);
            stats.approximated += 1;
            return;
        }
        for child in node.children.iter().flatten() {
            self.visit(*child as usize, i, ci, model, theta, position, force, stats);
        }
    }
}
