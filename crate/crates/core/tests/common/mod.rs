//! Oracles and invariant suites shared by the property tests and the
//! acceptance target. Every suite runs through a proptest `TestRunner` so the
//! case count is explicit.

#![allow(dead_code)]

use std::collections::HashSet;

use mblayout::bh::{interleave, BoundingBox, QuadTree, MAX_DEPTH};
use mblayout::graph::{parse_mtx, UNREACHABLE};
use mblayout::metrics::{edge_uniformity, neighborhood_preservation, stress};
use mblayout::model::apply_update;
use mblayout::{greedy_init, CsrGraph, EnergyModel, Layout, ModelVariant, PairBudget, StepScheduler, Vec2};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 128;

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn fail<T: std::fmt::Debug>(e: proptest::test_runner::TestError<T>) -> String {
    e.to_string()
}

// ---------------------------------------------------------------- strategies

/// Vertex count plus an arbitrary edge list, self-loops and repeats included.
pub fn edge_list(max_n: usize, max_edges: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_n).prop_flat_map(move |n| (Just(n), prop::collection::vec((0..n, 0..n), 0..=max_edges)))
}

pub fn graph(max_n: usize, max_edges: usize) -> impl Strategy<Value = CsrGraph> {
    edge_list(max_n, max_edges).prop_map(|(n, e)| CsrGraph::from_edges(n, e).unwrap())
}

pub fn point(half: f64) -> impl Strategy<Value = Vec2> {
    (-half..half, -half..half).prop_map(|(x, y)| Vec2::new(x, y))
}

pub fn points(min: usize, max: usize, half: f64) -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec(point(half), min..=max)
}

/// A graph together with a layout of matching length.
pub fn graph_and_layout(max_n: usize, max_edges: usize) -> impl Strategy<Value = (CsrGraph, Layout)> {
    graph(max_n, max_edges).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), prop::collection::vec(point(50.0), n).prop_map(Layout::new))
    })
}

pub fn variant() -> impl Strategy<Value = ModelVariant> {
    prop::sample::select(ModelVariant::ALL.to_vec())
}

pub fn model() -> impl Strategy<Value = EnergyModel> {
    (variant(), 0.1..4.0f64, 0.1..4.0f64).prop_map(|(v, k, r)| EnergyModel::new(v, k, r).unwrap())
}

// ------------------------------------------------------------------- oracles

pub fn floyd_warshall(g: &CsrGraph) -> Vec<Vec<u32>> {
    let n = g.n();
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for &j in g.neighbors(i) {
            d[i][j as usize] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    for row in &mut d {
        for v in row.iter_mut() {
            if *v >= inf {
                *v = UNREACHABLE;
            }
        }
    }
    d
}

/// Bit-by-bit Morton interleave.
pub fn interleave_loop(qx: u32, qy: u32) -> u32 {
    let mut code = 0;
    for b in 0..16 {
        code |= ((qx >> b) & 1) << (2 * b);
        code |= ((qy >> b) & 1) << (2 * b + 1);
    }
    code
}

/// Repulsion on `i` from every other point, summed directly.
pub fn brute_repulsion(points: &[Vec2], i: usize, model: &EnergyModel) -> Vec2 {
    let mut f = Vec2::ZERO;
    for (j, &p) in points.iter().enumerate() {
        if j != i {
            f += model.vertex_force(i, points[i], j, p, false);
        }
    }
    f
}

/// Stress by direct evaluation of Σ w (s l − d)² at the closed-form scale,
/// using Floyd-Warshall distances.
pub fn brute_stress(g: &CsrGraph, layout: &Layout) -> Option<(f64, f64)> {
    let d = floyd_warshall(g);
    let c = &layout.coords;
    let mut pairs = Vec::new();
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            if d[i][j] != UNREACHABLE {
                let dij = d[i][j] as f64;
                let dx = c[i].x - c[j].x;
                let dy = c[i].y - c[j].y;
                pairs.push((1.0 / (dij * dij), dij, (dx * dx + dy * dy).sqrt()));
            }
        }
    }
    let num: f64 = pairs.iter().map(|(w, d, l)| w * d * l).sum();
    let den: f64 = pairs.iter().map(|(w, _, l)| w * l * l).sum();
    if pairs.is_empty() || den <= 0.0 {
        return None;
    }
    let s = num / den;
    Some((stress_at(&pairs, s), s))
}

fn stress_at(pairs: &[(f64, f64, f64)], s: f64) -> f64 {
    pairs.iter().map(|(w, d, l)| w * (s * l - d) * (s * l - d)).sum()
}

/// Stress of `layout` at an explicit scale.
pub fn stress_at_scale(g: &CsrGraph, layout: &Layout, s: f64) -> f64 {
    let d = floyd_warshall(g);
    let c = &layout.coords;
    let mut pairs = Vec::new();
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            if d[i][j] != UNREACHABLE {
                let dij = d[i][j] as f64;
                pairs.push((1.0 / (dij * dij), dij, c[i].dist(c[j])));
            }
        }
    }
    stress_at(&pairs, s)
}

pub fn brute_edge_uniformity(g: &CsrGraph, layout: &Layout) -> Option<f64> {
    let mut lengths = Vec::new();
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            if g.neighbors(i).contains(&(j as u32)) {
                lengths.push(layout.coords[i].dist(layout.coords[j]));
            }
        }
    }
    if lengths.is_empty() {
        return None;
    }
    let e = lengths.len() as f64;
    let mu = lengths.iter().sum::<f64>() / e;
    if mu <= 0.0 {
        return None;
    }
    Some((lengths.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / (e * mu * mu)).sqrt())
}

/// Neighbourhood preservation by full sort of every vertex's distances.
pub fn brute_np(g: &CsrGraph, layout: &Layout) -> Option<f64> {
    let c = &layout.coords;
    let mut total = 0.0;
    let mut counted = 0;
    for i in 0..g.n() {
        let nbrs: HashSet<usize> = g.neighbors(i).iter().map(|&j| j as usize).collect();
        if nbrs.is_empty() {
            continue;
        }
        let mut order: Vec<usize> = (0..g.n()).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            let da = (c[a] - c[i]).norm_sq();
            let db = (c[b] - c[i]).norm_sq();
            da.total_cmp(&db).then(a.cmp(&b))
        });
        let near: HashSet<usize> = order.into_iter().take(nbrs.len()).collect();
        let inter = near.intersection(&nbrs).count() as f64;
        let union = near.union(&nbrs).count() as f64;
        total += inter / union;
        counted += 1;
    }
    (counted > 0).then(|| total / counted as f64)
}

/// Greedy placement re-derived from the pseudocode for a connected graph,
/// also returning who placed whom.
pub fn greedy_oracle(g: &CsrGraph) -> (Vec<Vec2>, Vec<Option<usize>>) {
    let n = g.n();
    let mut pos = vec![Vec2::ZERO; n];
    let mut parent = vec![None; n];
    let mut visited = vec![false; n];
    let mut stack = vec![0];
    visited[0] = true;
    while let Some(u) = stack.pop() {
        let deg = g.neighbors(u).len();
        let mut angle: f64 = 0.0;
        for &v in g.neighbors(u) {
            let v = v as usize;
            if !visited[v] {
                let rad = angle.to_radians();
                pos[v] = Vec2::new(pos[u].x + rad.cos(), pos[u].y + rad.sin());
                parent[v] = Some(u);
                visited[v] = true;
                stack.push(v);
                angle += 360.0 / deg as f64;
            }
        }
    }
    (pos, parent)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn rotate(layout: &Layout, angle: f64, shift: Vec2) -> Layout {
    let (s, c) = angle.sin_cos();
    Layout::new(
        layout
            .coords
            .iter()
            .map(|p| Vec2::new(c * p.x - s * p.y + shift.x, s * p.x + c * p.y + shift.y))
            .collect(),
    )
}

// ------------------------------------------------------------ invariant suites

pub fn csr_validity(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&edge_list(40, 120), |(n, edges)| {
            let g = CsrGraph::from_edges(n, edges.iter().copied()).unwrap();
            g.validate().map_err(TestCaseError::fail)?;
            let expected: HashSet<(usize, usize)> = edges
                .iter()
                .filter(|(a, b)| a != b)
                .map(|&(a, b)| (a.min(b), a.max(b)))
                .collect();
            let got: HashSet<(usize, usize)> = g.edges().collect();
            prop_assert_eq!(&got, &expected);
            let degree_sum: usize = (0..n).map(|i| g.degree(i).unwrap()).sum();
            prop_assert_eq!(degree_sum, g.m());
            prop_assert_eq!(g.m(), 2 * expected.len());
            for i in 0..n {
                prop_assert!(!g.is_adjacent(i, i));
                for &j in g.neighbors(i) {
                    prop_assert!(g.is_adjacent(j as usize, i));
                }
            }
            Ok(())
        })
        .map_err(fail)
}

pub fn mtx_round_trip(cases: u32) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("g.mtx");
    runner(cases)
        .run(&graph(30, 80), |g| {
            g.write_mtx(&path).unwrap();
            let (back, meta) = parse_mtx(&path).unwrap();
            prop_assert_eq!(back.n(), g.n());
            prop_assert_eq!(back.rowptr(), g.rowptr());
            prop_assert_eq!(back.colids(), g.colids());
            prop_assert_eq!(meta.dropped_self_loops, 0);
            Ok(())
        })
        .map_err(fail)
}

pub fn bfs_matches_floyd_warshall(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&graph(25, 50), |g| {
            let fw = floyd_warshall(&g);
            for s in 0..g.n() {
                prop_assert_eq!(&g.bfs_distances(s).unwrap(), &fw[s]);
            }
            Ok(())
        })
        .map_err(fail)
}

pub fn force_antisymmetry(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(model(), point(100.0), point(100.0), any::<bool>()), |(m, a, b, adj)| {
            prop_assume!(a != b);
            prop_assert_eq!(m.pair_force(a, b, adj), -m.pair_force(b, a, adj));
            prop_assert_eq!(m.vertex_force(0, a, 1, b, adj), -m.vertex_force(1, b, 0, a, adj));
            // stacked points too, once vertex ids orient the fallback
            prop_assert_eq!(m.vertex_force(2, a, 5, a, adj), -m.vertex_force(5, a, 2, a, adj));
            Ok(())
        })
        .map_err(fail)
}

pub fn translation_invariance(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(model(), point(100.0), point(100.0), point(100.0), any::<bool>()), |(m, a, b, t, adj)| {
            prop_assume!(a.dist(b) > 1e-3);
            let f = m.pair_force(a, b, adj);
            let g = m.pair_force(a + t, b + t, adj);
            prop_assert!((f - g).norm() <= 1e-7 * f.norm().max(1.0), "{:?} vs {:?}", f, g);
            Ok(())
        })
        .map_err(fail)
}

pub fn update_moves_by_step(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(point(1e3), point(1e3), 1e-6..10.0f64), |(c, f, step)| {
            let moved = apply_update(c, f, step);
            if f.norm() < 1e-9 {
                prop_assert_eq!(moved, c);
            } else {
                let d = moved.dist(c);
                prop_assert!((d - step).abs() <= 1e-9 * c.norm().max(1.0), "moved {} for step {}", d, step);
            }
            Ok(())
        })
        .map_err(fail)
}

pub fn step_schedule(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(0usize..5000), |t| {
            let mut s = StepScheduler::default();
            let mut expect = 1.0f64;
            for _ in 0..t {
                s.advance();
                expect *= 0.999;
            }
            prop_assert_eq!(s.step(), expect);
            Ok(())
        })
        .map_err(fail)
}

/// Unit radius, equal angular gaps and agreement with the pseudocode oracle.
pub fn greedy_unit_circle(cases: u32) -> Result<(), String> {
    let connected = (2usize..60, 0usize..80, any::<u64>())
        .prop_map(|(n, extra, seed)| mblayout::generators::random_connected(n, extra, seed));
    runner(cases)
        .run(&connected, |g| {
            let layout = greedy_init(&g);
            prop_assert_eq!(&layout.coords, &greedy_init(&g).coords);
            let (oracle, parent) = greedy_oracle(&g);
            for v in 0..g.n() {
                prop_assert!(layout.coords[v].dist(oracle[v]) <= 1e-9, "vertex {} off oracle", v);
                if let Some(u) = parent[v] {
                    let r = layout.coords[v].dist(layout.coords[u]);
                    prop_assert!((r - 1.0).abs() <= 1e-12, "radius {}", r);
                }
            }
            for u in 0..g.n() {
                let kids: Vec<usize> = (0..g.n()).filter(|&v| parent[v] == Some(u)).collect();
                let gap = 360.0 / g.neighbors(u).len() as f64;
                let angles: Vec<f64> = kids
                    .iter()
                    .map(|&v| {
                        let d = layout.coords[v] - layout.coords[u];
                        d.y.atan2(d.x).to_degrees().rem_euclid(360.0)
                    })
                    .collect();
                for (k, a) in angles.iter().enumerate() {
                    let want = (k as f64 * gap).rem_euclid(360.0);
                    let diff = (a - want).abs();
                    prop_assert!(diff.min(360.0 - diff) <= 1e-7, "angle {} want {}", a, want);
                }
            }
            Ok(())
        })
        .map_err(fail)
}

pub fn morton_matches_loop(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(any::<u16>(), any::<u16>()), |(x, y)| {
            prop_assert_eq!(interleave(x as u32, y as u32), interleave_loop(x as u32, y as u32));
            Ok(())
        })
        .map_err(fail)
}

/// Mass conservation, centroids, Morton contiguity and rebuild idempotence.
pub fn tree_structure(cases: u32) -> Result<(), String> {
    let clustered = prop_oneof![points(1, 300, 100.0), points(1, 60, 1e-3), points(1, 40, 3.0).prop_map(|mut p| {
        // force exact duplicates
        let dup = p.clone();
        p.extend(dup);
        p
    })];
    runner(cases)
        .run(&clustered, |pts| {
            let tree = QuadTree::build(&pts, MAX_DEPTH);
            prop_assert_eq!(&tree, &QuadTree::build(&pts, MAX_DEPTH));
            let nodes = tree.nodes();
            let root = &nodes[0];
            prop_assert_eq!(root.count as usize, pts.len());
            let mean = pts.iter().fold(Vec2::ZERO, |a, &p| a + p) * (1.0 / pts.len() as f64);
            let scale = pts.iter().map(|p| p.norm()).fold(1.0, f64::max);
            prop_assert!((root.centroid - mean).norm() <= 1e-12 * scale, "{:?} vs {:?}", root.centroid, mean);

            let mut sorted = tree.order().to_vec();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..pts.len() as u32).collect::<Vec<_>>());
            prop_assert!(tree.codes().windows(2).all(|w| w[0] <= w[1]));

            let leaf_total: u32 = nodes.iter().filter(|n| n.is_leaf()).map(|n| n.count).sum();
            prop_assert_eq!(leaf_total as usize, pts.len());

            // walk with depth to check prefixes and child partitions
            let mut stack = vec![(0usize, 0u32)];
            while let Some((idx, depth)) = stack.pop() {
                let node = &nodes[idx];
                prop_assert_eq!(node.count, node.end - node.start);
                let codes = &tree.codes()[node.start as usize..node.end as usize];
                if depth > 0 {
                    let shift = 32 - 2 * depth;
                    prop_assert!(codes.iter().all(|c| c >> shift == codes[0] >> shift));
                }
                let members = tree.vertices(node);
                let sum = members.iter().fold(Vec2::ZERO, |a, &v| a + pts[v as usize]);
                let centroid = sum * (1.0 / members.len() as f64);
                prop_assert!((node.centroid - centroid).norm() <= 1e-9 * scale);
                for &v in members {
                    let p = pts[v as usize];
                    let slack = 1e-9 * scale;
                    prop_assert!(
                        p.x >= node.cell_min.x - slack
                            && p.y >= node.cell_min.y - slack
                            && p.x <= node.cell_min.x + node.diameter + slack
                            && p.y <= node.cell_min.y + node.diameter + slack
                    );
                }
                if !node.is_leaf() {
                    let kids: Vec<_> = tree.children(node).collect();
                    prop_assert_eq!(kids.first().unwrap().1.start, node.start);
                    prop_assert_eq!(kids.last().unwrap().1.end, node.end);
                    for w in kids.windows(2) {
                        prop_assert_eq!(w[0].1.end, w[1].1.start);
                    }
                    let total: u32 = kids.iter().map(|(_, k)| k.count).sum();
                    prop_assert_eq!(total, node.count);
                    for child in node.children.iter().flatten() {
                        stack.push((*child as usize, depth + 1));
                    }
                }
            }
            Ok(())
        })
        .map_err(fail)
}

pub fn theta_monotone_visits(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(points(2, 200, 50.0), 0.0..3.0f64, 0.0..3.0f64), |(pts, t1, t2)| {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let tree = QuadTree::build(&pts, MAX_DEPTH);
            let m = EnergyModel::default();
            let visits = |theta: f64| -> usize {
                (0..pts.len())
                    .map(|i| tree.repulsive_with_stats(i, pts[i], &m, theta).1.nodes_visited)
                    .sum()
            };
            prop_assert!(visits(hi) <= visits(lo));
            Ok(())
        })
        .map_err(fail)
}

pub fn theta_zero_exact(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&(points(2, 150, 50.0), variant()), |(pts, v)| {
            let tree = QuadTree::build(&pts, MAX_DEPTH);
            let m = EnergyModel::with_variant(v);
            for i in 0..pts.len() {
                let got = tree.repulsive_force(i, pts[i], &m, 0.0);
                let want = brute_repulsion(&pts, i, &m);
                prop_assert!((got - want).norm() <= 1e-9 * want.norm().max(1e-300), "{:?} vs {:?}", got, want);
            }
            Ok(())
        })
        .map_err(fail)
}

pub fn metric_rigid_motion(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(
            &(graph_and_layout(30, 60), -3.2..3.2f64, point(1e3), 0.01..100.0f64),
            |((g, layout), angle, shift, k)| {
                prop_assume!(g.edge_count() > 0);
                let moved = rotate(&layout, angle, shift);
                let scaled = Layout::new(layout.coords.iter().map(|&p| p * k).collect());
                let st = stress(&g, &layout, PairBudget::All).unwrap().stress;
                let eu = edge_uniformity(&g, &layout).unwrap();
                let np = neighborhood_preservation(&g, &layout).unwrap();
                for other in [&moved, &scaled] {
                    let st2 = stress(&g, other, PairBudget::All).unwrap().stress;
                    prop_assert!(rel_close(st, st2, 1e-7), "stress {} vs {}", st, st2);
                    let eu2 = edge_uniformity(&g, other).unwrap();
                    prop_assert!(rel_close(eu, eu2, 1e-7), "eu {} vs {}", eu, eu2);
                    let np2 = neighborhood_preservation(&g, other).unwrap();
                    prop_assert!((np - np2).abs() <= 1e-12, "np {} vs {}", np, np2);
                }
                Ok(())
            },
        )
        .map_err(fail)
}

pub fn metrics_match_brute_force(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&graph_and_layout(40, 90), |(g, layout)| {
            prop_assume!(g.edge_count() > 0);
            let s = stress(&g, &layout, PairBudget::All).unwrap();
            let (bs, bscale) = brute_stress(&g, &layout).unwrap();
            prop_assert!(rel_close(s.stress, bs, 1e-9), "stress {} vs {}", s.stress, bs);
            prop_assert!(rel_close(s.scale, bscale, 1e-9));
            prop_assert!(s.stress >= 0.0);
            let eu = edge_uniformity(&g, &layout).unwrap();
            prop_assert!(rel_close(eu, brute_edge_uniformity(&g, &layout).unwrap(), 1e-9));
            let np = neighborhood_preservation(&g, &layout).unwrap();
            prop_assert!((np - brute_np(&g, &layout).unwrap()).abs() <= 1e-9);
            prop_assert!((0.0..=1.0).contains(&np));
            Ok(())
        })
        .map_err(fail)
}

pub fn bounding_box_contains(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&points(1, 100, 1e4), |pts| {
            let b = BoundingBox::of(&pts).square();
            prop_assert!(pts.iter().all(|&p| b.contains(p)));
            prop_assert!((b.max.x - b.min.x - (b.max.y - b.min.y)).abs() <= 1e-9 * b.diameter().max(1.0));
            Ok(())
        })
        .map_err(fail)
}

/// Every suite, named, for callers that want to run them all.
pub fn all_suites() -> Vec<(&'static str, fn(u32) -> Result<(), String>)> {
    vec![
        ("csr validity", csr_validity),
        ("mtx round trip", mtx_round_trip),
        ("bfs vs floyd-warshall", bfs_matches_floyd_warshall),
        ("force antisymmetry", force_antisymmetry),
        ("translation invariance", translation_invariance),
        ("update moves by step", update_moves_by_step),
        ("step schedule", step_schedule),
        ("greedy unit circle", greedy_unit_circle),
        ("morton oracle", morton_matches_loop),
        ("tree mass/centroid/contiguity", tree_structure),
        ("theta monotone visits", theta_monotone_visits),
        ("theta zero exactness", theta_zero_exact),
        ("bounding box", bounding_box_contains),
        ("metric rigid motion and scale", metric_rigid_motion),
        ("metrics vs brute force", metrics_match_brute_force),
    ]
}
