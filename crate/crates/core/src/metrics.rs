//! Layout quality metrics: scale-optimised stress, edge uniformity and
//! neighborhood preservation.
//!
//! Sums are always reduced in vertex order so reports do not depend on the
//! number of worker threads.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{LayoutError, Result};
use crate::graph::{CsrGraph, UNREACHABLE};
use crate::init::Layout;
use crate::model::Vec2;

/// Default sampled pair budget for stress.
pub const DEFAULT_PAIR_BUDGET: u64 = 10_000_000;

/// How many vertex pairs stress may evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairBudget {
    All,
    /// At most `pairs` uniformly sampled unordered pairs. Falls back to all
    /// pairs when the graph has no more than that.
    Sampled { pairs: u64, seed: u64 },
}

impl Default for PairBudget {
    fn default() -> Self {
        PairBudget::Sampled {
            pairs: DEFAULT_PAIR_BUDGET,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressResult {
    /// Stress after rescaling the layout by `scale`.
    pub stress: f64,
    /// Scale factor minimising stress.
    pub scale: f64,
    pub pairs_evaluated: u64,
    /// Pairs skipped because no path connects them.
    pub unreachable_pairs: u64,
    pub sampled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub stress: f64,
    pub stress_scale: f64,
    pub edge_uniformity: f64,
    pub neighborhood_preservation: f64,
    pub pairs_evaluated: u64,
    pub unreachable_pairs: u64,
    pub sampled: bool,
}

impl MetricReport {
    pub fn compute(g: &CsrGraph, layout: &Layout, budget: PairBudget) -> Result<Self> {
        let st = stress(g, layout, budget)?;
        Ok(MetricReport {
            stress: st.stress,
            stress_scale: st.scale,
            edge_uniformity: edge_uniformity(g, layout)?,
            neighborhood_preservation: neighborhood_preservation(g, layout)?,
            pairs_evaluated: st.pairs_evaluated,
            unreachable_pairs: st.unreachable_pairs,
            sampled: st.sampled,
        })
    }

    fn fields(&self) -> [(&'static str, String); 7] {
        [
            ("stress", format!("{}", self.stress)),
            ("stress_scale", format!("{}", self.stress_scale)),
            ("edge_uniformity", format!("{}", self.edge_uniformity)),
            ("neighborhood_preservation", format!("{}", self.neighborhood_preservation)),
            ("pairs_evaluated", self.pairs_evaluated.to_string()),
            ("unreachable_pairs", self.unreachable_pairs.to_string()),
            ("sampled", self.sampled.to_string()),
        ]
    }

    /// Single-line `key=value` record separated by spaces.
    pub fn to_record(&self) -> String {
        self.fields()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// One `key=value` per line.
impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.fields() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Weighted sums for the closed-form scale: stress(s) = Σw(s·l − d)².
#[derive(Debug, Clone, Copy, Default)]
struct StressSums {
    /// Σ w d l
    wdl: f64,
    /// Σ w l²
    wll: f64,
    /// Σ w d² (= number of pairs, since w = 1/d²)
    wdd: f64,
    pairs: u64,
    unreachable: u64,
}

impl StressSums {
    fn add(&mut self, hops: u32, length: f64) {
        if hops == UNREACHABLE {
            self.unreachable += 1;
            return;
        }
        let d = hops as f64;
        let w = 1.0 / (d * d);
        self.wdl += w * d * length;
        self.wll += w * length * length;
        self.wdd += w * d * d;
        self.pairs += 1;
    }

    fn merge(mut self, o: StressSums) -> StressSums {
        self.wdl += o.wdl;
        self.wll += o.wll;
        self.wdd += o.wdd;
        self.pairs += o.pairs;
        self.unreachable += o.unreachable;
        self
    }
}

/// Maps a linear index in `0..n(n-1)/2` to the pair `(i, j)`, `i < j`, in
/// row-major order.
fn unrank_pair(k: u64, n: u64) -> (usize, usize) {
    // row i starts at i*n - i(i+1)/2
    let row_start = |i: u64| i * n - i * (i + 1) / 2;
    let nf = n as f64;
    let kf = k as f64;
    let guess = (nf - 0.5 - ((nf - 0.5) * (nf - 0.5) - 2.0 * kf).max(0.0).sqrt()).floor();
    let mut i = (guess.max(0.0) as u64).min(n - 2);
    while i > 0 && row_start(i) > k {
        i -= 1;
    }
    while i + 1 < n - 1 && row_start(i + 1) <= k {
        i += 1;
    }
    let j = i + 1 + (k - row_start(i));
    (i as usize, j as usize)
}

/// Scale-optimised stress Σ w_ij (s‖c_i − c_j‖ − d_ij)² over unordered pairs,
/// with `w_ij = 1/d_ij²`. Returns the minimising `s` alongside the value.
pub fn stress(g: &CsrGraph, layout: &Layout, budget: PairBudget) -> Result<StressResult> {
    layout.check_against(g)?;
    let n = g.n();
    let coords = &layout.coords;
    let total_pairs = (n as u64) * (n as u64).saturating_sub(1) / 2;

    let (sums, sampled) = match budget {
        PairBudget::Sampled { pairs, seed } if pairs < total_pairs => {
            (sampled_stress_sums(g, coords, pairs, seed), true)
        }
        _ => (all_pairs_stress_sums(g, coords), false),
    };

    if sums.pairs == 0 {
        return Err(LayoutError::DegenerateMetric("stress: no connected vertex pairs".into()));
    }
    if !(sums.wll > 0.0) {
        return Err(LayoutError::DegenerateMetric(
            "stress: all evaluated pairs coincide in the layout".into(),
        ));
    }
    let scale = sums.wdl / sums.wll;
    // expanded form of Σ w (s l - d)² at s = wdl / wll
    let value = (sums.wdd - scale * sums.wdl).max(0.0);
    Ok(StressResult {
        stress: value,
        scale,
        pairs_evaluated: sums.pairs,
        unreachable_pairs: sums.unreachable,
        sampled,
    })
}

fn all_pairs_stress_sums(g: &CsrGraph, coords: &[Vec2]) -> StressSums {
    let n = g.n();
    let per_source: Vec<StressSums> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![UNREACHABLE; n], VecDeque::new()),
            |(dist, queue), i| {
                g.bfs_into(i, dist, queue);
                let mut s = StressSums::default();
                for j in i + 1..n {
                    s.add(dist[j], coords[i].dist(coords[j]));
                }
                s
            },
        )
        .collect();
    per_source.into_iter().fold(StressSums::default(), StressSums::merge)
}

fn sampled_stress_sums(g: &CsrGraph, coords: &[Vec2], pairs: u64, seed: u64) -> StressSums {
    let n = g.n();
    let total = (n as u64) * (n as u64 - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<(usize, usize)> = index::sample(&mut rng, total as usize, pairs as usize)
        .into_iter()
        .map(|k| unrank_pair(k as u64, n as u64))
        .collect();
    chosen.sort_unstable();

    // one BFS per distinct source
    let mut groups: Vec<&[(usize, usize)]> = Vec::new();
    let mut rest = chosen.as_slice();
    while let Some(&(src, _)) = rest.first() {
        let len = rest.partition_point(|p| p.0 == src);
        groups.push(&rest[..len]);
        rest = &rest[len..];
    }
    let per_source: Vec<StressSums> = groups
        .into_par_iter()
        .map_init(
            || (vec![UNREACHABLE; n], VecDeque::new()),
            |(dist, queue), group| {
                let i = group[0].0;
                g.bfs_into(i, dist, queue);
                let mut s = StressSums::default();
                for &(_, j) in group {
                    s.add(dist[j], coords[i].dist(coords[j]));
                }
                s
            },
        )
        .collect();
    per_source.into_iter().fold(StressSums::default(), StressSums::merge)
}

/// Normalised standard deviation of drawn edge lengths,
/// `sqrt(Σ(l_e − l_μ)² / (|E| l_μ²))`, each undirected edge counted once.
pub fn edge_uniformity(g: &CsrGraph, layout: &Layout) -> Result<f64> {
    layout.check_against(g)?;
    let lengths: Vec<f64> = g
        .edges()
        .map(|(i, j)| layout.coords[i].dist(layout.coords[j]))
        .collect();
    if lengths.is_empty() {
        return Err(LayoutError::DegenerateMetric("edge uniformity: graph has no edges".into()));
    }
    let count = lengths.len() as f64;
    let mean = lengths.iter().sum::<f64>() / count;
    if !(mean > 0.0) {
        return Err(LayoutError::DegenerateMetric("edge uniformity: mean edge length is zero".into()));
    }
    let var: f64 = lengths.iter().map(|l| (l - mean) * (l - mean)).sum();
    Ok((var / (count * mean * mean)).sqrt())
}

/// Mean Jaccard similarity between each vertex's neighbour set and its
/// `deg(i)` nearest vertices in the layout (ties broken by vertex id), over
/// vertices of positive degree.
pub fn neighborhood_preservation(g: &CsrGraph, layout: &Layout) -> Result<f64> {
    layout.check_against(g)?;
    if g.m() == 0 {
        return Err(LayoutError::DegenerateMetric(
            "neighborhood preservation: graph has no edges".into(),
        ));
    }
    let n = g.n();
    let coords = &layout.coords;
    let scores: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map_init(Vec::new, |candidates: &mut Vec<(f64, u32)>, i| {
            let nbrs = g.neighbors(i);
            let k = nbrs.len();
            if k == 0 {
                return None;
            }
            candidates.clear();
            candidates.extend(
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| ((coords[j] - coords[i]).norm_sq(), j as u32)),
            );
            let by_distance = |a: &(f64, u32), b: &(f64, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < candidates.len() {
                candidates.select_nth_unstable_by(k - 1, by_distance);
            }
            let nearest = &candidates[..k];
            let shared = nearest
                .iter()
                .filter(|(_, j)| nbrs.binary_search(j).is_ok())
                .count();
            // both sets have k members
            Some(shared as f64 / (2 * k - shared) as f64)
        })
        .collect();
    let (sum, count) = scores
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    Ok(sum / count as f64)
}
