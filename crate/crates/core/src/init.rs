//! Initial layouts.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LayoutError, Result};
use crate::graph::CsrGraph;
use crate::model::Vec2;

/// One coordinate per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub coords: Vec<Vec2>,
}

impl Layout {
    pub fn new(coords: Vec<Vec2>) -> Self {
        Layout { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub(crate) fn check_against(&self, g: &CsrGraph) -> Result<()> {
        if self.len() != g.n() {
            return Err(LayoutError::LengthMismatch {
                graph: g.n(),
                layout: self.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    Random,
    #[default]
    Greedy,
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitMode::Random => "random",
            InitMode::Greedy => "greedy",
        })
    }
}

impl FromStr for InitMode {
    type Err = LayoutError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitMode::Random),
            "greedy" => Ok(InitMode::Greedy),
            _ => Err(LayoutError::InvalidConfig(format!("unknown init mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitConfig {
    pub mode: InitMode,
    /// Half-width of the random range; `None` means `sqrt(n)`.
    pub maxmin: Option<f64>,
    pub seed: u64,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            mode: InitMode::Greedy,
            maxmin: None,
            seed: 0,
        }
    }
}

impl InitConfig {
    pub fn random(seed: u64) -> Self {
        InitConfig {
            mode: InitMode::Random,
            maxmin: None,
            seed,
        }
    }

    pub fn maxmin_for(&self, n: usize) -> f64 {
        self.maxmin.unwrap_or_else(|| (n as f64).sqrt())
    }
}

/// Builds the initial layout selected by `cfg.mode`.
pub fn initialize(g: &CsrGraph, cfg: &InitConfig) -> Result<Layout> {
    match cfg.mode {
        InitMode::Random => random_init(g, cfg),
        InitMode::Greedy => Ok(greedy_init(g)),
    }
}

/// Independent uniform coordinates in `[-maxmin, maxmin]²`.
pub fn random_init(g: &CsrGraph, cfg: &InitConfig) -> Result<Layout> {
    let maxmin = cfg.maxmin_for(g.n());
    if !(maxmin > 0.0 && maxmin.is_finite()) {
        return Err(LayoutError::InvalidConfig(format!("maxmin must be positive, got {maxmin}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let coords = (0..g.n())
        .map(|_| Vec2::new(rng.gen_range(-maxmin..=maxmin), rng.gen_range(-maxmin..=maxmin)))
        .collect();
    Ok(Layout::new(coords))
}

/// Greedy DFS placement: each popped vertex puts its unvisited neighbours on
/// a unit circle around itself, `360 / deg` degrees apart.
///
/// Every connected component is seeded at its own grid origin from
/// [`component_offsets`], starting from its smallest vertex id.
pub fn greedy_init(g: &CsrGraph) -> Layout {
    let n = g.n();
    let mut coords = vec![Vec2::ZERO; n];
    let mut visited = vec![false; n];
    let mut stack = Vec::new();

    for (root, origin) in component_offsets(g) {
        coords[root] = origin;
        visited[root] = true;
        stack.push(root);
        while let Some(u) = stack.pop() {
            let deg = g.neighbors(u).len();
            if deg == 0 {
                continue;
            }
            let step = 360.0 / deg as f64;
            let mut angle = 0.0;
            let center = coords[u];
            for &v in g.neighbors(u) {
                let v = v as usize;
                if visited[v] {
                    continue;
                }
                let rad = PI * angle / 180.0;
                coords[v] = Vec2::new(center.x + rad.cos(), center.y + rad.sin());
                visited[v] = true;
                stack.push(v);
                angle += step;
            }
        }
    }
    debug_assert!(visited.iter().all(|&v| v));
    Layout::new(coords)
}

/// One `(root, origin)` per connected component. Roots are the smallest
/// vertex id of each component; origins sit on a square grid whose spacing is
/// `2 * ceil(sqrt(largest component size))`.
pub fn component_offsets(g: &CsrGraph) -> Vec<(usize, Vec2)> {
    let components = g.components();
    let largest = components.iter().map(Vec::len).max().unwrap_or(1);
    let spacing = 2.0 * (largest as f64).sqrt().ceil();
    let cols = (components.len() as f64).sqrt().ceil().max(1.0) as usize;
    components
        .iter()
        .enumerate()
        .map(|(k, members)| {
            let origin = Vec2::new((k % cols) as f64 * spacing, (k / cols) as f64 * spacing);
            (members[0], origin)
        })
        .collect()
}
