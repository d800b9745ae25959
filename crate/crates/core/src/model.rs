//! Force kernels, the (a, r) energy model family, step schedule and
//! convergence test shared by both engines.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::error::{LayoutError, Result};

/// Distance floor applied before any kernel evaluation.
pub const DISTANCE_EPSILON: f64 = 1e-9;

/// Direction from `i` to `j` assumed when two points coincide and `i < j`;
/// the opposite direction is used when `i > j`.
pub const FALLBACK_DIRECTION: Vec2 = Vec2 { x: 1.0, y: 0.0 };

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Compensated (double-double) accumulator for force sums.
///
/// Each component keeps a rounded running sum plus the exact rounding error of
/// every addition, so the final [`value`](ForceSum::value) is, barring
/// cancellation beyond ~106 bits, the correctly rounded sum and does not depend
/// on the order the terms arrive in. The engines rely on this to agree with
/// each other and with [`reference_sequential`](crate::reference_sequential)
/// even though they visit vertices in different orders.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ForceSum {
    hi: Vec2,
    lo: Vec2,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bp = s - a;
    (s, (a - (s - bp)) + (b - bp))
}

impl ForceSum {
    pub const ZERO: ForceSum = ForceSum { hi: Vec2::ZERO, lo: Vec2::ZERO };

    #[inline]
    pub fn add(&mut self, v: Vec2) {
        let (x, ex) = two_sum(self.hi.x, v.x);
        let (y, ey) = two_sum(self.hi.y, v.y);
        self.hi = Vec2::new(x, y);
        self.lo.x += ex;
        self.lo.y += ey;
    }

    pub fn value(self) -> Vec2 {
        Vec2::new(self.hi.x + self.lo.x, self.hi.y + self.lo.y)
    }
}

impl AddAssign<Vec2> for ForceSum {
    #[inline]
    fn add_assign(&mut self, v: Vec2) {
        self.add(v);
    }
}

impl SubAssign<Vec2> for ForceSum {
    #[inline]
    fn sub_assign(&mut self, v: Vec2) {
        self.add(-v);
    }
}

impl std::iter::Sum<Vec2> for ForceSum {
    fn sum<I: Iterator<Item = Vec2>>(iter: I) -> Self {
        let mut acc = ForceSum::ZERO;
        iter.for_each(|v| acc.add(v));
        acc
    }
}

/// The supported members of the `(a, r)` energy model family.
///
/// Variants are labelled the way the force-directed literature names them:
/// attraction grows like `d^a` and repulsion like `d^r`, so `(2, -1)` is
/// Fruchterman-Reingold. The kernels in [`EnergyModel`] are written as
/// `d^a / K` and `-R K² / d^e`, so the kernel exponent is `e = -r`; see
/// [`ModelVariant::kernel_exponents`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ModelVariant {
    /// `(2, -1)`: Fruchterman-Reingold. The default.
    #[default]
    FruchtermanReingold,
    /// `(1, -1)`: ForceAtlas style linear attraction.
    ForceAtlas,
    /// `(0, -1)`: LinLog style constant attraction.
    LinLog,
    /// `(1, 1)`: linear attraction with repulsion growing linearly in distance.
    LinearRepulsion,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::FruchtermanReingold,
        ModelVariant::ForceAtlas,
        ModelVariant::LinLog,
        ModelVariant::LinearRepulsion,
    ];

    /// The `(a, r)` label.
    pub fn label(self) -> (i32, i32) {
        match self {
            ModelVariant::FruchtermanReingold => (2, -1),
            ModelVariant::ForceAtlas => (1, -1),
            ModelVariant::LinLog => (0, -1),
            ModelVariant::LinearRepulsion => (1, 1),
        }
    }

    /// Exponents `(a, e)` as they enter `d^a / K` and `-R K² / d^e`.
    pub fn kernel_exponents(self) -> (i32, i32) {
        let (a, r) = self.label();
        (a, -r)
    }

    pub fn from_label(a: i32, r: i32) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.label() == (a, r))
    }

    pub fn from_kernel_exponents(a: i32, e: i32) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.kernel_exponents() == (a, e))
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, r) = self.label();
        write!(f, "{a},{r}")
    }
}

impl FromStr for ModelVariant {
    type Err = LayoutError;

    /// Accepts an `"a,r"` label, e.g. `"2,-1"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || LayoutError::InvalidConfig(format!("unknown energy model `{s}`, expected one of 2,-1 1,-1 0,-1 1,1"));
        let (a, r) = s.split_once(',').ok_or_else(bad)?;
        let a: i32 = a.trim().parse().map_err(|_| bad())?;
        let r: i32 = r.trim().parse().map_err(|_| bad())?;
        ModelVariant::from_label(a, r).ok_or_else(bad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    variant: ModelVariant,
    /// Optimal spring length.
    k: f64,
    /// Repulsion strength regulator.
    r_strength: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel {
            variant: ModelVariant::default(),
            k: 1.0,
            r_strength: 1.0,
        }
    }
}

impl EnergyModel {
    pub fn new(variant: ModelVariant, k: f64, r_strength: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(LayoutError::InvalidConfig(format!("K must be positive, got {k}")));
        }
        if !(r_strength > 0.0 && r_strength.is_finite()) {
            return Err(LayoutError::InvalidConfig(format!("R must be positive, got {r_strength}")));
        }
        Ok(EnergyModel { variant, k, r_strength })
    }

    /// Model from raw kernel exponents: attraction `d^a / K`, repulsion
    /// `-R K² / d^e`. Only the exponent pairs of [`ModelVariant`] are accepted.
    pub fn from_kernel_exponents(a: i32, e: i32, k: f64, r_strength: f64) -> Result<Self> {
        let variant = ModelVariant::from_kernel_exponents(a, e).ok_or_else(|| {
            LayoutError::InvalidConfig(format!("unsupported kernel exponents a={a}, e={e}"))
        })?;
        Self::new(variant, k, r_strength)
    }

    pub fn with_variant(variant: ModelVariant) -> Self {
        EnergyModel {
            variant,
            ..Self::default()
        }
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn r_strength(&self) -> f64 {
        self.r_strength
    }

    /// `dist^a / K`. `dist` must already be clamped.
    #[inline]
    pub fn attractive_magnitude(&self, dist: f64) -> f64 {
        debug_assert!(dist > 0.0);
        let powered = match self.variant {
            ModelVariant::FruchtermanReingold => dist * dist,
            ModelVariant::ForceAtlas | ModelVariant::LinearRepulsion => dist,
            ModelVariant::LinLog => 1.0,
        };
        powered / self.k
    }

    /// `-R K² / dist^e`, negative so that it pushes `i` away from `j`.
    #[inline]
    pub fn repulsive_magnitude(&self, dist: f64) -> f64 {
        debug_assert!(dist > 0.0);
        let rk2 = self.r_strength * self.k * self.k;
        match self.variant {
            ModelVariant::LinearRepulsion => -rk2 * dist,
            _ => -rk2 / dist,
        }
    }

    /// Force exerted on `ci` by `cj`. Coincident points use
    /// [`FALLBACK_DIRECTION`] as the direction towards `cj`.
    #[inline]
    pub fn pair_force(&self, ci: Vec2, cj: Vec2, adjacent: bool) -> Vec2 {
        self.oriented_force(ci, cj, adjacent, FALLBACK_DIRECTION)
    }

    /// Force exerted on vertex `i` by vertex `j`. Unlike [`pair_force`](Self::pair_force)
    /// the coincident case stays antisymmetric, so two stacked vertices are
    /// pushed apart rather than dragged along together.
    #[inline]
    pub fn vertex_force(&self, i: usize, ci: Vec2, j: usize, cj: Vec2, adjacent: bool) -> Vec2 {
        let fallback = if i < j { FALLBACK_DIRECTION } else { -FALLBACK_DIRECTION };
        self.oriented_force(ci, cj, adjacent, fallback)
    }

    #[inline]
    fn oriented_force(&self, ci: Vec2, cj: Vec2, adjacent: bool, fallback: Vec2) -> Vec2 {
        let delta = cj - ci;
        let raw = delta.norm();
        let (dist, dir) = if raw < DISTANCE_EPSILON {
            (DISTANCE_EPSILON, fallback)
        } else {
            (raw, delta * (1.0 / raw))
        };
        let magnitude = if adjacent {
            self.attractive_magnitude(dist)
        } else {
            self.repulsive_magnitude(dist)
        };
        dir * magnitude
    }

    /// Repulsion from `count` vertices collapsed onto `centroid`.
    #[inline]
    pub fn lumped_repulsion(&self, ci: Vec2, centroid: Vec2, count: f64) -> Vec2 {
        self.pair_force(ci, centroid, false) * count
    }
}

pub fn clamp_distance(raw: f64) -> f64 {
    raw.max(DISTANCE_EPSILON)
}

/// Moves `c` by exactly `step` along `f`. Vanishing forces leave `c` in place.
#[inline]
pub fn apply_update(c: Vec2, f: Vec2, step: f64) -> Vec2 {
    let norm = f.norm();
    if norm < DISTANCE_EPSILON {
        return c;
    }
    c + f * (step / norm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepScheduler {
    step: f64,
    decay: f64,
    iteration: usize,
}

impl Default for StepScheduler {
    fn default() -> Self {
        StepScheduler {
            step: 1.0,
            decay: 0.999,
            iteration: 0,
        }
    }
}

impl StepScheduler {
    pub fn new(initial: f64, decay: f64) -> Result<Self> {
        if !(initial > 0.0 && initial.is_finite()) {
            return Err(LayoutError::InvalidConfig(format!("initial step must be positive, got {initial}")));
        }
        if !(decay > 0.0 && decay < 1.0) {
            return Err(LayoutError::InvalidConfig(format!("step decay must lie in (0, 1), got {decay}")));
        }
        Ok(StepScheduler {
            step: initial,
            decay,
            iteration: 0,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn advance(&mut self) {
        self.step *= self.decay;
        self.iteration += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvergenceMode {
    #[default]
    Absolute,
    /// `|ΔE| / max(E_prev, ε)`
    Relative,
}

/// Stops a run when successive energies differ by less than `threshold`, or
/// when the iteration cap is reached. A zero threshold disables the energy test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceTracker {
    previous: Option<f64>,
    threshold: f64,
    max_iterations: usize,
    iteration: usize,
    mode: ConvergenceMode,
}

impl ConvergenceTracker {
    pub fn new(threshold: f64, max_iterations: usize) -> Result<Self> {
        if !(threshold >= 0.0) {
            return Err(LayoutError::InvalidConfig(format!(
                "convergence threshold must be non-negative, got {threshold}"
            )));
        }
        Ok(ConvergenceTracker {
            previous: None,
            threshold,
            max_iterations,
            iteration: 0,
            mode: ConvergenceMode::Absolute,
        })
    }

    /// Fixed iteration count, no energy test.
    pub fn fixed(iterations: usize) -> Self {
        ConvergenceTracker {
            previous: None,
            threshold: 0.0,
            max_iterations: iterations,
            iteration: 0,
            mode: ConvergenceMode::Absolute,
        }
    }

    pub fn with_mode(mut self, mode: ConvergenceMode) -> Self {
        self.mode = mode;
        self
    }

    /// Seeds the previous energy, as if an iteration had already reported it.
    pub fn with_previous(mut self, energy: f64) -> Self {
        self.previous = Some(energy);
        self
    }

    pub fn with_iteration(mut self, iteration: usize) -> Self {
        self.iteration = iteration;
        self
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn previous(&self) -> Option<f64> {
        self.previous
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// True once no further iteration should run, before any is attempted.
    pub fn exhausted(&self) -> bool {
        self.iteration >= self.max_iterations
    }

    /// Records the energy of a finished iteration and reports whether to stop.
    pub fn converged(&mut self, energy: f64) -> bool {
        self.iteration += 1;
        let settled = match self.previous {
            Some(prev) => {
                let diff = (energy - prev).abs();
                let diff = match self.mode {
                    ConvergenceMode::Absolute => diff,
                    ConvergenceMode::Relative => diff / prev.max(DISTANCE_EPSILON),
                };
                diff < self.threshold
            }
            None => false,
        };
        self.previous = Some(energy);
        settled || self.iteration >= self.max_iterations
    }
}
