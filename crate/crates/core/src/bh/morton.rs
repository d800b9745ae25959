//! Z-order (Morton) keys over a 16-bit quantisation of each axis.

use rayon::prelude::*;

use crate::model::Vec2;

/// Quantisation levels per axis.
pub const AXIS_BITS: u32 = 16;
const AXIS_CELLS: f64 = (1u32 << AXIS_BITS) as f64;
const AXIS_MAX: u32 = (1 << AXIS_BITS) - 1;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Vec2,
    pub max: Vec2,
}

impl BoundingBox {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        BoundingBox { min, max }
    }

    /// Tight box around `points`. Empty input gives a zero box at the origin.
    pub fn of(points: &[Vec2]) -> Self {
        let Some(&first) = points.first() else {
            return BoundingBox::new(Vec2::ZERO, Vec2::ZERO);
        };
        let (min, max) = points.iter().fold((first, first), |(lo, hi), p| {
            (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y)))
        });
        BoundingBox { min, max }
    }

    /// Largest axis extent.
    pub fn diameter(&self) -> f64 {
        (self.max.x - self.min.x).max(self.max.y - self.min.y)
    }

    /// Square box of side [`diameter`](Self::diameter) anchored at `min`.
    pub fn square(&self) -> Self {
        let d = self.diameter();
        let far = self.min + Vec2::new(d, d);
        // min + (max - min) can round below max
        BoundingBox::new(self.min, Vec2::new(far.x.max(self.max.x), far.y.max(self.max.y)))
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

fn quantize(v: f64, lo: f64, hi: f64) -> u32 {
    let extent = hi - lo;
    if !(extent > 0.0) {
        return 0;
    }
    let cell = ((v - lo) / extent * AXIS_CELLS).floor();
    if cell <= 0.0 {
        0
    } else {
        (cell as u32).min(AXIS_MAX)
    }
}

/// Spreads the low 16 bits of `v` to the even bit positions.
#[inline]
fn spread(v: u32) -> u32 {
    let mut x = v & 0x0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333;
    x = (x | (x << 1)) & 0x5555_5555;
    x
}

/// Interleaves quantised cells: x in even bits, y in odd bits.
#[inline]
pub fn interleave(qx: u32, qy: u32) -> u32 {
    spread(qx) | (spread(qy) << 1)
}

/// Morton code of `c` after quantising each axis over the extent of `bbox`.
/// Points on the upper edge fall in the top cell.
pub fn morton_code(c: Vec2, bbox: &BoundingBox) -> u32 {
    interleave(
        quantize(c.x, bbox.min.x, bbox.max.x),
        quantize(c.y, bbox.min.y, bbox.max.y),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MortonKey {
    pub code: u32,
    pub vertex: u32,
}

/// Morton keys of all points in Z-order; equal codes are ordered by vertex id.
pub fn morton_keys(points: &[Vec2], bbox: &BoundingBox) -> Vec<MortonKey> {
    let mut keys: Vec<MortonKey> = points
        .par_iter()
        .enumerate()
        .map(|(i, &c)| MortonKey {
            code: morton_code(c, bbox),
            vertex: i as u32,
        })
        .collect();
    // (code, vertex) pairs are unique, so an unstable sort is still deterministic
    keys.par_sort_unstable();
    keys
}

/// Vertex ids in Z-order over the square bounding box of `points`.
pub fn morton_sort(points: &[Vec2]) -> Vec<u32> {
    let bbox = BoundingBox::of(points).square();
    morton_keys(points, &bbox).into_iter().map(|k| k.vertex).collect()
}
