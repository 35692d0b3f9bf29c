//! Deterministic geometry of `Z^d`: nested hypercubic blocks, community
//! levels, distances and finite simulation boxes.
//!
//! The block at level `k` with index `i` is the set of vertices `v` with
//! `z^k i_j <= v_j <= (i_j + 1) z^k - 1` in every coordinate. Blocks at a
//! fixed level partition `Z^d` and nest upward; indexing uses floor division
//! toward minus infinity so that orthant separation is exact: two vertices on
//! opposite sides of a coordinate hyperplane never share a block.

use crate::error::{Error, Result};

/// A lattice point of `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub coords: Vec<i64>,
}

impl Vertex {
    pub fn new(coords: Vec<i64>) -> Self {
        Vertex { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl std::ops::Deref for Vertex {
    type Target = [i64];

    fn deref(&self) -> &[i64] {
        &self.coords
    }
}

impl From<&[i64]> for Vertex {
    fn from(c: &[i64]) -> Self {
        Vertex { coords: c.to_vec() }
    }
}

/// Identifier of one nested block: the level and the d-dimensional index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockId {
    pub level: u32,
    pub index: Vec<i64>,
}

/// The finite window `[0, L)^d` used for sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimBox {
    side: i64,
    dim: u32,
}

impl SimBox {
    pub fn new(side: i64, dim: u32) -> Result<Self> {
        if side < 1 {
            return Err(Error::invalid("L", format!("box side must be >= 1, got {side}")));
        }
        if dim < 1 || dim > 8 {
            return Err(Error::invalid("d", format!("dimension must be in 1..=8, got {dim}")));
        }
        let count = (side as u128).pow(dim);
        if count > u32::MAX as u128 {
            return Err(Error::BoxTooLarge {
                vertices: count,
                limit: u32::MAX as u64,
            });
        }
        Ok(SimBox { side, dim })
    }

    pub fn side(&self) -> i64 {
        self.side
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        (self.side as usize).pow(self.dim)
    }

    /// Row-major linear index of in-box coordinates.
    pub fn index_of(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.dim as usize);
        let mut idx = 0usize;
        for &c in coords {
            debug_assert!(c >= 0 && c < self.side);
            idx = idx * self.side as usize + c as usize;
        }
        idx
    }

    /// Inverse of [`SimBox::index_of`]; writes into `out`.
    pub fn coords_of(&self, mut idx: usize, out: &mut [i64]) {
        debug_assert_eq!(out.len(), self.dim as usize);
        for j in (0..self.dim as usize).rev() {
            out[j] = (idx % self.side as usize) as i64;
            idx /= self.side as usize;
        }
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        coords.len() == self.dim as usize && coords.iter().all(|&c| c >= 0 && c < self.side)
    }

    pub fn vertex(&self, idx: usize) -> Vertex {
        let mut c = vec![0i64; self.dim as usize];
        self.coords_of(idx, &mut c);
        Vertex::new(c)
    }

    /// Smallest level k with `[0, z^k)^d` covering the box.
    pub fn covering_level(&self, z: i64) -> u32 {
        let mut k = 0u32;
        let mut span: i64 = 1;
        while span < self.side {
            span = span.saturating_mul(z);
            k += 1;
        }
        k
    }
}

#[inline]
fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// The unique block index `i` at `level` containing `v`.
pub fn block_index(v: &[i64], level: u32, z: i64) -> BlockId {
    debug_assert!(z >= 2);
    // z^level as i128; beyond ~2^63 every coordinate floors to 0 or -1.
    let mut divisor: i128 = 1;
    let mut huge = false;
    for _ in 0..level {
        divisor = divisor.saturating_mul(z as i128);
        if divisor > i64::MAX as i128 {
            huge = true;
            break;
        }
    }
    let index = v
        .iter()
        .map(|&c| {
            if huge {
                if c < 0 {
                    -1
                } else {
                    0
                }
            } else {
                floor_div(c, divisor as i64)
            }
        })
        .collect();
    BlockId { level, index }
}

/// True when no coordinate hyperplane separates `u` from `v`.
#[inline]
pub fn same_orthant(u: &[i64], v: &[i64]) -> bool {
    u.iter().zip(v).all(|(&a, &b)| (a >= 0) == (b >= 0))
}

/// The smallest level at which `u` and `v` share a block; `None` when they
/// lie in different orthants and never do.
pub fn community_level(u: &[i64], v: &[i64], z: i64) -> Option<u32> {
    debug_assert_eq!(u.len(), v.len());
    debug_assert!(z >= 2);
    if !same_orthant(u, v) {
        return None;
    }
    let mut a: Vec<i64> = u.to_vec();
    let mut b: Vec<i64> = v.to_vec();
    let mut k = 0u32;
    loop {
        if a == b {
            return Some(k);
        }
        for c in a.iter_mut() {
            *c = floor_div(*c, z);
        }
        for c in b.iter_mut() {
            *c = floor_div(*c, z);
        }
        k += 1;
    }
}

/// Exact squared Euclidean distance.
#[inline]
pub fn dist2(u: &[i64], v: &[i64]) -> u128 {
    u.iter()
        .zip(v)
        .map(|(&a, &b)| {
            let d = (a - b) as i128;
            (d * d) as u128
        })
        .sum()
}

/// Euclidean distance between two vertices.
pub fn euclid_dist(u: &[i64], v: &[i64]) -> f64 {
    (dist2(u, v) as f64).sqrt()
}

/// `ceil(log_z(dist / delta))` clamped below at 0, computed from the squared
/// distance: the smallest `k >= 0` with `z^k >= dist / delta`.
///
/// `delta_sq` is delta squared; callers using the default `delta = sqrt(d)`
/// pass exactly `d as f64` so block-diagonal ties resolve exactly.
pub fn distance_level_from_dist2(dist2: f64, z: i64, delta_sq: f64) -> u32 {
    debug_assert!(dist2 >= 0.0 && delta_sq > 0.0);
    let mut k = 0u32;
    let mut z2k = 1.0f64; // z^(2k)
    while z2k * delta_sq < dist2 {
        z2k *= (z * z) as f64;
        k += 1;
        debug_assert!(k < 2_000);
    }
    k
}

/// `ceil(log_z(d(u, v) / delta))` clamped below at 0.
pub fn distance_level(u: &[i64], v: &[i64], z: i64, delta_sq: f64) -> u32 {
    distance_level_from_dist2(dist2(u, v) as f64, z, delta_sq)
}
