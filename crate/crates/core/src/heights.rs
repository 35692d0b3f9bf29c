//! Community heights: i.i.d. per-vertex levels with `P(X >= k) = alpha^-k`,
//! plus the explicit coupling with uniform marks used for the Yukich
//! comparison (`U^-s >= z^X` almost surely when `s = 1 / log_z alpha`).

use std::io::{BufRead, Write};

use rand::RngExt;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::SimBox;
use crate::rng::{self, Stream};

/// Height of one vertex: the maximal community level it belongs to.
/// `Infinite` occurs iff `alpha = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Height {
    Finite(u32),
    Infinite,
}

impl Height {
    #[inline]
    pub fn at_least(self, k: u32) -> bool {
        match self {
            Height::Finite(h) => h >= k,
            Height::Infinite => true,
        }
    }

    #[inline]
    pub fn min(self, other: Height) -> Height {
        match (self, other) {
            (Height::Finite(a), Height::Finite(b)) => Height::Finite(a.min(b)),
            (Height::Finite(a), Height::Infinite) => Height::Finite(a),
            (Height::Infinite, b) => b,
        }
    }

    /// Height clamped to `cap` (infinite maps to `cap`).
    #[inline]
    pub fn capped(self, cap: u32) -> u32 {
        match self {
            Height::Finite(h) => h.min(cap),
            Height::Infinite => cap,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Height::Infinite)
    }
}

/// Exact inverse CDF of the height law: the largest `k >= 0` with
/// `u <= alpha^-k` (powers evaluated in f64, with fix-up steps so the
/// comparison is honored exactly as written).
pub fn height_quantile(u: f64, alpha: f64) -> u32 {
    debug_assert!(u > 0.0 && u <= 1.0);
    debug_assert!(alpha > 1.0);
    let mut k = (-u.ln() / alpha.ln()).floor().max(0.0) as i64;
    // float fix-up: enforce u <= alpha^-k < u at k+1
    while u <= alpha.powi(-(k as i32 + 1)) {
        k += 1;
    }
    while k > 0 && u > alpha.powi(-(k as i32)) {
        k -= 1;
    }
    k as u32
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 1.0) {
        return Err(Error::invalid("alpha", format!("must be >= 1, got {alpha}")));
    }
    Ok(())
}

/// Draw one height. `alpha = 1` yields `Infinite`.
pub fn sample_height<R: rand::Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<Height> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(Height::Infinite);
    }
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    Ok(Height::Finite(height_quantile(u, alpha)))
}

/// Height of the vertex at `coords` under the given master seed; pure in
/// (seed, coords, alpha) and independent of traversal order.
#[inline]
pub fn height_at(seed: u64, alpha: f64, coords: &[i64]) -> Height {
    if alpha == 1.0 {
        return Height::Infinite;
    }
    let u = rng::unit_vertex(seed, Stream::Heights, coords);
    Height::Finite(height_quantile(u, alpha))
}

/// Per-vertex community heights on a finite box.
#[derive(Clone, Debug)]
pub struct HeightField {
    pub bbox: SimBox,
    pub alpha: f64,
    pub seed: u64,
    heights: Vec<Height>,
}

impl HeightField {
    /// Sample i.i.d. heights for every box vertex.
    pub fn sample(bbox: SimBox, alpha: f64, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        let d = bbox.dim() as usize;
        let heights: Vec<Height> = (0..bbox.vertex_count())
            .into_par_iter()
            .map(|idx| {
                let mut c = vec![0i64; d];
                bbox.coords_of(idx, &mut c);
                height_at(seed, alpha, &c)
            })
            .collect();
        Ok(HeightField {
            bbox,
            alpha,
            seed,
            heights,
        })
    }

    /// Build from explicit values (tests, deserialization).
    pub fn from_values(bbox: SimBox, alpha: f64, seed: u64, heights: Vec<Height>) -> Result<Self> {
        if heights.len() != bbox.vertex_count() {
            return Err(Error::BadInput(format!(
                "height count {} != box vertex count {}",
                heights.len(),
                bbox.vertex_count()
            )));
        }
        Ok(HeightField {
            bbox,
            alpha,
            seed,
            heights,
        })
    }

    #[inline]
    pub fn get(&self, idx: usize) -> Height {
        self.heights[idx]
    }

    pub fn values(&self) -> &[Height] {
        &self.heights
    }

    /// Apply a hard cap to every height (capped model used by the oracles).
    pub fn cap(&mut self, cap: u32) {
        for h in self.heights.iter_mut() {
            *h = Height::Finite(h.capped(cap));
        }
    }

    /// Columnar text format: header `d z alpha seed L`, then one
    /// `x1 .. xd height` row per vertex ("inf" for infinite heights).
    pub fn write_text<W: Write>(&self, z: i64, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "{} {} {} {} {}",
            self.bbox.dim(),
            z,
            self.alpha,
            self.seed,
            self.bbox.side()
        )?;
        let d = self.bbox.dim() as usize;
        let mut c = vec![0i64; d];
        for (idx, h) in self.heights.iter().enumerate() {
            self.bbox.coords_of(idx, &mut c);
            for x in &c {
                write!(w, "{x} ")?;
            }
            match h {
                Height::Finite(v) => writeln!(w, "{v}")?,
                Height::Infinite => writeln!(w, "inf")?,
            }
        }
        Ok(())
    }

    /// Parse the text format; returns the field and the z recorded with it.
    pub fn read_text<R: BufRead>(r: &mut R) -> Result<(Self, i64)> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(Error::Parse(format!("bad header: {header:?}")));
        }
        let d: u32 = parts[0].parse().map_err(|e| Error::Parse(format!("d: {e}")))?;
        let z: i64 = parts[1].parse().map_err(|e| Error::Parse(format!("z: {e}")))?;
        let alpha: f64 = parts[2].parse().map_err(|e| Error::Parse(format!("alpha: {e}")))?;
        let seed: u64 = parts[3].parse().map_err(|e| Error::Parse(format!("seed: {e}")))?;
        let side: i64 = parts[4].parse().map_err(|e| Error::Parse(format!("L: {e}")))?;
        let bbox = SimBox::new(side, d)?;
        let mut heights = vec![Height::Finite(0); bbox.vertex_count()];
        let mut c = vec![0i64; d as usize];
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != d as usize + 1 {
                return Err(Error::Parse(format!("bad row: {line:?}")));
            }
            for (j, f) in fields[..d as usize].iter().enumerate() {
                c[j] = f.parse().map_err(|e| Error::Parse(format!("coord: {e}")))?;
            }
            let h = if fields[d as usize] == "inf" {
                Height::Infinite
            } else {
                Height::Finite(
                    fields[d as usize]
                        .parse()
                        .map_err(|e| Error::Parse(format!("height: {e}")))?,
                )
            };
            heights[bbox.index_of(&c)] = h;
        }
        Ok((HeightField::from_values(bbox, alpha, seed, heights)?, z))
    }
}

/// A uniform mark coupled with a height so that `u^-s >= z^x` always holds
/// (`s = 1 / log_z alpha`). Equivalently `u <= alpha^-x`, which is the form
/// the construction guarantees exactly.
#[derive(Clone, Copy, Debug)]
pub struct CoupledMark {
    pub u: f64,
    pub x: Height,
}

impl CoupledMark {
    /// The defining inequality, checked in its exact form `u <= alpha^-x`.
    pub fn coupling_holds(&self, alpha: f64) -> bool {
        match self.x {
            Height::Finite(x) => self.u <= alpha.powi(-(x as i32)),
            Height::Infinite => false,
        }
    }
}

/// Draw a coupled (uniform mark, height) pair: the mark determines the height
/// through the exact inverse CDF, which is precisely the coupling measure.
pub fn coupled_sample<R: rand::Rng + ?Sized>(alpha: f64, _z: i64, rng: &mut R) -> Result<CoupledMark> {
    if !(alpha > 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("coupling needs finite heights (alpha > 1), got {alpha}"),
        ));
    }
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    Ok(CoupledMark {
        u,
        x: Height::Finite(height_quantile(u, alpha)),
    })
}

/// Coupled mark for the vertex at `coords`, keyed by the master seed.
/// Marks reuse the height stream, so a coupled field's heights agree
/// bit-for-bit with [`HeightField::sample`] at the same seed.
pub fn coupled_at(seed: u64, alpha: f64, coords: &[i64]) -> CoupledMark {
    let u = rng::unit_vertex(seed, Stream::Heights, coords);
    CoupledMark {
        u,
        x: Height::Finite(height_quantile(u, alpha)),
    }
}

/// Mean number of communities an individual belongs to: `1 / (alpha - 1)`.
pub fn group_membership_mean(alpha: f64) -> f64 {
    1.0 / (alpha - 1.0)
}
