//! The five edge models and their per-edge probabilities and predicates:
//! the nested community graph, the distance-gated comparison model, the
//! Yukich network, the directed-pair model and long-range percolation,
//! plus degree computation on finite boxes.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heights::{Height, HeightField};
use crate::lattice::{self, SimBox};
use crate::rng::{self, Stream};

/// The five model parameters plus the geometry constant `delta`.
///
/// `delta` defaults to `sqrt(d)`; in that case `delta_sq` is exactly `d`
/// so distance-level ties at block diagonals resolve without float fuzz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub d: u32,
    pub z: i64,
    pub alpha: f64,
    pub rho: f64,
    pub p: f64,
    pub delta: f64,
    delta_sq: f64,
}

impl Params {
    pub fn new(d: u32, z: i64, alpha: f64, rho: f64, p: f64) -> Result<Self> {
        if d < 1 || d > 8 {
            return Err(Error::invalid("d", format!("must be in 1..=8, got {d}")));
        }
        if z < 2 {
            return Err(Error::invalid("z", format!("must be >= 2, got {z}")));
        }
        if !(alpha >= 1.0) {
            return Err(Error::invalid("alpha", format!("must be >= 1, got {alpha}")));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::invalid("rho", format!("must be in [0,1], got {rho}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("p", format!("must be in [0,1], got {p}")));
        }
        Ok(Params {
            d,
            z,
            alpha,
            rho,
            p,
            delta: (d as f64).sqrt(),
            delta_sq: d as f64,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
        }
        self.delta = delta;
        self.delta_sq = delta * delta;
        Ok(self)
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("p", format!("must be in [0,1], got {p}")));
        }
        self.p = p;
        Ok(self)
    }

    #[inline]
    pub fn delta_sq(&self) -> f64 {
        self.delta_sq
    }

    /// `ceil(log_z(d(u,v)/delta))` clamped at 0 for this parameter set.
    #[inline]
    pub fn distance_level(&self, u: &[i64], v: &[i64]) -> u32 {
        lattice::distance_level(u, v, self.z, self.delta_sq)
    }
}

/// Which edge model generated a graph. Model-specific constants ride along;
/// the shared geometry constant `delta` lives in [`Params`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelKind {
    /// Nearest-neighbor channel plus one channel per shared community.
    Nested,
    /// Distance-gated comparison model: per-vertex heights gate a single
    /// per-pair channel with probability `p/(1-rho) rho^k1`.
    DistanceGated,
    /// Directed-pair model: independent per-direction marks with tail
    /// `beta^-k` gate the same channel law.
    DirectedPair { beta: f64 },
    /// Independent edges open with probability `beta / d(u,v)^s`.
    LongRange { beta: f64, s: f64 },
    /// Yukich's network: `d(u,v) <= delta min(U_u^-s, U_v^-s)`.
    Yukich { s: f64 },
}

impl ModelKind {
    pub fn token(&self) -> &'static str {
        match self {
            ModelKind::Nested => "nested",
            ModelKind::DistanceGated => "distance",
            ModelKind::DirectedPair { .. } => "directed-pair",
            ModelKind::LongRange { .. } => "long-range",
            ModelKind::Yukich { .. } => "yukich",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    /// Parses bare tokens; parameterized kinds get their constants from
    /// [`longrange_params_from`] or `beta = sqrt(alpha)` at the call site.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nested" => Ok(ModelKind::Nested),
            "distance" => Ok(ModelKind::DistanceGated),
            "directed-pair" => Ok(ModelKind::DirectedPair { beta: f64::NAN }),
            "long-range" => Ok(ModelKind::LongRange {
                beta: f64::NAN,
                s: f64::NAN,
            }),
            "yukich" => Ok(ModelKind::Yukich { s: f64::NAN }),
            other => Err(Error::Parse(format!("unknown model {other:?}"))),
        }
    }
}

/// Connectivity-graph predicate: nearest neighbors are always linked, and
/// any other pair is linked iff both heights reach their community level.
pub fn nested_edge_exists(u: &[i64], v: &[i64], hu: Height, hv: Height, z: i64) -> bool {
    if lattice::dist2(u, v) == 1 {
        return true;
    }
    match lattice::community_level(u, v, z) {
        Some(level) => hu.at_least(level) && hv.at_least(level),
        None => false,
    }
}

/// Yukich predicate: `d(u,v) <= delta * min(U_u^-s, U_v^-s)`.
pub fn yukich_edge_exists(
    u: &[i64],
    v: &[i64],
    mark_u: f64,
    mark_v: f64,
    s: f64,
    delta: f64,
) -> bool {
    let need = lattice::euclid_dist(u, v) / delta;
    mark_u.powf(-s) >= need && mark_v.powf(-s) >= need
}

/// `1 - prod_{k=lo..hi} (1 - p rho^k)`; `hi = None` means infinitely many
/// channels (infinite heights). The product is truncated once single-channel
/// probabilities drop below 1e-16 and the remaining tail is absorbed through
/// `prod (1-x_k) >= 1 - sum x_k`, an error below the truncation threshold.
pub fn channel_open_prob(lo: u32, hi: Option<u32>, p: f64, rho: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if let Some(h) = hi {
        if h < lo {
            return 0.0;
        }
    }
    if rho >= 1.0 && hi.is_none() {
        // divergent channel count: open almost surely for any p > 0
        return 1.0;
    }
    let mut prod = 1.0f64;
    let mut r = rho.powi(lo as i32);
    let mut k = lo;
    loop {
        let q = p * r;
        if q < 1e-16 {
            if rho < 1.0 {
                let tail = q * rho / (1.0 - rho);
                prod *= (1.0 - tail).max(0.0);
            }
            break;
        }
        prod *= 1.0 - q;
        if let Some(h) = hi {
            if k == h {
                break;
            }
        }
        r *= rho;
        k += 1;
    }
    1.0 - prod
}

/// Open probability of the nested transmission edge given both heights:
/// community channels `k` in `[community_level, min(h_u, h_v)]`, plus an
/// independent probability-`p` channel for nearest neighbors.
pub fn nested_pair_open_prob(
    u: &[i64],
    v: &[i64],
    hu: Height,
    hv: Height,
    params: &Params,
) -> f64 {
    let nn = lattice::dist2(u, v) == 1;
    let base = if nn { params.p } else { 0.0 };
    let chan = match lattice::community_level(u, v, params.z) {
        Some(level) if hu.at_least(level) && hv.at_least(level) => {
            debug_assert!(level >= 1);
            let hi = match hu.min(hv) {
                Height::Finite(m) => Some(m),
                Height::Infinite => None,
            };
            channel_open_prob(level, hi, params.p, params.rho)
        }
        _ => 0.0,
    };
    1.0 - (1.0 - base) * (1.0 - chan)
}

/// Per-edge open probability under the given model.
///
/// * `Nested` needs both heights and conditions on them.
/// * `DistanceGated` returns the channel probability `p/(1-rho) rho^k1`;
///   the per-vertex height gate applies on top of it during sampling.
/// * `DirectedPair` folds its two independent per-direction marks in:
///   `beta^-2k1 * p/(1-rho) rho^k1`.
/// * `LongRange` returns `beta / d(u,v)^s` clamped to 1; samplers count
///   the clamped pairs.
pub fn edge_open_prob(
    model: &ModelKind,
    u: &[i64],
    v: &[i64],
    params: &Params,
    heights: Option<(Height, Height)>,
) -> Result<f64> {
    match model {
        ModelKind::Nested => {
            let (hu, hv) = heights.ok_or_else(|| Error::UnsupportedModel {
                model: "nested".into(),
                reason: "needs the two endpoint heights".into(),
            })?;
            Ok(nested_pair_open_prob(u, v, hu, hv, params))
        }
        ModelKind::DistanceGated => {
            let k1 = params.distance_level(u, v);
            gated_channel_prob(k1, params)
        }
        ModelKind::DirectedPair { beta } => {
            let k1 = params.distance_level(u, v);
            let q = gated_channel_prob(k1, params)?;
            Ok(beta.powi(-2 * k1 as i32) * q)
        }
        ModelKind::LongRange { beta, s } => {
            let dist = lattice::euclid_dist(u, v);
            if dist == 0.0 {
                return Err(Error::BadInput("long-range edge needs u != v".into()));
            }
            Ok((beta / dist.powf(*s)).min(1.0))
        }
        ModelKind::Yukich { .. } => Err(Error::UnsupportedModel {
            model: "yukich".into(),
            reason: "edges are a deterministic predicate of the marks; use yukich_edge_exists"
                .into(),
        }),
    }
}

/// `p/(1-rho) * rho^k1`, the per-pair channel law of the gated models.
pub fn gated_channel_prob(k1: u32, params: &Params) -> Result<f64> {
    if params.rho >= 1.0 {
        return Err(Error::invalid(
            "rho",
            "distance-gated and directed-pair models need rho < 1".to_string(),
        ));
    }
    Ok((params.p / (1.0 - params.rho) * params.rho.powi(k1 as i32)).min(1.0))
}

/// Long-range constants dominated by the nested model:
/// `s = log_z(alpha/rho)` and `beta' = p/(1-rho) (alpha/rho)^{log_z(d)/2}`.
pub fn longrange_params_from(params: &Params) -> Result<(f64, f64)> {
    if params.rho <= 0.0 || params.rho >= 1.0 {
        return Err(Error::invalid(
            "rho",
            format!("long-range comparison needs 0 < rho < 1, got {}", params.rho),
        ));
    }
    let lnz = (params.z as f64).ln();
    let ratio = params.alpha / params.rho;
    let s = ratio.ln() / lnz;
    let beta = params.p / (1.0 - params.rho) * ratio.powf((params.d as f64).ln() / lnz / 2.0);
    Ok((s, beta))
}

/// Count of connectivity-graph partners of the vertex at `v_idx` within the
/// box, scanning only its level-`X_v` block (community partners cannot lie
/// outside it) plus the 2d lattice neighbors.
pub fn degree(field: &HeightField, params: &Params, v_idx: usize) -> u32 {
    let bbox = field.bbox;
    let d = bbox.dim() as usize;
    let mut vc = vec![0i64; d];
    bbox.coords_of(v_idx, &mut vc);
    let hv = field.get(v_idx);
    let scan_level = hv.capped(bbox.covering_level(params.z));

    let mut count = 0u32;
    if scan_level >= 1 {
        let blk = lattice::block_index(&vc, scan_level, params.z);
        let mut span: i64 = 1;
        for _ in 0..scan_level {
            span *= params.z;
        }
        let lo: Vec<i64> = blk.index.iter().map(|&i| (i * span).max(0)).collect();
        let hi: Vec<i64> = blk
            .index
            .iter()
            .map(|&i| ((i + 1) * span).min(bbox.side()))
            .collect();
        let mut uc = lo.clone();
        'outer: loop {
            if uc != vc {
                if let Some(level) = lattice::community_level(&uc, &vc, params.z) {
                    if hv.at_least(level) && field.get(bbox.index_of(&uc)).at_least(level) {
                        count += 1;
                    }
                }
            }
            let mut j = d;
            loop {
                if j == 0 {
                    break 'outer;
                }
                j -= 1;
                uc[j] += 1;
                if uc[j] < hi[j] {
                    continue 'outer;
                }
                uc[j] = lo[j];
            }
        }
    }

    // nearest neighbors not already counted as community partners
    let mut nb = vc.clone();
    for j in 0..d {
        for step in [-1i64, 1] {
            nb[j] = vc[j] + step;
            if nb[j] >= 0 && nb[j] < bbox.side() {
                let community = match lattice::community_level(&nb, &vc, params.z) {
                    Some(level) => {
                        hv.at_least(level) && field.get(bbox.index_of(&nb)).at_least(level)
                    }
                    None => false,
                };
                if !community {
                    count += 1;
                }
            }
        }
        nb[j] = vc[j];
    }
    count
}

/// A vertex is censored for tail statistics when its level-`X_v` block is
/// not wholly inside the box (its community degree is truncated there).
pub fn degree_censored(field: &HeightField, params: &Params, v_idx: usize) -> bool {
    let bbox = field.bbox;
    let level = match field.get(v_idx) {
        Height::Infinite => return true,
        Height::Finite(h) => h,
    };
    if level == 0 {
        return false;
    }
    let d = bbox.dim() as usize;
    let mut vc = vec![0i64; d];
    bbox.coords_of(v_idx, &mut vc);
    let mut span: i64 = 1;
    for _ in 0..level {
        span = span.saturating_mul(params.z);
        if span > bbox.side() {
            return true;
        }
    }
    let blk = lattice::block_index(&vc, level, params.z);
    blk.index
        .iter()
        .any(|&i| i * span < 0 || (i + 1) * span > bbox.side())
}

/// Degree histogram rows: per degree value, how many interior (uncensored)
/// and how many censored vertices attained it.
#[derive(Clone, Debug, Default)]
pub struct DegreeHistogram {
    pub counts: BTreeMap<u32, (u64, u64)>,
}

impl DegreeHistogram {
    pub fn add(&mut self, h: u32, censored: bool) {
        let e = self.counts.entry(h).or_insert((0, 0));
        if censored {
            e.1 += 1;
        } else {
            e.0 += 1;
        }
    }

    pub fn total_uncensored(&self) -> u64 {
        self.counts.values().map(|c| c.0).sum()
    }

    pub fn total_censored(&self) -> u64 {
        self.counts.values().map(|c| c.1).sum()
    }

    /// Uncensored (h, count) pairs for tail fitting.
    pub fn uncensored(&self) -> Vec<(u32, u64)> {
        self.counts
            .iter()
            .filter(|(_, c)| c.0 > 0)
            .map(|(&h, c)| (h, c.0))
            .collect()
    }

    /// CSV rows `h,count,censored_count`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "h,count,censored_count")?;
        for (h, (a, b)) in &self.counts {
            writeln!(w, "{h},{a},{b}")?;
        }
        Ok(())
    }
}

/// Degrees of every box vertex at once.
///
/// Equivalent to calling [`degree`] per vertex but organized level-by-level:
/// the community partners of `v` in its level-`m` ring are the vertices of
/// `block_m(v)` minus `block_{m-1}(v)` with height >= m, so per-block counts
/// of `{X >= m}` give every degree in one pass.
pub fn degree_field(field: &HeightField, params: &Params) -> Vec<u32> {
    let bbox = field.bbox;
    let d = bbox.dim() as usize;
    let n = bbox.vertex_count();
    let z = params.z;
    let kmax = bbox.covering_level(z);

    let spans: Vec<i64> = (0..=kmax).map(|m| z.pow(m)).collect();
    let cells: Vec<usize> = spans
        .iter()
        .map(|&s| ((bbox.side() + s - 1) / s) as usize)
        .collect();
    let block_lin = |c: &[i64], m: u32| -> usize {
        let span = spans[m as usize];
        let cell = cells[m as usize];
        let mut idx = 0usize;
        for &x in c {
            idx = idx * cell + (x / span) as usize;
        }
        idx
    };

    // ring_hi[m][block_m] and ring_lo[m][block_{m-1}] both count {X >= m}
    let mut ring_hi: Vec<Vec<u32>> = vec![Vec::new()];
    let mut ring_lo: Vec<Vec<u32>> = vec![Vec::new()];
    for m in 1..=kmax as usize {
        ring_hi.push(vec![0u32; cells[m].pow(d as u32)]);
        ring_lo.push(vec![0u32; cells[m - 1].pow(d as u32)]);
    }
    let mut c = vec![0i64; d];
    for idx in 0..n {
        bbox.coords_of(idx, &mut c);
        let cap = field.get(idx).capped(kmax);
        for m in 1..=cap {
            ring_hi[m as usize][block_lin(&c, m)] += 1;
            ring_lo[m as usize][block_lin(&c, m - 1)] += 1;
        }
    }

    (0..n)
        .into_par_iter()
        .map(|idx| {
            let mut vc = vec![0i64; d];
            bbox.coords_of(idx, &mut vc);
            let hv = field.get(idx);
            let cap = hv.capped(kmax);
            let mut deg = 0u32;
            for m in 1..=cap {
                deg += ring_hi[m as usize][block_lin(&vc, m)]
                    - ring_lo[m as usize][block_lin(&vc, m - 1)];
            }
            let mut nb = vc.clone();
            for j in 0..d {
                for step in [-1i64, 1] {
                    nb[j] = vc[j] + step;
                    if nb[j] >= 0 && nb[j] < bbox.side() {
                        let community = match lattice::community_level(&nb, &vc, z) {
                            Some(level) => {
                                hv.at_least(level)
                                    && field.get(bbox.index_of(&nb)).at_least(level)
                            }
                            None => false,
                        };
                        if !community {
                            deg += 1;
                        }
                    }
                }
                nb[j] = vc[j];
            }
            deg
        })
        .collect()
}

/// Histogram of [`degree_field`] split by the censoring flag.
pub fn degree_histogram(field: &HeightField, params: &Params) -> DegreeHistogram {
    let degrees = degree_field(field, params);
    let mut hist = DegreeHistogram::default();
    for (idx, &h) in degrees.iter().enumerate() {
        hist.add(h, degree_censored(field, params, idx));
    }
    hist
}

/// Uniform marks in (0,1] for the Yukich model, keyed per vertex.
pub fn yukich_marks(bbox: SimBox, seed: u64) -> Vec<f64> {
    let d = bbox.dim() as usize;
    (0..bbox.vertex_count())
        .into_par_iter()
        .map(|idx| {
            let mut c = vec![0i64; d];
            bbox.coords_of(idx, &mut c);
            rng::unit_vertex(seed, Stream::Marks, &c)
        })
        .collect()
}

/// In-box Yukich degrees for every vertex: per vertex, scan the ball of
/// radius `delta * U_v^-s` and count partners whose own reach also covers
/// the distance.
pub fn yukich_degree_field(bbox: SimBox, s: f64, delta: f64, seed: u64) -> Vec<u32> {
    let d = bbox.dim() as usize;
    let n = bbox.vertex_count();
    let marks = yukich_marks(bbox, seed);
    let delta_sq = delta * delta;
    // reach[v] = delta^2 U_v^(-2s), capped at the box diameter
    let diag2 = (d as f64) * ((bbox.side() - 1) as f64).powi(2) + 1.0;
    let reach: Vec<f64> = marks
        .par_iter()
        .map(|u| (delta_sq * u.powf(-2.0 * s)).min(diag2))
        .collect();

    if d == 2 {
        // row-sliced scan, the large-box path
        let l = bbox.side();
        return (0..n)
            .into_par_iter()
            .map(|idx| {
                let vx = (idx as i64) / l;
                let vy = (idx as i64) % l;
                let rv = reach[idx];
                let r = rv.sqrt().floor() as i64;
                let mut count = 0u32;
                for x in (vx - r).max(0)..=(vx + r).min(l - 1) {
                    let dx2 = ((x - vx) * (x - vx)) as f64;
                    let span = (rv - dx2).max(0.0).sqrt().floor() as i64;
                    let row = (x * l) as usize;
                    for y in (vy - span).max(0)..=(vy + span).min(l - 1) {
                        let dd = dx2 + ((y - vy) * (y - vy)) as f64;
                        if dd > 0.0 && reach[row + y as usize] >= dd {
                            count += 1;
                        }
                    }
                }
                count
            })
            .collect();
    }

    (0..n)
        .into_par_iter()
        .map(|idx| {
            let mut vc = vec![0i64; d];
            bbox.coords_of(idx, &mut vc);
            let rv = reach[idx];
            let r = rv.sqrt().floor() as i64;
            let lo: Vec<i64> = vc.iter().map(|&x| (x - r).max(0)).collect();
            let hi: Vec<i64> = vc.iter().map(|&x| (x + r).min(bbox.side() - 1)).collect();
            let mut count = 0u32;
            let mut uc = lo.clone();
            'outer: loop {
                let dd = lattice::dist2(&uc, &vc) as f64;
                if dd > 0.0 && dd <= rv {
                    let u_idx = bbox.index_of(&uc);
                    if reach[u_idx] >= dd {
                        count += 1;
                    }
                }
                let mut j = d;
                loop {
                    if j == 0 {
                        break 'outer;
                    }
                    j -= 1;
                    uc[j] += 1;
                    if uc[j] <= hi[j] {
                        continue 'outer;
                    }
                    uc[j] = lo[j];
                }
            }
            count
        })
        .collect()
}
