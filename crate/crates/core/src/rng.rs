//! Counter-based randomness keyed by (seed, stream, coordinates).
//!
//! Every random draw in the samplers is a pure function of the master seed,
//! a stream tag and the lattice coordinates involved, so parallel and
//! sequential generation agree bit for bit and replicated runs are
//! reproducible regardless of worker count.

use rand_pcg::Pcg64;

/// Stream tags keep draws for different purposes independent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Vertex heights (shared by the nested and distance-gated models).
    Heights = 1,
    /// Nearest-neighbor transmission channels.
    NnChannel = 2,
    /// Community channels, aggregated per vertex pair.
    CommPair = 3,
    /// Distance-gated per-pair channel.
    DistChannel = 4,
    /// Directed-pair edge (marks folded into one draw per pair).
    PairEdge = 5,
    /// Long-range edge.
    LongRangeEdge = 6,
    /// Uniform marks for the Yukich model.
    Marks = 7,
    /// Sequential sub-generators (ladder runs, replica seeds).
    Sequence = 8,
}

/// splitmix64 finalizer; good avalanche, cheap.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash a (seed, stream) pair with an arbitrary key sequence.
#[inline]
pub fn hash_key(seed: u64, stream: Stream, parts: &[u64]) -> u64 {
    let mut h = mix64(seed ^ (stream as u64).wrapping_mul(0xa076_1d64_78bd_642f));
    for &p in parts {
        h = mix64(h ^ p);
    }
    h
}

/// Hash keyed by one vertex's coordinates.
#[inline]
pub fn hash_vertex(seed: u64, stream: Stream, coords: &[i64]) -> u64 {
    let mut h = mix64(seed ^ (stream as u64).wrapping_mul(0xa076_1d64_78bd_642f));
    for &c in coords {
        h = mix64(h ^ (c as u64));
    }
    h
}

/// Hash keyed by an unordered vertex pair (canonicalized lexicographically)
/// plus an extra word (e.g. a channel level).
#[inline]
pub fn hash_pair(seed: u64, stream: Stream, a: &[i64], b: &[i64], extra: u64) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut h = mix64(seed ^ (stream as u64).wrapping_mul(0xa076_1d64_78bd_642f));
    for &c in lo {
        h = mix64(h ^ (c as u64));
    }
    h = mix64(h ^ 0x5851_f42d_4c95_7f2d);
    for &c in hi {
        h = mix64(h ^ (c as u64));
    }
    mix64(h ^ extra)
}

/// Map a hash to a uniform in the half-open interval (0, 1].
///
/// The closed upper end makes `u <= p` exact at both endpoints: p = 0 never
/// fires and p = 1 always fires.
#[inline]
pub fn unit_open01(h: u64) -> f64 {
    ((h >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0) // 2^-53
}

/// Uniform in (0, 1] keyed by a vertex.
#[inline]
pub fn unit_vertex(seed: u64, stream: Stream, coords: &[i64]) -> f64 {
    unit_open01(hash_vertex(seed, stream, coords))
}

/// Uniform in (0, 1] keyed by a pair.
#[inline]
pub fn unit_pair(seed: u64, stream: Stream, a: &[i64], b: &[i64], extra: u64) -> f64 {
    unit_open01(hash_pair(seed, stream, a, b, extra))
}

/// Sequential generator for a numbered substream (replica index, trace id).
pub fn substream(seed: u64, index: u64) -> Pcg64 {
    use rand::SeedableRng;
    let s = hash_key(seed, Stream::Sequence, &[index]);
    Pcg64::seed_from_u64(s)
}
