//! Sampling open-edge realizations (epidemic transmission graphs), cluster
//! analysis via union-find, synchronous Reed–Frost dynamics over pre-sampled
//! edges, and the level-ladder construction used to witness a trivial
//! threshold.
//!
//! All randomness is keyed counter-style on (seed, stream, coordinates), so
//! raising `p` or `rho` at a fixed seed only ever adds open edges: the
//! per-pair uniform is compared against a threshold that is monotone in both.

use rand::RngExt;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heights::{Height, HeightField};
use crate::lattice::{self, SimBox};
use crate::netmodels::{channel_open_prob, gated_channel_prob, ModelKind, Params};
use crate::rng::{self, Stream};

/// Hard ceiling on vertices for the all-pairs comparison models.
const ALL_PAIRS_VERTEX_LIMIT: usize = 40_000;

/// Sampler knobs. `edge_cap` guards memory; `height_cap` truncates heights
/// (and hence community channels) at a fixed level, which is the capped
/// model the exact oracles enumerate.
#[derive(Clone, Copy, Debug)]
pub struct SamplerOptions {
    pub edge_cap: u64,
    pub height_cap: Option<u32>,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            edge_cap: 50_000_000,
            height_cap: None,
        }
    }
}

/// A sampled realization of open (transmitting) edges on a finite box.
#[derive(Clone, Debug)]
pub struct OpenGraph {
    pub bbox: SimBox,
    pub model: ModelKind,
    pub params: Params,
    pub seed: u64,
    /// Per-vertex sorted neighbor lists; symmetric.
    adj: Vec<Vec<u32>>,
    pub n_edges: u64,
    /// Pairs whose model probability was clamped at 1 (long-range only).
    pub n_clamped: u64,
}

impl OpenGraph {
    #[inline]
    pub fn neighbors(&self, idx: usize) -> &[u32] {
        &self.adj[idx]
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    /// Edge list rows `u_coords v_coords model` (coords comma-joined).
    pub fn write_edges<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        let d = self.bbox.dim() as usize;
        let mut uc = vec![0i64; d];
        let mut vc = vec![0i64; d];
        let join = |c: &[i64]| {
            c.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &j in nbrs {
                if (j as usize) > i {
                    self.bbox.coords_of(i, &mut uc);
                    self.bbox.coords_of(j as usize, &mut vc);
                    writeln!(w, "{} {} {}", join(&uc), join(&vc), self.model.token())?;
                }
            }
        }
        Ok(())
    }

    fn from_edge_lists(
        bbox: SimBox,
        model: ModelKind,
        params: Params,
        seed: u64,
        edges: Vec<(u32, u32)>,
        n_clamped: u64,
    ) -> Self {
        let n = bbox.vertex_count();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        let mut n_edges = 0u64;
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            n_edges += list.len() as u64;
        }
        OpenGraph {
            bbox,
            model,
            params,
            seed,
            adj,
            n_edges: n_edges / 2,
            n_clamped,
        }
    }
}

/// Upper estimate of the expected number of open edges, used by the memory
/// guard. Comparison models sum exact per-offset probabilities; the nested
/// model bounds its per-level pair counts by full-lattice ring sizes.
pub fn expected_open_edges(bbox: SimBox, model: &ModelKind, params: &Params) -> f64 {
    let n = bbox.vertex_count() as f64;
    let d = params.d;
    match model {
        ModelKind::Nested => {
            let kmax = bbox.covering_level(params.z);
            let mut total = n * d as f64 * params.p;
            let zd = (params.z as f64).powi(d as i32);
            for m in 1..=kmax {
                let ring = zd.powi(m as i32) - zd.powi(m as i32 - 1);
                let gate = if params.alpha == 1.0 {
                    1.0
                } else {
                    params.alpha.powi(-2 * m as i32)
                };
                let chan = channel_open_prob(m, None, params.p, params.rho);
                total += n * ring / 2.0 * gate * chan;
            }
            total
        }
        _ => offset_sum(bbox, params, |dist2_val, pr| match model {
            ModelKind::DistanceGated => {
                let k1 = lattice::distance_level_from_dist2(dist2_val, pr.z, pr.delta_sq());
                let gate = if pr.alpha == 1.0 {
                    1.0
                } else {
                    pr.alpha.powi(-2 * k1 as i32)
                };
                gate * gated_channel_prob(k1, pr).unwrap_or(1.0)
            }
            ModelKind::DirectedPair { beta } => {
                let k1 = lattice::distance_level_from_dist2(dist2_val, pr.z, pr.delta_sq());
                beta.powi(-2 * k1 as i32) * gated_channel_prob(k1, pr).unwrap_or(1.0)
            }
            ModelKind::LongRange { beta, s } => (beta / dist2_val.powf(s / 2.0)).min(1.0),
            ModelKind::Yukich { s } => (dist2_val / pr.delta_sq()).powf(-1.0 / s).min(1.0),
            ModelKind::Nested => unreachable!(),
        }),
    }
}

/// Sum of `prob(dist2)` over unordered in-box pairs, via offset classes.
fn offset_sum(bbox: SimBox, params: &Params, prob: impl Fn(f64, &Params) -> f64) -> f64 {
    let side = bbox.side();
    let d = bbox.dim() as usize;
    let mut total = 0.0f64;
    let mut offset = vec![-(side - 1); d];
    'outer: loop {
        let dist2: i64 = offset.iter().map(|&o| o * o).sum();
        if dist2 > 0 {
            let count: f64 = offset.iter().map(|&o| (side - o.abs()) as f64).product();
            total += count * prob(dist2 as f64, params);
        }
        let mut j = d;
        loop {
            if j == 0 {
                break 'outer;
            }
            j -= 1;
            offset[j] += 1;
            if offset[j] < side {
                continue 'outer;
            }
            offset[j] = -(side - 1);
        }
    }
    total / 2.0
}

/// Sample an open-edge realization of the given model.
pub fn sample_open_graph(
    bbox: SimBox,
    model: &ModelKind,
    params: &Params,
    seed: u64,
) -> Result<OpenGraph> {
    sample_open_graph_opts(bbox, model, params, seed, SamplerOptions::default())
}

/// Like [`sample_open_graph`] with explicit guard and capping options.
pub fn sample_open_graph_opts(
    bbox: SimBox,
    model: &ModelKind,
    params: &Params,
    seed: u64,
    opts: SamplerOptions,
) -> Result<OpenGraph> {
    let expected = expected_open_edges(bbox, model, params);
    if expected > opts.edge_cap as f64 {
        return Err(Error::EdgeCapExceeded {
            expected,
            cap: opts.edge_cap,
        });
    }
    match model {
        ModelKind::Nested => sample_nested(bbox, params, seed, opts),
        ModelKind::DistanceGated => sample_distance_gated(bbox, params, seed, opts),
        ModelKind::DirectedPair { beta } => sample_directed_pair(bbox, params, seed, *beta),
        ModelKind::LongRange { beta, s } => sample_long_range(bbox, params, seed, *beta, *s),
        ModelKind::Yukich { s } => sample_yukich(bbox, params, seed, *s),
    }
}

/// Aggregated community-channel probabilities: entry (lo, excess) is the
/// probability that at least one channel in `[lo, lo+excess]` fires, plus an
/// infinite-height column. Sampling one uniform per pair against this
/// aggregate is equal in law to sampling the channels one by one in
/// increasing level order, and is monotone in both p and rho.
struct ChannelAgg {
    p: f64,
    rho: f64,
    by_excess: Vec<Vec<f64>>,
    infinite: Vec<f64>,
    max_excess: u32,
}

impl ChannelAgg {
    fn new(params: &Params, max_lo: u32) -> Self {
        let max_excess = 64u32;
        let mut by_excess = Vec::with_capacity(max_lo as usize + 1);
        let mut infinite = Vec::with_capacity(max_lo as usize + 1);
        for lo in 0..=max_lo {
            let mut row = Vec::with_capacity(max_excess as usize + 1);
            for e in 0..=max_excess {
                row.push(channel_open_prob(lo, Some(lo + e), params.p, params.rho));
            }
            by_excess.push(row);
            infinite.push(channel_open_prob(lo, None, params.p, params.rho));
        }
        ChannelAgg {
            p: params.p,
            rho: params.rho,
            by_excess,
            infinite,
            max_excess,
        }
    }

    #[inline]
    fn prob(&self, lo: u32, hi: Height) -> f64 {
        match hi {
            Height::Infinite => self.infinite[lo as usize],
            Height::Finite(h) => {
                if h < lo {
                    0.0
                } else if h - lo <= self.max_excess {
                    self.by_excess[lo as usize][(h - lo) as usize]
                } else {
                    channel_open_prob(lo, Some(h), self.p, self.rho)
                }
            }
        }
    }
}

fn sample_heights_for(
    bbox: SimBox,
    params: &Params,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<HeightField> {
    let mut field = HeightField::sample(bbox, params.alpha, seed)?;
    if let Some(cap) = opts.height_cap {
        field.cap(cap);
    }
    Ok(field)
}

fn sample_nested(
    bbox: SimBox,
    params: &Params,
    seed: u64,
    opts: SamplerOptions,
) -> Result<OpenGraph> {
    let field = sample_heights_for(bbox, params, seed, &opts)?;
    let d = bbox.dim() as usize;
    let n = bbox.vertex_count();
    let z = params.z;
    let kmax = bbox.covering_level(z);
    let agg = ChannelAgg::new(params, kmax);

    // bucket vertices with X >= m by their level-m block
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
    let mut buckets: Vec<Vec<Vec<u32>>> = (0..=kmax as usize)
        .map(|m| vec![Vec::new(); if m == 0 { 0 } else { cells[m].pow(d as u32) }])
        .collect();
    let mut c = vec![0i64; d];
    for idx in 0..n {
        bbox.coords_of(idx, &mut c);
        let cap = field.get(idx).capped(kmax);
        for m in 1..=cap {
            buckets[m as usize][block_lin(&c, m)].push(idx as u32);
        }
    }

    // community edges, level by level: members of one level-m block pair up
    // when they sit in different level-(m-1) sub-blocks
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for m in 1..=kmax {
        let level_edges: Vec<Vec<(u32, u32)>> = buckets[m as usize]
            .par_iter()
            .map(|members| {
                if members.len() < 2 {
                    return Vec::new();
                }
                let mut out = Vec::new();
                let mut ca = vec![0i64; d];
                let mut cb = vec![0i64; d];
                let subs: Vec<usize> = members
                    .iter()
                    .map(|&idx| {
                        bbox.coords_of(idx as usize, &mut ca);
                        block_lin(&ca, m - 1)
                    })
                    .collect();
                for i in 0..members.len() {
                    for j in i + 1..members.len() {
                        if subs[i] == subs[j] {
                            continue;
                        }
                        let a = members[i] as usize;
                        let b = members[j] as usize;
                        let hi = field.get(a).min(field.get(b));
                        let prob = agg.prob(m, hi);
                        bbox.coords_of(a, &mut ca);
                        bbox.coords_of(b, &mut cb);
                        if rng::unit_pair(seed, Stream::CommPair, &ca, &cb, 0) <= prob {
                            out.push((members[i], members[j]));
                        }
                    }
                }
                out
            })
            .collect();
        for v in level_edges {
            edges.extend(v);
        }
    }

    // nearest-neighbor channels last
    let nn_edges: Vec<Vec<(u32, u32)>> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let mut out = Vec::new();
            let mut vc = vec![0i64; d];
            bbox.coords_of(idx, &mut vc);
            let mut nb = vc.clone();
            for j in 0..d {
                nb[j] = vc[j] + 1;
                if nb[j] < bbox.side()
                    && rng::unit_pair(seed, Stream::NnChannel, &vc, &nb, 0) <= params.p
                {
                    out.push((idx as u32, bbox.index_of(&nb) as u32));
                }
                nb[j] = vc[j];
            }
            out
        })
        .collect();
    for v in nn_edges {
        edges.extend(v);
    }

    Ok(OpenGraph::from_edge_lists(
        bbox,
        ModelKind::Nested,
        *params,
        seed,
        edges,
        0,
    ))
}

fn all_pairs_guard(n: usize) -> Result<()> {
    if n > ALL_PAIRS_VERTEX_LIMIT {
        return Err(Error::BoxTooLarge {
            vertices: n as u128,
            limit: ALL_PAIRS_VERTEX_LIMIT as u64,
        });
    }
    Ok(())
}

/// Canonical pair offsets of the box: first nonzero coordinate positive,
/// so each unordered translate class appears exactly once.
fn canonical_offsets(bbox: SimBox) -> Vec<Vec<i64>> {
    let l = bbox.side();
    let d = bbox.dim() as usize;
    let mut out = Vec::new();
    let mut o = vec![-(l - 1); d];
    'outer: loop {
        if let Some(&first) = o.iter().find(|&&x| x != 0) {
            if first > 0 {
                out.push(o.clone());
            }
        }
        let mut j = d;
        loop {
            if j == 0 {
                break 'outer;
            }
            j -= 1;
            o[j] += 1;
            if o[j] < l {
                continue 'outer;
            }
            o[j] = -(l - 1);
        }
    }
    out
}

/// Sample every translate class of each offset with a geometric-skip scan:
/// per class, one sequential substream keyed by (seed, stream, offset)
/// delivers the open pair positions, and `accept` applies any per-endpoint
/// gate. Expected cost is offsets + open pairs instead of all pairs.
fn offset_class_sample<C: Sync>(
    bbox: SimBox,
    seed: u64,
    stream: Stream,
    per_offset: impl Fn(&[i64]) -> Option<(f64, C)> + Sync,
    accept: impl Fn(u32, u32, &C) -> bool + Sync,
) -> (Vec<(u32, u32)>, u64) {
    use rand::RngExt;
    let l = bbox.side();
    let d = bbox.dim() as usize;
    let offsets = canonical_offsets(bbox);
    let results: Vec<(Vec<(u32, u32)>, u64)> = offsets
        .par_iter()
        .map(|o| {
            let Some((prob, ctx)) = per_offset(o) else {
                return (Vec::new(), 0);
            };
            if prob <= 0.0 {
                return (Vec::new(), 0);
            }
            let lens: Vec<i64> = o.iter().map(|&x| l - x.abs()).collect();
            let lo: Vec<i64> = o.iter().map(|&x| (-x).max(0)).collect();
            let count: u64 = lens.iter().map(|&x| x as u64).product();
            let clamped = if prob >= 1.0 { count } else { 0 };
            let mut rng = rng::substream(seed, rng::hash_vertex(0, stream, o));
            let mut edges = Vec::new();
            let mut base = vec![0i64; d];
            let mut emit = |t: u64, edges: &mut Vec<(u32, u32)>| {
                let mut rem = t;
                for j in (0..d).rev() {
                    base[j] = lo[j] + (rem % lens[j] as u64) as i64;
                    rem /= lens[j] as u64;
                }
                let mut u_idx = 0usize;
                let mut v_idx = 0usize;
                for j in 0..d {
                    u_idx = u_idx * l as usize + base[j] as usize;
                    v_idx = v_idx * l as usize + (base[j] + o[j]) as usize;
                }
                if accept(u_idx as u32, v_idx as u32, &ctx) {
                    edges.push((u_idx as u32, v_idx as u32));
                }
            };
            if prob >= 1.0 {
                for t in 0..count {
                    emit(t, &mut edges);
                }
            } else {
                let lq = (1.0 - prob).ln();
                let mut t = 0u64;
                loop {
                    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
                    let skip = (u.ln() / lq).floor();
                    if skip >= (count - t) as f64 {
                        break;
                    }
                    t += skip as u64;
                    emit(t, &mut edges);
                    t += 1;
                    if t >= count {
                        break;
                    }
                }
            }
            (edges, clamped)
        })
        .collect();
    let mut edges = Vec::new();
    let mut clamped = 0u64;
    for (e, c) in results {
        edges.extend(e);
        clamped += c;
    }
    (edges, clamped)
}

fn offset_dist2(o: &[i64]) -> f64 {
    o.iter().map(|&x| (x * x) as f64).sum()
}

fn sample_distance_gated(
    bbox: SimBox,
    params: &Params,
    seed: u64,
    opts: SamplerOptions,
) -> Result<OpenGraph> {
    if params.rho >= 1.0 {
        return Err(Error::invalid("rho", "distance-gated model needs rho < 1".to_string()));
    }
    // heights share the nested model's stream: with one seed the two models
    // are coupled through identical height realizations
    let field = sample_heights_for(bbox, params, seed, &opts)?;
    let kcap = 64u32;
    let hc: Vec<u32> = (0..bbox.vertex_count())
        .map(|i| field.get(i).capped(kcap))
        .collect();
    let (edges, _) = offset_class_sample(
        bbox,
        seed,
        Stream::DistChannel,
        |o| {
            let k1 =
                lattice::distance_level_from_dist2(offset_dist2(o), params.z, params.delta_sq());
            Some((gated_channel_prob(k1, params).unwrap(), k1.min(kcap)))
        },
        |u, v, &k1| hc[u as usize] >= k1 && hc[v as usize] >= k1,
    );
    Ok(OpenGraph::from_edge_lists(
        bbox,
        ModelKind::DistanceGated,
        *params,
        seed,
        edges,
        0,
    ))
}

fn sample_directed_pair(bbox: SimBox, params: &Params, seed: u64, beta: f64) -> Result<OpenGraph> {
    if params.rho >= 1.0 {
        return Err(Error::invalid("rho", "directed-pair model needs rho < 1".to_string()));
    }
    // the two per-direction marks are exclusive to their pair, so folding
    // them into the edge probability beta^-2k1 q is the same law
    let (edges, _) = offset_class_sample(
        bbox,
        seed,
        Stream::PairEdge,
        |o| {
            let k1 =
                lattice::distance_level_from_dist2(offset_dist2(o), params.z, params.delta_sq());
            let pr = beta.powi(-2 * k1 as i32) * gated_channel_prob(k1, params).unwrap();
            Some((pr, ()))
        },
        |_, _, _| true,
    );
    Ok(OpenGraph::from_edge_lists(
        bbox,
        ModelKind::DirectedPair { beta },
        *params,
        seed,
        edges,
        0,
    ))
}

fn sample_long_range(
    bbox: SimBox,
    params: &Params,
    seed: u64,
    beta: f64,
    s: f64,
) -> Result<OpenGraph> {
    let (edges, n_clamped) = offset_class_sample(
        bbox,
        seed,
        Stream::LongRangeEdge,
        |o| Some(((beta / offset_dist2(o).powf(s / 2.0)).min(1.0), ())),
        |_, _, _| true,
    );
    Ok(OpenGraph::from_edge_lists(
        bbox,
        ModelKind::LongRange { beta, s },
        *params,
        seed,
        edges,
        n_clamped,
    ))
}

fn coords_table(bbox: SimBox) -> Vec<i64> {
    let d = bbox.dim() as usize;
    let mut flat = vec![0i64; bbox.vertex_count() * d];
    for idx in 0..bbox.vertex_count() {
        let start = idx * d;
        bbox.coords_of(idx, &mut flat[start..start + d]);
    }
    flat
}

fn sample_yukich(bbox: SimBox, params: &Params, seed: u64, s: f64) -> Result<OpenGraph> {
    let n = bbox.vertex_count();
    all_pairs_guard(n)?;
    let d = bbox.dim() as usize;
    let marks = crate::netmodels::yukich_marks(bbox, seed);
    let delta_sq = params.delta * params.delta;
    let diag2 = (d as f64) * ((bbox.side() - 1) as f64).powi(2) + 1.0;
    let reach: Vec<f64> = marks
        .iter()
        .map(|u| (delta_sq * u.powf(-2.0 * s)).min(diag2))
        .collect();
    let coords = coords_table(bbox);

    let edges: Vec<(u32, u32)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let reach = &reach;
            let coords = &coords;
            (i + 1..n).filter_map(move |j| {
                let a = &coords[i * d..i * d + d];
                let b = &coords[j * d..j * d + d];
                let d2: i64 = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
                let d2 = d2 as f64;
                if reach[i] >= d2 && reach[j] >= d2 {
                    Some((i as u32, j as u32))
                } else {
                    None
                }
            })
        })
        .collect();

    Ok(OpenGraph::from_edge_lists(
        bbox,
        ModelKind::Yukich { s },
        *params,
        seed,
        edges,
        0,
    ))
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        // path halving
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// Union-find cluster decomposition of an open graph.
#[derive(Clone, Debug)]
pub struct ClusterStats {
    /// Cluster id per vertex, ids compact in 0..sizes.len().
    pub labels: Vec<u32>,
    /// Size of each cluster, indexed by cluster id.
    pub sizes: Vec<usize>,
    /// Size of the cluster containing the origin (vertex (0,...,0)).
    pub origin_size: usize,
    /// Some cluster touches both the x1 = 0 and x1 = L-1 faces.
    pub crossing: bool,
    pub largest_fraction: f64,
}

/// Connected components of the open graph.
pub fn clusters(g: &OpenGraph) -> ClusterStats {
    let n = g.vertex_count();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for &j in g.neighbors(i) {
            if (j as usize) > i {
                uf.union(i as u32, j);
            }
        }
    }
    // compact labels in root order
    let mut label_of_root = vec![u32::MAX; n];
    let mut labels = vec![0u32; n];
    let mut sizes = Vec::new();
    for v in 0..n {
        let r = uf.find(v as u32) as usize;
        if label_of_root[r] == u32::MAX {
            label_of_root[r] = sizes.len() as u32;
            sizes.push(0usize);
        }
        labels[v] = label_of_root[r];
        sizes[label_of_root[r] as usize] += 1;
    }

    // crossing: a cluster touching both faces orthogonal to axis 0
    let stride = n / g.bbox.side() as usize; // side^(d-1)
    let mut lo_face = vec![false; sizes.len()];
    let mut hi_face = vec![false; sizes.len()];
    for v in 0..n {
        let x0 = v / stride;
        if x0 == 0 {
            lo_face[labels[v] as usize] = true;
        }
        if x0 == g.bbox.side() as usize - 1 {
            hi_face[labels[v] as usize] = true;
        }
    }
    let crossing = g.bbox.side() >= 2
        && lo_face
            .iter()
            .zip(&hi_face)
            .any(|(&a, &b)| a && b);

    let origin_size = sizes[labels[0] as usize];
    let largest = sizes.iter().copied().max().unwrap_or(0);
    ClusterStats {
        labels,
        sizes,
        origin_size,
        crossing,
        largest_fraction: largest as f64 / n as f64,
    }
}

/// Face-to-face crossing indicator (the finite-size proxy for an infinite
/// cluster).
pub fn crossing_indicator(g: &OpenGraph) -> bool {
    clusters(g).crossing
}

/// Outcome of one Reed–Frost epidemic over pre-sampled open edges.
#[derive(Clone, Debug)]
pub struct EpidemicRun {
    /// Finally removed (ever-infected) vertices, sorted.
    pub infected: Vec<u32>,
    /// Number of synchronous generations that produced a new infection.
    pub generations: u32,
}

/// Synchronous Reed–Frost dynamics: at each step every infected individual
/// contacts each neighbor across its open edges, infecting the susceptible
/// ones, then recovers permanently. The final infected set equals the
/// percolation cluster of `initial`.
pub fn reed_frost_run(g: &OpenGraph, initial: usize) -> EpidemicRun {
    let n = g.vertex_count();
    assert!(initial < n, "initial vertex outside the box");
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Susceptible,
        Infected,
        Removed,
    }
    let mut state = vec![State::Susceptible; n];
    state[initial] = State::Infected;
    let mut current = vec![initial as u32];
    let mut all = vec![initial as u32];
    let mut generations = 0u32;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &v in &current {
            for &u in g.neighbors(v as usize) {
                if state[u as usize] == State::Susceptible {
                    state[u as usize] = State::Infected;
                    next.push(u);
                }
            }
            state[v as usize] = State::Removed;
        }
        if !next.is_empty() {
            generations += 1;
            all.extend_from_slice(&next);
        }
        current = next;
    }
    all.sort_unstable();
    EpidemicRun {
        infected: all,
        generations,
    }
}

/// Per-level outcome of the ladder construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderOutcome {
    /// A qualifying vertex in the new ring connected to the previous pivot.
    Connected,
    /// Qualifying vertices exist but none connected (or there was no pivot).
    Stranded,
    /// No vertex of the ring qualifies.
    Empty,
}

impl LadderOutcome {
    pub fn letter(self) -> char {
        match self {
            LadderOutcome::Connected => 'A',
            LadderOutcome::Stranded => 'C',
            LadderOutcome::Empty => 'E',
        }
    }
}

/// Trace of one ladder run: outcome per level 1..=terminated_at.
#[derive(Clone, Debug)]
pub struct LadderTrace {
    pub outcomes: Vec<LadderOutcome>,
    pub terminated_at: u32,
    /// Whether the origin itself qualified (sigma_0 >= 1).
    pub seeded: bool,
}

impl LadderTrace {
    #[inline]
    pub fn outcome_at(&self, level: u32) -> LadderOutcome {
        self.outcomes[(level - 1) as usize]
    }

    /// True when every level in `k0..=terminated_at` came out Connected.
    pub fn tail_all_connected(&self, k0: u32) -> bool {
        (k0..=self.terminated_at).all(|k| self.outcome_at(k) == LadderOutcome::Connected)
    }
}

/// Run the sequential ladder construction up to `k_max` levels.
///
/// Ring populations are binomial draws over `z^{dk} - z^{d(k-1)}` vertices
/// (nothing is materialized); the pivot's channel outcomes are sampled
/// lazily as "at least one of the qualifying vertices fired".
pub fn ladder_run(params: &Params, k_max: u32, seed: u64) -> Result<LadderTrace> {
    let zd = (params.z as u128).pow(params.d);
    if zd.pow(k_max.max(1)) > u64::MAX as u128 {
        return Err(Error::invalid(
            "k_max",
            format!("z^(d k_max) must fit in u64, got z^d={zd} k_max={k_max}"),
        ));
    }
    let mut rng = rng::substream(seed, 0);
    let seeded = if params.alpha == 1.0 {
        true
    } else {
        rng.random::<f64>() < 1.0 / params.alpha
    };
    let mut pivot = seeded;
    let mut outcomes = Vec::with_capacity(k_max as usize);
    let zd = zd as u64;
    for k in 1..=k_max {
        let ring = zd.pow(k) - zd.pow(k - 1);
        let qualify_p = if params.alpha == 1.0 {
            1.0
        } else {
            params.alpha.powi(-(k as i32 + 1))
        };
        let qualifying = if qualify_p >= 1.0 {
            ring
        } else {
            Binomial::new(ring, qualify_p)
                .expect("valid binomial")
                .sample(&mut rng)
        };
        let outcome = if qualifying == 0 {
            pivot = false;
            LadderOutcome::Empty
        } else if !pivot {
            pivot = true;
            LadderOutcome::Stranded
        } else {
            let chan = params.p * params.rho.powi(k as i32);
            // P(at least one of `qualifying` channels fires)
            let p_any = -f64::exp_m1(qualifying as f64 * f64::ln_1p(-chan));
            pivot = true;
            if rng.random::<f64>() < p_any {
                LadderOutcome::Connected
            } else {
                LadderOutcome::Stranded
            }
        };
        outcomes.push(outcome);
    }
    Ok(LadderTrace {
        outcomes,
        terminated_at: k_max,
        seeded,
    })
}

/// Fraction of traces whose levels `k0..=k_max` are all Connected.
pub fn ladder_tail_all_a_frequency(
    params: &Params,
    k_max: u32,
    k0: u32,
    n_traces: u64,
    seed: u64,
) -> Result<f64> {
    let hits: u64 = (0..n_traces)
        .into_par_iter()
        .map(|t| {
            let trace = ladder_run(params, k_max, rng::hash_key(seed, Stream::Sequence, &[t]))
                .expect("k_max validated");
            u64::from(trace.tail_all_connected(k0))
        })
        .sum();
    Ok(hits as f64 / n_traces as f64)
}

/// Per-level frequency of the Connected outcome over many traces.
pub fn ladder_level_a_frequency(
    params: &Params,
    k_max: u32,
    n_traces: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let counts: Vec<u64> = (0..n_traces)
        .into_par_iter()
        .map(|t| {
            let trace = ladder_run(params, k_max, rng::hash_key(seed, Stream::Sequence, &[t]))
                .expect("k_max validated");
            trace
                .outcomes
                .iter()
                .map(|&o| u64::from(o == LadderOutcome::Connected))
                .collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0u64; k_max as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(counts.iter().map(|&c| c as f64 / n_traces as f64).collect())
}
