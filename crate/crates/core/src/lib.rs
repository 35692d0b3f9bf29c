//! Simulation and analysis of SIR (Reed–Frost) epidemics on a scale-free
//! spatial network with nested community structure.
//!
//! Vertices of `Z^d` are packed into hypercubic blocks of side `z^k`; each
//! vertex gets an i.i.d. geometric height `X_v` (`P(X >= k) = alpha^-k`) and
//! belongs to every block containing it up to level `X_v`. Transmission runs
//! through independent per-community channels with probability `p rho^k` at
//! level `k`, plus a nearest-neighbor channel with probability `p`. The final
//! infected set of the Reed–Frost epidemic equals the percolation cluster of
//! the seed vertex, so the analysis layer works on sampled open-edge graphs.
//!
//! Modules:
//! * [`lattice`] — deterministic block geometry of `Z^d`.
//! * [`heights`] — community-height sampling and the uniform-mark coupling.
//! * [`netmodels`] — the five edge models and degree machinery.
//! * [`percolation`] — open-graph sampling, clusters, Reed–Frost, ladder runs.
//! * [`analysis`] — estimators: degree tails, crossing curves, p_c, bounds.
//! * [`oracle`] — exact small-instance computations used as ground truth.

pub mod analysis;
pub mod error;
pub mod heights;
pub mod lattice;
pub mod netmodels;
pub mod oracle;
pub mod percolation;
pub mod rng;

pub use error::{Error, Result};
pub use heights::{Height, HeightField};
pub use lattice::{BlockId, SimBox, Vertex};
pub use netmodels::{ModelKind, Params};
pub use percolation::{ClusterStats, LadderTrace, OpenGraph};
