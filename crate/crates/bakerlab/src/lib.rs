//! A laboratory for a piecewise-affine baker-type map of the unit square.
//!
//! The map `L` composes a four-branch baker-like transformation with a
//! quarter turn and depends on a single parameter `ell` in `(0, 1/4]`,
//! which tunes it from strongly dissipative (`ell` near 0) to
//! area-preserving (`ell = 1/4`). The crate provides:
//!
//! - [`map`]: the map itself, region classification, branch Jacobians, the
//!   local contraction rate and orbit/time-average primitives;
//! - [`analysis`]: closed-form fixed points, periodic orbits, invariant
//!   rectangles, and analytic plus finite-time Lyapunov exponents;
//! - [`measure`]: exact Lebesgue measures of itinerary cylinder sets, the
//!   exact distribution of the time-averaged contraction rate, and the
//!   fluctuation-ratio curve it induces;
//! - [`ensemble`]: seeded Monte Carlo ensembles, empirical histograms and
//!   ratio fits, attractor classification, basin rasters and basin-measure
//!   estimates.
//!
//! With the default `parallel` feature the ensemble operations fan out
//! over rayon; disabling it selects a sequential fallback. Outputs are
//! bit-identical in both modes and for any worker count, because all
//! per-sample state is derived from `(seed, index)` and all reductions are
//! integer counts.

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod map;
pub mod measure;

pub use error::Error;
pub use map::{MapKind, Params, Point, Region};
