use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Requested cylinder depth outside the supported range.
    #[error("step count {requested} outside supported range 1..={max}")]
    DepthOutOfRange { requested: usize, max: usize },

    /// The enumeration frontier grew past the configured budget.
    #[error("cylinder budget exceeded: {live} live cylinders at depth {depth} (limit {limit})")]
    CylinderBudget {
        live: usize,
        depth: usize,
        limit: usize,
    },

    /// The AB / CDCD orbits only exist for ell >= 1/8.
    #[error("the AB and CDCD orbits do not exist for ell = {ell} (requires ell >= 1/8)")]
    CycleAbsent { ell: f64 },

    /// Finite-time Lyapunov exponents are defined for positive even step counts.
    #[error("finite-time Lyapunov exponents need a positive even step count, got {0}")]
    OddStepCount(usize),

    /// At ell = 1/4 the contraction rate vanishes identically and ratio
    /// statistics are meaningless.
    #[error("degenerate at ell = 1/4: the contraction rate vanishes identically")]
    DegenerateAtEquilibrium,

    /// No histogram bin pair passed the count threshold; no slope can be fit.
    #[error("no qualifying bin pairs for the ratio fit (min_count = {min_count})")]
    NoQualifyingBins { min_count: u64 },

    /// Too many trajectories failed to reach an attractor within the budget.
    #[error("nonconvergent fraction {fraction:.6} exceeds 0.001; raise max_iter or the step count")]
    ExcessiveNonconvergence { fraction: f64 },
}
