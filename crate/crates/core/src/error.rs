use thiserror::Error;

/// Invalid model parameters. Every variant is a caller mistake.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("offers must satisfy l < h (got h={h}, l={l})")]
    OffersNotOrdered { h: f64, l: f64 },
    #[error("offers must lie in [0, 1] (got h={h}, l={l})")]
    OfferOutOfRange { h: f64, l: f64 },
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("human populations need at least 2 players (got N_P={n_p}, N_R={n_r})")]
    PopulationTooSmall { n_p: u32, n_r: u32 },
    #[error("selection intensity must be finite and non-negative (got {0})")]
    InvalidBeta(f64),
    #[error("high-level counts exceed population size (k_P={k_p}, k_R={k_r})")]
    CountOutOfRange { k_p: u32, k_r: u32 },
    #[error("perceived fairness is only defined for discriminatory AI proposers")]
    NotDiscriminatory,
    #[error("unknown AI proposer kind `{0}`")]
    UnknownKind(String),
    #[error("unknown monomorphic state `{0}`")]
    UnknownState(String),
    #[error("{0}")]
    Invalid(String),
}

/// Failures of the absorption-probability computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixationError {
    #[error(transparent)]
    Param(#[from] ParamError),
    /// The mutant lineage cannot grow at some count `j`; its fixation
    /// probability is zero by convention.
    #[error("mutant cannot advance from {count} copies")]
    Unreachable { count: u32 },
    /// Both rates vanish at `count`, leaving the ratio undefined.
    #[error("transition rates are both zero at {count} copies")]
    Domain { count: u32 },
}

/// Failures of the agent-based simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("every one of the {trials} trials exceeded the step budget")]
    Timeout { trials: u64 },
    #[error("only {fraction:.3} of recorded steps were monomorphic; lower the mutation rate")]
    InsufficientMonomorphicTime { fraction: f64 },
}

/// Failures of grid runs and threshold scans.
#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("grid point {index}: {source}")]
    Point { index: u64, source: FixationError },
    #[error(transparent)]
    Fixation(#[from] FixationError),
    #[error("no count up to {limit} makes HH dominant")]
    NotReached { limit: u32 },
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
