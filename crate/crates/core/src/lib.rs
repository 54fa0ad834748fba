//! Evolutionary dynamics of fairness in the bipartite Ultimatum Game, where
//! human proposers and receivers imitate successful peers and share their
//! populations with committed AI agents.
//!
//! * [`game`]: the discrete game, population composition and payoffs.
//! * [`dynamics`]: Fermi imitation, birth-death rates, fixation probabilities.
//! * [`markov`]: the four-state small-mutation chain and its stationary vector.
//! * [`mc`]: an agent-based Moran simulator used as an independent check.
//! * [`sweep`]: parameter grids, critical-mass searches and summaries.
//! * [`figures`]: the CSV bundles consumed by the plotting scripts.
//! * [`output`]: atomic file writes and run manifests.
//! * [`cli`]: the `ugfair` command line.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod figures;
pub mod game;
pub mod markov;
pub mod mc;
pub mod numeric;
pub mod output;
pub mod sweep;

pub use dynamics::{fermi, fixation_probability, transition_rates, FixationQuery, TransitionRates};
pub use error::{FixationError, ParamError, SimError, SweepError};
pub use mc::{simulate_fixation, simulate_long_run, FixationEstimate, LongRunOccupancy, SimConfig};
pub use sweep::{run_grid, GridSpec, SweepRecord};
pub use game::{
    AiProposerKind, GameParams, Level, MonomorphicState, PopulationConfig, PopulationState, Role,
    Strategy,
};
pub use markov::{
    build_transition_matrix, stationary_distribution, stationary_for, transition_report,
    StationaryDistribution, TransitionMatrix, TransitionReport,
};
