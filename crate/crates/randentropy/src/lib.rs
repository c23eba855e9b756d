//! Inequality estimation in stochastic multi-individual systems.
//!
//! A population of `N` individuals moves among `D` communities according to a
//! piecewise homogeneous Markov chain (PHMC). Conditional on its community,
//! each individual holds a non-negative attribute; the attributes of the
//! population are dependent through a copula. The random Theil entropy of the
//! attribute share vector measures the inequality in the system at each time,
//! and its expected trajectory is estimated by Monte Carlo simulation.
//!
//! The pipeline is organized as:
//!
//! 1. [`model`] — validated containers for trajectories, attributes and chains;
//! 2. [`markov`] — transition-matrix estimation, stationary distributions and
//!    chain simulation;
//! 3. [`changepoint`] — likelihood-based detection of the times where the
//!    chain switches regime, with the Λ likelihood-ratio statistic;
//! 4. [`empirical`] — per-community binned attribute distributions with CDF
//!    and quantile evaluation;
//! 5. [`copula`] — dependent uniform generation by conditional-inverse
//!    (Rosenblatt) sampling for independence, Clayton and exchangeable
//!    Gaussian families;
//! 6. [`engine`] — the Monte Carlo estimator of the expected entropy
//!    trajectory;
//! 7. [`io`] — CSV ingestion/export and deterministic SVG plots.
//!
//! All estimation and simulation entry points are deterministic for a fixed
//! seed, independent of how work is partitioned across threads.

pub mod changepoint;
pub mod copula;
pub mod empirical;
pub mod engine;
pub mod io;
pub mod markov;
pub mod model;

pub use changepoint::{detect_change_points, ChangePointQuery, ChangePointResult};
pub use copula::CopulaSpec;
pub use empirical::{fit_family, DistributionFamily, EmpiricalDistribution};
pub use engine::{estimate_entropy, theil_entropy, InitialMode, ShareVector, SimulationConfig};
pub use markov::{count_transitions, estimate_transition_matrix, stationary_distribution};
pub use model::{
    AttributeObservations, CommunityLabel, CommunityTrajectories, EntropyTrajectory,
    SegmentedChain, TransitionMatrix,
};

mod parallel;
