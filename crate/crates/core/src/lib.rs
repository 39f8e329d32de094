//! Truncation and limit-interchange tools for Markov chains on countable
//! state spaces.
//!
//! Finite truncations of a countable kernel are built in [`truncation`],
//! their stationary laws are computed in [`stationary`], and [`interchange`]
//! certifies uniform-in-time bounds on the distance between the truncated
//! and reference chains. [`fte`] solves first-transition (Poisson-type)
//! equations and [`jump`] lifts everything to continuous time.

pub mod chain;
pub mod error;
pub mod examples;
pub mod fte;
pub mod interchange;
pub mod io;
pub mod jump;
pub mod stationary;
pub mod truncation;

pub use chain::{
    marginal, marginal_path, propagate, repair_stochastic, tv_distance, validate_stochastic, weighted_tv_distance,
    CountableKernel, FnKernel, ProbDist, StateIndex, StochasticMatrix, WeightFunction,
};
pub use error::{Error, Result};
pub use fte::{
    continuation_radius, discounted_reward, linear_solve_fte, mean_hitting_time, minimal_solution, regenerative_ratio,
    FteMethod, FteOptions, FteSolution, RewardSpec,
};
pub use interchange::{
    certified_uniform_bound, default_threshold, diagonal_probe, mixing_horizon, monotone_tv_profile, sup_tv_horizon,
    weighted_uniform_bound, SupTv, UniformBoundReport, WeightedBound,
};
pub use jump::{ctmc_certified_uniform_bound, ctmc_fte, embedded_chain, skeleton, transient, JumpChain, RateMatrix};
pub use stationary::{ctmc_stationary, gth, power_iteration, stationarity_residual, PowerResult};
pub use truncation::{embed, extend_absorbing, truncate, TruncatedChain, TruncationScheme};
