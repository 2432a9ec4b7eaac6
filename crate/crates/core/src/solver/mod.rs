//! Belief filtering and two optimal-policy oracles: value iteration on a
//! simplex grid and exact finite-horizon backups with alpha vectors.

mod filter;
mod grid;
mod horizon;
mod vi;

pub use filter::{belief_update, observation_distribution, FilterError, Observation, UNDERFLOW_THRESHOLD};
pub use grid::{Interpolation, SimplexGrid, Stencil};
pub use horizon::{exact_finite_horizon, AlphaVector, AlphaVectorSet, HorizonError, DEFAULT_VECTOR_CAP};
pub use vi::{default_resolution, grid_value_iteration, GridConfig, SolverError, ValueFunctionGrid};
