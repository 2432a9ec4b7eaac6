//! Monte Carlo evaluation: simplex sampling, overlap volume, policy rollouts,
//! the percentage loss and the discount and θ sweeps.

mod loss;
mod oracle;
mod sampling;
mod simulate;
mod sweep;
mod volume;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bounds::BoundsError;
use crate::solver::{FilterError, SolverError};

pub use loss::{percent_loss, LossEstimate, Pi0Provenance, Pi0Rule, DEFAULT_MAX_ATTEMPTS, NOT_APPLICABLE_COVERAGE};
pub use oracle::{GridOracle, PolicyOracle};
pub use sampling::{random_model, random_stochastic, sample_belief_uniform};
pub use simulate::{
    simulate_policy, BoundPolicy, ConstantPolicy, CostRule, FnPolicy, OraclePolicy, OutsideAction, Policy, PolicyTag,
    RolloutConfig, SimulationReport, TildePolicy,
};
pub use sweep::{
    example4_theta_grid, sweep_discount, sweep_example4, write_csv, Example4Cell, Example4Range, Example4Sweep,
    Protocol, SweepRow, SweepTable, DISCOUNT_LADDER,
};
pub use volume::{default_volume_samples, estimate_overlap_volume, VolumeEstimate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluationError {
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("assumption checks failed: {0}")]
    Assumptions(String),
    #[error("no initial belief outside the overlap region after {attempts} draws")]
    RejectionExhausted { attempts: usize },
    #[error("overlap region covers {coverage:.4} of the simplex; sampling outside it is not applicable")]
    NotApplicable { coverage: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// SplitMix64 finalizer over `(seed, a, b)`, used to derive independent
/// seeds for rows, purposes and cells from one master seed.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for task `stream` under master `seed`.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
