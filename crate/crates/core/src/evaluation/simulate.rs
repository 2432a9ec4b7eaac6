use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::oracle::PolicyOracle;
use super::{task_rng, EvaluationError};
use crate::bounds::{BoundKind, OverlapRegion};
use crate::model::{BeliefState, ObservationKernel, PomdpModel};
use crate::solver::{belief_update, FilterError, Observation};

/// Redraws allowed for a single observation whose filter update underflows.
const MAX_RESAMPLES: usize = 1000;

/// Decision rule evaluated at the filtered belief.
pub trait Policy: Sync {
    fn action(&self, pi: &BeliefState<f64>) -> Result<usize, EvaluationError>;
}

pub struct ConstantPolicy(pub usize);

impl Policy for ConstantPolicy {
    fn action(&self, _pi: &BeliefState<f64>) -> Result<usize, EvaluationError> {
        Ok(self.0)
    }
}

/// Wraps a closure.
pub struct FnPolicy<F>(pub F);

impl<F: Fn(&BeliefState<f64>) -> usize + Sync> Policy for FnPolicy<F> {
    fn action(&self, pi: &BeliefState<f64>) -> Result<usize, EvaluationError> {
        Ok((self.0)(pi))
    }
}

pub struct OraclePolicy<'a>(pub &'a dyn PolicyOracle);

impl Policy for OraclePolicy<'_> {
    fn action(&self, pi: &BeliefState<f64>) -> Result<usize, EvaluationError> {
        Ok(self.0.optimal_action(pi.as_slice()))
    }
}

/// The upper or lower myopic bound policy.
pub struct BoundPolicy<'a> {
    pub model: &'a PomdpModel<f64>,
    pub region: &'a OverlapRegion<f64>,
    pub kind: BoundKind,
}

impl Policy for BoundPolicy<'_> {
    fn action(&self, pi: &BeliefState<f64>) -> Result<usize, EvaluationError> {
        let b = self.region.bounds_at(self.model, pi)?;
        Ok(match self.kind {
            BoundKind::Upper => b.upper,
            BoundKind::Lower => b.lower,
        })
    }
}

/// Action taken by `μ̃` outside the overlap region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutsideAction {
    Fixed(usize),
    /// The oracle's action.
    Oracle,
}

impl Default for OutsideAction {
    fn default() -> Self {
        OutsideAction::Fixed(0)
    }
}

/// `μ̃`: the action pinned by the bounds inside the overlap region, a
/// fallback outside it.
pub struct TildePolicy<'a> {
    pub model: &'a PomdpModel<f64>,
    pub region: &'a OverlapRegion<f64>,
    pub default_action: usize,
    /// Overrides `default_action` when set.
    pub oracle: Option<&'a dyn PolicyOracle>,
}

impl Policy for TildePolicy<'_> {
    fn action(&self, pi: &BeliefState<f64>) -> Result<usize, EvaluationError> {
        Ok(match self.region.bounds_at(self.model, pi)?.pinned() {
            Some(a) => a,
            None => self.oracle.map_or(self.default_action, |o| o.optimal_action(pi.as_slice())),
        })
    }
}

/// Stage cost charged at a belief.
#[derive(Clone, Copy)]
pub enum CostRule<'a> {
    /// `c_aᵀπ`.
    Nominal,
    /// `c_aᵀπ` inside the region, `Σ_x π(x) min_a c(x, a)` outside.
    Clamped { region: &'a OverlapRegion<f64> },
}

impl CostRule<'_> {
    pub fn stage_cost(&self, model: &PomdpModel<f64>, pi: &BeliefState<f64>, a: usize) -> Result<f64, EvaluationError> {
        let c = model.costs();
        let nominal = || (0..model.num_states()).map(|s| c[(s, a)] * pi[s]).sum::<f64>();
        Ok(match self {
            CostRule::Nominal => nominal(),
            CostRule::Clamped { region } => {
                if region.contains(model, pi)? {
                    nominal()
                } else {
                    (0..model.num_states())
                        .map(|s| pi[s] * (0..model.num_actions()).map(|b| c[(s, b)]).fold(f64::INFINITY, f64::min))
                        .sum()
                }
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyTag {
    Tilde,
    ClampedOptimal,
    Optimal,
    Upper,
    Lower,
    Constant,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RolloutConfig {
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        RolloutConfig { horizon: 100, runs: 1000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub mean_cost: f64,
    pub std_error: f64,
    pub runs: usize,
    pub horizon: usize,
    pub policy: PolicyTag,
    pub rng_seed: u64,
    /// Observations redrawn because the filter update underflowed.
    pub resampled_observations: usize,
}

impl SimulationReport {
    pub(crate) fn from_costs(costs: &[f64], resampled: usize, cfg: &RolloutConfig, policy: PolicyTag) -> Self {
        let (mean, se) = mean_and_se(costs);
        SimulationReport {
            mean_cost: mean,
            std_error: se,
            runs: costs.len(),
            horizon: cfg.horizon,
            policy,
            rng_seed: cfg.seed,
            resampled_observations: resampled,
        }
    }
}

pub(crate) fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Inverse-CDF draw from a probability row; falls back to the last index
/// with positive mass when rounding leaves `u` above the total.
fn inverse_cdf(row: impl Iterator<Item = f64>, u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in row.enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

fn draw_observation(model: &PomdpModel<f64>, a: usize, state: usize, rng: &mut ChaCha8Rng) -> Observation {
    match model.observation(a) {
        ObservationKernel::Discrete(b) => {
            let u: f64 = rng.random();
            Observation::Symbol(inverse_cdf(b.row(state).iter().copied(), u))
        }
        ObservationKernel::Gaussian(g) => {
            // Box–Muller with a fixed number of uniforms per draw.
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random();
            let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            Observation::Value((state + 1) as f64 + g.sigma() * z)
        }
    }
}

pub(crate) type Pi0Sampler<'a> = dyn Fn(&mut ChaCha8Rng) -> Result<BeliefState<f64>, EvaluationError> + Sync + 'a;

/// Per-run discounted costs. Run `r` uses stream `r` of `cfg.seed`, drawing
/// the initial belief, initial state, then per stage one transition uniform
/// and the observation's uniforms, so two policies see common random numbers.
pub(crate) fn rollout_costs(
    model: &PomdpModel<f64>,
    policy: &dyn Policy,
    cost: CostRule<'_>,
    pi0: &Pi0Sampler<'_>,
    cfg: &RolloutConfig,
) -> Result<(Vec<f64>, usize), EvaluationError> {
    if cfg.horizon == 0 || cfg.runs == 0 {
        return Err(EvaluationError::Config("horizon and runs must be positive".into()));
    }
    let rho = *model.discount();
    let runs: Vec<Result<(f64, usize), EvaluationError>> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = task_rng(cfg.seed, r as u64);
            let mut pi = pi0(&mut rng)?;
            let u: f64 = rng.random();
            let mut state = inverse_cdf(pi.as_slice().iter().copied(), u);
            let mut total = 0.0;
            let mut weight = 1.0;
            let mut resampled = 0;
            for k in 0..cfg.horizon {
                let a = policy.action(&pi)?;
                total += weight * cost.stage_cost(model, &pi, a)?;
                weight *= rho;
                if k + 1 == cfg.horizon {
                    break;
                }
                let u: f64 = rng.random();
                state = inverse_cdf(model.transition(a).row(state).iter().copied(), u);
                let mut tries = 0;
                pi = loop {
                    let y = draw_observation(model, a, state, &mut rng);
                    match belief_update(model, &pi, y, a) {
                        Ok((next, _)) => break next,
                        Err(FilterError::ZeroProbability { .. }) if tries < MAX_RESAMPLES => {
                            tries += 1;
                            resampled += 1;
                        }
                        Err(e) => return Err(e.into()),
                    }
                };
            }
            Ok((total, resampled))
        })
        .collect();
    let mut costs = Vec::with_capacity(cfg.runs);
    let mut resampled = 0;
    for r in runs {
        let (c, n) = r?;
        costs.push(c);
        resampled += n;
    }
    Ok((costs, resampled))
}

/// Mean discounted cost `Σ_{k=1}^{H} ρ^{k−1} cost(π_k, a_k)` over `cfg.runs`
/// rollouts from `pi0`.
pub fn simulate_policy(
    model: &PomdpModel<f64>,
    policy: &dyn Policy,
    cost: CostRule<'_>,
    pi0: &BeliefState<f64>,
    cfg: &RolloutConfig,
    tag: PolicyTag,
) -> Result<SimulationReport, EvaluationError> {
    let start = pi0.clone();
    let sampler = move |_: &mut ChaCha8Rng| Ok(start.clone());
    let (costs, resampled) = rollout_costs(model, policy, cost, &sampler, cfg)?;
    Ok(SimulationReport::from_costs(&costs, resampled, cfg, tag))
}
