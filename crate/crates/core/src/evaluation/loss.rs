use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::oracle::PolicyOracle;
use super::sampling::sample_belief_uniform;
use super::simulate::{
    mean_and_se, rollout_costs, CostRule, OraclePolicy, OutsideAction, PolicyTag, RolloutConfig, SimulationReport,
    TildePolicy,
};
use super::{derive_seed, task_rng, EvaluationError};
use crate::bounds::OverlapRegion;
use crate::model::{BeliefState, PomdpModel};

/// Above this region coverage, sampling outside the region is reported as
/// not applicable.
pub const NOT_APPLICABLE_COVERAGE: f64 = 0.999;
pub const DEFAULT_MAX_ATTEMPTS: usize = 1_000_000;
const PILOT_SAMPLES: usize = 20_000;

/// How the initial belief of each run is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Pi0Rule {
    Fixed(BeliefState<f64>),
    /// Uniform on the simplex, rejecting beliefs inside the overlap region.
    /// Each run draws its own belief. A known region coverage skips the
    /// pilot estimate.
    UniformOutside {
        max_attempts: usize,
        coverage: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pi0Provenance {
    Fixed { belief: Vec<f64> },
    SampledOutside { pilot_coverage: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossEstimate {
    /// `(J_μ̃ − J̃_μ*) / J̃_μ*`, as a fraction.
    pub loss: f64,
    /// Delta-method standard error from the paired runs.
    pub std_error: f64,
    pub numerator: SimulationReport,
    pub denominator: SimulationReport,
    pub pi0: Pi0Provenance,
}

impl LossEstimate {
    pub fn recomputed(&self) -> f64 {
        (self.numerator.mean_cost - self.denominator.mean_cost) / self.denominator.mean_cost
    }
}

fn coverage(model: &PomdpModel<f64>, region: &OverlapRegion<f64>, seed: u64) -> Result<f64, EvaluationError> {
    let mut rng = task_rng(derive_seed(seed, 0x7069_6c6f_74, 0), 0);
    let mut inside = 0usize;
    for _ in 0..PILOT_SAMPLES {
        let pi = sample_belief_uniform(&mut rng, model.num_states());
        inside += usize::from(region.contains(model, &pi)?);
    }
    Ok(inside as f64 / PILOT_SAMPLES as f64)
}

/// Upper bound on the relative loss of `μ̃` (pinned action inside the
/// region, `outside` elsewhere) against `μ*` charged the clamped cost `c̃`.
/// Both rollouts share random numbers run by run.
pub fn percent_loss(
    model: &PomdpModel<f64>,
    region: &OverlapRegion<f64>,
    oracle: &dyn PolicyOracle,
    rule: &Pi0Rule,
    outside: OutsideAction,
    cfg: &RolloutConfig,
) -> Result<LossEstimate, EvaluationError> {
    let x = model.num_states();
    let (sampler, provenance): (Box<super::simulate::Pi0Sampler<'_>>, Pi0Provenance) = match rule {
        Pi0Rule::Fixed(pi) => {
            let pi = pi.clone();
            let belief = pi.as_slice().to_vec();
            (Box::new(move |_: &mut ChaCha8Rng| Ok(pi.clone())), Pi0Provenance::Fixed { belief })
        }
        Pi0Rule::UniformOutside { max_attempts, coverage: known } => {
            let cov = match known {
                Some(c) => *c,
                None => coverage(model, region, cfg.seed)?,
            };
            if cov > NOT_APPLICABLE_COVERAGE {
                return Err(EvaluationError::NotApplicable { coverage: cov });
            }
            let max_attempts = *max_attempts;
            let draw = move |rng: &mut ChaCha8Rng| {
                for _ in 0..max_attempts {
                    let pi = sample_belief_uniform(rng, x);
                    if !region.contains(model, &pi)? {
                        return Ok(pi);
                    }
                }
                Err(EvaluationError::RejectionExhausted { attempts: max_attempts })
            };
            (Box::new(draw), Pi0Provenance::SampledOutside { pilot_coverage: cov })
        }
    };
    let tilde = match outside {
        OutsideAction::Fixed(a) => TildePolicy { model, region, default_action: a, oracle: None },
        OutsideAction::Oracle => TildePolicy { model, region, default_action: 0, oracle: Some(oracle) },
    };
    let (num, nres) = rollout_costs(model, &tilde, CostRule::Nominal, sampler.as_ref(), cfg)?;
    let (den, dres) = rollout_costs(model, &OraclePolicy(oracle), CostRule::Clamped { region }, sampler.as_ref(), cfg)?;
    let den_mean = mean_and_se(&den).0;
    let num_mean = mean_and_se(&num).0;
    let loss = (num_mean - den_mean) / den_mean;
    let resid: Vec<f64> = num.iter().zip(&den).map(|(n, d)| n - d - loss * d).collect();
    let std_error = mean_and_se(&resid).1 / den_mean.abs();
    Ok(LossEstimate {
        loss,
        std_error,
        numerator: SimulationReport::from_costs(&num, nres, cfg, PolicyTag::Tilde),
        denominator: SimulationReport::from_costs(&den, dres, cfg, PolicyTag::ClampedOptimal),
        pi0: provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::TwoActionRegion;
    use crate::evaluation::GridOracle;
    use crate::model::BuiltinExample;

    #[test]
    fn full_overlap_has_no_loss() {
        // A constant-sign normal pins action 1 everywhere; make it optimal
        // by giving action 1 the smaller cost in every state.
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let costs = crate::matrix::Matrix::from_f64_rows(&[&[2.0, 1.0], &[2.0, 1.0], &[2.0, 1.0]]);
        let m = m.with_costs(costs);
        let g = vec![1.0; 3];
        let region = OverlapRegion::TwoAction(TwoActionRegion {
            f_up: vec![0.0; 3],
            f_lo: vec![0.0; 3],
            g_up: g.clone(),
            g_lo: g,
        });
        let oracle = GridOracle::solve(&m, Some(20)).unwrap();
        let cfg = RolloutConfig { horizon: 40, runs: 50, seed: 1 };
        let est = percent_loss(
            &m,
            &region,
            &oracle,
            &Pi0Rule::Fixed(BeliefState::unit(3, 0)),
            OutsideAction::default(),
            &cfg,
        )
        .unwrap();
        assert!(est.loss.abs() < 1e-12, "{}", est.loss);
        assert!(matches!(
            percent_loss(
                &m,
                &region,
                &oracle,
                &Pi0Rule::UniformOutside { max_attempts: 10, coverage: None },
                OutsideAction::default(),
                &cfg,
            ),
            Err(EvaluationError::NotApplicable { .. })
        ));
    }
}
