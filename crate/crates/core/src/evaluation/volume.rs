use rayon::prelude::*;
use serde::Serialize;

use super::oracle::PolicyOracle;
use super::sampling::sample_belief_uniform;
use super::{task_rng, EvaluationError};
use crate::bounds::OverlapRegion;
use crate::model::PomdpModel;

const CHUNK: usize = 1 << 14;

/// Agreement of the oracle with the pinned action at samples inside the region.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OracleCheck {
    /// Samples inside the region where the oracle was certain.
    pub checked: usize,
    /// Samples inside the region where the oracle's error bound was too wide.
    pub uncertain: usize,
    /// Certain samples where the oracle disagreed with the pinned action.
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub fraction: f64,
    pub samples: usize,
    pub std_error: f64,
    pub rng_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
}

impl VolumeEstimate {
    pub fn from_counts(hits: usize, samples: usize, rng_seed: u64) -> Self {
        let p = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        let std_error = if samples == 0 { 0.0 } else { (p * (1.0 - p) / samples as f64).sqrt() };
        VolumeEstimate { fraction: p, samples, std_error, rng_seed, oracle: None }
    }
}

/// Volume samples used when none are requested: 10⁶ up to three states,
/// 10⁵ beyond.
pub fn default_volume_samples(num_states: usize) -> usize {
    if num_states <= 3 {
        1_000_000
    } else {
        100_000
    }
}

/// Fraction of uniform beliefs at which the bound policies agree.
///
/// Samples are drawn in fixed-size chunks, chunk `k` from stream `k` of
/// `seed`, so the estimate does not depend on the thread count.
pub fn estimate_overlap_volume(
    model: &PomdpModel<f64>,
    region: &OverlapRegion<f64>,
    oracle: Option<&dyn PolicyOracle>,
    samples: usize,
    seed: u64,
) -> Result<VolumeEstimate, EvaluationError> {
    let x = model.num_states();
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<Result<(usize, OracleCheck), EvaluationError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = task_rng(seed, c as u64);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut hits = 0;
            let mut check = OracleCheck::default();
            for _ in 0..n {
                let pi = sample_belief_uniform(&mut rng, x);
                if let Some(a) = region.bounds_at(model, &pi)?.pinned() {
                    hits += 1;
                    if let Some(o) = oracle {
                        if !o.is_certain(pi.as_slice()) {
                            check.uncertain += 1;
                        } else {
                            check.checked += 1;
                            if o.optimal_action(pi.as_slice()) != a {
                                check.violations += 1;
                            }
                        }
                    }
                }
            }
            Ok((hits, check))
        })
        .collect();
    let mut hits = 0;
    let mut total = OracleCheck::default();
    for r in per_chunk {
        let (h, c) = r?;
        hits += h;
        total.checked += c.checked;
        total.uncertain += c.uncertain;
        total.violations += c.violations;
    }
    let mut est = VolumeEstimate::from_counts(hits, samples, seed);
    if oracle.is_some() {
        est.oracle = Some(total);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{optimized_region, TwoActionRegion, DEFAULT_EPS_STRICT};
    use crate::model::BuiltinExample;

    #[test]
    fn full_region_has_unit_volume() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let z = vec![0.0; 3];
        let r =
            OverlapRegion::TwoAction(TwoActionRegion { f_up: z.clone(), f_lo: z.clone(), g_up: z.clone(), g_lo: z });
        let v = estimate_overlap_volume(&m, &r, None, 5000, 1).unwrap();
        assert_eq!(v.fraction, 1.0);
        assert_eq!(v.std_error, 0.0);
    }

    #[test]
    fn seeds_agree_within_noise() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let r = optimized_region(&m, DEFAULT_EPS_STRICT).unwrap();
        let a = estimate_overlap_volume(&m, &r, None, 100_000, 11).unwrap();
        let b = estimate_overlap_volume(&m, &r, None, 100_000, 12).unwrap();
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.fraction - b.fraction).abs() <= 6.0 * se);
        assert!((a.fraction - 0.953).abs() < 0.01, "{}", a.fraction);
    }
}
