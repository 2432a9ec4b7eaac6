use rand::Rng;
use rand_distr::Exp1;

use crate::matrix::Matrix;
use crate::model::{BeliefState, ModelError, ObservationKernel, PomdpModel};

/// Uniform (flat Dirichlet) sample from the simplex by normalized
/// exponential spacings.
pub fn sample_belief_uniform<R: Rng + ?Sized>(rng: &mut R, num_states: usize) -> BeliefState<f64> {
    assert!(num_states >= 1, "simplex needs at least one state");
    if num_states == 1 {
        return BeliefState::unit(1, 0);
    }
    let e: Vec<f64> = (0..num_states).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    BeliefState::from_vec_unchecked(e.into_iter().map(|v| v / total).collect())
}

/// Stochastic matrix with independent uniform rows.
pub fn random_stochastic<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_rows((0..rows).map(|_| sample_belief_uniform(rng, cols).into_vec()).collect()).expect("rectangular")
}

/// Model with uniform random transition and observation rows and costs
/// uniform on `[0, 1)`. No structural assumption is imposed.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    num_states: usize,
    num_actions: usize,
    num_symbols: usize,
    discount: f64,
) -> Result<PomdpModel<f64>, ModelError> {
    let transitions = (0..num_actions).map(|_| random_stochastic(rng, num_states, num_states)).collect();
    let observations = (0..num_actions)
        .map(|_| ObservationKernel::Discrete(random_stochastic(rng, num_states, num_symbols)))
        .collect();
    let costs =
        Matrix::from_rows((0..num_states).map(|_| (0..num_actions).map(|_| rng.random::<f64>()).collect()).collect())
            .expect("rectangular");
    PomdpModel::new(transitions, observations, costs, discount)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::task_rng;

    #[test]
    fn single_state_is_certain() {
        let mut rng = task_rng(1, 0);
        assert_eq!(sample_belief_uniform(&mut rng, 1).as_slice(), &[1.0]);
    }

    #[test]
    fn coordinate_means_are_one_third() {
        let mut rng = task_rng(2, 0);
        let n = 200_000;
        let mut mean = [0.0; 3];
        let mut above_half = 0usize;
        for _ in 0..n {
            let pi = sample_belief_uniform(&mut rng, 3);
            for i in 0..3 {
                mean[i] += pi[i] / n as f64;
            }
            above_half += usize::from(pi[0] > 0.5);
        }
        // Var of one Dirichlet(1,1,1) coordinate is 1/18.
        let se = (1.0f64 / 18.0 / n as f64).sqrt();
        for m in mean {
            assert!((m - 1.0 / 3.0).abs() < 3.0 * se, "{m}");
        }
        // {π₁ > ½} is a corner triangle with half the side, so a quarter of the area.
        let frac = above_half as f64 / n as f64;
        assert!((frac - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / n as f64).sqrt(), "{frac}");
    }

    #[test]
    fn random_model_is_valid() {
        let mut rng = task_rng(3, 0);
        let m = random_model(&mut rng, 3, 2, 3, 0.5).unwrap();
        assert_eq!((m.num_states(), m.num_actions(), m.num_observations()), (3, 2, 3));
    }
}
