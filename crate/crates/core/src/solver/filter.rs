use thiserror::Error;

use crate::model::{BeliefState, ObservationKernel, PomdpModel};
use crate::scalar::{sum, Scalar};

/// Observation probabilities (or densities) at or below this are treated as
/// impossible.
pub const UNDERFLOW_THRESHOLD: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observation {
    /// Symbol index of a discrete kernel, or a quantization bin of a Gaussian one.
    Symbol(usize),
    /// Real-valued reading of a Gaussian kernel, filtered with exact densities.
    Value(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("observation {observation:?} has probability {sigma:e} under action {action}")]
    ZeroProbability { action: usize, observation: Observation, sigma: f64 },
    #[error("symbol {symbol} out of range for {count} symbols")]
    SymbolOutOfRange { symbol: usize, count: usize },
    #[error("real-valued observation given to a discrete kernel")]
    ValueOnDiscrete,
}

/// `P_aᵀπ`.
fn predict<T: Scalar>(model: &PomdpModel<T>, pi: &[T], a: usize) -> Vec<T> {
    model.transition(a).tr_mul_vec(pi)
}

/// `T(π, y, a) = B_y P_aᵀπ / σ` with `σ = 𝟙ᵀ B_y P_aᵀπ`.
pub fn belief_update<T: Scalar>(
    model: &PomdpModel<T>,
    pi: &BeliefState<T>,
    y: Observation,
    a: usize,
) -> Result<(BeliefState<T>, T), FilterError> {
    let q = predict(model, pi.as_slice(), a);
    let likelihood: Vec<T> = match (model.observation(a), y) {
        (kernel, Observation::Symbol(s)) => {
            let b = kernel.planning_matrix();
            if s >= b.cols() {
                return Err(FilterError::SymbolOutOfRange { symbol: s, count: b.cols() });
            }
            b.column(s)
        }
        (ObservationKernel::Gaussian(g), Observation::Value(v)) => {
            (0..model.num_states()).map(|x| T::from_f64_lossy(g.density(x, v))).collect()
        }
        (ObservationKernel::Discrete(_), Observation::Value(_)) => return Err(FilterError::ValueOnDiscrete),
    };
    let mut post: Vec<T> = q.into_iter().zip(likelihood).map(|(qi, li)| qi * li).collect();
    let sigma = sum(&post);
    let threshold = if T::EXACT { T::zero() } else { T::from_f64_lossy(UNDERFLOW_THRESHOLD) };
    if sigma <= threshold {
        return Err(FilterError::ZeroProbability { action: a, observation: y, sigma: sigma.to_f64_lossy() });
    }
    for p in post.iter_mut() {
        *p = p.clone() / sigma.clone();
    }
    Ok((BeliefState::from_vec_unchecked(post), sigma))
}

/// `σ(π, ·, a)` over the planning symbols.
pub fn observation_distribution<T: Scalar>(model: &PomdpModel<T>, pi: &BeliefState<T>, a: usize) -> Vec<T> {
    let q = predict(model, pi.as_slice(), a);
    model.observation(a).planning_matrix().tr_mul_vec(&q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::model::BuiltinExample;

    fn flat_model() -> PomdpModel<f64> {
        let b = Matrix::from_f64_rows(&[&[0.5, 0.5], &[0.5, 0.5], &[0.5, 0.5]]);
        PomdpModel::new(
            vec![Matrix::identity(3)],
            vec![ObservationKernel::Discrete(b)],
            Matrix::from_f64_rows(&[&[1.0], &[2.0], &[3.0]]),
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn uninformative_observation_keeps_belief() {
        let m = flat_model();
        let pi = BeliefState::new(vec![0.2, 0.3, 0.5]).unwrap();
        let (post, sigma) = belief_update(&m, &pi, Observation::Symbol(1), 0).unwrap();
        assert!((sigma - 0.5).abs() < 1e-15);
        for i in 0..3 {
            assert!((post[i] - pi[i]).abs() < 1e-15);
        }
        assert_eq!(observation_distribution(&m, &pi, 0), vec![0.5, 0.5]);
    }

    #[test]
    fn example1_uniform_prior_posterior() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let (post, sigma) = belief_update(&m, &BeliefState::uniform(3), Observation::Symbol(0), 1).unwrap();
        // Oracle: q = P₂ᵀπ, u = q ⊙ B₂[:,0], σ = Σu.
        let p2 = [[1.0, 0.0, 0.0], [0.4677, 0.4149, 0.1174], [0.3302, 0.5220, 0.1478]];
        let b = [0.5927, 0.4986, 0.1395];
        let q: Vec<f64> = (0..3).map(|j| (0..3).map(|i| p2[i][j] / 3.0).sum()).collect();
        let u: Vec<f64> = (0..3).map(|j| q[j] * b[j]).collect();
        let s: f64 = u.iter().sum();
        assert!((sigma - s).abs() < 1e-12);
        assert!((sigma - 0.523).abs() < 5e-4);
        for j in 0..3 {
            assert!((post[j] - u[j] / s).abs() < 1e-12);
        }
        assert!((post[0] - 0.679).abs() < 1e-3 && (post[1] - 0.298).abs() < 1e-3 && (post[2] - 0.024).abs() < 1e-3);
    }

    #[test]
    fn absorbing_state_is_fixed() {
        let m = BuiltinExample::Four { theta1: 0.0, theta2: 0.0 }.model::<f64>().unwrap();
        let (post, _) = belief_update(&m, &BeliefState::unit(3, 0), Observation::Value(1.3), 1).unwrap();
        assert_eq!(post.as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn impossible_observation_is_an_error() {
        let b = Matrix::from_f64_rows(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let m = PomdpModel::new(
            vec![Matrix::identity(2)],
            vec![ObservationKernel::Discrete(b)],
            Matrix::from_f64_rows(&[&[1.0], &[2.0]]),
            0.5,
        )
        .unwrap();
        let err = belief_update(&m, &BeliefState::uniform(2), Observation::Symbol(1), 0).unwrap_err();
        assert!(matches!(err, FilterError::ZeroProbability { .. }));
        assert!(belief_update(&m, &BeliefState::uniform(2), Observation::Symbol(5), 0).is_err());
        assert_eq!(
            belief_update(&m, &BeliefState::uniform(2), Observation::Value(0.1), 0).unwrap_err(),
            FilterError::ValueOnDiscrete
        );
    }

    #[test]
    fn gaussian_value_uses_densities() {
        let m = BuiltinExample::TwoGaussian.model::<f64>().unwrap();
        let pi = BeliefState::uniform(10);
        let (post, _) = belief_update(&m, &pi, Observation::Value(9.7), 0).unwrap();
        let argmax = (0..10).max_by(|&i, &j| post[i].partial_cmp(&post[j]).unwrap()).unwrap();
        assert!(argmax >= 7, "{post:?}");
    }
}
