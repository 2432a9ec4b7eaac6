use serde::Serialize;
use thiserror::Error;

use crate::bounds::argmin_first;
use crate::lp::{solve_lp, LpError, LpProblem};
use crate::model::PomdpModel;
use crate::scalar::{dot, Scalar};

pub const DEFAULT_VECTOR_CAP: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HorizonError {
    #[error("alpha-vector set reached {size} vectors at stage {stage}, cap is {cap}")]
    CapExceeded { stage: usize, size: usize, cap: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaVector<T> {
    pub values: Vec<T>,
    /// First action of the plan this vector belongs to.
    pub action: usize,
}

/// Piecewise-linear concave `N`-stage value function `V(π) = min_α αᵀπ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaVectorSet<T> {
    pub horizon: usize,
    pub vectors: Vec<AlphaVector<T>>,
}

impl<T: Scalar> AlphaVectorSet<T> {
    pub fn value(&self, pi: &[T]) -> T {
        self.vectors.iter().map(|v| dot(&v.values, pi)).reduce(T::min_of).expect("set is nonempty")
    }

    pub fn action(&self, pi: &[T]) -> usize {
        let best = argmin_first(self.vectors.iter().map(|v| dot(&v.values, pi)));
        self.vectors[best].action
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn margin_tol<T: Scalar>(vectors: &[AlphaVector<T>]) -> T {
    let scale = vectors.iter().flat_map(|v| v.values.iter()).fold(T::one(), |acc, x| T::max_of(acc, x.clone().abs()));
    T::tolerance(1e-9) * scale
}

/// Largest `δ` with `(v − w)ᵀπ + δ ≤ 0` for every `w` in `winners` at some
/// belief `π`, capped at 1, from the dual
///
/// `min μ + ν  s.t.  Σ_w λ_w (v − w)_s + μ ≥ 0 ∀s,  Σ_w λ_w + ν = 1,  λ, ν ≥ 0`,
///
/// which has one row per state instead of one per winner.
fn domination_margin<T: Scalar>(v: &AlphaVector<T>, winners: &[AlphaVector<T>]) -> Result<T, LpError> {
    let x = v.values.len();
    let k = winners.len();
    // Variables: λ_0..λ_{k−1}, μ, ν.
    let mut p = LpProblem::new(k + 2);
    p.objective[k] = T::one();
    p.objective[k + 1] = T::one();
    for j in (0..k).chain(std::iter::once(k + 1)) {
        p.set_bounds(j, Some(T::zero()), None);
    }
    for s in 0..x {
        let mut row: Vec<T> = winners.iter().map(|w| v.values[s].clone() - w.values[s].clone()).collect();
        row.push(T::one());
        row.push(T::zero());
        p.add_ge(row, T::zero());
    }
    let mut sum = vec![T::one(); k + 2];
    sum[k] = T::zero();
    p.add_eq(sum, T::one());
    let out = solve_lp(&p, T::tolerance(1e-9))?;
    Ok(out.objective_value.unwrap_or_else(T::zero))
}

/// A belief attaining [`domination_margin`].
fn witness<T: Scalar>(v: &AlphaVector<T>, winners: &[AlphaVector<T>]) -> Result<Option<Vec<T>>, LpError> {
    let x = v.values.len();
    let mut p = LpProblem::new(x + 1);
    p.objective[x] = -T::one();
    for j in 0..x {
        p.set_bounds(j, Some(T::zero()), None);
    }
    let mut ones = vec![T::one(); x + 1];
    ones[x] = T::zero();
    p.add_eq(ones, T::one());
    for w in winners {
        let mut row: Vec<T> = v.values.iter().zip(&w.values).map(|(a, b)| a.clone() - b.clone()).collect();
        row.push(T::one());
        p.add_le(row, T::zero());
    }
    // As a row rather than a bound the cap keeps every right-hand side at
    // zero, so only the simplex row needs an artificial.
    let mut cap = vec![T::zero(); x + 1];
    cap[x] = T::one();
    p.add_le(cap, T::one());
    Ok(solve_lp(&p, T::tolerance(1e-9))?.solution.map(|mut s| {
        s.truncate(x);
        s
    }))
}

/// Index of the vector lowest at `pi`, ties broken lexicographically so the
/// choice lies on the lower envelope.
fn best_at<T: Scalar>(vectors: &[AlphaVector<T>], pi: &[T]) -> usize {
    let mut best = 0;
    let mut best_value = dot(&vectors[0].values, pi);
    for (k, v) in vectors.iter().enumerate().skip(1) {
        let value = dot(&v.values, pi);
        let lex_smaller =
            || v.values.iter().zip(&vectors[best].values).find(|(a, b)| a != b).is_some_and(|(a, b)| a < b);
        if value < best_value || (value == best_value && lex_smaller()) {
            best = k;
            best_value = value;
        }
    }
    best
}

/// Removes vectors that are nowhere strictly below the others on the simplex.
///
/// Candidates are tested against the growing set of confirmed vectors only;
/// a witness belief promotes whichever candidate is lowest there.
fn prune<T: Scalar>(mut vectors: Vec<AlphaVector<T>>) -> Result<Vec<AlphaVector<T>>, LpError> {
    // Pointwise domination (and duplicates) first; it is cheap.
    let mut candidates: Vec<AlphaVector<T>> = Vec::with_capacity(vectors.len());
    'outer: for v in vectors.drain(..) {
        for w in &candidates {
            if w.values.iter().zip(&v.values).all(|(a, b)| a <= b) {
                continue 'outer;
            }
        }
        candidates.retain(|w| !v.values.iter().zip(&w.values).all(|(a, b)| a <= b));
        candidates.push(v);
    }
    if candidates.len() <= 1 {
        return Ok(candidates);
    }
    let tol = margin_tol(&candidates);
    let x = candidates[0].values.len();
    let mut winners: Vec<AlphaVector<T>> = Vec::new();
    for s in 0..x {
        if candidates.is_empty() {
            break;
        }
        let corner: Vec<T> = (0..x).map(|j| if j == s { T::one() } else { T::zero() }).collect();
        let b = best_at(&candidates, &corner);
        winners.push(candidates.swap_remove(b));
    }
    while let Some(v) = candidates.pop() {
        if domination_margin(&v, &winners)? <= tol {
            continue;
        }
        let Some(pi) = witness(&v, &winners)? else {
            continue;
        };
        candidates.push(v);
        let b = best_at(&candidates, &pi);
        let incumbent = winners.iter().map(|w| dot(&w.values, &pi)).fold(None, |m: Option<T>, v| {
            Some(match m {
                Some(m) => T::min_of(m, v),
                None => v,
            })
        });
        let gain = incumbent.expect("winners nonempty") - dot(&candidates[b].values, &pi);
        if gain > tol {
            winners.push(candidates.swap_remove(b));
        } else {
            candidates.pop();
        }
    }
    Ok(winners)
}

fn check_cap<T>(set: &[AlphaVector<T>], stage: usize, cap: usize) -> Result<(), HorizonError> {
    if set.len() > cap {
        return Err(HorizonError::CapExceeded { stage, size: set.len(), cap });
    }
    Ok(())
}

/// Exact `N`-stage optimal cost by backing up alpha vectors with incremental
/// pruning: each stage forms, per action, the cross sum over observation
/// symbols of `ρ P_a diag(b_{·,y}) α` and prunes after every sum.
pub fn exact_finite_horizon<T: Scalar>(
    model: &PomdpModel<T>,
    horizon: usize,
    cap: usize,
) -> Result<AlphaVectorSet<T>, HorizonError> {
    let x = model.num_states();
    let na = model.num_actions();
    let rho = model.discount().clone();
    let mut gamma = vec![AlphaVector { values: vec![T::zero(); x], action: 0 }];
    for stage in 1..=horizon {
        let mut next = Vec::new();
        for a in 0..na {
            let p = model.transition(a);
            let b = model.observation(a).planning_matrix();
            let mut sums = vec![AlphaVector { values: model.cost_vector(a), action: a }];
            for y in 0..b.cols() {
                let projected: Vec<AlphaVector<T>> = gamma
                    .iter()
                    .map(|alpha| {
                        let weighted: Vec<T> = (0..x).map(|j| b[(j, y)].clone() * alpha.values[j].clone()).collect();
                        let values = p.mul_vec(&weighted).into_iter().map(|v| rho.clone() * v).collect();
                        AlphaVector { values, action: a }
                    })
                    .collect();
                let projected = prune(projected)?;
                let mut cross = Vec::with_capacity(sums.len() * projected.len());
                for s in &sums {
                    for g in &projected {
                        let values = s.values.iter().zip(&g.values).map(|(u, v)| u.clone() + v.clone()).collect();
                        cross.push(AlphaVector { values, action: a });
                    }
                }
                check_cap(&cross, stage, cap.saturating_mul(cap.max(1)))?;
                sums = prune(cross)?;
                check_cap(&sums, stage, cap)?;
            }
            next.extend(sums);
        }
        gamma = prune(next)?;
        check_cap(&gamma, stage, cap)?;
    }
    Ok(AlphaVectorSet { horizon, vectors: gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::model::{BeliefState, BuiltinExample, ObservationKernel};
    use crate::solver::{belief_update, observation_distribution, Observation};

    fn tree_value(model: &PomdpModel<f64>, pi: &BeliefState<f64>, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        (0..model.num_actions())
            .map(|a| {
                let stage: f64 = (0..model.num_states()).map(|s| model.costs()[(s, a)] * pi[s]).sum();
                let sigma = observation_distribution(model, pi, a);
                let mut future = 0.0;
                for (y, s) in sigma.iter().enumerate() {
                    if *s > 1e-300 {
                        let (post, _) = belief_update(model, pi, Observation::Symbol(y), a).unwrap();
                        future += s * tree_value(model, &post, n - 1);
                    }
                }
                stage + model.discount() * future
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn one_stage_is_the_cost_vectors() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let set = exact_finite_horizon(&m, 1, DEFAULT_VECTOR_CAP).unwrap();
        assert_eq!(set.len(), 2);
        let c1 = m.cost_vector(0);
        assert!(set.vectors.iter().any(|v| v.values == c1 && v.action == 0));
    }

    #[test]
    fn matches_expectimin_tree() {
        let m = PomdpModel::new(
            vec![
                Matrix::from_f64_rows(&[&[0.9, 0.1], &[0.3, 0.7]]),
                Matrix::from_f64_rows(&[&[0.5, 0.5], &[0.2, 0.8]]),
            ],
            vec![ObservationKernel::Discrete(Matrix::from_f64_rows(&[&[0.8, 0.2], &[0.35, 0.65]]))],
            Matrix::from_f64_rows(&[&[1.0, 1.4], &[2.0, 1.1]]),
            0.8,
        )
        .unwrap();
        let set = exact_finite_horizon(&m, 4, DEFAULT_VECTOR_CAP).unwrap();
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let pi = BeliefState::new(vec![p, 1.0 - p]).unwrap();
            let want = tree_value(&m, &pi, 4);
            assert!((set.value(pi.as_slice()) - want).abs() < 1e-10, "π₁ = {p}");
        }
    }

    #[test]
    fn zero_discount_keeps_one_stage_policy() {
        let m = BuiltinExample::One.model::<f64>().unwrap().with_discount(0.0);
        let one = exact_finite_horizon(&m, 1, DEFAULT_VECTOR_CAP).unwrap();
        let five = exact_finite_horizon(&m, 5, DEFAULT_VECTOR_CAP).unwrap();
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let pi = [p, (1.0 - p) / 2.0, (1.0 - p) / 2.0];
            assert_eq!(one.action(&pi), five.action(&pi));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        assert!(matches!(exact_finite_horizon(&m, 6, 1), Err(HorizonError::CapExceeded { .. })));
    }

    #[test]
    fn prune_drops_dominated() {
        let v = |a: f64, b: f64| AlphaVector { values: vec![a, b], action: 0 };
        let kept = prune(vec![v(0.0, 1.0), v(1.0, 0.0), v(0.6, 0.6), v(0.4, 0.4), v(2.0, 2.0)]).unwrap();
        let vals: Vec<_> = kept.iter().map(|k| k.values.clone()).collect();
        assert_eq!(vals.len(), 3);
        assert!(vals.contains(&vec![0.4, 0.4]));
        let kept = prune(vec![v(0.0, 1.0), v(1.0, 0.0), v(0.5, 0.5)]).unwrap();
        assert_eq!(kept.len(), 2);
    }
}
