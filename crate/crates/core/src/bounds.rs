//! Transformed costs, myopic bound policies, and the optimization of the
//! bound offset `f`.
//!
//! For an offset `f` the transformed cost of action `a` is
//! `C_a = c_a + (I − ρP_a) f`. If every `C_a` is increasing in the state the
//! myopic policy of the `C_a` is an upper bound for the optimal policy;
//! decreasing `C_a` give a lower bound. Actions are 0-based throughout.

use serde::Serialize;
use thiserror::Error;

use crate::lp::{feasible_point, minimize_l1, solve_lp, LpError, LpProblem, LpStatus, DEFAULT_FEAS_TOL};
use crate::matrix::Matrix;
use crate::model::{BeliefState, PomdpModel};
use crate::scalar::{dot, Scalar};

pub const DEFAULT_EPS_STRICT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Upper,
    Lower,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{} polytope is empty: {} fails", .0.label(), if *.0 == BoundKind::Upper { "A1" } else { "A2" })]
    EmptyPolytope(BoundKind),
    #[error("operation needs exactly two actions, model has {0}")]
    NotTwoAction(usize),
    #[error("LP for state {state} is unbounded")]
    Unbounded { state: usize },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

fn tol<T: Scalar>() -> T {
    T::tolerance(DEFAULT_FEAS_TOL)
}

/// `I − ρP_a`.
fn shifted_identity<T: Scalar>(model: &PomdpModel<T>, a: usize) -> Matrix<T> {
    let p = model.transition(a);
    let rho = model.discount().clone();
    Matrix::<T>::identity(model.num_states()).sub(&p.scale(&rho))
}

/// Constraint system over `f` whose solutions make every transformed cost
/// column increasing (upper) or decreasing (lower) with step ≥ `eps_strict`.
pub fn cost_polytope<T: Scalar>(model: &PomdpModel<T>, kind: BoundKind, eps_strict: T) -> LpProblem<T> {
    let x = model.num_states();
    let mut p = LpProblem::new(x);
    for a in 0..model.num_actions() {
        let m = shifted_identity(model, a);
        let c = model.cost_vector(a);
        for i in 0..x.saturating_sub(1) {
            // Upper: C[i] − C[i+1] ≤ −ε.
            let (lo, hi) = match kind {
                BoundKind::Upper => (i, i + 1),
                BoundKind::Lower => (i + 1, i),
            };
            let row: Vec<T> = (0..x).map(|j| m[(lo, j)].clone() - m[(hi, j)].clone()).collect();
            p.add_le(row, c[hi].clone() - c[lo].clone() - eps_strict.clone());
        }
    }
    p
}

/// Minimum-ℓ₁ member of the cost polytope, if any.
pub fn minimal_offset<T: Scalar>(
    model: &PomdpModel<T>,
    kind: BoundKind,
    eps_strict: T,
) -> Result<Option<Vec<T>>, LpError> {
    let out = minimize_l1(&cost_polytope(model, kind, eps_strict), tol())?;
    Ok(out.solution)
}

/// Offset `f` together with the matrix whose column `a` is `c_a + (I − ρP_a) f`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformedCostSet<T> {
    pub f: Vec<T>,
    pub costs: Matrix<T>,
    pub kind: BoundKind,
}

impl<T: Scalar> TransformedCostSet<T> {
    pub fn num_actions(&self) -> usize {
        self.costs.cols()
    }

    /// `C_aᵀπ`.
    pub fn expected(&self, a: usize, pi: &[T]) -> T {
        (0..self.costs.rows()).fold(T::zero(), |acc, x| acc + self.costs[(x, a)].clone() * pi[x].clone())
    }

    /// Smallest signed step between consecutive states over all columns;
    /// positive means strictly monotone in the direction of `kind`.
    pub fn monotonicity_margin(&self) -> Option<T> {
        let mut margin: Option<T> = None;
        for a in 0..self.costs.cols() {
            for i in 0..self.costs.rows().saturating_sub(1) {
                let step = self.costs[(i + 1, a)].clone() - self.costs[(i, a)].clone();
                let step = match self.kind {
                    BoundKind::Upper => step,
                    BoundKind::Lower => -step,
                };
                margin = Some(match margin {
                    Some(m) => T::min_of(m, step),
                    None => step,
                });
            }
        }
        margin
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_margin().is_none_or(|m| m > T::zero())
    }
}

pub fn transformed_costs<T: Scalar>(model: &PomdpModel<T>, f: &[T], kind: BoundKind) -> TransformedCostSet<T> {
    let (x, na) = (model.num_states(), model.num_actions());
    let mut costs = Matrix::<T>::zeros(x, na);
    for a in 0..na {
        let shift = shifted_identity(model, a).mul_vec(f);
        for s in 0..x {
            costs[(s, a)] = model.costs()[(s, a)].clone() + shift[s].clone();
        }
    }
    TransformedCostSet { f: f.to_vec(), costs, kind }
}

/// Index of the action minimizing `C_aᵀπ`; ties go to the smallest index.
pub fn myopic_policy<T: Scalar>(costs: &TransformedCostSet<T>, pi: &BeliefState<T>) -> usize {
    argmin_first((0..costs.num_actions()).map(|a| costs.expected(a, pi.as_slice())))
}

pub(crate) fn argmin_first<T: Scalar>(values: impl IntoIterator<Item = T>) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (a, v) in values.into_iter().enumerate() {
        match &best {
            Some((_, b)) if !(v < *b) => {}
            _ => best = Some((a, v)),
        }
    }
    best.map_or(0, |(a, _)| a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm1Status {
    Solved,
    NoSolution,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Algorithm1Result<T> {
    pub kind: BoundKind,
    pub alphas: Vec<T>,
    pub f_star: Option<Vec<T>>,
    pub status: Algorithm1Status,
}

/// Two-action offset optimization.
///
/// For the upper bound, `α_i = min e_iᵀ(P₂ − P₁) f` over the upper polytope
/// for each state, then `f*` is the minimum-ℓ₁ member of the polytope that
/// attains every `α_i` simultaneously. The lower bound uses `P₁ − P₂` over
/// the lower polytope. `NoSolution` means no single member attains all the
/// minima.
pub fn optimize_f_two_action<T: Scalar>(
    model: &PomdpModel<T>,
    kind: BoundKind,
    eps_strict: T,
) -> Result<Algorithm1Result<T>, BoundsError> {
    if model.num_actions() != 2 {
        return Err(BoundsError::NotTwoAction(model.num_actions()));
    }
    let x = model.num_states();
    let d = match kind {
        BoundKind::Upper => model.transition(1).sub(model.transition(0)),
        BoundKind::Lower => model.transition(0).sub(model.transition(1)),
    };
    let base = cost_polytope(model, kind, eps_strict);
    if feasible_point(&base, tol())?.status == LpStatus::Infeasible {
        return Err(BoundsError::EmptyPolytope(kind));
    }
    let mut alphas = Vec::with_capacity(x);
    for i in 0..x {
        let out = solve_lp(&base.clone().minimize(d.row(i).to_vec()), tol())?;
        match out.status {
            LpStatus::Optimal => alphas.push(out.objective_value.expect("optimal has a value")),
            LpStatus::Unbounded => return Err(BoundsError::Unbounded { state: i }),
            LpStatus::Infeasible => return Err(BoundsError::EmptyPolytope(kind)),
        }
    }
    // e_iᵀ D f ≥ α_i holds on the whole polytope, so one-sided rows suffice.
    let mut attained = base;
    for (i, alpha) in alphas.iter().enumerate() {
        let slack = T::tolerance(DEFAULT_FEAS_TOL) * (T::one() + alpha.clone().abs());
        attained.add_le(d.row(i).to_vec(), alpha.clone() + slack);
    }
    let f_star = minimize_l1(&attained, tol())?.solution;
    let status = if f_star.is_some() { Algorithm1Status::Solved } else { Algorithm1Status::NoSolution };
    Ok(Algorithm1Result { kind, alphas, f_star, status })
}

/// The bound actions at one belief.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundPair {
    pub lower: usize,
    pub upper: usize,
}

impl BoundPair {
    /// Action pinned by the bounds, if they agree.
    pub fn pinned(&self) -> Option<usize> {
        (self.lower == self.upper).then_some(self.lower)
    }
}

/// Two-action halfspaces `g_upᵀπ ≤ 0` (upper bound picks action 0) and
/// `g_loᵀπ ≥ 0` (lower bound picks action 1), with
/// `g = c₁ − c₂ − ρ(P₁ − P₂) f`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoActionRegion<T> {
    pub f_up: Vec<T>,
    pub f_lo: Vec<T>,
    pub g_up: Vec<T>,
    pub g_lo: Vec<T>,
}

impl<T: Scalar> TwoActionRegion<T> {
    /// Inside the first halfspace the upper bound is action 0, which forces
    /// the lower bound too; inside the second the lower bound is action 1.
    pub fn bounds_at(&self, pi: &[T]) -> BoundPair {
        if dot(&self.g_up, pi) <= T::zero() {
            BoundPair { lower: 0, upper: 0 }
        } else if dot(&self.g_lo, pi) >= T::zero() {
            BoundPair { lower: 1, upper: 1 }
        } else {
            BoundPair { lower: 0, upper: 1 }
        }
    }
}

pub fn two_action_normal<T: Scalar>(model: &PomdpModel<T>, f: &[T]) -> Vec<T> {
    let dp = model.transition(0).sub(model.transition(1));
    let shift = dp.mul_vec(f);
    let rho = model.discount().clone();
    (0..model.num_states())
        .map(|s| model.costs()[(s, 0)].clone() - model.costs()[(s, 1)].clone() - rho.clone() * shift[s].clone())
        .collect()
}

pub fn overlap_region_two_action<T: Scalar>(
    model: &PomdpModel<T>,
    f_up: &[T],
    f_lo: &[T],
) -> Result<TwoActionRegion<T>, BoundsError> {
    if model.num_actions() != 2 {
        return Err(BoundsError::NotTwoAction(model.num_actions()));
    }
    Ok(TwoActionRegion {
        f_up: f_up.to_vec(),
        f_lo: f_lo.to_vec(),
        g_up: two_action_normal(model, f_up),
        g_lo: two_action_normal(model, f_lo),
    })
}

/// Result of the per-belief search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerBeliefBounds<T> {
    pub a_low: usize,
    pub a_high: usize,
    pub f_lo: Vec<T>,
    pub f_up: Vec<T>,
}

/// Least upper bound and greatest lower bound on the optimal action at `pi`
/// over all offsets in the two polytopes.
///
/// `a_high` is the first action `i` (ascending) for which some upper offset
/// makes `C_iᵀπ ≤ C_aᵀπ` for every `a`; `a_low` is the last action
/// (descending) for which some lower offset does.
pub fn per_belief_bounds<T: Scalar>(
    model: &PomdpModel<T>,
    pi: &BeliefState<T>,
    eps_strict: T,
) -> Result<PerBeliefBounds<T>, BoundsError> {
    let up = PolytopePair::new(model, eps_strict);
    up.query(model, pi)
}

/// Cached upper and lower polytopes for repeated per-belief queries.
///
/// The minimum-ℓ₁ member of each polytope is kept as an anchor. Its myopic
/// action is always feasible for the search, so only the actions before it
/// (upper) or after it (lower) need an LP, and those LPs are posed in
/// coordinates centred on the anchor, where the polytope rows start feasible.
#[derive(Clone, Debug)]
pub struct PolytopePair<T> {
    upper: Side<T>,
    lower: Side<T>,
}

#[derive(Clone, Debug)]
struct Side<T> {
    /// Polytope in `g = f − origin`.
    base: LpProblem<T>,
    origin: Vec<T>,
    anchor: Option<TransformedCostSet<T>>,
}

impl<T: Scalar> Side<T> {
    fn new(model: &PomdpModel<T>, kind: BoundKind, eps_strict: T) -> Self {
        let mut base = cost_polytope(model, kind, eps_strict.clone());
        let anchor = minimal_offset(model, kind, eps_strict).ok().flatten();
        let origin = anchor.clone().unwrap_or_else(|| vec![T::zero(); model.num_states()]);
        for (row, rhs) in base.ineq_lhs.iter().zip(base.ineq_rhs.iter_mut()) {
            let shifted = rhs.clone() - dot(row, &origin);
            // The anchor satisfies the rows up to solver tolerance.
            *rhs = if anchor.is_some() && shifted.is_negative() && shifted > -tol::<T>() { T::zero() } else { shifted };
        }
        let anchor = anchor.map(|f| transformed_costs(model, &f, kind));
        Side { base, origin, anchor }
    }
}

fn argmin_last<T: Scalar>(values: impl IntoIterator<Item = T>) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (a, v) in values.into_iter().enumerate() {
        match &best {
            Some((_, b)) if v > *b => {}
            _ => best = Some((a, v)),
        }
    }
    best.map_or(0, |(a, _)| a)
}

impl<T: Scalar> PolytopePair<T> {
    pub fn new(model: &PomdpModel<T>, eps_strict: T) -> Self {
        PolytopePair {
            upper: Side::new(model, BoundKind::Upper, eps_strict.clone()),
            lower: Side::new(model, BoundKind::Lower, eps_strict),
        }
    }

    fn first_feasible(
        &self,
        model: &PomdpModel<T>,
        pi: &[T],
        kind: BoundKind,
        order: impl Iterator<Item = usize>,
    ) -> Result<Option<(usize, Vec<T>)>, BoundsError> {
        let side = match kind {
            BoundKind::Upper => &self.upper,
            BoundKind::Lower => &self.lower,
        };
        let rho = model.discount().clone();
        let pt: Vec<Vec<T>> = (0..model.num_actions()).map(|a| model.transition(a).tr_mul_vec(pi)).collect();
        let cpi: Vec<T> = (0..model.num_actions()).map(|a| dot(&model.cost_vector(a), pi)).collect();
        for i in order {
            let mut p = side.base.clone();
            for a in (0..model.num_actions()).filter(|&a| a != i) {
                // (c_i − c_a)ᵀπ − ρ πᵀ(P_i − P_a) f ≤ 0
                let row: Vec<T> =
                    (0..model.num_states()).map(|s| -(rho.clone() * (pt[i][s].clone() - pt[a][s].clone()))).collect();
                let rhs = cpi[a].clone() - cpi[i].clone() - dot(&row, &side.origin);
                p.add_le(row, rhs);
            }
            if let Some(g) = feasible_point(&p, tol())?.solution {
                let f = g.into_iter().zip(&side.origin).map(|(g, o)| g + o.clone()).collect();
                return Ok(Some((i, f)));
            }
        }
        Ok(None)
    }

    pub fn query(&self, model: &PomdpModel<T>, pi: &BeliefState<T>) -> Result<PerBeliefBounds<T>, BoundsError> {
        let na = model.num_actions();
        let s = pi.as_slice();
        let none = |kind: BoundKind| {
            BoundsError::Inconsistent(format!("no action is feasible for the {} bound", kind.label()))
        };
        let (a_high, f_up) = match &self.upper.anchor {
            Some(anchor) => {
                let a = argmin_first((0..na).map(|b| anchor.expected(b, s)));
                self.first_feasible(model, s, BoundKind::Upper, 0..a)?.unwrap_or_else(|| (a, anchor.f.clone()))
            }
            None => self.first_feasible(model, s, BoundKind::Upper, 0..na)?.ok_or_else(|| none(BoundKind::Upper))?,
        };
        let (a_low, f_lo) = match &self.lower.anchor {
            Some(anchor) => {
                let a = argmin_last((0..na).map(|b| anchor.expected(b, s)));
                self.first_feasible(model, s, BoundKind::Lower, (a + 1..na).rev())?
                    .unwrap_or_else(|| (a, anchor.f.clone()))
            }
            None => {
                self.first_feasible(model, s, BoundKind::Lower, (0..na).rev())?.ok_or_else(|| none(BoundKind::Lower))?
            }
        };
        Ok(PerBeliefBounds { a_low, a_high, f_lo, f_up })
    }
}

/// The set of beliefs where the lower and upper bound policies agree.
#[derive(Clone, Debug)]
pub enum OverlapRegion<T> {
    /// Optimized two-action halfspaces.
    TwoAction(TwoActionRegion<T>),
    /// Any number of actions with one fixed offset per bound.
    FixedPair { upper: TransformedCostSet<T>, lower: TransformedCostSet<T> },
    /// Any number of actions, offsets re-optimized per belief.
    PerBelief(PolytopePair<T>),
}

impl<T: Scalar> OverlapRegion<T> {
    pub fn bounds_at(&self, model: &PomdpModel<T>, pi: &BeliefState<T>) -> Result<BoundPair, BoundsError> {
        Ok(match self {
            OverlapRegion::TwoAction(r) => r.bounds_at(pi.as_slice()),
            OverlapRegion::FixedPair { upper, lower } => {
                BoundPair { lower: myopic_policy(lower, pi), upper: myopic_policy(upper, pi) }
            }
            OverlapRegion::PerBelief(pair) => {
                let b = pair.query(model, pi)?;
                BoundPair { lower: b.a_low, upper: b.a_high }
            }
        })
    }

    pub fn contains(&self, model: &PomdpModel<T>, pi: &BeliefState<T>) -> Result<bool, BoundsError> {
        Ok(self.bounds_at(model, pi)?.pinned().is_some())
    }
}

/// Builds the default region: optimized halfspaces for two actions, per-belief
/// optimization otherwise.
pub fn optimized_region<T: Scalar>(model: &PomdpModel<T>, eps_strict: T) -> Result<OverlapRegion<T>, BoundsError> {
    if model.num_actions() == 2 {
        let up = optimize_f_two_action(model, BoundKind::Upper, eps_strict.clone())?;
        let lo = optimize_f_two_action(model, BoundKind::Lower, eps_strict)?;
        match (up.f_star, lo.f_star) {
            (Some(fu), Some(fl)) => Ok(OverlapRegion::TwoAction(overlap_region_two_action(model, &fu, &fl)?)),
            _ => Err(BoundsError::Inconsistent("offset optimization found no member attaining every minimum".into())),
        }
    } else {
        for kind in [BoundKind::Upper, BoundKind::Lower] {
            if minimal_offset(model, kind, eps_strict.clone())?.is_none() {
                return Err(BoundsError::EmptyPolytope(kind));
            }
        }
        Ok(OverlapRegion::PerBelief(PolytopePair::new(model, eps_strict)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BuiltinExample;

    fn eps() -> f64 {
        DEFAULT_EPS_STRICT
    }

    fn ex1() -> PomdpModel<f64> {
        BuiltinExample::One.model().unwrap()
    }

    #[test]
    fn zero_offset_is_identity() {
        let m = ex1();
        let t = transformed_costs(&m, &[0.0; 3], BoundKind::Upper);
        assert_eq!(&t.costs, m.costs());
    }

    #[test]
    fn zero_discount_adds_offset() {
        let m = ex1().with_discount(0.0);
        let f = [0.3, -1.0, 2.0];
        let t = transformed_costs(&m, &f, BoundKind::Upper);
        for a in 0..2 {
            for s in 0..3 {
                assert!((t.costs[(s, a)] - (m.costs()[(s, a)] + f[s])).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ties_go_to_first_action() {
        let m = ex1();
        let t = TransformedCostSet {
            f: vec![0.0; 3],
            costs: Matrix::from_f64_rows(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]]),
            kind: BoundKind::Upper,
        };
        assert_eq!(myopic_policy(&t, &BeliefState::uniform(m.num_states())), 0);
    }

    #[test]
    fn identical_transitions_give_zero_alphas() {
        let m = ex1();
        let p2 = m.transition(1).clone();
        let m = m.with_transitions(vec![p2.clone(), p2]);
        let r = optimize_f_two_action(&m, BoundKind::Upper, eps()).unwrap();
        assert_eq!(r.status, Algorithm1Status::Solved);
        assert!(r.alphas.iter().all(|a| *a == 0.0));
    }

    #[test]
    fn example1_both_bounds_solved() {
        let m = ex1();
        for kind in [BoundKind::Upper, BoundKind::Lower] {
            let r = optimize_f_two_action(&m, kind, eps()).unwrap();
            assert_eq!(r.status, Algorithm1Status::Solved, "{kind:?}");
            let f = r.f_star.unwrap();
            let t = transformed_costs(&m, &f, kind);
            assert!(t.monotonicity_margin().unwrap() >= eps() - 1e-9);
        }
    }

    #[test]
    fn example1_pins_e3() {
        let m = ex1();
        let region = optimized_region(&m, eps()).unwrap();
        let e3 = BeliefState::unit(3, 2);
        assert!(region.bounds_at(&m, &e3).unwrap().pinned().is_some());
    }

    #[test]
    fn all_positive_normal_never_picks_action_zero() {
        let r = TwoActionRegion { f_up: vec![], f_lo: vec![], g_up: vec![1.0, 2.0], g_lo: vec![-1.0, -1.0] };
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            assert_ne!(r.bounds_at(&[p, 1.0 - p]).pinned(), Some(0));
        }
    }

    #[test]
    fn degenerate_normal_pins_everything() {
        let r = TwoActionRegion { f_up: vec![], f_lo: vec![], g_up: vec![0.0; 2], g_lo: vec![0.0; 2] };
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            assert!(r.bounds_at(&[p, 1.0 - p]).pinned().is_some());
        }
    }

    #[test]
    fn not_two_action_is_an_error() {
        let m = BuiltinExample::Three.model::<f64>().unwrap();
        assert!(matches!(optimize_f_two_action(&m, BoundKind::Upper, eps()), Err(BoundsError::NotTwoAction(8))));
    }

    #[test]
    fn example3_overlaps_at_e1() {
        let m = BuiltinExample::Three.model::<f64>().unwrap();
        let b = per_belief_bounds(&m, &BeliefState::unit(8, 0), eps()).unwrap();
        assert_eq!(b.a_low, b.a_high);
    }
}
