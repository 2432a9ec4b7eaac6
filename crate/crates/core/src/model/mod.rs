//! POMDP instances: transition matrices, observation kernels, costs and discount.
//!
//! States, actions and observation symbols are 0-based internally. Anything
//! user-facing (report `Display`, CLI output) prints them 1-based to match
//! the usual `x ∈ {1, …, X}` convention.

mod builtin;
mod document;
mod gaussian;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::{self, Scalar};

pub use builtin::{example4_p2, tridiagonal_kernel, BuiltinExample, ThetaError, LITERAL_RESOLUTION};
pub use document::{load_model, model_to_json, DocumentError};
pub use gaussian::GaussianKernel;

/// Tolerance on belief normalization.
pub const BELIEF_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error("invalid Gaussian kernel: {0}")]
    Gaussian(String),
}

/// A probability vector on the state simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BeliefState<T>(Vec<T>);

impl<T: Scalar> BeliefState<T> {
    /// Checks nonnegativity and unit mass within [`BELIEF_TOLERANCE`].
    pub fn new(probs: Vec<T>) -> Result<Self, ModelError> {
        if probs.is_empty() {
            return Err(ModelError::InvalidBelief("empty vector".into()));
        }
        if let Some(i) = probs.iter().position(|p| p.is_negative()) {
            return Err(ModelError::InvalidBelief(format!("entry {} is negative", i + 1)));
        }
        let total = scalar::sum(&probs);
        let tol = T::from_f64_lossy(BELIEF_TOLERANCE);
        if (total.clone() - T::one()).abs() > tol {
            return Err(ModelError::InvalidBelief(format!("entries sum to {} instead of 1", total.to_f64_lossy())));
        }
        Ok(BeliefState(probs))
    }

    /// Unit vector `e_i` (0-based `i`).
    pub fn unit(num_states: usize, i: usize) -> Self {
        assert!(i < num_states, "state index out of range");
        let mut v = vec![T::zero(); num_states];
        v[i] = T::one();
        BeliefState(v)
    }

    pub fn uniform(num_states: usize) -> Self {
        let n = T::from_usize(num_states).expect("state count fits scalar");
        BeliefState(vec![T::one() / n; num_states])
    }

    /// Wraps a vector already known to be a distribution.
    pub(crate) fn from_vec_unchecked(v: Vec<T>) -> Self {
        BeliefState(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }
}

impl<T> std::ops::Index<usize> for BeliefState<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// State-conditional observation law for one action.
#[derive(Clone, Debug, PartialEq)]
pub enum ObservationKernel<T> {
    /// `X × Y` row-stochastic matrix `b_{x,y}`.
    Discrete(Matrix<T>),
    /// `y = x + n`, `n ~ N(0, σ²)`, with a quantization grid for planners.
    Gaussian(GaussianKernel<T>),
}

impl<T: Scalar> ObservationKernel<T> {
    /// Finite-symbol matrix used by planners and the structural checks.
    /// Gaussian kernels expose their quantized bin probabilities.
    pub fn planning_matrix(&self) -> &Matrix<T> {
        match self {
            ObservationKernel::Discrete(m) => m,
            ObservationKernel::Gaussian(g) => g.quantized(),
        }
    }

    pub fn num_symbols(&self) -> usize {
        self.planning_matrix().cols()
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, ObservationKernel::Gaussian(_))
    }

    fn map_scalar<U: Scalar>(&self) -> ObservationKernel<U> {
        match self {
            ObservationKernel::Discrete(m) => ObservationKernel::Discrete(m.map(convert)),
            ObservationKernel::Gaussian(g) => ObservationKernel::Gaussian(g.map_scalar()),
        }
    }
}

fn convert<T: Scalar, U: Scalar>(v: &T) -> U {
    U::from_f64_lossy(v.to_f64_lossy())
}

/// The tuple `(X, A, Y, P_a, B_a, c, ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PomdpModel<T> {
    num_states: usize,
    num_actions: usize,
    transitions: Vec<Matrix<T>>,
    observations: Vec<ObservationKernel<T>>,
    /// `X × A`, column `a` is the cost vector `c_a`.
    costs: Matrix<T>,
    discount: T,
    entry_resolution: Option<f64>,
}

impl<T: Scalar> PomdpModel<T> {
    /// Builds and validates a model (tolerance 1e-6).
    ///
    /// `observations` holds either one kernel shared by all actions or one per action.
    pub fn new(
        transitions: Vec<Matrix<T>>,
        observations: Vec<ObservationKernel<T>>,
        costs: Matrix<T>,
        discount: T,
    ) -> Result<Self, ModelError> {
        let model = Self::from_parts_unchecked(transitions, observations, costs, discount);
        let report = model.validate(1e-6);
        if report.is_empty() {
            Ok(model)
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    /// Assembles a model without validation. A single observation kernel is
    /// broadcast to every action.
    pub fn from_parts_unchecked(
        transitions: Vec<Matrix<T>>,
        mut observations: Vec<ObservationKernel<T>>,
        costs: Matrix<T>,
        discount: T,
    ) -> Self {
        let num_actions = transitions.len();
        let num_states = transitions.first().map_or(costs.rows(), Matrix::rows);
        if observations.len() == 1 && num_actions > 1 {
            let shared = observations[0].clone();
            observations = vec![shared; num_actions];
        }
        PomdpModel { num_states, num_actions, transitions, observations, costs, discount, entry_resolution: None }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Number of observation symbols seen by planners (quantized for Gaussian kernels).
    pub fn num_observations(&self) -> usize {
        self.observations.first().map_or(0, ObservationKernel::num_symbols)
    }

    pub fn transition(&self, a: usize) -> &Matrix<T> {
        &self.transitions[a]
    }

    pub fn transitions(&self) -> &[Matrix<T>] {
        &self.transitions
    }

    pub fn observation(&self, a: usize) -> &ObservationKernel<T> {
        &self.observations[a]
    }

    pub fn observations(&self) -> &[ObservationKernel<T>] {
        &self.observations
    }

    pub fn has_gaussian_observations(&self) -> bool {
        self.observations.iter().any(ObservationKernel::is_gaussian)
    }

    pub fn costs(&self) -> &Matrix<T> {
        &self.costs
    }

    /// Cost vector `c_a`.
    pub fn cost_vector(&self, a: usize) -> Vec<T> {
        self.costs.column(a)
    }

    pub fn discount(&self) -> &T {
        &self.discount
    }

    /// Granularity the entries were specified at (e.g. 1e-4 for 4-decimal data).
    pub fn entry_resolution(&self) -> Option<f64> {
        self.entry_resolution
    }

    pub fn with_entry_resolution(mut self, resolution: Option<f64>) -> Self {
        self.entry_resolution = resolution;
        self
    }

    pub fn with_discount(mut self, discount: T) -> Self {
        self.discount = discount;
        self
    }

    /// Replaces every observation kernel (one shared kernel or one per action).
    pub fn with_observations(mut self, observations: Vec<ObservationKernel<T>>) -> Self {
        self.observations =
            if observations.len() == 1 { vec![observations[0].clone(); self.num_actions] } else { observations };
        self
    }

    pub fn with_costs(mut self, costs: Matrix<T>) -> Self {
        self.costs = costs;
        self
    }

    pub fn with_transitions(mut self, transitions: Vec<Matrix<T>>) -> Self {
        self.transitions = transitions;
        self
    }

    /// Converts every entry through `f64` into another scalar type.
    pub fn map_scalar<U: Scalar>(&self) -> PomdpModel<U> {
        PomdpModel {
            num_states: self.num_states,
            num_actions: self.num_actions,
            transitions: self.transitions.iter().map(|m| m.map(convert)).collect(),
            observations: self.observations.iter().map(ObservationKernel::map_scalar).collect(),
            costs: self.costs.map(convert),
            discount: convert(&self.discount),
            entry_resolution: self.entry_resolution,
        }
    }

    /// Reports every shape, range and stochasticity violation.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        validate_model(self, tol)
    }
}

/// One violated constraint. Indices are 0-based; `Display` prints them 1-based.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    NoActions,
    NoStates,
    DiscountOutOfRange { value: f64 },
    TransitionShape { action: usize, rows: usize, cols: usize },
    TransitionNegative { action: usize, row: usize, col: usize, value: f64 },
    TransitionRowSum { action: usize, row: usize, sum: f64 },
    ObservationCount { expected: usize, found: usize },
    ObservationShape { action: usize, rows: usize, cols: usize },
    ObservationNegative { action: usize, row: usize, col: usize, value: f64 },
    ObservationRowSum { action: usize, row: usize, sum: f64 },
    ObservationSymbolMismatch { action: usize, symbols: usize, expected: usize },
    GaussianSigma { action: usize, sigma: f64 },
    GaussianEdges { action: usize },
    CostShape { rows: usize, cols: usize },
    NonFinite { what: String },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationIssue::*;
        match self {
            NoActions => write!(f, "model has no actions"),
            NoStates => write!(f, "model has no states"),
            DiscountOutOfRange { value } => write!(f, "discount {value} outside [0, 1)"),
            TransitionShape { action, rows, cols } => {
                write!(f, "P{} has shape {rows}x{cols}", action + 1)
            }
            TransitionNegative { action, row, col, value } => {
                write!(f, "P{} entry ({}, {}) = {value} is negative", action + 1, row + 1, col + 1)
            }
            TransitionRowSum { action, row, sum } => {
                write!(f, "row {} of P{} sums to {sum}", row + 1, action + 1)
            }
            ObservationCount { expected, found } => {
                write!(f, "expected {expected} observation kernels, found {found}")
            }
            ObservationShape { action, rows, cols } => {
                write!(f, "B{} has shape {rows}x{cols}", action + 1)
            }
            ObservationNegative { action, row, col, value } => {
                write!(f, "B{} entry ({}, {}) = {value} is negative", action + 1, row + 1, col + 1)
            }
            ObservationRowSum { action, row, sum } => {
                write!(f, "row {} of B{} sums to {sum}", row + 1, action + 1)
            }
            ObservationSymbolMismatch { action, symbols, expected } => {
                write!(f, "B{} has {symbols} symbols, other kernels have {expected}", action + 1)
            }
            GaussianSigma { action, sigma } => {
                write!(f, "Gaussian kernel of action {} has sigma {sigma}", action + 1)
            }
            GaussianEdges { action } => {
                write!(f, "quantization edges of action {} are not strictly increasing", action + 1)
            }
            CostShape { rows, cols } => write!(f, "cost matrix has shape {rows}x{cols}"),
            NonFinite { what } => write!(f, "non-finite entry in {what}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

fn check_stochastic<T: Scalar>(
    m: &Matrix<T>,
    tol: f64,
    issues: &mut Vec<ValidationIssue>,
    negative: impl Fn(usize, usize, f64) -> ValidationIssue,
    row_sum: impl Fn(usize, f64) -> ValidationIssue,
) {
    for i in 0..m.rows() {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            let v = v.to_f64_lossy();
            if !v.is_finite() {
                issues.push(ValidationIssue::NonFinite { what: "matrix".into() });
            } else if v < -tol {
                issues.push(negative(i, j, v));
            }
        }
        let s = scalar::sum(row).to_f64_lossy();
        if (s - 1.0).abs() > tol {
            issues.push(row_sum(i, s));
        }
    }
}

/// Validates shapes, ranges and stochasticity.
pub fn validate_model<T: Scalar>(model: &PomdpModel<T>, tol: f64) -> ValidationReport {
    let mut issues = Vec::new();
    let x = model.num_states;
    let a_count = model.num_actions;
    if a_count == 0 {
        issues.push(ValidationIssue::NoActions);
    }
    if x == 0 {
        issues.push(ValidationIssue::NoStates);
    }
    let rho = model.discount.to_f64_lossy();
    if !(0.0..1.0).contains(&rho) || !rho.is_finite() {
        issues.push(ValidationIssue::DiscountOutOfRange { value: rho });
    }
    for (a, p) in model.transitions.iter().enumerate() {
        if p.rows() != x || p.cols() != x {
            issues.push(ValidationIssue::TransitionShape { action: a, rows: p.rows(), cols: p.cols() });
            continue;
        }
        check_stochastic(
            p,
            tol,
            &mut issues,
            |row, col, value| ValidationIssue::TransitionNegative { action: a, row, col, value },
            |row, sum| ValidationIssue::TransitionRowSum { action: a, row, sum },
        );
    }
    if model.observations.len() != a_count {
        issues.push(ValidationIssue::ObservationCount { expected: a_count, found: model.observations.len() });
    }
    let expected_symbols = model.observations.first().map(ObservationKernel::num_symbols);
    for (a, kernel) in model.observations.iter().enumerate() {
        if let ObservationKernel::Gaussian(g) = kernel {
            if !(g.sigma() > 0.0) || !g.sigma().is_finite() {
                issues.push(ValidationIssue::GaussianSigma { action: a, sigma: g.sigma() });
            }
            if g.edges().windows(2).any(|w| w[1] <= w[0]) {
                issues.push(ValidationIssue::GaussianEdges { action: a });
            }
        }
        let b = kernel.planning_matrix();
        if b.rows() != x || b.cols() == 0 {
            issues.push(ValidationIssue::ObservationShape { action: a, rows: b.rows(), cols: b.cols() });
            continue;
        }
        if let Some(expected) = expected_symbols {
            if b.cols() != expected {
                issues.push(ValidationIssue::ObservationSymbolMismatch { action: a, symbols: b.cols(), expected });
            }
        }
        check_stochastic(
            b,
            tol,
            &mut issues,
            |row, col, value| ValidationIssue::ObservationNegative { action: a, row, col, value },
            |row, sum| ValidationIssue::ObservationRowSum { action: a, row, sum },
        );
    }
    if model.costs.rows() != x || model.costs.cols() != a_count {
        issues.push(ValidationIssue::CostShape { rows: model.costs.rows(), cols: model.costs.cols() });
    } else if model.costs.as_slice().iter().any(|c| !c.to_f64_lossy().is_finite()) {
        issues.push(ValidationIssue::NonFinite { what: "costs".into() });
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(rho: f64) -> PomdpModel<f64> {
        PomdpModel::from_parts_unchecked(
            vec![Matrix::identity(2), Matrix::identity(2)],
            vec![ObservationKernel::Discrete(Matrix::from_f64_rows(&[&[0.5, 0.5], &[0.5, 0.5]]))],
            Matrix::from_f64_rows(&[&[1.0, 0.0], &[0.0, 1.0]]),
            rho,
        )
    }

    #[test]
    fn well_formed_model_has_empty_report() {
        assert!(tiny(0.5).validate(1e-9).is_empty());
    }

    #[test]
    fn discount_one_is_flagged() {
        let report = tiny(1.0).validate(1e-9);
        assert_eq!(report.issues, vec![ValidationIssue::DiscountOutOfRange { value: 1.0 }]);
    }

    #[test]
    fn short_row_is_flagged_with_position() {
        let bad = Matrix::from_f64_rows(&[&[0.5, 0.4], &[0.0, 1.0]]);
        let m = tiny(0.5).with_transitions(vec![bad, Matrix::identity(2)]);
        let report = m.validate(1e-9);
        assert_eq!(report.issues.len(), 1);
        match &report.issues[0] {
            ValidationIssue::TransitionRowSum { action: 0, row: 0, sum } => {
                assert!((sum - 0.9).abs() < 1e-12)
            }
            other => panic!("unexpected issue {other:?}"),
        }
        assert!(report.to_string().contains("row 1 of P1"));
    }

    #[test]
    fn belief_rejects_bad_mass() {
        assert!(BeliefState::new(vec![0.5, 0.4]).is_err());
        assert!(BeliefState::new(vec![-0.1, 1.1]).is_err());
        assert!(BeliefState::new(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn shared_kernel_is_broadcast() {
        let m = tiny(0.3);
        assert_eq!(m.observations().len(), 2);
        assert_eq!(m.num_observations(), 2);
    }
}
