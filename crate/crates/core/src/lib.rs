//! Myopic upper and lower bounds on optimal policies of discounted-cost
//! POMDPs, with the solvers and Monte Carlo tools needed to evaluate them.
//!
//! The core is generic over [`Scalar`]: `f64`, `f32` and exact
//! [`num_rational::BigRational`]. The aliases below fix the scalar type for
//! the common cases.

pub mod assumptions;
pub mod bounds;
pub mod evaluation;
pub mod lp;
pub mod matrix;
pub mod model;
pub mod orders;
pub mod reproduce;
pub mod scalar;
pub mod solver;

pub use matrix::Matrix;
pub use model::{BeliefState, BuiltinExample, ModelError, ObservationKernel, PomdpModel};
pub use scalar::Scalar;

pub use num_rational::BigRational;

pub type Model = PomdpModel<f64>;
pub type ExactModel = PomdpModel<BigRational>;
pub type Belief = BeliefState<f64>;
pub type ExactBelief = BeliefState<BigRational>;
