use crate::bounds::argmin_first;
use crate::model::PomdpModel;
use crate::solver::{default_resolution, grid_value_iteration, GridConfig, SolverError, ValueFunctionGrid};

/// Approximation of the optimal policy `μ*`.
pub trait PolicyOracle: Sync {
    fn optimal_action(&self, pi: &[f64]) -> usize;

    /// Whether the approximation error cannot flip the action at `pi`.
    fn is_certain(&self, _pi: &[f64]) -> bool {
        true
    }
}

/// One-step lookahead on a grid value function.
#[derive(Clone, Debug)]
pub struct GridOracle {
    model: PomdpModel<f64>,
    vf: ValueFunctionGrid,
}

impl GridOracle {
    pub fn new(model: PomdpModel<f64>, vf: ValueFunctionGrid) -> Self {
        GridOracle { model, vf }
    }

    /// Solves at `resolution`, or the model's default resolution.
    pub fn solve(model: &PomdpModel<f64>, resolution: Option<usize>) -> Result<Self, SolverError> {
        let d = resolution.unwrap_or_else(|| default_resolution(model));
        let vf = grid_value_iteration(model, GridConfig::new(d))?;
        Ok(GridOracle { model: model.clone(), vf })
    }

    pub fn value_function(&self) -> &ValueFunctionGrid {
        &self.vf
    }

    pub fn model(&self) -> &PomdpModel<f64> {
        &self.model
    }
}

impl PolicyOracle for GridOracle {
    fn optimal_action(&self, pi: &[f64]) -> usize {
        argmin_first(self.vf.lookahead(&self.model, pi))
    }

    fn is_certain(&self, pi: &[f64]) -> bool {
        let q = self.vf.lookahead(&self.model, pi);
        let best = argmin_first(q.iter().copied());
        let gap =
            q.iter().enumerate().filter(|(a, _)| *a != best).map(|(_, v)| v - q[best]).fold(f64::INFINITY, f64::min);
        gap > 2.0 * self.vf.lookahead_error()
    }
}
