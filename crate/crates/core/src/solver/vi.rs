use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::argmin_first;
use crate::model::PomdpModel;

use super::grid::{Interpolation, SimplexGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("value iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid grid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridConfig {
    pub resolution: usize,
    pub stop_tol: f64,
    pub max_iter: usize,
    pub interpolation: Interpolation,
}

impl GridConfig {
    pub fn new(resolution: usize) -> Self {
        GridConfig { resolution, stop_tol: 1e-9, max_iter: 100_000, interpolation: Interpolation::Nearest }
    }

    pub fn with_interpolation(mut self, mode: Interpolation) -> Self {
        self.interpolation = mode;
        self
    }

    pub fn with_stop_tol(mut self, tol: f64) -> Self {
        self.stop_tol = tol;
        self
    }

    pub fn with_max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }
}

/// Cap on grid points × actions × symbols, the size of the successor table.
const SUCCESSOR_BUDGET: usize = 1 << 23;

/// Resolution used when none is given: 100 for three states, 12 from eight
/// states up, geometric in between, then lowered until the successor table
/// fits the budget.
pub fn default_resolution(model: &PomdpModel<f64>) -> usize {
    let x = model.num_states();
    let mut d = match x {
        0 | 1 => 1,
        2 => 200,
        3 => 100,
        4 => 48,
        5 => 30,
        6 => 20,
        7 => 15,
        _ => 12,
    };
    let per_point = model.num_actions() * model.num_observations();
    while d > 1 && SimplexGrid::count_points(x, d).saturating_mul(per_point) > SUCCESSOR_BUDGET {
        d -= 1;
    }
    d
}

/// Approximate value function on a simplex grid.
#[derive(Clone, Debug, Serialize)]
pub struct ValueFunctionGrid {
    pub resolution: usize,
    pub num_states: usize,
    pub num_actions: usize,
    pub discount: f64,
    pub interpolation: Interpolation,
    pub values: Vec<f64>,
    /// Row-major `points × actions`.
    pub q_values: Vec<f64>,
    pub greedy_actions: Vec<usize>,
    pub iterations: usize,
    pub residual: f64,
    pub stop_tol: f64,
    /// ℓ₁ Lipschitz constant of the optimal value function.
    pub lipschitz: f64,
    pub projection_radius: f64,
    /// Bound on `|Q_grid(π, a) − Q(π, a)|` at every grid point.
    pub error_bound: f64,
    #[serde(skip)]
    grid: SimplexGrid,
}

/// Successor table: for each `(point, action)`, the stage cost and a list of
/// `(grid index, σ_y · weight)`.
struct Successors {
    cost: Vec<f64>,
    offsets: Vec<usize>,
    index: Vec<u32>,
    weight: Vec<f64>,
}

fn planning_tables(model: &PomdpModel<f64>) -> Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (0..model.num_actions())
        .map(|a| (model.transition(a).to_rows(), model.observation(a).planning_matrix().to_rows()))
        .collect()
}

fn build_successors(model: &PomdpModel<f64>, grid: &SimplexGrid, mode: Interpolation) -> Successors {
    let x = model.num_states();
    let na = model.num_actions();
    let tables = planning_tables(model);
    let costs = model.costs().to_rows();
    let points: Vec<Vec<usize>> = grid.points().collect();
    let rows: Vec<Vec<(f64, Vec<(u32, f64)>)>> = points
        .par_iter()
        .map(|k| {
            let pi = grid.belief(k);
            (0..na)
                .map(|a| {
                    let (p, b) = &tables[a];
                    let stage: f64 = (0..x).map(|s| costs[s][a] * pi[s]).sum();
                    let q: Vec<f64> = (0..x).map(|j| (0..x).map(|i| p[i][j] * pi[i]).sum()).collect();
                    let mut entries: Vec<(u32, f64)> = Vec::new();
                    for y in 0..b[0].len() {
                        let u: Vec<f64> = (0..x).map(|j| q[j] * b[j][y]).collect();
                        let sigma: f64 = u.iter().sum();
                        if sigma <= super::UNDERFLOW_THRESHOLD {
                            continue;
                        }
                        let post: Vec<f64> = u.iter().map(|v| v / sigma).collect();
                        for (idx, w) in grid.stencil(&post, mode) {
                            entries.push((idx as u32, sigma * w));
                        }
                    }
                    entries.sort_by_key(|e| e.0);
                    let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
                    for (i, w) in entries {
                        match merged.last_mut() {
                            Some(last) if last.0 == i => last.1 += w,
                            _ => merged.push((i, w)),
                        }
                    }
                    (stage, merged)
                })
                .collect()
        })
        .collect();
    let mut s = Successors { cost: Vec::new(), offsets: vec![0], index: Vec::new(), weight: Vec::new() };
    for row in rows {
        for (stage, entries) in row {
            s.cost.push(stage);
            for (i, w) in entries {
                s.index.push(i);
                s.weight.push(w);
            }
            s.offsets.push(s.index.len());
        }
    }
    s
}

fn backup(s: &Successors, v: &[f64], rho: f64, g: usize, a: usize, na: usize) -> f64 {
    let slot = g * na + a;
    let (lo, hi) = (s.offsets[slot], s.offsets[slot + 1]);
    let future: f64 = s.index[lo..hi].iter().zip(&s.weight[lo..hi]).map(|(&i, &w)| w * v[i as usize]).sum();
    s.cost[slot] + rho * future
}

/// Bellman fixed-point iteration restricted to the grid.
///
/// Starts from the myopic values `min_a c_aᵀπ` and stops once the sup-norm
/// change between sweeps is at most `stop_tol`.
pub fn grid_value_iteration(model: &PomdpModel<f64>, config: GridConfig) -> Result<ValueFunctionGrid, SolverError> {
    if config.resolution == 0 {
        return Err(SolverError::Config("resolution must be at least 1".into()));
    }
    let x = model.num_states();
    let na = model.num_actions();
    let rho = *model.discount();
    let grid = SimplexGrid::new(x, config.resolution);
    let succ = build_successors(model, &grid, config.interpolation);
    let n = grid.len();

    let mut v: Vec<f64> =
        (0..n).map(|g| (0..na).map(|a| succ.cost[g * na + a]).fold(f64::INFINITY, f64::min)).collect();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < config.max_iter {
        let next: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|g| (0..na).map(|a| backup(&succ, &v, rho, g, a, na)).fold(f64::INFINITY, f64::min))
            .collect();
        residual = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        iterations += 1;
        if residual <= config.stop_tol {
            break;
        }
    }
    if residual > config.stop_tol {
        return Err(SolverError::NotConverged { iterations, residual });
    }

    let q_values: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|g| (0..na).map(|a| backup(&succ, &v, rho, g, a, na)).collect::<Vec<_>>())
        .collect();
    let greedy_actions: Vec<usize> =
        (0..n).map(|g| argmin_first(q_values[g * na..(g + 1) * na].iter().copied())).collect();

    let c = model.costs().as_slice();
    let (cmin, cmax) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let lipschitz = (cmax - cmin) / (2.0 * (1.0 - rho));
    let projection_radius = grid.projection_radius(config.interpolation);
    let error_bound = rho * (lipschitz * projection_radius + rho * residual) / (1.0 - rho);

    Ok(ValueFunctionGrid {
        resolution: config.resolution,
        num_states: x,
        num_actions: na,
        discount: rho,
        interpolation: config.interpolation,
        values: v,
        q_values,
        greedy_actions,
        iterations,
        residual,
        stop_tol: config.stop_tol,
        lipschitz,
        projection_radius,
        error_bound,
        grid,
    })
}

impl ValueFunctionGrid {
    pub fn grid(&self) -> &SimplexGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid points in index order.
    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.grid.points().map(|k| self.grid.belief(&k))
    }

    pub fn q_row(&self, g: usize) -> &[f64] {
        &self.q_values[g * self.num_actions..(g + 1) * self.num_actions]
    }

    /// Runner-up minus best Q value; infinite with one action.
    pub fn gap(&self, g: usize) -> f64 {
        let row = self.q_row(g);
        let best = row[self.greedy_actions[g]];
        row.iter()
            .enumerate()
            .filter(|(a, _)| *a != self.greedy_actions[g])
            .map(|(_, q)| q - best)
            .fold(f64::INFINITY, f64::min)
    }

    /// The greedy action is certainly optimal when the gap exceeds twice the
    /// per-action error bound.
    pub fn is_unambiguous(&self, g: usize) -> bool {
        self.gap(g) > 2.0 * self.error_bound
    }

    /// Interpolated value at an arbitrary belief.
    pub fn value_at(&self, pi: &[f64]) -> f64 {
        self.grid.stencil(pi, self.interpolation).iter().map(|&(i, w)| w * self.values[i]).sum()
    }

    /// One-step lookahead Q values at an arbitrary belief.
    pub fn lookahead(&self, model: &PomdpModel<f64>, pi: &[f64]) -> Vec<f64> {
        let x = model.num_states();
        (0..model.num_actions())
            .map(|a| {
                let p = model.transition(a);
                let b = model.observation(a).planning_matrix();
                let stage: f64 = (0..x).map(|s| model.costs()[(s, a)] * pi[s]).sum();
                let q = p.tr_mul_vec(pi);
                let mut future = 0.0;
                for y in 0..b.cols() {
                    let u: Vec<f64> = (0..x).map(|j| q[j] * b[(j, y)]).collect();
                    let sigma: f64 = u.iter().sum();
                    if sigma > super::UNDERFLOW_THRESHOLD {
                        let post: Vec<f64> = u.iter().map(|v| v / sigma).collect();
                        future += sigma * self.value_at(&post);
                    }
                }
                stage + self.discount * future
            })
            .collect()
    }

    /// Bound on `|lookahead(π)[a] − Q(π, a)|` at any belief: the grid value
    /// error plus the interpolation error of the successor beliefs, discounted.
    pub fn lookahead_error(&self) -> f64 {
        let rho = self.discount;
        let lr = self.lipschitz * self.projection_radius;
        let value_error = rho * (lr + self.residual) / (1.0 - rho);
        rho * (value_error + lr)
    }

    pub fn greedy_at(&self, model: &PomdpModel<f64>, pi: &[f64]) -> usize {
        argmin_first(self.lookahead(model, pi))
    }

    /// Table of points, values, Q values and greedy actions as JSON.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Export<'a> {
            #[serde(flatten)]
            grid: &'a ValueFunctionGrid,
            points: Vec<Vec<f64>>,
        }
        serde_json::to_string(&Export { grid: self, points: self.points().collect() }).expect("serializable")
    }
}
