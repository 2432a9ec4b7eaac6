//! Dense two-phase simplex: largest-coefficient pricing with a Bland's-rule
//! fallback against cycling.
//!
//! Problems in this crate are tiny (a few dozen variables and rows), so the
//! engine keeps a full tableau and favours predictability over speed. It is
//! generic over [`Scalar`]; with [`num_rational::BigRational`] every pivot is
//! exact and the tolerances collapse to zero.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::{dot, Scalar};

pub const DEFAULT_FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    Shape(String),
    #[error("simplex iteration limit {limit} exceeded")]
    IterationLimit { limit: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpOutcome<T> {
    pub status: LpStatus,
    pub solution: Option<Vec<T>>,
    pub objective_value: Option<T>,
}

impl<T> LpOutcome<T> {
    fn bare(status: LpStatus) -> Self {
        LpOutcome { status, solution: None, objective_value: None }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// `min objective·x  s.t.  G x ≤ h,  E x = d,  lower ≤ x ≤ upper`.
///
/// Variables are free unless bounded.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem<T> {
    pub objective: Vec<T>,
    pub ineq_lhs: Vec<Vec<T>>,
    pub ineq_rhs: Vec<T>,
    pub eq_lhs: Vec<Vec<T>>,
    pub eq_rhs: Vec<T>,
    pub lower: Vec<Option<T>>,
    pub upper: Vec<Option<T>>,
}

impl<T: Scalar> LpProblem<T> {
    /// `n` free variables, zero objective, no constraints.
    pub fn new(n: usize) -> Self {
        LpProblem {
            objective: vec![T::zero(); n],
            ineq_lhs: Vec::new(),
            ineq_rhs: Vec::new(),
            eq_lhs: Vec::new(),
            eq_rhs: Vec::new(),
            lower: vec![None; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn minimize(mut self, objective: Vec<T>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add_le(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        self.ineq_lhs.push(row);
        self.ineq_rhs.push(rhs);
        self
    }

    pub fn add_ge(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        self.add_le(row.into_iter().map(|v| -v).collect(), -rhs)
    }

    pub fn add_eq(&mut self, row: Vec<T>, rhs: T) -> &mut Self {
        self.eq_lhs.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<T>, upper: Option<T>) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    /// Same constraints with a zero objective.
    pub fn feasibility(&self) -> Self {
        let mut p = self.clone();
        p.objective = vec![T::zero(); self.num_vars()];
        p
    }

    fn check_shape(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.ineq_lhs.len() != self.ineq_rhs.len() || self.eq_lhs.len() != self.eq_rhs.len() {
            return Err(LpError::Shape("row count differs from right-hand-side length".into()));
        }
        if let Some(r) = self.ineq_lhs.iter().chain(&self.eq_lhs).find(|r| r.len() != n) {
            return Err(LpError::Shape(format!("constraint row has {} columns, expected {n}", r.len())));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Shape("bound vectors must match the variable count".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for (row, h) in self.ineq_lhs.iter().zip(&self.ineq_rhs) {
            worst = T::max_of(worst, dot(row, x) - h.clone());
        }
        for (row, d) in self.eq_lhs.iter().zip(&self.eq_rhs) {
            worst = T::max_of(worst, (dot(row, x) - d.clone()).abs());
        }
        for (j, xj) in x.iter().enumerate() {
            if let Some(l) = &self.lower[j] {
                worst = T::max_of(worst, l.clone() - xj.clone());
            }
            if let Some(u) = &self.upper[j] {
                worst = T::max_of(worst, xj.clone() - u.clone());
            }
        }
        worst
    }
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Clone, Debug)]
enum VarMap<T> {
    /// `x = offset + s`
    Shift { col: usize, offset: T },
    /// `x = offset − s`
    Reflect { col: usize, offset: T },
    /// `x = s⁺ − s⁻`
    Split { pos: usize, neg: usize },
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN_LIMIT: usize = 50;

struct Tableau<T> {
    /// `m` rows of `B⁻¹[A | b]`.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    num_cols: usize,
    eps: T,
    iterations: usize,
    limit: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    fn rhs(&self, i: usize) -> &T {
        &self.rows[i][self.num_cols]
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [T]) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            row[c] = T::zero();
        }
        if !cost[c].is_zero() {
            let f = cost[c].clone();
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            cost[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Pivots on the reduced-cost row `cost` (length `num_cols + 1`, last
    /// entry is minus the objective value) until optimal or unbounded.
    ///
    /// Prices by most negative reduced cost and switches to Bland's rule
    /// after a run of degenerate pivots, so cycling cannot occur.
    fn run(&mut self, cost: &mut [T], allowed: &[bool]) -> Result<Phase, LpError> {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            let eligible = |j: usize| allowed[j] && cost[j] < -self.eps.clone();
            let entering = if bland {
                (0..self.num_cols).find(|&j| eligible(j))
            } else {
                (0..self.num_cols).filter(|&j| eligible(j)).fold(None, |best: Option<usize>, j| match best {
                    Some(b) if cost[b] <= cost[j] => Some(b),
                    _ => Some(j),
                })
            };
            let Some(c) = entering else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if *a > self.eps {
                    let ratio = self.rhs(i).clone() / a.clone();
                    let better = match &leave {
                        None => true,
                        Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(Phase::Unbounded);
            };
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(LpError::IterationLimit { limit: self.limit });
            }
            if ratio.is_zero() {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_RUN_LIMIT {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c, cost);
        }
    }
}

/// Solves `p`; `feas_tol` bounds the accepted constraint violation.
pub fn solve_lp<T: Scalar>(p: &LpProblem<T>, feas_tol: T) -> Result<LpOutcome<T>, LpError> {
    p.check_shape()?;
    let n = p.num_vars();

    // Map every original variable onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut std_cols = 0usize;
    let mut bound_rows: Vec<(usize, T)> = Vec::new();
    for j in 0..n {
        match (&p.lower[j], &p.upper[j]) {
            (Some(l), u) => {
                if let Some(u) = u {
                    if u < l {
                        return Ok(LpOutcome::bare(LpStatus::Infeasible));
                    }
                    bound_rows.push((std_cols, u.clone() - l.clone()));
                }
                maps.push(VarMap::Shift { col: std_cols, offset: l.clone() });
                std_cols += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Reflect { col: std_cols, offset: u.clone() });
                std_cols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: std_cols, neg: std_cols + 1 });
                std_cols += 2;
            }
        }
    }

    let substitute = |row: &[T], rhs: &T| -> (Vec<T>, T) {
        let mut out = vec![T::zero(); std_cols];
        let mut b = rhs.clone();
        for (a, map) in row.iter().zip(&maps) {
            match map {
                VarMap::Shift { col, offset } => {
                    out[*col] = out[*col].clone() + a.clone();
                    b = b - a.clone() * offset.clone();
                }
                VarMap::Reflect { col, offset } => {
                    out[*col] = out[*col].clone() - a.clone();
                    b = b - a.clone() * offset.clone();
                }
                VarMap::Split { pos, neg } => {
                    out[*pos] = out[*pos].clone() + a.clone();
                    out[*neg] = out[*neg].clone() - a.clone();
                }
            }
        }
        (out, b)
    };

    // (coefficients, rhs, is_inequality)
    let mut rows: Vec<(Vec<T>, T, bool)> = Vec::new();
    for (row, h) in p.ineq_lhs.iter().zip(&p.ineq_rhs) {
        let (r, b) = substitute(row, h);
        rows.push((r, b, true));
    }
    for (col, width) in &bound_rows {
        let mut r = vec![T::zero(); std_cols];
        r[*col] = T::one();
        rows.push((r, width.clone(), true));
    }
    for (row, d) in p.eq_lhs.iter().zip(&p.eq_rhs) {
        let (r, b) = substitute(row, d);
        rows.push((r, b, false));
    }
    let (std_cost, _) = substitute(&p.objective, &T::zero());

    let m = rows.len();
    let num_slack = rows.iter().filter(|r| r.2).count();
    // Artificial columns for rows without a usable slack basis.
    let needs_art: Vec<bool> = rows.iter().map(|(_, b, ineq)| !*ineq || b.is_negative()).collect();
    let num_art = needs_art.iter().filter(|&&x| x).count();
    let num_cols = std_cols + num_slack + num_art;
    let art_start = std_cols + num_slack;

    let mut tab_rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut slack_idx, mut art_idx) = (std_cols, art_start);
    for (i, (coeffs, b, ineq)) in rows.into_iter().enumerate() {
        let mut r = vec![T::zero(); num_cols + 1];
        for (k, v) in coeffs.into_iter().enumerate() {
            r[k] = v;
        }
        let mut slack_col = None;
        if ineq {
            r[slack_idx] = T::one();
            slack_col = Some(slack_idx);
            slack_idx += 1;
        }
        r[num_cols] = b.clone();
        if b.is_negative() {
            for v in r.iter_mut() {
                *v = -v.clone();
            }
        }
        if needs_art[i] {
            r[art_idx] = T::one();
            basis.push(art_idx);
            art_idx += 1;
        } else {
            basis.push(slack_col.expect("inequality row has a slack"));
        }
        tab_rows.push(r);
    }

    let eps = T::pivot_epsilon();
    let limit = 20_000 + 200 * (m + num_cols);
    let mut tab = Tableau { rows: tab_rows, basis, num_cols, eps: eps.clone(), iterations: 0, limit };

    // Phase 1: minimize the sum of artificials.
    if num_art > 0 {
        let mut cost = vec![T::zero(); num_cols + 1];
        for j in art_start..num_cols {
            cost[j] = T::one();
        }
        for i in 0..m {
            if tab.basis[i] >= art_start {
                for (c, v) in cost.iter_mut().zip(&tab.rows[i]) {
                    *c = c.clone() - v.clone();
                }
            }
        }
        let allowed = vec![true; num_cols];
        tab.run(&mut cost, &allowed)?;
        let infeasibility = -cost[num_cols].clone();
        let scale = tab.rows.iter().fold(T::one(), |acc, r| T::max_of(acc, r[num_cols].clone().abs()));
        if infeasibility > feas_tol.clone() * scale {
            return Ok(LpOutcome::bare(LpStatus::Infeasible));
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                let col = (0..art_start).filter(|&j| tab.rows[i][j].clone().abs() > eps).max_by(|&a, &b| {
                    tab.rows[i][a]
                        .clone()
                        .abs()
                        .partial_cmp(&tab.rows[i][b].clone().abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                match col {
                    Some(c) => {
                        tab.pivot(i, c, &mut cost);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase 2 on the true objective, artificials frozen out.
    let mut cost = vec![T::zero(); num_cols + 1];
    for (k, v) in std_cost.iter().enumerate() {
        cost[k] = v.clone();
    }
    for i in 0..tab.rows.len() {
        let cb = cost[tab.basis[i]].clone();
        if !cb.is_zero() {
            let row = tab.rows[i].clone();
            for (c, v) in cost.iter_mut().zip(&row) {
                *c = c.clone() - cb.clone() * v.clone();
            }
        }
    }
    let allowed: Vec<bool> = (0..num_cols).map(|j| j < art_start).collect();
    if let Phase::Unbounded = tab.run(&mut cost, &allowed)? {
        return Ok(LpOutcome::bare(LpStatus::Unbounded));
    }

    let mut std_x = vec![T::zero(); num_cols];
    for (i, &b) in tab.basis.iter().enumerate() {
        std_x[b] = tab.rows[i][num_cols].clone();
    }
    let x: Vec<T> = maps
        .iter()
        .map(|map| match map {
            VarMap::Shift { col, offset } => offset.clone() + std_x[*col].clone(),
            VarMap::Reflect { col, offset } => offset.clone() - std_x[*col].clone(),
            VarMap::Split { pos, neg } => std_x[*pos].clone() - std_x[*neg].clone(),
        })
        .collect();
    let violation = p.max_violation(&x);
    let allowed_violation = if T::EXACT { T::zero() } else { feas_tol.clone() * T::from_f64_lossy(1e3) };
    if violation > allowed_violation {
        return Err(LpError::Numerical(format!("solution violates constraints by {}", violation.to_f64_lossy())));
    }
    let value = dot(&p.objective, &x);
    Ok(LpOutcome { status: LpStatus::Optimal, solution: Some(x), objective_value: Some(value) })
}

/// Any point satisfying the constraints of `p`, or `Infeasible`.
pub fn feasible_point<T: Scalar>(p: &LpProblem<T>, feas_tol: T) -> Result<LpOutcome<T>, LpError> {
    solve_lp(&p.feasibility(), feas_tol)
}

/// Point of minimum ℓ₁ norm satisfying the constraints of `p` (the
/// objective of `p` is ignored). Auxiliary variables `t ≥ |x|` are appended
/// internally and stripped from the returned solution.
pub fn minimize_l1<T: Scalar>(p: &LpProblem<T>, feas_tol: T) -> Result<LpOutcome<T>, LpError> {
    p.check_shape()?;
    let n = p.num_vars();
    let widen = |row: &Vec<T>| {
        let mut r = row.clone();
        r.resize(2 * n, T::zero());
        r
    };
    let mut q = LpProblem::new(2 * n);
    q.objective = (0..2 * n).map(|j| if j < n { T::zero() } else { T::one() }).collect();
    q.ineq_lhs = p.ineq_lhs.iter().map(widen).collect();
    q.ineq_rhs = p.ineq_rhs.clone();
    q.eq_lhs = p.eq_lhs.iter().map(widen).collect();
    q.eq_rhs = p.eq_rhs.clone();
    q.lower[..n].clone_from_slice(&p.lower);
    q.upper[..n].clone_from_slice(&p.upper);
    for j in 0..n {
        for sign in [T::one(), -T::one()] {
            let mut r = vec![T::zero(); 2 * n];
            r[j] = sign;
            r[n + j] = -T::one();
            q.add_le(r, T::zero());
        }
    }
    let out = solve_lp(&q, feas_tol)?;
    Ok(match out.solution {
        Some(mut x) => {
            x.truncate(n);
            let value = dot(&p.objective, &x);
            LpOutcome { status: LpStatus::Optimal, solution: Some(x), objective_value: Some(value) }
        }
        None => out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn l1_minimal_point() {
        let mut p = LpProblem::new(2);
        p.add_ge(vec![1.0, 1.0], 2.0).add_le(vec![1.0, 0.0], 0.5);
        let x = minimize_l1(&p, tol()).unwrap().solution.unwrap();
        assert!((x[0].abs() + x[1].abs() - 2.0).abs() < 1e-12);
        assert!(x[0] <= 0.5 + 1e-12 && x[0] >= -1e-12);
    }

    fn tol() -> f64 {
        DEFAULT_FEAS_TOL
    }

    #[test]
    fn min_x_above_three() {
        let mut p = LpProblem::new(1).minimize(vec![1.0]);
        p.add_ge(vec![1.0], 3.0);
        let out = solve_lp(&p, tol()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.solution.unwrap()[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_infeasible() {
        let mut p = LpProblem::<f64>::new(1);
        p.add_le(vec![1.0], 0.0);
        p.add_ge(vec![1.0], 1.0);
        assert_eq!(solve_lp(&p, tol()).unwrap().status, LpStatus::Infeasible);
        assert_eq!(feasible_point(&p, tol()).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn empty_constraints_feasible() {
        let p = LpProblem::<f64>::new(3);
        let out = feasible_point(&p, tol()).unwrap();
        assert!(out.is_optimal());
        assert_eq!(out.solution.unwrap().len(), 3);
    }

    #[test]
    fn unbounded_detected() {
        let mut p = LpProblem::new(2).minimize(vec![-1.0, 0.0]);
        p.add_le(vec![0.0, 1.0], 1.0);
        assert_eq!(solve_lp(&p, tol()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18, x, y ≥ 0 → (2, 6), 36.
        let mut p = LpProblem::new(2).minimize(vec![-3.0, -5.0]);
        p.add_le(vec![1.0, 0.0], 4.0).add_le(vec![0.0, 2.0], 12.0).add_le(vec![3.0, 2.0], 18.0);
        p.set_bounds(0, Some(0.0), None).set_bounds(1, Some(0.0), None);
        let out = solve_lp(&p, tol()).unwrap();
        let x = out.solution.unwrap();
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
        assert!((out.objective_value.unwrap() + 36.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_boxes() {
        // min x - y, x + y = 1, 0 ≤ x ≤ 1, -2 ≤ y ≤ 0.5 → x = 0.5, y = 0.5.
        let mut p = LpProblem::new(2).minimize(vec![1.0, -1.0]);
        p.add_eq(vec![1.0, 1.0], 1.0);
        p.set_bounds(0, Some(0.0), Some(1.0)).set_bounds(1, Some(-2.0), Some(0.5));
        let x = solve_lp(&p, tol()).unwrap().solution.unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn upper_only_bound() {
        let mut p = LpProblem::new(1).minimize(vec![-1.0]);
        p.set_bounds(0, None, Some(2.5));
        let x = solve_lp(&p, tol()).unwrap().solution.unwrap();
        assert_eq!(x[0], 2.5);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut p = LpProblem::new(2).minimize(vec![1.0, 1.0]);
        p.add_eq(vec![1.0, -1.0], 0.0).add_eq(vec![2.0, -2.0], 0.0);
        p.add_ge(vec![1.0, 0.0], 1.0);
        let x = solve_lp(&p, tol()).unwrap().solution.unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_rational_solve() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let mut p = LpProblem::new(2).minimize(vec![r(-1, 1), r(-1, 1)]);
        p.add_le(vec![r(1, 1), r(2, 1)], r(4, 1)).add_le(vec![r(3, 1), r(1, 1)], r(6, 1));
        p.set_bounds(0, Some(r(0, 1)), None).set_bounds(1, Some(r(0, 1)), None);
        let out = solve_lp(&p, r(0, 1)).unwrap();
        assert_eq!(out.solution.unwrap(), vec![r(8, 5), r(6, 5)]);
        assert_eq!(out.objective_value.unwrap(), r(-14, 5));
    }

    #[test]
    fn shape_errors() {
        let mut p = LpProblem::<f64>::new(2);
        p.ineq_lhs.push(vec![1.0]);
        p.ineq_rhs.push(1.0);
        assert!(matches!(solve_lp(&p, tol()), Err(LpError::Shape(_))));
    }
}
