//! Checks of the five structural assumptions behind the myopic bounds.
//!
//! - A1 / A2: some offset makes every transformed cost strictly increasing
//!   / decreasing (LP feasibility; the certificate is the minimum-ℓ₁ offset).
//! - A3: every transition matrix and discrete observation kernel is TP2.
//! - A4: `γ_mn + γ_nm ≥ 0` for every `(j, a, y, m, n)`.
//! - A5: the observation distribution of action `a + 1` first-order
//!   dominates that of action `a` from every start state.
//!
//! All indices in witnesses are 0-based.

use serde::Serialize;

use crate::bounds::{minimal_offset, BoundKind, DEFAULT_EPS_STRICT};
use crate::lp::LpError;
use crate::matrix::Matrix;
use crate::model::{ObservationKernel, PomdpModel};
use crate::orders::{is_tp2, OrderCheckResult, SlackScan};
use crate::scalar::Scalar;

pub const DEFAULT_CHECK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("index out of range: {0}")]
pub struct IndexError(pub String);

/// Tolerances used by [`check_all`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub eps_strict: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
}

impl Tolerances {
    /// Base tolerance `tol`, widened for models whose entries are only known
    /// to `±resolution`: a 2×2 minor moves by at most `4r`, a γ sum by `16r`
    /// and a cumulative observation sum by `2r(X + Y)` to first order.
    pub fn for_model<T: Scalar>(model: &PomdpModel<T>, eps_strict: f64, tol: f64) -> Self {
        let r = model.entry_resolution().unwrap_or(0.0);
        let (x, y) = (model.num_states() as f64, model.num_observations() as f64);
        Tolerances { eps_strict, a3: tol + 4.0 * r, a4: tol + 16.0 * r, a5: tol + 2.0 * r * (x + y) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRole {
    Transition,
    Observation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelCheck<T> {
    pub role: KernelRole,
    pub action: usize,
    /// Gaussian location kernels are TP2 in closed form; nothing is scanned.
    pub analytic: bool,
    pub result: OrderCheckResult<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanCheck<T> {
    pub holds: bool,
    pub margin: T,
    pub witness: Option<Vec<usize>>,
    /// Computed on a quantization of a continuous observation space.
    pub grid_approximate: bool,
}

impl<T: Scalar> ScanCheck<T> {
    fn from_result(r: OrderCheckResult<T>, grid_approximate: bool) -> Self {
        ScanCheck { holds: r.holds, margin: r.margin, witness: r.witness, grid_approximate }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport<T> {
    pub a1: Option<Vec<T>>,
    pub a2: Option<Vec<T>>,
    pub a3: Vec<KernelCheck<T>>,
    pub a4: ScanCheck<T>,
    pub a5: ScanCheck<T>,
    pub tolerances: Tolerances,
    pub overall: bool,
}

impl<T: Scalar> AssumptionReport<T> {
    pub fn a3_holds(&self) -> bool {
        self.a3.iter().all(|k| k.result.holds)
    }

    /// Names of the assumptions that fail.
    pub fn failed(&self) -> Vec<&'static str> {
        let flags = [
            ("A1", self.a1.is_some()),
            ("A2", self.a2.is_some()),
            ("A3", self.a3_holds()),
            ("A4", self.a4.holds),
            ("A5", self.a5.holds),
        ];
        flags.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect()
    }
}

pub fn check_a1<T: Scalar>(model: &PomdpModel<T>, eps_strict: T) -> Result<Option<Vec<T>>, LpError> {
    minimal_offset(model, BoundKind::Upper, eps_strict)
}

pub fn check_a2<T: Scalar>(model: &PomdpModel<T>, eps_strict: T) -> Result<Option<Vec<T>>, LpError> {
    minimal_offset(model, BoundKind::Lower, eps_strict)
}

pub fn check_a3<T: Scalar>(model: &PomdpModel<T>, tol: T) -> Vec<KernelCheck<T>> {
    let mut out = Vec::new();
    for a in 0..model.num_actions() {
        out.push(KernelCheck {
            role: KernelRole::Transition,
            action: a,
            analytic: false,
            result: is_tp2(model.transition(a), tol.clone()),
        });
    }
    for a in 0..model.num_actions() {
        let (analytic, result) = match model.observation(a) {
            ObservationKernel::Discrete(b) => (false, is_tp2(b, tol.clone())),
            ObservationKernel::Gaussian(_) => {
                (true, OrderCheckResult { holds: true, witness: None, margin: T::zero() })
            }
        };
        out.push(KernelCheck { role: KernelRole::Observation, action: a, analytic, result });
    }
    out
}

/// `γ_mn = b^a_{j,y} b^{a+1}_{j+1,y} p^a_{m,j} p^{a+1}_{n,j+1}
///        − b^a_{j+1,y} b^{a+1}_{j,y} p^a_{m,j+1} p^{a+1}_{n,j}`.
pub fn gamma_matrix<T: Scalar>(model: &PomdpModel<T>, j: usize, a: usize, y: usize) -> Result<Matrix<T>, IndexError> {
    let x = model.num_states();
    if j + 1 >= x {
        return Err(IndexError(format!("j = {j} needs j + 1 < {x}")));
    }
    if a + 1 >= model.num_actions() {
        return Err(IndexError(format!("a = {a} needs a + 1 < {}", model.num_actions())));
    }
    if y >= model.num_observations() {
        return Err(IndexError(format!("y = {y} needs y < {}", model.num_observations())));
    }
    Ok(gamma_unchecked(model, j, a, y))
}

fn gamma_unchecked<T: Scalar>(model: &PomdpModel<T>, j: usize, a: usize, y: usize) -> Matrix<T> {
    let x = model.num_states();
    let (b0, b1) = (model.observation(a).planning_matrix(), model.observation(a + 1).planning_matrix());
    let (p0, p1) = (model.transition(a), model.transition(a + 1));
    let w1 = b0[(j, y)].clone() * b1[(j + 1, y)].clone();
    let w2 = b0[(j + 1, y)].clone() * b1[(j, y)].clone();
    let mut g = Matrix::<T>::zeros(x, x);
    for m in 0..x {
        for n in 0..x {
            g[(m, n)] = w1.clone() * p0[(m, j)].clone() * p1[(n, j + 1)].clone()
                - w2.clone() * p0[(m, j + 1)].clone() * p1[(n, j)].clone();
        }
    }
    g
}

/// Scans `(j, a, y, m ≤ n)` in lexicographic order; witness is `[j, a, y, m, n]`.
pub fn check_a4<T: Scalar>(model: &PomdpModel<T>, tol: T) -> ScanCheck<T> {
    let x = model.num_states();
    let mut scan = SlackScan::new(tol);
    for j in 0..x.saturating_sub(1) {
        for a in 0..model.num_actions().saturating_sub(1) {
            for y in 0..model.num_observations() {
                let g = gamma_unchecked(model, j, a, y);
                for m in 0..x {
                    for n in m..x {
                        scan.push(g[(m, n)].clone() + g[(n, m)].clone(), || vec![j, a, y, m, n]);
                    }
                }
            }
        }
    }
    ScanCheck::from_result(scan.finish(), model.has_gaussian_observations())
}

/// `Σ_{y ≤ ȳ} Σ_j [p^a_ij b^a_jy − p^{a+1}_ij b^{a+1}_jy] ≥ 0` for every
/// start state `i`, `ȳ < Y − 1` and `a`; witness is `[i, ȳ, a]`.
pub fn check_a5<T: Scalar>(model: &PomdpModel<T>, tol: T) -> ScanCheck<T> {
    let x = model.num_states();
    let ny = model.num_observations();
    let joint: Vec<Matrix<T>> =
        (0..model.num_actions()).map(|a| model.transition(a).matmul(model.observation(a).planning_matrix())).collect();
    let mut scan = SlackScan::new(tol);
    for i in 0..x {
        // cums[a][ȳ] = Σ_{y ≤ ȳ} (joint_a − joint_{a+1})[i, y]
        let cums: Vec<Vec<T>> = (0..model.num_actions().saturating_sub(1))
            .map(|a| {
                let mut cum = T::zero();
                (0..ny.saturating_sub(1))
                    .map(|y| {
                        cum = cum.clone() + joint[a][(i, y)].clone() - joint[a + 1][(i, y)].clone();
                        cum.clone()
                    })
                    .collect()
            })
            .collect();
        for yb in 0..ny.saturating_sub(1) {
            for (a, c) in cums.iter().enumerate() {
                scan.push(c[yb].clone(), || vec![i, yb, a]);
            }
        }
    }
    ScanCheck::from_result(scan.finish(), model.has_gaussian_observations())
}

/// Runs every check with the default tolerances, widened by the model's
/// entry resolution.
pub fn check_all<T: Scalar>(model: &PomdpModel<T>) -> Result<AssumptionReport<T>, LpError> {
    check_all_with(model, DEFAULT_EPS_STRICT, DEFAULT_CHECK_TOLERANCE)
}

pub fn check_all_with<T: Scalar>(
    model: &PomdpModel<T>,
    eps_strict: f64,
    tol: f64,
) -> Result<AssumptionReport<T>, LpError> {
    let tolerances = Tolerances::for_model(model, eps_strict, tol);
    let eps = T::from_f64_lossy(eps_strict);
    let a1 = check_a1(model, eps.clone())?;
    let a2 = check_a2(model, eps)?;
    let a3 = check_a3(model, T::from_f64_lossy(tolerances.a3));
    let a4 = check_a4(model, T::from_f64_lossy(tolerances.a4));
    let a5 = check_a5(model, T::from_f64_lossy(tolerances.a5));
    let mut report = AssumptionReport { a1, a2, a3, a4, a5, tolerances, overall: false };
    report.overall = report.failed().is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::transformed_costs;
    use crate::model::{example4_p2, BuiltinExample};

    fn tol() -> f64 {
        DEFAULT_CHECK_TOLERANCE
    }

    fn one_action(costs: &[f64]) -> PomdpModel<f64> {
        PomdpModel::new(
            vec![Matrix::identity(2)],
            vec![ObservationKernel::Discrete(Matrix::identity(2))],
            Matrix::from_f64_rows(&[&[costs[0]], &[costs[1]]]),
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn increasing_costs_need_no_offset() {
        let m = one_action(&[0.0, 1.0]);
        assert_eq!(check_a1(&m, DEFAULT_EPS_STRICT).unwrap(), Some(vec![0.0, 0.0]));
    }

    #[test]
    fn decreasing_costs_need_no_lower_offset() {
        let m = one_action(&[1.0, 0.0]);
        assert_eq!(check_a2(&m, DEFAULT_EPS_STRICT).unwrap(), Some(vec![0.0, 0.0]));
    }

    #[test]
    fn single_inequality_offset() {
        // 0.5 (f₂ − f₁) − 1 ≥ ε
        let m = one_action(&[1.0, 0.0]);
        let f = check_a1(&m, DEFAULT_EPS_STRICT).unwrap().unwrap();
        assert!(0.5 * (f[1] - f[0]) - 1.0 >= DEFAULT_EPS_STRICT - 1e-9);
        let m = one_action(&[0.0, 1.0]);
        let f = check_a2(&m, DEFAULT_EPS_STRICT).unwrap().unwrap();
        assert!(0.5 * (f[0] - f[1]) - 1.0 >= DEFAULT_EPS_STRICT - 1e-9);
    }

    #[test]
    fn example1_certificates_satisfy_margins() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        for (kind, f) in [
            (BoundKind::Upper, check_a1(&m, DEFAULT_EPS_STRICT).unwrap()),
            (BoundKind::Lower, check_a2(&m, DEFAULT_EPS_STRICT).unwrap()),
        ] {
            let f = f.expect("feasible");
            let t = transformed_costs(&m, &f, kind);
            assert!(t.monotonicity_margin().unwrap() >= DEFAULT_EPS_STRICT - 1e-9);
        }
    }

    #[test]
    fn small_tp2_cases() {
        let flat = Matrix::from_f64_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(is_tp2(&flat, tol()).holds);
        let bsc = Matrix::from_f64_rows(&[&[0.4, 0.6], &[0.6, 0.4]]);
        let r = is_tp2(&bsc, tol());
        assert!(!r.holds);
        assert!((r.margin + 0.2).abs() < 1e-15);
    }

    #[test]
    fn example4_transition_is_tp2() {
        let p = example4_p2(0.2, 0.3);
        assert!(is_tp2(&p, tol()).holds);
    }

    #[test]
    fn identical_actions_cancel() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let p = m.transition(1).clone();
        let b = m.observation(1).clone();
        let m = m.with_transitions(vec![p.clone(), p]).with_observations(vec![b.clone(), b]);
        for j in 0..2 {
            for y in 0..3 {
                let g = gamma_matrix(&m, j, 0, y).unwrap();
                for i in 0..3 {
                    for k in 0..3 {
                        assert!((g[(i, k)] + g[(k, i)]).abs() < 1e-15);
                    }
                }
            }
        }
        let a4 = check_a4(&m, tol());
        assert!(a4.holds);
        assert!(a4.margin.abs() < 1e-15);
        let a5 = check_a5(&m, tol());
        assert!(a5.holds);
        assert!(a5.margin.abs() < 1e-15);
    }

    #[test]
    fn gamma_entries_by_formula() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let g = gamma_matrix(&m, 0, 0, 0).unwrap();
        let (p1, p2) = (m.transition(0), m.transition(1));
        let (b1, b2) = (m.observation(0).planning_matrix(), m.observation(1).planning_matrix());
        for i in 0..3 {
            for k in 0..3 {
                let want = b1[(0, 0)] * b2[(1, 0)] * p1[(i, 0)] * p2[(k, 1)]
                    - b1[(1, 0)] * b2[(0, 0)] * p1[(i, 1)] * p2[(k, 0)];
                assert_eq!(g[(i, k)], want);
            }
        }
        assert!(gamma_matrix(&m, 2, 0, 0).is_err());
        assert!(gamma_matrix(&m, 0, 1, 0).is_err());
        assert!(gamma_matrix(&m, 0, 0, 3).is_err());
    }

    #[test]
    fn zero_observation_rows_give_zero_gamma() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let b = Matrix::from_f64_rows(&[&[0.0, 0.5, 0.5], &[0.0, 0.5, 0.5], &[0.2, 0.4, 0.4]]);
        let m = m.with_observations(vec![ObservationKernel::Discrete(b.clone()), ObservationKernel::Discrete(b)]);
        let g = gamma_matrix(&m, 0, 0, 0).unwrap();
        assert!(g.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn builtins_pass_everything() {
        for ex in [BuiltinExample::One, BuiltinExample::TwoDiscrete, BuiltinExample::TwoGaussian, BuiltinExample::Three]
        {
            let r = check_all(&ex.model::<f64>().unwrap()).unwrap();
            assert!(r.overall, "{}: {:?}", ex.label(), r.failed());
        }
    }

    #[test]
    fn a5_mutation_has_witness() {
        // Shift action 2's observation mass toward low symbols.
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let b2 = m.observation(1).planning_matrix().clone();
        let shifted = Matrix::from_rows(
            (0..3).map(|i| vec![b2[(i, 0)] + b2[(i, 1)], b2[(i, 2)] * 0.5, b2[(i, 2)] * 0.5]).collect(),
        )
        .unwrap();
        let b1 = m.observation(0).clone();
        let m = m.with_observations(vec![b1, ObservationKernel::Discrete(shifted)]);
        let r = check_a5(&m, tol());
        assert!(!r.holds);
        assert_eq!(r.witness.as_ref().map(Vec::len), Some(3));
    }

    #[test]
    fn joint_column_swap_trips_only_a3() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let swapped: Vec<_> = m
            .observations()
            .iter()
            .map(|k| {
                let b = k.planning_matrix();
                ObservationKernel::Discrete(
                    Matrix::from_rows((0..3).map(|i| vec![b[(i, 0)], b[(i, 2)], b[(i, 1)]]).collect()).unwrap(),
                )
            })
            .collect();
        let r = check_all(&m.with_observations(swapped)).unwrap();
        assert_eq!(r.failed(), vec!["A3"]);
    }
}
