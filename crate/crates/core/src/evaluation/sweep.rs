use std::fmt::Write as _;

use serde::Serialize;

use super::loss::{percent_loss, LossEstimate, Pi0Rule, DEFAULT_MAX_ATTEMPTS};
use super::oracle::{GridOracle, PolicyOracle};
use super::simulate::{OutsideAction, RolloutConfig};
use super::volume::{default_volume_samples, estimate_overlap_volume, VolumeEstimate};
use super::{derive_seed, EvaluationError};
use crate::assumptions::check_all;
use crate::bounds::optimized_region;
use crate::model::{BeliefState, BuiltinExample, PomdpModel};

pub const DISCOUNT_LADDER: [f64; 6] = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

const PURPOSE_VOLUME: u64 = 1;
const PURPOSE_L1: u64 = 2;
const PURPOSE_L2: u64 = 3;

/// Budgets and knobs shared by every row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Protocol {
    pub runs: usize,
    pub horizon: usize,
    /// `None` picks [`default_volume_samples`].
    pub volume_samples: Option<usize>,
    pub seed: u64,
    /// Grid VI resolution for the `μ*` oracle; `None` picks the default.
    pub grid_resolution: Option<usize>,
    pub eps_strict: f64,
    /// Check the oracle against the pinned action at volume samples.
    pub verify_oracle: bool,
    /// State for the fixed-prior loss `L₁`; `None` skips it.
    pub fixed_prior: Option<usize>,
    /// Compute `L₂` with initial beliefs sampled outside the region.
    pub sampled_prior: bool,
    /// Action of `μ̃` outside the region.
    pub outside: OutsideAction,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            runs: 1000,
            horizon: 100,
            volume_samples: None,
            seed: 0,
            grid_resolution: None,
            eps_strict: crate::bounds::DEFAULT_EPS_STRICT,
            verify_oracle: false,
            fixed_prior: None,
            sampled_prior: true,
            outside: OutsideAction::default(),
        }
    }
}

impl Protocol {
    /// Default protocol with the example's fixed prior.
    pub fn for_example(example: &BuiltinExample) -> Self {
        Protocol { fixed_prior: Some(example.fixed_prior_state()), ..Protocol::default() }
    }

    fn rollout(&self, rho: f64, purpose: u64) -> RolloutConfig {
        RolloutConfig { horizon: self.horizon, runs: self.runs, seed: derive_seed(self.seed, rho.to_bits(), purpose) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub rho: f64,
    pub volume: Option<VolumeEstimate>,
    pub l1: Option<LossEstimate>,
    pub l2: Option<LossEstimate>,
    /// Failures and not-applicable outcomes, in order of occurrence.
    pub notes: Vec<String>,
}

impl SweepRow {
    fn empty(rho: f64) -> Self {
        SweepRow { rho, volume: None, l1: None, l2: None, notes: Vec::new() }
    }

    pub fn vol_percent(&self) -> Option<f64> {
        self.volume.as_ref().map(|v| 100.0 * v.fraction)
    }

    pub fn l1_percent(&self) -> Option<f64> {
        self.l1.as_ref().map(|l| 100.0 * l.loss)
    }

    pub fn l2_percent(&self) -> Option<f64> {
        self.l2.as_ref().map(|l| 100.0 * l.loss)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub model: String,
    pub protocol: Protocol,
    pub rows: Vec<SweepRow>,
}

fn sweep_row(base: &PomdpModel<f64>, rho: f64, protocol: &Protocol) -> SweepRow {
    let mut row = SweepRow::empty(rho);
    let model = base.clone().with_discount(rho);
    let report = match check_all(&model) {
        Ok(r) => r,
        Err(e) => {
            row.notes.push(format!("assumptions: {e}"));
            return row;
        }
    };
    if !report.overall {
        row.notes.push(EvaluationError::Assumptions(report.failed().join(",")).to_string());
        return row;
    }
    let region = match optimized_region(&model, protocol.eps_strict) {
        Ok(r) => r,
        Err(e) => {
            row.notes.push(format!("bounds: {e}"));
            return row;
        }
    };
    let needs_oracle = protocol.verify_oracle || protocol.fixed_prior.is_some() || protocol.sampled_prior;
    let oracle = if needs_oracle {
        match GridOracle::solve(&model, protocol.grid_resolution) {
            Ok(o) => Some(o),
            Err(e) => {
                row.notes.push(format!("oracle: {e}"));
                None
            }
        }
    } else {
        None
    };
    let samples = protocol.volume_samples.unwrap_or_else(|| default_volume_samples(model.num_states()));
    let check: Option<&dyn PolicyOracle> = if protocol.verify_oracle { oracle.as_ref().map(|o| o as _) } else { None };
    match estimate_overlap_volume(
        &model,
        &region,
        check,
        samples,
        derive_seed(protocol.seed, rho.to_bits(), PURPOSE_VOLUME),
    ) {
        Ok(v) => row.volume = Some(v),
        Err(e) => row.notes.push(format!("volume: {e}")),
    }
    let Some(oracle) = oracle else { return row };
    if let Some(state) = protocol.fixed_prior {
        if state >= model.num_states() {
            row.notes.push(format!("L1: prior state {state} out of range"));
        } else {
            let rule = Pi0Rule::Fixed(BeliefState::unit(model.num_states(), state));
            match percent_loss(&model, &region, &oracle, &rule, protocol.outside, &protocol.rollout(rho, PURPOSE_L1)) {
                Ok(l) => row.l1 = Some(l),
                Err(e) => row.notes.push(format!("L1: {e}")),
            }
        }
    }
    if protocol.sampled_prior {
        let coverage = row.volume.as_ref().map(|v| v.fraction);
        let rule = Pi0Rule::UniformOutside { max_attempts: DEFAULT_MAX_ATTEMPTS, coverage };
        match percent_loss(&model, &region, &oracle, &rule, protocol.outside, &protocol.rollout(rho, PURPOSE_L2)) {
            Ok(l) => row.l2 = Some(l),
            Err(e) => row.notes.push(format!("L2: {e}")),
        }
    }
    row
}

/// One row per discount factor. Assumptions, bounds and the oracle are
/// recomputed per row; a failing row is recorded and the sweep continues.
pub fn sweep_discount(base: &PomdpModel<f64>, label: &str, rhos: &[f64], protocol: &Protocol) -> SweepTable {
    SweepTable {
        model: label.to_string(),
        protocol: protocol.clone(),
        rows: rhos.iter().map(|&rho| sweep_row(base, rho, protocol)).collect(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

/// `rho,vol_S,L1,L2`, all metrics in percent, `NA` where unavailable.
pub fn write_csv(table: &SweepTable) -> String {
    let mut out = String::from("rho,vol_S,L1,L2\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.rho,
            fmt_opt(r.vol_percent()),
            fmt_opt(r.l1_percent()),
            fmt_opt(r.l2_percent())
        );
    }
    out
}

/// The `n × n` lattice on `[0, ½]²` restricted to `θ₁ ≤ θ₂`.
pub fn example4_theta_grid(n: usize) -> Vec<(f64, f64)> {
    if n <= 1 {
        return vec![(0.0, 0.0)];
    }
    let step = |k: usize| 0.5 * k as f64 / (n - 1) as f64;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            out.push((step(i), step(j)));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Example4Cell {
    pub theta1: f64,
    pub theta2: f64,
    pub table: SweepTable,
}

/// Best and worst values over the θ grid at one discount factor. Best is the
/// largest volume and smallest loss.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Example4Range {
    pub rho: f64,
    pub vol_best: Option<f64>,
    pub vol_worst: Option<f64>,
    pub l1_best: Option<f64>,
    pub l1_worst: Option<f64>,
    pub l2_best: Option<f64>,
    pub l2_worst: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Example4Sweep {
    pub cells: Vec<Example4Cell>,
    pub ranges: Vec<Example4Range>,
    /// Cells that could not be built.
    pub failures: Vec<String>,
}

fn min_max(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, Option<f64>) {
    values.flatten().fold((None, None), |(lo, hi), v| {
        (Some(lo.map_or(v, |l: f64| l.min(v))), Some(hi.map_or(v, |h: f64| h.max(v))))
    })
}

/// Discount sweep at every θ cell, summarized per discount factor. Each cell
/// derives its own seed from the protocol seed and θ.
pub fn sweep_example4(thetas: &[(f64, f64)], rhos: &[f64], protocol: &Protocol) -> Example4Sweep {
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for &(t1, t2) in thetas {
        let example = BuiltinExample::Four { theta1: t1, theta2: t2 };
        match example.model::<f64>() {
            Ok(m) => {
                let p = Protocol { seed: derive_seed(protocol.seed, t1.to_bits(), t2.to_bits()), ..protocol.clone() };
                cells.push(Example4Cell {
                    theta1: t1,
                    theta2: t2,
                    table: sweep_discount(&m, &example.label(), rhos, &p),
                });
            }
            Err(e) => failures.push(format!("theta ({t1}, {t2}): {e}")),
        }
    }
    let ranges = rhos
        .iter()
        .enumerate()
        .map(|(k, &rho)| {
            let rows = || cells.iter().map(move |c| &c.table.rows[k]);
            let (vol_worst, vol_best) = min_max(rows().map(SweepRow::vol_percent));
            let (l1_best, l1_worst) = min_max(rows().map(SweepRow::l1_percent));
            let (l2_best, l2_worst) = min_max(rows().map(SweepRow::l2_percent));
            Example4Range { rho, vol_best, vol_worst, l1_best, l1_worst, l2_best, l2_worst }
        })
        .collect();
    Example4Sweep { cells, ranges, failures }
}

impl Example4Sweep {
    /// `theta1,theta2,rho,vol_S,L1,L2`, one line per cell and discount factor.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta1,theta2,rho,vol_S,L1,L2\n");
        for c in &self.cells {
            for r in &c.table.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.theta1,
                    c.theta2,
                    r.rho,
                    fmt_opt(r.vol_percent()),
                    fmt_opt(r.l1_percent()),
                    fmt_opt(r.l2_percent())
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> Protocol {
        Protocol {
            runs: 40,
            horizon: 30,
            volume_samples: Some(20_000),
            grid_resolution: Some(30),
            fixed_prior: Some(2),
            ..Protocol::default()
        }
    }

    #[test]
    fn single_rho_gives_one_row() {
        let m = BuiltinExample::One.model::<f64>().unwrap();
        let t = sweep_discount(&m, "1", &[0.4], &quick());
        assert_eq!(t.rows.len(), 1);
        let r = &t.rows[0];
        assert!(r.notes.is_empty(), "{:?}", r.notes);
        assert!((r.vol_percent().unwrap() - 95.3).abs() < 1.5);
        let csv = write_csv(&t);
        assert!(csv.starts_with("rho,vol_S,L1,L2\n0.4,"));
    }

    #[test]
    fn theta_grid_is_admissible() {
        let g = example4_theta_grid(5);
        assert_eq!(g.len(), 15);
        assert!(g.iter().all(|&(a, b)| BuiltinExample::is_admissible_theta(a, b)));
    }

    #[test]
    fn one_cell_best_equals_worst() {
        let p = Protocol { fixed_prior: Some(0), sampled_prior: false, ..quick() };
        let s = sweep_example4(&[(0.1, 0.2)], &[0.5], &p);
        let r = &s.ranges[0];
        assert_eq!(r.vol_best, r.vol_worst);
        assert_eq!(r.l1_best, r.l1_worst);
        assert!(s.to_csv().lines().nth(1).unwrap().starts_with("0.1,0.2,0.5,"));
    }
}
