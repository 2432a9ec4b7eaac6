//! JSON model documents.
//!
//! ```json
//! {
//!   "num_states": 2, "num_actions": 2, "discount": 0.5,
//!   "transitions": [[[1, 0], [0, 1]], [[0.5, 0.5], [0, 1]]],
//!   "observations": {"discrete": [[0.9, 0.1], [0.2, 0.8]]},
//!   "costs": [[1, 2], [3, 0]]
//! }
//! ```
//!
//! `observations` is one kernel shared by every action or an array with one
//! kernel per action. A kernel is `{"discrete": matrix}` or
//! `{"gaussian": {"sigma": s, "bins": n}}` (optionally `"edges": [...]`
//! instead of `bins`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

use super::gaussian::{GaussianKernel, DEFAULT_BINS};
use super::{ModelError, ObservationKernel, PomdpModel, ValidationReport};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Structure(String),
    #[error("model failed validation:\n{0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    num_states: usize,
    num_actions: usize,
    discount: f64,
    transitions: Vec<Vec<Vec<f64>>>,
    observations: ObservationSpec,
    costs: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entry_resolution: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ObservationSpec {
    Shared(KernelSpec),
    PerAction(Vec<KernelSpec>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum KernelSpec {
    Discrete(Vec<Vec<f64>>),
    Gaussian(GaussianSpec),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianSpec {
    sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<f64>>,
}

fn matrix(rows: Vec<Vec<f64>>, what: &str) -> Result<Matrix<f64>, DocumentError> {
    Matrix::from_rows(rows).ok_or_else(|| DocumentError::Structure(format!("{what} has ragged rows")))
}

fn kernel(spec: KernelSpec, num_states: usize) -> Result<ObservationKernel<f64>, DocumentError> {
    match spec {
        KernelSpec::Discrete(rows) => Ok(ObservationKernel::Discrete(matrix(rows, "observation matrix")?)),
        KernelSpec::Gaussian(g) => {
            let built = match (g.edges, g.bins) {
                (Some(edges), _) => GaussianKernel::with_edges(num_states, g.sigma, edges),
                (None, bins) => GaussianKernel::new(num_states, g.sigma, bins.unwrap_or(DEFAULT_BINS)),
            };
            built.map(ObservationKernel::Gaussian).map_err(|e: ModelError| DocumentError::Structure(e.to_string()))
        }
    }
}

/// Parses and validates a JSON model document.
pub fn load_model(bytes: &[u8]) -> Result<PomdpModel<f64>, DocumentError> {
    let doc: ModelDocument = serde_json::from_slice(bytes)?;
    if doc.transitions.len() != doc.num_actions {
        return Err(DocumentError::Structure(format!(
            "num_actions = {} but {} transition matrices given",
            doc.num_actions,
            doc.transitions.len()
        )));
    }
    let transitions = doc
        .transitions
        .into_iter()
        .enumerate()
        .map(|(a, m)| matrix(m, &format!("transitions[{a}]")))
        .collect::<Result<Vec<_>, _>>()?;
    if transitions.iter().any(|p| p.rows() != doc.num_states) {
        return Err(DocumentError::Structure(format!(
            "transition matrices must have num_states = {} rows",
            doc.num_states
        )));
    }
    let kernels = match doc.observations {
        ObservationSpec::Shared(k) => vec![kernel(k, doc.num_states)?],
        ObservationSpec::PerAction(ks) => {
            ks.into_iter().map(|k| kernel(k, doc.num_states)).collect::<Result<Vec<_>, _>>()?
        }
    };
    let costs = matrix(doc.costs, "costs")?;
    let model = PomdpModel::from_parts_unchecked(transitions, kernels, costs, doc.discount)
        .with_entry_resolution(doc.entry_resolution);
    let report = model.validate(1e-6);
    if !report.is_empty() {
        return Err(DocumentError::Invalid(report));
    }
    Ok(model)
}

fn kernel_spec(k: &ObservationKernel<f64>) -> KernelSpec {
    match k {
        ObservationKernel::Discrete(m) => KernelSpec::Discrete(m.to_rows()),
        ObservationKernel::Gaussian(g) => {
            KernelSpec::Gaussian(GaussianSpec { sigma: g.sigma(), bins: None, edges: Some(g.edges().to_vec()) })
        }
    }
}

/// Serializes a model as a JSON document accepted by [`load_model`].
pub fn model_to_json(model: &PomdpModel<f64>) -> String {
    let kernels = model.observations();
    let observations = if kernels.windows(2).all(|w| w[0] == w[1]) {
        ObservationSpec::Shared(kernel_spec(&kernels[0]))
    } else {
        ObservationSpec::PerAction(kernels.iter().map(kernel_spec).collect())
    };
    let doc = ModelDocument {
        num_states: model.num_states(),
        num_actions: model.num_actions(),
        discount: *model.discount(),
        transitions: model.transitions().iter().map(Matrix::to_rows).collect(),
        observations,
        costs: model.costs().to_rows(),
        entry_resolution: model.entry_resolution(),
    };
    serde_json::to_string_pretty(&doc).expect("document serializes")
}
