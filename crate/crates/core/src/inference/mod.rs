//! Posterior probability of the root trait given (partially) observed
//! indicators.
//!
//! Three routes are provided:
//! - [`exact_posterior`]: upward message passing over the tree using the Beta
//!   means of each edge. Each conditional probability governs a single
//!   Bernoulli draw, so integrating the Beta out leaves exactly its mean.
//! - [`enumerate_posterior`]: brute-force sum over every joint latent state.
//!   Used as a reference for the message passer.
//! - [`sample_posterior`]: Gibbs sampler over the full hierarchy (binary
//!   nodes, root prior probability, every edge's conditional probabilities).

mod diagnostics;
mod enumerate;
mod exact;
mod gibbs;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diagnostics::split_rhat;
pub use enumerate::{enumerate_posterior, MAX_ENUMERATED_LATENTS};
pub use exact::{exact_posterior, likelihood_pair};
pub use gibbs::{sample_posterior, SamplerSettings, RHAT_THRESHOLD};

use crate::model::{CompiledTree, NodeKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("`{0}` is not an indicator of this model")]
    UnknownIndicator(String),
    #[error("{count} latent nodes exceeds the enumeration limit of {max}")]
    TooManyLatents { count: usize, max: usize },
    #[error("invalid sampler settings: {0}")]
    InvalidSampler(String),
    #[error("invalid prior Beta({alpha}, {beta}): parameters must be positive and finite")]
    InvalidPrior { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observation {
    Present,
    Absent,
    Missing,
}

impl Observation {
    pub fn from_bool(present: bool) -> Self {
        if present {
            Observation::Present
        } else {
            Observation::Absent
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Observation::Present => Some(true),
            Observation::Absent => Some(false),
            Observation::Missing => None,
        }
    }
}

/// Indicator id → observation. Ids not present in the map are missing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorAssignment {
    values: BTreeMap<String, Observation>,
}

impl IndicatorAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, id: impl Into<String>, obs: Observation) -> &mut Self {
        self.values.insert(id.into(), obs);
        self
    }

    pub fn with(mut self, id: impl Into<String>, obs: Observation) -> Self {
        self.set(id, obs);
        self
    }

    pub fn get(&self, id: &str) -> Observation {
        self.values.get(id).copied().unwrap_or(Observation::Missing)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Observation)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Keep only the entries that name indicators of `tree`.
    pub fn restricted_to(&self, tree: &CompiledTree) -> Self {
        let values = self
            .values
            .iter()
            .filter(|(id, _)| {
                tree.index_of(id)
                    .is_some_and(|i| tree.node(i).kind == NodeKind::Indicator)
            })
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        Self { values }
    }

    /// Per-node observation vector aligned with `tree.nodes()`; latent nodes
    /// are `Missing`.
    pub(crate) fn resolve(&self, tree: &CompiledTree) -> Result<Vec<Observation>, InferenceError> {
        let mut obs = vec![Observation::Missing; tree.nodes().len()];
        for (id, value) in &self.values {
            match tree.index_of(id) {
                Some(i) if tree.is_indicator(i) => obs[i] = *value,
                _ => return Err(InferenceError::UnknownIndicator(id.clone())),
            }
        }
        Ok(obs)
    }
}

impl FromIterator<(String, Observation)> for IndicatorAssignment {
    fn from_iter<T: IntoIterator<Item = (String, Observation)>>(iter: T) -> Self {
        Self {
            values: iter.into_iter().collect(),
        }
    }
}

/// Beta prior over the root trait's prior probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub label: String,
    pub alpha: f64,
    pub beta: f64,
}

impl PriorConfig {
    pub fn new(label: impl Into<String>, alpha: f64, beta: f64) -> Result<Self, InferenceError> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(InferenceError::InvalidPrior { alpha, beta });
        }
        Ok(Self {
            label: label.into(),
            alpha,
            beta,
        })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEstimate {
    pub probability: f64,
    pub method: Method,
    /// Retained draws across all chains.
    pub samples: Option<usize>,
    pub rhat: Option<f64>,
    pub seed: Option<u64>,
}

impl PosteriorEstimate {
    pub(crate) fn exact(probability: f64) -> Self {
        Self {
            probability,
            method: Method::Exact,
            samples: None,
            rhat: None,
            seed: None,
        }
    }

    /// False when the split-chain diagnostic exceeds [`RHAT_THRESHOLD`].
    pub fn converged(&self) -> bool {
        self.rhat.is_none_or(|r| r <= RHAT_THRESHOLD)
    }
}
