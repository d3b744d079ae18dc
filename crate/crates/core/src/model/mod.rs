//! Stance/feature/indicator specifications and their compilation into
//! Beta-parameterized hierarchies.

mod catalog;
mod compile;
mod conditionals;
mod tree;

use thiserror::Error;

pub use catalog::{
    Catalog, CatalogEntry, FeatureLink, LinkDefaults, LinkLevels, StanceSpec, TraitEntry,
    CATALOG_SCHEMA, STANCE_SCHEMA,
};
pub use compile::{compile_tree, CompiledLink, CompiledNode, CompiledTree};
pub use conditionals::{
    closed_form_means, conditionals_from_levels, link_means, means_from_ratios, BetaParams,
    ConditionalPair, CALIBRATION, CLAMP_EPSILON, DEFAULT_CONCENTRATION,
};
pub use tree::{
    coarse_grain_levels, parse_model_spec, EvidenceLink, ModelTree, Node, NodeKind, MAX_DEPTH,
    MODEL_SCHEMA,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema `{found}` (expected `{expected}`)")]
    UnsupportedSchema {
        found: String,
        expected: &'static str,
    },
    #[error("empty node id")]
    EmptyId,
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate edge `{parent}` -> `{child}`")]
    DuplicateEdge { parent: String, child: String },
    #[error("node `{child}` has multiple parents: {}", parents.join(", "))]
    MultipleParents { child: String, parents: Vec<String> },
    #[error("cycle detected: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("illegal link {parent_kind} `{parent}` -> {child_kind} `{child}`")]
    InvalidLink {
        parent: String,
        parent_kind: NodeKind,
        child: String,
        child_kind: NodeKind,
    },
    #[error("model has no trait node")]
    MissingRoot,
    #[error("model has more than one trait node: {}", .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("node `{0}` is not connected to the trait node")]
    Detached(String),
    #[error("node `{id}` sits {depth} levels below the root (max {MAX_DEPTH})")]
    TooDeep { id: String, depth: usize },
    #[error("stance `{0}` lists no features")]
    EmptyStance(String),
    #[error("stance `{stance}` lists feature `{feature}` twice")]
    DuplicateFeature { stance: String, feature: String },
    #[error("stance `{stance}` references unknown feature `{feature}`")]
    UnknownFeature { stance: String, feature: String },
    #[error("concentration must be positive and finite, got {0}")]
    InvalidConcentration(f64),
}

impl ModelError {
    pub(crate) fn syntax(err: serde_json::Error) -> Self {
        ModelError::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
