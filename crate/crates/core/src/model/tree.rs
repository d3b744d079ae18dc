use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::levels::{DemandingnessLevel, SupportLevel};

pub const MODEL_SCHEMA: &str = "dcm-model/1";

/// Maximum number of levels below the root trait.
pub const MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Trait,
    Feature,
    Subfeature,
    Indicator,
}

impl NodeKind {
    /// Whether `self -> child` is a legal parent/child pairing.
    pub fn may_parent(self, child: NodeKind) -> bool {
        use NodeKind::*;
        matches!(
            (self, child),
            (Trait, Feature)
                | (Feature, Subfeature)
                | (Feature, Indicator)
                | (Subfeature, Subfeature)
                | (Subfeature, Indicator)
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::Trait => "trait",
            NodeKind::Feature => "feature",
            NodeKind::Subfeature => "subfeature",
            NodeKind::Indicator => "indicator",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: NodeKind) -> Self {
        Self {
            id: id.into(),
            kind,
            name: None,
        }
    }
}

/// A parent → child evidential relationship.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceLink {
    pub parent: String,
    pub child: String,
    pub support: SupportLevel,
    pub demandingness: DemandingnessLevel,
}

impl EvidenceLink {
    pub fn new(
        parent: impl Into<String>,
        child: impl Into<String>,
        support: SupportLevel,
        demandingness: DemandingnessLevel,
    ) -> Self {
        Self {
            parent: parent.into(),
            child: child.into(),
            support,
            demandingness,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    schema: String,
    name: String,
    nodes: Vec<Node>,
    edges: Vec<EvidenceLink>,
}

/// A validated (not yet compiled) hierarchy rooted at a single trait node.
///
/// Construction always validates, so every `ModelTree` value is a forest with
/// one parent per non-root node, legal kind adjacency, and bounded depth.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTree {
    name: String,
    nodes: Vec<Node>,
    edges: Vec<EvidenceLink>,
    root: usize,
}

impl ModelTree {
    pub fn new(
        name: impl Into<String>,
        nodes: Vec<Node>,
        edges: Vec<EvidenceLink>,
    ) -> Result<Self, ModelError> {
        let root = validate(&nodes, &edges)?;
        Ok(Self {
            name: name.into(),
            nodes,
            edges,
            root,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn root(&self) -> &Node {
        &self.nodes[self.root]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EvidenceLink] {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn indicator_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Indicator)
            .map(|n| n.id.as_str())
    }

    /// Copy of this tree with every link level collapsed to the
    /// five-category scales.
    pub fn coarse_grained(&self) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| EvidenceLink {
                support: e.support.coarse(),
                demandingness: e.demandingness.coarse(),
                ..e.clone()
            })
            .collect();
        Self {
            name: self.name.clone(),
            nodes: self.nodes.clone(),
            edges,
            root: self.root,
        }
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            schema: MODEL_SCHEMA.to_string(),
            name: self.name.clone(),
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model document serializes")
    }
}

pub fn parse_model_spec(document: &str) -> Result<ModelTree, ModelError> {
    let doc: ModelDocument = serde_json::from_str(document).map_err(ModelError::syntax)?;
    if doc.schema != MODEL_SCHEMA {
        return Err(ModelError::UnsupportedSchema {
            found: doc.schema,
            expected: MODEL_SCHEMA,
        });
    }
    ModelTree::new(doc.name, doc.nodes, doc.edges)
}

pub fn coarse_grain_levels(tree: &ModelTree) -> ModelTree {
    tree.coarse_grained()
}

/// Validate the node/edge lists, returning the index of the root node.
fn validate(nodes: &[Node], edges: &[EvidenceLink]) -> Result<usize, ModelError> {
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, node) in nodes.iter().enumerate() {
        if node.id.trim().is_empty() {
            return Err(ModelError::EmptyId);
        }
        if index.insert(node.id.as_str(), i).is_some() {
            return Err(ModelError::DuplicateNode(node.id.clone()));
        }
    }

    let roots: Vec<&Node> = nodes.iter().filter(|n| n.kind == NodeKind::Trait).collect();
    let root = match roots.as_slice() {
        [r] => index[r.id.as_str()],
        [] => return Err(ModelError::MissingRoot),
        _ => {
            return Err(ModelError::MultipleRoots(
                roots.iter().map(|n| n.id.clone()).collect(),
            ))
        }
    };

    let mut seen = BTreeSet::new();
    let mut parent_of: Vec<Option<usize>> = vec![None; nodes.len()];
    for edge in edges {
        let p = *index
            .get(edge.parent.as_str())
            .ok_or_else(|| ModelError::UnknownNode(edge.parent.clone()))?;
        let c = *index
            .get(edge.child.as_str())
            .ok_or_else(|| ModelError::UnknownNode(edge.child.clone()))?;
        if !seen.insert((p, c)) {
            return Err(ModelError::DuplicateEdge {
                parent: edge.parent.clone(),
                child: edge.child.clone(),
            });
        }
        if let Some(existing) = parent_of[c] {
            return Err(ModelError::MultipleParents {
                child: edge.child.clone(),
                parents: vec![nodes[existing].id.clone(), edge.parent.clone()],
            });
        }
        parent_of[c] = Some(p);
    }

    // Walk every ancestor chain; a revisit means a cycle.
    for start in 0..nodes.len() {
        let mut path = vec![start];
        let mut cur = start;
        while let Some(p) = parent_of[cur] {
            if path.contains(&p) {
                let mut ids: Vec<String> = path.iter().map(|&i| nodes[i].id.clone()).collect();
                ids.push(nodes[p].id.clone());
                return Err(ModelError::Cycle(ids));
            }
            path.push(p);
            cur = p;
        }
    }

    for edge in edges {
        let p = &nodes[index[edge.parent.as_str()]];
        let c = &nodes[index[edge.child.as_str()]];
        if !p.kind.may_parent(c.kind) {
            return Err(ModelError::InvalidLink {
                parent: p.id.clone(),
                parent_kind: p.kind,
                child: c.id.clone(),
                child_kind: c.kind,
            });
        }
    }

    for (i, node) in nodes.iter().enumerate() {
        if i == root {
            continue;
        }
        let mut depth = 0;
        let mut cur = i;
        while let Some(p) = parent_of[cur] {
            depth += 1;
            cur = p;
        }
        if cur != root {
            return Err(ModelError::Detached(node.id.clone()));
        }
        if depth > MAX_DEPTH {
            return Err(ModelError::TooDeep {
                id: node.id.clone(),
                depth,
            });
        }
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema": "dcm-model/1",
        "name": "minimal",
        "nodes": [
            {"id": "c", "kind": "trait"},
            {"id": "f", "kind": "feature"},
            {"id": "i", "kind": "indicator"}
        ],
        "edges": [
            {"parent": "c", "child": "f", "support": "strong support", "demandingness": "neutral"},
            {"parent": "f", "child": "i", "support": "weak support", "demandingness": "weakly demanding"}
        ]
    }"#;

    fn with_edges(edges: &str, extra_nodes: &str) -> String {
        format!(
            r#"{{"schema": "dcm-model/1", "name": "t",
                "nodes": [{{"id": "c", "kind": "trait"}}, {{"id": "f", "kind": "feature"}},
                          {{"id": "g", "kind": "feature"}}, {{"id": "i", "kind": "indicator"}}{extra_nodes}],
                "edges": [{edges}]}}"#
        )
    }

    fn link(p: &str, c: &str) -> String {
        format!(r#"{{"parent": "{p}", "child": "{c}", "support": "weak support", "demandingness": "neutral"}}"#)
    }

    #[test]
    fn minimal_tree_parses() {
        let tree = parse_model_spec(MINIMAL).unwrap();
        assert_eq!(tree.nodes().len(), 3);
        assert_eq!(tree.edges().len(), 2);
        assert_eq!(tree.root().id, "c");
        assert_eq!(tree.indicator_ids().collect::<Vec<_>>(), vec!["i"]);
    }

    #[test]
    fn round_trip() {
        let tree = parse_model_spec(MINIMAL).unwrap();
        assert_eq!(parse_model_spec(&tree.to_json()).unwrap(), tree);
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_model_spec("{\n  \"schema\": \"dcm-model/1\",\n  oops\n}").unwrap_err();
        match err {
            ModelError::Syntax { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_level_name_is_a_positioned_syntax_error() {
        let doc = MINIMAL.replace("weakly demanding", "rather demanding");
        assert!(matches!(
            parse_model_spec(&doc),
            Err(ModelError::Syntax { .. })
        ));
    }

    #[test]
    fn indicator_with_two_parents_rejected() {
        let doc = with_edges(
            &[link("c", "f"), link("c", "g"), link("f", "i"), link("g", "i")].join(","),
            "",
        );
        assert!(matches!(
            parse_model_spec(&doc),
            Err(ModelError::MultipleParents { ref child, .. }) if child == "i"
        ));
    }

    #[test]
    fn unknown_node_rejected() {
        let doc = with_edges(&[link("c", "f"), link("f", "zzz")].join(","), "");
        assert!(matches!(parse_model_spec(&doc), Err(ModelError::UnknownNode(id)) if id == "zzz"));
    }

    #[test]
    fn duplicate_edge_rejected() {
        let doc = with_edges(&[link("c", "f"), link("c", "f")].join(","), "");
        assert!(matches!(parse_model_spec(&doc), Err(ModelError::DuplicateEdge { .. })));
    }

    #[test]
    fn cycle_rejected() {
        let extra = r#", {"id": "s1", "kind": "subfeature"}, {"id": "s2", "kind": "subfeature"}"#;
        let doc = with_edges(
            &[link("c", "f"), link("c", "g"), link("f", "i"), link("s1", "s2"), link("s2", "s1")]
                .join(","),
            extra,
        );
        assert!(matches!(parse_model_spec(&doc), Err(ModelError::Cycle(_))));
    }

    #[test]
    fn illegal_adjacency_rejected() {
        let doc = with_edges(&[link("c", "f"), link("c", "g"), link("c", "i")].join(","), "");
        assert!(matches!(parse_model_spec(&doc), Err(ModelError::InvalidLink { .. })));
    }

    #[test]
    fn detached_node_rejected() {
        let doc = with_edges(&[link("c", "f"), link("f", "i")].join(","), "");
        assert!(matches!(parse_model_spec(&doc), Err(ModelError::Detached(id)) if id == "g"));
    }

    #[test]
    fn depth_limit() {
        let extra = r#", {"id": "s1", "kind": "subfeature"}, {"id": "s2", "kind": "subfeature"},
                       {"id": "s3", "kind": "subfeature"}"#;
        let ok = with_edges(
            &[link("c", "f"), link("c", "g"), link("f", "s1"), link("s1", "s2"), link("s2", "i"), link("g", "s3")]
                .join(","),
            extra,
        );
        parse_model_spec(&ok).unwrap();
        let deep = with_edges(
            &[link("c", "f"), link("c", "g"), link("f", "s1"), link("s1", "s2"), link("s2", "s3"), link("s3", "i")]
                .join(","),
            extra,
        );
        assert!(matches!(parse_model_spec(&deep), Err(ModelError::TooDeep { .. })));
    }

    #[test]
    fn schema_checked() {
        let doc = MINIMAL.replace("dcm-model/1", "dcm-model/9");
        assert!(matches!(parse_model_spec(&doc), Err(ModelError::UnsupportedSchema { .. })));
    }

    #[test]
    fn coarse_graining_rewrites_levels_only() {
        let tree = parse_model_spec(&MINIMAL.replace("\"strong support\"", "\"overwhelming support\"")).unwrap();
        let coarse = coarse_grain_levels(&tree);
        assert_eq!(coarse.edges()[0].support, SupportLevel::Strong);
        assert_eq!(coarse.edges()[1].demandingness, DemandingnessLevel::Weakly);
        assert_eq!(coarse.nodes(), tree.nodes());
        assert_eq!(coarse_grain_levels(&coarse), coarse);
    }
}
