use std::collections::BTreeMap;

use super::conditionals::{conditionals_from_levels, ConditionalPair};
use super::tree::{ModelTree, NodeKind};
use super::ModelError;
use crate::levels::{DemandingnessLevel, SupportLevel};

/// Link into a node from its parent, with its Beta parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledLink {
    pub support: SupportLevel,
    pub demandingness: DemandingnessLevel,
    pub pair: ConditionalPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompiledNode {
    pub id: String,
    pub kind: NodeKind,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// `None` only for the root.
    pub link: Option<CompiledLink>,
}

/// Immutable, index-addressed form of a [`ModelTree`] in which every edge
/// carries a [`ConditionalPair`]. Node 0 is the root and every parent index
/// precedes its children.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledTree {
    name: String,
    concentration: f64,
    nodes: Vec<CompiledNode>,
    index: BTreeMap<String, usize>,
}

impl CompiledTree {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    pub fn nodes(&self) -> &[CompiledNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &CompiledNode {
        &self.nodes[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn root(&self) -> &CompiledNode {
        &self.nodes[0]
    }

    pub fn is_indicator(&self, i: usize) -> bool {
        self.nodes[i].kind == NodeKind::Indicator
    }

    pub fn indicator_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Indicator)
            .map(|n| n.id.as_str())
    }

    /// Number of unobserved binary nodes, root included.
    pub fn latent_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind != NodeKind::Indicator)
            .count()
    }

    /// Conditional pair on the edge into `child_id`.
    pub fn pair(&self, child_id: &str) -> Option<&ConditionalPair> {
        self.index_of(child_id)
            .and_then(|i| self.nodes[i].link.as_ref())
            .map(|l| &l.pair)
    }

    /// Number of compiled edges.
    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }
}

pub fn compile_tree(tree: &ModelTree, concentration: f64) -> Result<CompiledTree, ModelError> {
    // Breadth-first from the root so parents always precede children.
    let mut children: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (e, edge) in tree.edges().iter().enumerate() {
        children.entry(edge.parent.as_str()).or_default().push(e);
    }

    let root = tree.root();
    let mut nodes = vec![CompiledNode {
        id: root.id.clone(),
        kind: root.kind,
        parent: None,
        children: Vec::new(),
        link: None,
    }];
    let mut index = BTreeMap::from([(root.id.clone(), 0usize)]);
    let mut head = 0;
    while head < nodes.len() {
        let parent_id = nodes[head].id.clone();
        for &e in children.get(parent_id.as_str()).map(Vec::as_slice).unwrap_or(&[]) {
            let edge = &tree.edges()[e];
            let child = tree.node(&edge.child).expect("validated tree");
            let pair = conditionals_from_levels(edge.support, edge.demandingness, concentration)?;
            let ci = nodes.len();
            nodes.push(CompiledNode {
                id: child.id.clone(),
                kind: child.kind,
                parent: Some(head),
                children: Vec::new(),
                link: Some(CompiledLink {
                    support: edge.support,
                    demandingness: edge.demandingness,
                    pair,
                }),
            });
            nodes[head].children.push(ci);
            index.insert(child.id.clone(), ci);
        }
        head += 1;
    }
    debug_assert_eq!(nodes.len(), tree.nodes().len());

    Ok(CompiledTree {
        name: tree.name().to_string(),
        concentration,
        nodes,
        index,
    })
}

impl ModelTree {
    pub fn compile(&self, concentration: f64) -> Result<CompiledTree, ModelError> {
        compile_tree(self, concentration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::conditionals::BetaParams;
    use crate::model::tree::{EvidenceLink, Node};
    use DemandingnessLevel as D;
    use SupportLevel as S;

    fn small() -> ModelTree {
        ModelTree::new(
            "small",
            vec![
                Node::new("c", NodeKind::Trait),
                Node::new("f", NodeKind::Feature),
                Node::new("i", NodeKind::Indicator),
            ],
            vec![
                EvidenceLink::new("f", "i", S::NoSupport, D::Neutral),
                EvidenceLink::new("c", "f", S::Strong, D::Moderately),
            ],
        )
        .unwrap()
    }

    #[test]
    fn every_edge_gets_a_pair() {
        let compiled = small().compile(10.0).unwrap();
        assert_eq!(compiled.edge_count(), 2);
        assert_eq!(compiled.latent_count(), 2);
        assert!(compiled.pair("f").is_some());
        assert!(compiled.pair("c").is_none());
        assert_eq!(compiled.node(compiled.index_of("i").unwrap()).parent, compiled.index_of("f"));
    }

    #[test]
    fn neutral_edge_is_beta_5_5() {
        let compiled = small().compile(10.0).unwrap();
        let pair = compiled.pair("i").unwrap();
        assert_eq!(pair.pi1, BetaParams { alpha: 5.0, beta: 5.0 });
        assert_eq!(pair.pi0, BetaParams { alpha: 5.0, beta: 5.0 });
    }

    #[test]
    fn compilation_is_deterministic() {
        let tree = small();
        assert_eq!(tree.compile(10.0).unwrap(), tree.compile(10.0).unwrap());
    }

    #[test]
    fn bad_concentration_propagates() {
        assert!(matches!(
            small().compile(0.0),
            Err(ModelError::InvalidConcentration(_))
        ));
    }
}
