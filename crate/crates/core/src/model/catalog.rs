//! Feature/subfeature/indicator catalog and stance specifications.
//!
//! The catalog fixes everything below the feature level: which subfeatures
//! and indicators hang under each feature, and the strength of those links.
//! A stance only chooses which features bear on the root trait and how
//! strongly. Links below the feature level are therefore identical in every
//! stance built from the same catalog.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::tree::{EvidenceLink, ModelTree, Node, NodeKind, MAX_DEPTH};
use super::ModelError;
use crate::levels::{DemandingnessLevel, SupportLevel};

pub const CATALOG_SCHEMA: &str = "dcm-catalog/1";
pub const STANCE_SCHEMA: &str = "dcm-stance/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkLevels {
    pub support: SupportLevel,
    pub demandingness: DemandingnessLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkDefaults {
    pub subfeature: LinkLevels,
    pub indicator: LinkLevels,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraitEntry {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Required for subfeatures; an indicator without a parent is an orphan
    /// that no stance can reach.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demandingness: Option<DemandingnessLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub schema: String,
    #[serde(rename = "trait")]
    pub root: TraitEntry,
    pub link_defaults: LinkDefaults,
    pub features: Vec<CatalogEntry>,
    #[serde(default)]
    pub subfeatures: Vec<CatalogEntry>,
    #[serde(default)]
    pub indicators: Vec<CatalogEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLink {
    pub feature: String,
    pub support: SupportLevel,
    pub demandingness: DemandingnessLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceSpec {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub features: Vec<FeatureLink>,
}

impl StanceSpec {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let spec: StanceSpec = serde_json::from_str(text).map_err(ModelError::syntax)?;
        if spec.schema != STANCE_SCHEMA {
            return Err(ModelError::UnsupportedSchema {
                found: spec.schema,
                expected: STANCE_SCHEMA,
            });
        }
        if spec.features.is_empty() {
            return Err(ModelError::EmptyStance(spec.name));
        }
        let mut seen = BTreeSet::new();
        for link in &spec.features {
            if !seen.insert(link.feature.as_str()) {
                return Err(ModelError::DuplicateFeature {
                    stance: spec.name.clone(),
                    feature: link.feature.clone(),
                });
            }
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stance serializes")
    }

    /// Check every referenced feature against the catalog.
    pub fn check_against(&self, catalog: &Catalog) -> Result<(), ModelError> {
        for link in &self.features {
            if !catalog.features.iter().any(|f| f.id == link.feature) {
                return Err(ModelError::UnknownFeature {
                    stance: self.name.clone(),
                    feature: link.feature.clone(),
                });
            }
        }
        Ok(())
    }
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let catalog: Catalog = serde_json::from_str(text).map_err(ModelError::syntax)?;
        if catalog.schema != CATALOG_SCHEMA {
            return Err(ModelError::UnsupportedSchema {
                found: catalog.schema,
                expected: CATALOG_SCHEMA,
            });
        }
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    fn kind_of(&self, id: &str) -> Option<NodeKind> {
        if self.features.iter().any(|e| e.id == id) {
            Some(NodeKind::Feature)
        } else if self.subfeatures.iter().any(|e| e.id == id) {
            Some(NodeKind::Subfeature)
        } else if self.indicators.iter().any(|e| e.id == id) {
            Some(NodeKind::Indicator)
        } else {
            None
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let mut ids = BTreeSet::from([self.root.id.as_str()]);
        for e in self.entries() {
            if e.id.trim().is_empty() {
                return Err(ModelError::EmptyId);
            }
            if !ids.insert(e.id.as_str()) {
                return Err(ModelError::DuplicateNode(e.id.clone()));
            }
        }
        for sub in &self.subfeatures {
            let parent = sub
                .parent
                .as_deref()
                .ok_or_else(|| ModelError::Detached(sub.id.clone()))?;
            self.check_parent(&sub.id, NodeKind::Subfeature, parent)?;
        }
        for ind in &self.indicators {
            if let Some(parent) = ind.parent.as_deref() {
                self.check_parent(&ind.id, NodeKind::Indicator, parent)?;
            }
        }
        // Subfeature chains must terminate at a feature within the depth bound
        // (indicators sit one level further down).
        for sub in &self.subfeatures {
            let mut path = vec![sub.id.as_str()];
            let mut cur = sub;
            loop {
                let parent = cur.parent.as_deref().expect("checked above");
                if path.contains(&parent) {
                    let mut p: Vec<String> = path.iter().map(|s| s.to_string()).collect();
                    p.push(parent.to_string());
                    return Err(ModelError::Cycle(p));
                }
                path.push(parent);
                match self.subfeatures.iter().find(|s| s.id == parent) {
                    Some(next) => cur = next,
                    None => break,
                }
            }
            if path.len() + 1 > MAX_DEPTH {
                return Err(ModelError::TooDeep {
                    id: sub.id.clone(),
                    depth: path.len() + 1,
                });
            }
        }
        Ok(())
    }

    fn check_parent(&self, child: &str, kind: NodeKind, parent: &str) -> Result<(), ModelError> {
        let parent_kind = self
            .kind_of(parent)
            .ok_or_else(|| ModelError::UnknownNode(parent.to_string()))?;
        if !parent_kind.may_parent(kind) {
            return Err(ModelError::InvalidLink {
                parent: parent.to_string(),
                parent_kind,
                child: child.to_string(),
                child_kind: kind,
            });
        }
        Ok(())
    }

    fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.features
            .iter()
            .chain(&self.subfeatures)
            .chain(&self.indicators)
    }

    pub fn feature(&self, id: &str) -> Option<&CatalogEntry> {
        self.features.iter().find(|f| f.id == id)
    }

    /// Feature at the top of `id`'s ancestor chain, if any.
    pub fn feature_of(&self, id: &str) -> Option<&str> {
        let mut cur = id;
        for _ in 0..=MAX_DEPTH {
            if let Some(f) = self.feature(cur) {
                return Some(f.id.as_str());
            }
            let entry = self
                .subfeatures
                .iter()
                .chain(&self.indicators)
                .find(|e| e.id == cur)?;
            cur = entry.parent.as_deref()?;
        }
        None
    }

    fn link_levels(&self, entry: &CatalogEntry, kind: NodeKind) -> LinkLevels {
        let default = match kind {
            NodeKind::Indicator => self.link_defaults.indicator,
            _ => self.link_defaults.subfeature,
        };
        LinkLevels {
            support: entry.support.unwrap_or(default.support),
            demandingness: entry.demandingness.unwrap_or(default.demandingness),
        }
    }

    /// Indicators that no stance in `stances` can reach.
    pub fn unreferenced_indicators<'a>(&'a self, stances: &[StanceSpec]) -> Vec<&'a str> {
        let used: BTreeSet<&str> = stances
            .iter()
            .flat_map(|s| s.features.iter().map(|f| f.feature.as_str()))
            .collect();
        self.indicators
            .iter()
            .filter(|ind| {
                self.feature_of(&ind.id)
                    .is_none_or(|f| !used.contains(f))
            })
            .map(|ind| ind.id.as_str())
            .collect()
    }

    /// Build the full hierarchy for one stance: trait → stance features (with
    /// the stance's levels) → catalog subtrees (with catalog levels).
    pub fn stance_tree(&self, stance: &StanceSpec) -> Result<ModelTree, ModelError> {
        stance.check_against(self)?;

        let mut children: BTreeMap<&str, Vec<(&CatalogEntry, NodeKind)>> = BTreeMap::new();
        for sub in &self.subfeatures {
            children
                .entry(sub.parent.as_deref().expect("validated"))
                .or_default()
                .push((sub, NodeKind::Subfeature));
        }
        for ind in &self.indicators {
            if let Some(p) = ind.parent.as_deref() {
                children.entry(p).or_default().push((ind, NodeKind::Indicator));
            }
        }

        let mut nodes = vec![Node {
            id: self.root.id.clone(),
            kind: NodeKind::Trait,
            name: Some(self.root.name.clone()),
        }];
        let mut edges = Vec::new();
        let mut stack: Vec<&str> = Vec::new();
        for link in &stance.features {
            let feature = self.feature(&link.feature).expect("checked");
            nodes.push(Node {
                id: feature.id.clone(),
                kind: NodeKind::Feature,
                name: Some(feature.name.clone()),
            });
            edges.push(EvidenceLink::new(
                self.root.id.clone(),
                feature.id.clone(),
                link.support,
                link.demandingness,
            ));
            stack.push(feature.id.as_str());
        }
        while let Some(parent) = stack.pop() {
            for &(entry, kind) in children.get(parent).map(Vec::as_slice).unwrap_or(&[]) {
                let levels = self.link_levels(entry, kind);
                nodes.push(Node {
                    id: entry.id.clone(),
                    kind,
                    name: Some(entry.name.clone()),
                });
                edges.push(EvidenceLink::new(
                    parent,
                    entry.id.clone(),
                    levels.support,
                    levels.demandingness,
                ));
                if kind == NodeKind::Subfeature {
                    stack.push(entry.id.as_str());
                }
            }
        }
        ModelTree::new(stance.name.clone(), nodes, edges)
    }
}
