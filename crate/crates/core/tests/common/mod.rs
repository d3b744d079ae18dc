#![allow(dead_code)]

use dcm::inference::{IndicatorAssignment, Observation};
use dcm::levels::{DemandingnessLevel, SupportLevel};
use dcm::model::{CompiledTree, EvidenceLink, ModelTree, Node, NodeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random valid tree with `latents` unobserved nodes (root included) and one
/// to three indicators under every non-root latent.
pub fn random_tree(rng: &mut ChaCha8Rng, latents: usize, positive_only: bool) -> ModelTree {
    let mut nodes = vec![Node::new("root", NodeKind::Trait)];
    let mut edges = Vec::new();
    let mut depth = vec![0usize];
    let level = |rng: &mut ChaCha8Rng| {
        let s = if positive_only {
            SupportLevel::ALL[rng.random_range(4..9)]
        } else {
            SupportLevel::ALL[rng.random_range(0..9)]
        };
        (s, DemandingnessLevel::ALL[rng.random_range(0..9)])
    };
    for k in 1..latents {
        // Parent among existing latents that can still take a subfeature.
        let candidates: Vec<usize> = (0..nodes.len()).filter(|&i| depth[i] < 3).collect();
        let parent = candidates[rng.random_range(0..candidates.len())];
        let kind = if parent == 0 { NodeKind::Feature } else { NodeKind::Subfeature };
        let id = format!("n{k}");
        let (s, d) = level(rng);
        edges.push(EvidenceLink::new(nodes[parent].id.clone(), id.clone(), s, d));
        nodes.push(Node::new(id, kind));
        depth.push(depth[parent] + 1);
    }
    let latent_ids: Vec<String> = nodes.iter().skip(1).map(|n| n.id.clone()).collect();
    for (k, parent) in latent_ids.iter().enumerate() {
        for j in 0..rng.random_range(1..=3) {
            let id = format!("i{k}_{j}");
            let (s, d) = level(rng);
            edges.push(EvidenceLink::new(parent.clone(), id.clone(), s, d));
            nodes.push(Node::new(id, NodeKind::Indicator));
        }
    }
    ModelTree::new("random", nodes, edges).expect("generator builds valid trees")
}

/// Each indicator present, absent, or missing with equal probability.
pub fn random_assignment(rng: &mut ChaCha8Rng, tree: &CompiledTree) -> IndicatorAssignment {
    let mut a = IndicatorAssignment::new();
    for id in tree.indicator_ids() {
        match rng.random_range(0..3) {
            0 => a.set(id, Observation::Present),
            1 => a.set(id, Observation::Absent),
            _ => a.set(id, Observation::Missing),
        };
    }
    a
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
