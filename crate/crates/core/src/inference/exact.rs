use super::{IndicatorAssignment, InferenceError, Observation, PosteriorEstimate, PriorConfig};
use crate::model::CompiledTree;

/// Likelihood of the observed indicators given the root absent and present,
/// `(L0, L1)`, up to a common positive factor.
pub fn likelihood_pair(
    tree: &CompiledTree,
    assignment: &IndicatorAssignment,
) -> Result<(f64, f64), InferenceError> {
    let obs = assignment.resolve(tree)?;
    let n = tree.nodes().len();
    // lambda[i] = Pr(evidence below i | i = 0), Pr(evidence below i | i = 1)
    let mut lambda = vec![[1.0f64; 2]; n];
    // Parents precede children, so a reverse sweep sees children first.
    for i in (1..n).rev() {
        let node = tree.node(i);
        let pair = &node.link.as_ref().expect("non-root has a link").pair;
        let (p1, p0) = (pair.pi1.mean(), pair.pi0.mean());
        let message = if tree.is_indicator(i) {
            match obs[i] {
                Observation::Present => [p0, p1],
                Observation::Absent => [1.0 - p0, 1.0 - p1],
                Observation::Missing => continue,
            }
        } else {
            let [l0, l1] = lambda[i];
            [p0 * l1 + (1.0 - p0) * l0, p1 * l1 + (1.0 - p1) * l0]
        };
        let parent = node.parent.expect("non-root has a parent");
        let target = &mut lambda[parent];
        target[0] *= message[0];
        target[1] *= message[1];
        let scale = target[0].max(target[1]);
        if scale > 0.0 {
            target[0] /= scale;
            target[1] /= scale;
        }
    }
    let [l0, l1] = lambda[0];
    Ok((l0, l1))
}

pub fn exact_posterior(
    tree: &CompiledTree,
    assignment: &IndicatorAssignment,
    prior: &PriorConfig,
) -> Result<PosteriorEstimate, InferenceError> {
    let (l0, l1) = likelihood_pair(tree, assignment)?;
    let theta = prior.mean();
    let num = theta * l1;
    let probability = num / (num + (1.0 - theta) * l0);
    Ok(PosteriorEstimate::exact(probability))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::{DemandingnessLevel as D, SupportLevel as S};
    use crate::model::{EvidenceLink, ModelTree, Node, NodeKind};

    fn chain() -> CompiledTree {
        ModelTree::new(
            "chain",
            vec![
                Node::new("c", NodeKind::Trait),
                Node::new("f", NodeKind::Feature),
                Node::new("i", NodeKind::Indicator),
            ],
            vec![
                EvidenceLink::new("c", "f", S::Strong, D::Strongly),
                EvidenceLink::new("f", "i", S::Strong, D::Strongly),
            ],
        )
        .unwrap()
        .compile(10.0)
        .unwrap()
    }

    #[test]
    fn all_missing_returns_prior_mean_exactly() {
        let prior = PriorConfig::new("b", 2.0, 10.0).unwrap();
        let p = exact_posterior(&chain(), &IndicatorAssignment::new(), &prior).unwrap();
        assert_eq!(p.probability, prior.mean());
    }

    #[test]
    fn unknown_indicator_rejected() {
        let prior = PriorConfig::new("b", 1.0, 1.0).unwrap();
        let a = IndicatorAssignment::new().with("f", Observation::Present);
        assert_eq!(
            exact_posterior(&chain(), &a, &prior).unwrap_err(),
            InferenceError::UnknownIndicator("f".into())
        );
    }

    #[test]
    fn present_raises_and_absent_lowers() {
        let prior = PriorConfig::new("u", 1.0, 1.0).unwrap();
        let up = exact_posterior(&chain(), &IndicatorAssignment::new().with("i", Observation::Present), &prior)
            .unwrap();
        let down = exact_posterior(&chain(), &IndicatorAssignment::new().with("i", Observation::Absent), &prior)
            .unwrap();
        assert!(up.probability > 0.5);
        assert!(down.probability < 0.5);
    }
}
