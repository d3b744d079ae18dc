use super::{IndicatorAssignment, InferenceError, Observation, PosteriorEstimate, PriorConfig};
use crate::model::CompiledTree;

pub const MAX_ENUMERATED_LATENTS: usize = 20;

/// Sum the joint over all `2^latents` configurations of the unobserved
/// binary nodes (root included). Missing indicators marginalize to one and
/// are left out of the sum.
pub fn enumerate_posterior(
    tree: &CompiledTree,
    assignment: &IndicatorAssignment,
    prior: &PriorConfig,
) -> Result<PosteriorEstimate, InferenceError> {
    let obs = assignment.resolve(tree)?;
    let latents: Vec<usize> = (0..tree.nodes().len())
        .filter(|&i| !tree.is_indicator(i))
        .collect();
    if latents.len() > MAX_ENUMERATED_LATENTS {
        return Err(InferenceError::TooManyLatents {
            count: latents.len(),
            max: MAX_ENUMERATED_LATENTS,
        });
    }
    let mut slot = vec![usize::MAX; tree.nodes().len()];
    for (bit, &i) in latents.iter().enumerate() {
        slot[i] = bit;
    }

    let theta = prior.mean();
    let mut mass = [0.0f64; 2];
    let mut state = vec![false; tree.nodes().len()];
    for config in 0u64..(1u64 << latents.len()) {
        for (bit, &i) in latents.iter().enumerate() {
            state[i] = config >> bit & 1 == 1;
        }
        let mut joint = if state[0] { theta } else { 1.0 - theta };
        for (i, node) in tree.nodes().iter().enumerate().skip(1) {
            let value = if slot[i] != usize::MAX {
                state[i]
            } else {
                match obs[i] {
                    Observation::Present => true,
                    Observation::Absent => false,
                    Observation::Missing => continue,
                }
            };
            let pair = &node.link.as_ref().expect("non-root link").pair;
            let p = if state[node.parent.expect("non-root parent")] {
                pair.pi1.mean()
            } else {
                pair.pi0.mean()
            };
            joint *= if value { p } else { 1.0 - p };
        }
        mass[state[0] as usize] += joint;
    }
    Ok(PosteriorEstimate::exact(mass[1] / (mass[0] + mass[1])))
}
