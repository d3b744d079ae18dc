use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;

use super::diagnostics::split_rhat;
use super::{
    IndicatorAssignment, InferenceError, Method, Observation, PosteriorEstimate, PriorConfig,
};
use crate::model::{BetaParams, CompiledTree};

/// Split-chain diagnostic above which a sampled estimate is flagged.
pub const RHAT_THRESHOLD: f64 = 1.05;

/// Keeps sampled probabilities strictly inside (0, 1) so log terms stay finite.
const PROB_FLOOR: f64 = 1e-300;
const PROB_CEIL: f64 = 1.0 - 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerSettings {
    /// Retained draws per chain. Each chain first runs the same number of
    /// burn-in sweeps, so half of every chain is discarded.
    pub n_samples: usize,
    pub n_chains: usize,
    pub seed: u64,
}

impl SamplerSettings {
    pub const MIN_SAMPLES: usize = 1000;
    pub const MIN_CHAINS: usize = 2;

    pub fn new(n_samples: usize, n_chains: usize, seed: u64) -> Self {
        Self {
            n_samples,
            n_chains,
            seed,
        }
    }

    fn check(&self) -> Result<(), InferenceError> {
        if self.n_samples < Self::MIN_SAMPLES {
            return Err(InferenceError::InvalidSampler(format!(
                "n_samples {} < {}",
                self.n_samples,
                Self::MIN_SAMPLES
            )));
        }
        if self.n_chains < Self::MIN_CHAINS {
            return Err(InferenceError::InvalidSampler(format!(
                "n_chains {} < {}",
                self.n_chains,
                Self::MIN_CHAINS
            )));
        }
        Ok(())
    }
}

fn draw_beta(rng: &mut ChaCha8Rng, alpha: f64, beta: f64) -> f64 {
    let x = Beta::new(alpha, beta)
        .expect("positive Beta parameters")
        .sample(rng);
    if x.is_nan() {
        // Both gamma variates underflowed; fall back to the mean.
        alpha / (alpha + beta)
    } else {
        x.clamp(PROB_FLOOR, PROB_CEIL)
    }
}

/// Static description of the sampled model: which nodes take part and their
/// Beta priors. Missing indicators are leaves outside the likelihood and are
/// dropped entirely.
struct ChainModel<'a> {
    tree: &'a CompiledTree,
    prior: BetaParams,
    included: Vec<bool>,
    observed: Vec<Option<bool>>,
    latents: Vec<usize>,
}

impl<'a> ChainModel<'a> {
    fn new(tree: &'a CompiledTree, obs: &[Observation], prior: &PriorConfig) -> Self {
        let n = tree.nodes().len();
        let observed: Vec<Option<bool>> = obs.iter().map(|o| o.as_bool()).collect();
        let included = (0..n)
            .map(|i| !tree.is_indicator(i) || observed[i].is_some())
            .collect();
        let latents = (0..n).filter(|&i| !tree.is_indicator(i)).collect();
        Self {
            tree,
            prior: BetaParams {
                alpha: prior.alpha,
                beta: prior.beta,
            },
            included,
            observed,
            latents,
        }
    }

    fn priors(&self, i: usize) -> (BetaParams, BetaParams) {
        let pair = &self.tree.node(i).link.as_ref().expect("non-root link").pair;
        (pair.pi0, pair.pi1)
    }

    /// Draw every latent jointly from its conditional given the current
    /// probabilities: upward messages `Pr(observed below i | z_i)`, then a
    /// top-down draw. Single-site updates mix poorly when strong links tie
    /// the root to its features.
    fn draw_latents(&self, rng: &mut ChaCha8Rng, theta: f64, pi: &[[f64; 2]], z: &mut [bool], msg: &mut [[f64; 2]]) {
        for &i in self.latents.iter().rev() {
            let mut m = [1.0f64; 2];
            for &c in &self.tree.node(i).children {
                if !self.included[c] {
                    continue;
                }
                for s in 0..2 {
                    let q = pi[c][s];
                    m[s] *= match self.observed[c] {
                        Some(true) => q,
                        Some(false) => 1.0 - q,
                        None => (1.0 - q) * msg[c][0] + q * msg[c][1],
                    };
                }
                // Rescale so deep or wide subtrees cannot underflow.
                let scale = m[0].max(m[1]);
                m = [m[0] / scale, m[1] / scale];
            }
            msg[i] = m;
        }
        for &i in &self.latents {
            let q = match self.tree.node(i).parent {
                None => theta,
                Some(p) => pi[i][z[p] as usize],
            };
            let (w0, w1) = ((1.0 - q) * msg[i][0], q * msg[i][1]);
            z[i] = rng.random::<f64>() * (w0 + w1) < w1;
        }
    }

    fn run(&self, settings: &SamplerSettings, chain: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(chain as u64);

        let n = self.tree.nodes().len();
        let mut theta = draw_beta(&mut rng, self.prior.alpha, self.prior.beta);
        // pi[i] = [Pr(i = 1 | parent = 0), Pr(i = 1 | parent = 1)]
        let mut pi = vec![[0.5f64; 2]; n];
        for i in 1..n {
            if self.included[i] {
                let (b0, b1) = self.priors(i);
                pi[i] = [
                    draw_beta(&mut rng, b0.alpha, b0.beta),
                    draw_beta(&mut rng, b1.alpha, b1.beta),
                ];
            }
        }
        // Ancestral initialization; parents precede children.
        let mut z = vec![false; n];
        z[0] = rng.random::<f64>() < theta;
        for i in 1..n {
            if !self.included[i] {
                continue;
            }
            z[i] = match self.observed[i] {
                Some(v) => v,
                None => {
                    let parent = self.tree.node(i).parent.expect("non-root parent");
                    rng.random::<f64>() < pi[i][z[parent] as usize]
                }
            };
        }

        let mut msg = vec![[1.0f64; 2]; n];
        let burn_in = settings.n_samples;
        let mut trace = Vec::with_capacity(settings.n_samples);
        for sweep in 0..burn_in + settings.n_samples {
            self.draw_latents(&mut rng, theta, &pi, &mut z, &mut msg);

            let root = z[0] as u8 as f64;
            theta = draw_beta(&mut rng, self.prior.alpha + root, self.prior.beta + 1.0 - root);

            for i in 1..n {
                if !self.included[i] {
                    continue;
                }
                let parent = self.tree.node(i).parent.expect("non-root parent");
                let (b0, b1) = self.priors(i);
                let hit = z[i] as u8 as f64;
                let (mut a0, mut c0, mut a1, mut c1) = (b0.alpha, b0.beta, b1.alpha, b1.beta);
                if z[parent] {
                    a1 += hit;
                    c1 += 1.0 - hit;
                } else {
                    a0 += hit;
                    c0 += 1.0 - hit;
                }
                pi[i] = [draw_beta(&mut rng, a0, c0), draw_beta(&mut rng, a1, c1)];
            }

            if sweep >= burn_in {
                trace.push(root);
            }
        }
        trace
    }
}

pub fn sample_posterior(
    tree: &CompiledTree,
    assignment: &IndicatorAssignment,
    prior: &PriorConfig,
    settings: &SamplerSettings,
) -> Result<PosteriorEstimate, InferenceError> {
    settings.check()?;
    let obs = assignment.resolve(tree)?;
    let model = ChainModel::new(tree, &obs, prior);
    let traces: Vec<Vec<f64>> = (0..settings.n_chains)
        .into_par_iter()
        .map(|chain| model.run(settings, chain))
        .collect();

    let total: usize = traces.iter().map(Vec::len).sum();
    let hits: f64 = traces.iter().flatten().sum();
    Ok(PosteriorEstimate {
        probability: hits / total as f64,
        method: Method::Sampled,
        samples: Some(total),
        rhat: Some(split_rhat(&traces)),
        seed: Some(settings.seed),
    })
}
