//! Repeated model runs per stance, pooling across stances, and likelihood
//! ratios.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::{sample_assignment, IndicatorPanel};
use crate::inference::{
    exact_posterior, sample_posterior, InferenceError, PriorConfig, SamplerSettings,
};
use crate::model::CompiledTree;
use crate::seed::derive_seed;
use crate::stats::{quantile_sorted, sorted};

pub const DEFAULT_RUNS: usize = 400;
pub const RATINGS_HEADER: &str = "# dcm-ratings v1";
/// Label used in place of a stance name for pooled results.
pub const AGGREGATE_LABEL: &str = "all-stances";
/// Variant label of runs on the model as specified.
pub const BASE_VARIANT: &str = "base";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssessmentError {
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("ratings line {line}: {message}")]
    Ratings { line: u64, message: String },
    #[error("stance `{0}` has no plausibility scores")]
    NoScores(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("weights and summaries cover different stances: {0}")]
    WeightMismatch(String),
    #[error("summaries disagree on {0}")]
    SummaryMismatch(String),
    #[error("probabilities must lie strictly inside (0, 1): prior {prior}, posterior {posterior}")]
    Boundary { prior: f64, posterior: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum InferenceMode {
    Exact,
    Sampled { n_samples: usize, n_chains: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub n_runs: usize,
    pub mode: InferenceMode,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_runs: DEFAULT_RUNS,
            mode: InferenceMode::Exact,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn new(n_runs: usize, mode: InferenceMode, seed: u64) -> Result<Self, AssessmentError> {
        if n_runs == 0 {
            return Err(AssessmentError::InvalidConfig("n_runs must be at least 1".into()));
        }
        Ok(Self { n_runs, mode, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub system: String,
    pub stance: String,
    pub prior: String,
    pub variant: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    /// Per-run posteriors in run order.
    pub values: Vec<f64>,
    pub median: f64,
    pub mean: f64,
    pub q05: f64,
    pub q25: f64,
    pub q75: f64,
    pub q95: f64,
    pub n_runs: usize,
    pub provenance: Provenance,
    /// Sampled runs whose split R-hat exceeded the threshold.
    pub unconverged: usize,
}

impl PosteriorSummary {
    pub fn from_values(values: Vec<f64>, provenance: Provenance) -> Self {
        assert!(!values.is_empty(), "summary of zero runs");
        assert!(
            values.iter().all(|v| (0.0..=1.0).contains(v)),
            "posterior outside [0, 1]"
        );
        let s = sorted(&values);
        let q = |p| quantile_sorted(&s, p);
        Self {
            median: q(0.5),
            mean: s.iter().sum::<f64>() / s.len() as f64,
            q05: q(0.05),
            q25: q(0.25),
            q75: q(0.75),
            q95: q(0.95),
            n_runs: values.len(),
            values,
            provenance,
            unconverged: 0,
        }
    }
}

/// Run `config.n_runs` independent indicator realizations through one
/// stance. Run `r` draws its indicators with seed `derive_seed(master, [r])`,
/// so every stance and prior sees the same realizations.
pub fn run_stance(
    tree: &CompiledTree,
    panel: &IndicatorPanel,
    prior: &PriorConfig,
    config: &RunConfig,
) -> Result<PosteriorSummary, AssessmentError> {
    if config.n_runs == 0 {
        return Err(AssessmentError::InvalidConfig("n_runs must be at least 1".into()));
    }
    let results: Vec<Result<(f64, bool), InferenceError>> = (0..config.n_runs as u64)
        .into_par_iter()
        .map(|r| {
            let assignment =
                sample_assignment(panel, derive_seed(config.seed, &[r])).restricted_to(tree);
            let est = match config.mode {
                InferenceMode::Exact => exact_posterior(tree, &assignment, prior)?,
                InferenceMode::Sampled { n_samples, n_chains } => {
                    let settings =
                        SamplerSettings::new(n_samples, n_chains, derive_seed(config.seed, &[r, 1]));
                    sample_posterior(tree, &assignment, prior, &settings)?
                }
            };
            Ok((est.probability, est.converged()))
        })
        .collect();

    let mut values = Vec::with_capacity(config.n_runs);
    let mut unconverged = 0;
    for res in results {
        let (p, ok) = res?;
        values.push(p);
        unconverged += usize::from(!ok);
    }
    let mut summary = PosteriorSummary::from_values(
        values,
        Provenance {
            system: panel.system_id.clone(),
            stance: tree.name().to_string(),
            prior: prior.label.clone(),
            variant: BASE_VARIANT.to_string(),
            seed: config.seed,
        },
    );
    summary.unconverged = unconverged;
    Ok(summary)
}

/// Normalized non-negative stance weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StanceWeights {
    weights: BTreeMap<String, f64>,
}

impl StanceWeights {
    pub fn new(raw: BTreeMap<String, f64>) -> Result<Self, AssessmentError> {
        if raw.is_empty() {
            return Err(AssessmentError::InvalidWeights("no stances".into()));
        }
        if let Some((k, w)) = raw.iter().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(AssessmentError::InvalidWeights(format!("`{k}` has weight {w}")));
        }
        let total: f64 = raw.values().sum();
        if total <= 0.0 {
            return Err(AssessmentError::InvalidWeights("weights sum to zero".into()));
        }
        Ok(Self {
            weights: raw.into_iter().map(|(k, w)| (k, w / total)).collect(),
        })
    }

    pub fn equal<I: IntoIterator<Item = S>, S: Into<String>>(stances: I) -> Result<Self, AssessmentError> {
        Self::new(stances.into_iter().map(|s| (s.into(), 1.0)).collect())
    }

    pub fn get(&self, stance: &str) -> Option<f64> {
        self.weights.get(stance).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(k, w)| (k.as_str(), *w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Plausibility scores per stance in file column order. Abstentions are
/// left out of each stance's list.
#[derive(Debug, Clone, PartialEq)]
pub struct Ratings {
    pub stances: Vec<String>,
    pub scores: BTreeMap<String, Vec<f64>>,
}

impl Ratings {
    /// Parse a respondent × stance table. Cells hold a score in [0, 10],
    /// `--` or nothing for an abstention.
    pub fn parse(text: &str) -> Result<Self, AssessmentError> {
        let first = text.lines().next().unwrap_or("").trim_end();
        if first != RATINGS_HEADER {
            return Err(AssessmentError::Ratings {
                line: 1,
                message: format!("expected `{RATINGS_HEADER}`, found `{first}`"),
            });
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let csv_err = |e: csv::Error| AssessmentError::Ratings {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        };
        let headers = reader.headers().map_err(csv_err)?.clone();
        if headers.get(0) != Some("respondent") || headers.len() < 2 {
            return Err(AssessmentError::Ratings {
                line: 2,
                message: "expected `respondent` followed by one column per stance".into(),
            });
        }
        let stances: Vec<String> = headers.iter().skip(1).map(String::from).collect();
        let mut scores: BTreeMap<String, Vec<f64>> =
            stances.iter().map(|s| (s.clone(), Vec::new())).collect();
        if scores.len() != stances.len() {
            return Err(AssessmentError::Ratings {
                line: 2,
                message: "duplicate stance column".into(),
            });
        }
        for rec in reader.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line());
            for (stance, cell) in stances.iter().zip(rec.iter().skip(1)) {
                if cell.is_empty() || cell == "--" {
                    continue;
                }
                match cell.parse::<f64>() {
                    Ok(v) if (0.0..=10.0).contains(&v) => scores.get_mut(stance).unwrap().push(v),
                    _ => {
                        return Err(AssessmentError::Ratings {
                            line,
                            message: format!("`{cell}` is not a score in [0, 10]"),
                        })
                    }
                }
            }
        }
        Ok(Self { stances, scores })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AssessmentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| AssessmentError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn means(&self) -> BTreeMap<String, f64> {
        self.scores
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(k, v)| (k.clone(), v.iter().sum::<f64>() / v.len() as f64))
            .collect()
    }
}

/// Weight each stance by its mean score, normalized over stances.
pub fn weights_from_ratings(
    ratings: &BTreeMap<String, Vec<f64>>,
) -> Result<StanceWeights, AssessmentError> {
    let mut means = BTreeMap::new();
    for (stance, scores) in ratings {
        if scores.is_empty() {
            return Err(AssessmentError::NoScores(stance.clone()));
        }
        means.insert(stance.clone(), scores.iter().sum::<f64>() / scores.len() as f64);
    }
    StanceWeights::new(means)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    /// Statistics over the pooled draws; `values` is the pool itself.
    pub summary: PosteriorSummary,
    pub weights: StanceWeights,
    /// Pooled draws taken from each stance.
    pub counts: BTreeMap<String, usize>,
    pub pool_size: usize,
    pub pool_seed: u64,
    /// Weight-averaged stance medians.
    pub weighted_median: f64,
}

/// Split `total` into integer counts proportional to `weights`, giving the
/// leftover units to the largest fractional parts (earlier keys win ties).
fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let quotas: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().take(total.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    counts
}

/// Systematic resample of `count` values from `values`: sorted values are
/// taken at evenly spaced positions behind one random offset. Whole
/// multiples of the input reproduce it exactly.
fn systematic(values: &[f64], count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    let s = sorted(values);
    let u: f64 = rng.random();
    let step = s.len() as f64 / count as f64;
    (0..count)
        .map(|j| s[(((j as f64 + u) * step) as usize).min(s.len() - 1)])
        .collect()
}

/// Pool per-stance run values into a weighted mixture.
///
/// Each stance contributes a share of `pool_size` draws proportional to its
/// weight; `None` uses the largest run count times the number of stances.
pub fn aggregate_stances(
    summaries: &BTreeMap<String, PosteriorSummary>,
    weights: &StanceWeights,
    pool_size: Option<usize>,
    seed: u64,
) -> Result<AggregateSummary, AssessmentError> {
    let first = summaries
        .values()
        .next()
        .ok_or_else(|| AssessmentError::WeightMismatch("no summaries".into()))?;
    let extra: Vec<&str> = summaries
        .keys()
        .filter(|k| weights.get(k).is_none())
        .map(String::as_str)
        .chain(weights.iter().map(|(k, _)| k).filter(|k| !summaries.contains_key(*k)))
        .collect();
    if !extra.is_empty() {
        return Err(AssessmentError::WeightMismatch(extra.join(", ")));
    }
    for s in summaries.values() {
        if s.provenance.system != first.provenance.system {
            return Err(AssessmentError::SummaryMismatch("system".into()));
        }
        if s.provenance.prior != first.provenance.prior {
            return Err(AssessmentError::SummaryMismatch("prior".into()));
        }
        if s.provenance.variant != first.provenance.variant {
            return Err(AssessmentError::SummaryMismatch("variant".into()));
        }
    }

    let pool_size = pool_size
        .unwrap_or_else(|| summaries.values().map(|s| s.n_runs).max().unwrap_or(1) * summaries.len())
        .max(1);
    let w: Vec<f64> = summaries.keys().map(|k| weights.get(k).unwrap()).collect();
    let counts = largest_remainder(&w, pool_size);

    let mut pool = Vec::with_capacity(pool_size);
    for (k, (s, &c)) in summaries.values().zip(&counts).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[k as u64]));
        pool.extend(systematic(&s.values, c, &mut rng));
    }
    let weighted_median = summaries
        .values()
        .zip(&w)
        .map(|(s, w)| w * s.median)
        .sum::<f64>();

    let mut summary = PosteriorSummary::from_values(
        pool,
        Provenance {
            stance: AGGREGATE_LABEL.to_string(),
            seed,
            ..first.provenance.clone()
        },
    );
    summary.unconverged = summaries.values().map(|s| s.unconverged).sum();
    Ok(AggregateSummary {
        summary,
        weights: weights.clone(),
        counts: summaries.keys().cloned().zip(counts).collect(),
        pool_size,
        pool_seed: seed,
        weighted_median,
    })
}

/// Posterior odds over prior odds.
pub fn likelihood_ratio(prior_mean: f64, posterior: f64) -> Result<f64, AssessmentError> {
    let inside = |p: f64| p > 0.0 && p < 1.0;
    if !(inside(prior_mean) && inside(posterior)) {
        return Err(AssessmentError::Boundary {
            prior: prior_mean,
            posterior,
        });
    }
    Ok((posterior / (1.0 - posterior)) / (prior_mean / (1.0 - prior_mean)))
}
