//! Prior sweeps, ordinal stability across priors, and comparison of the
//! coarse-grained model variant with the base model.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessment::{run_stance, AssessmentError, PosteriorSummary, RunConfig, BASE_VARIANT};
use crate::evidence::IndicatorPanel;
use crate::inference::PriorConfig;
use crate::model::CompiledTree;

pub type PriorPreset = PriorConfig;

pub const SYSTEM_PRIORS_HEADER: &str = "# dcm-system-priors v1";
/// Variant label for runs on the coarse-grained model.
pub const COARSE_VARIANT: &str = "coarse";
/// Prior column that resolves to each system's own prior.
pub const PER_SYSTEM_LABEL: &str = "per-system";
/// Half-width of the band around the prior mean treated as no update.
pub const DEFAULT_TAU: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensitivityError {
    #[error(transparent)]
    Assessment(#[from] AssessmentError),
    #[error("empty sweep: no {0}")]
    Empty(&'static str),
    #[error("duplicate {kind} `{label}`")]
    Duplicate { kind: &'static str, label: String },
    #[error("ordinal comparison needs at least 2 systems and 2 priors, got {systems} and {priors}")]
    InsufficientGrid { systems: usize, priors: usize },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("system priors line {line}: {message}")]
    SystemPriors { line: u64, message: String },
}

fn preset_list() -> [(&'static str, f64, f64); 5] {
    [
        ("low", 2.0, 18.0),
        ("baseline", 2.0, 10.0),
        ("uniform", 2.0, 2.0),
        ("moderate", 40.0, 40.0),
        ("high", 18.0, 2.0),
    ]
}

/// The five standard priors, ordered by mean (ties by concentration).
pub fn presets() -> Vec<PriorPreset> {
    preset_list()
        .into_iter()
        .map(|(l, a, b)| PriorConfig::new(l, a, b).expect("preset is valid"))
        .collect()
}

pub fn preset(label: &str) -> Option<PriorPreset> {
    presets().into_iter().find(|p| p.label == label)
}

/// Prior per system, for experiments where systems do not share a prior.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemPriors {
    priors: BTreeMap<String, PriorConfig>,
}

impl SystemPriors {
    /// `system_id,label,alpha,beta` rows under a version line.
    pub fn parse(text: &str) -> Result<Self, SensitivityError> {
        let first = text.lines().next().unwrap_or("").trim_end();
        if first != SYSTEM_PRIORS_HEADER {
            return Err(SensitivityError::SystemPriors {
                line: 1,
                message: format!("expected `{SYSTEM_PRIORS_HEADER}`, found `{first}`"),
            });
        }
        #[derive(Deserialize)]
        struct Row {
            system_id: String,
            label: String,
            alpha: f64,
            beta: f64,
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut priors = BTreeMap::new();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| SensitivityError::SystemPriors {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let prior = PriorConfig::new(row.label, row.alpha, row.beta).map_err(|e| {
                SensitivityError::SystemPriors {
                    line: 0,
                    message: e.to_string(),
                }
            })?;
            if priors.insert(row.system_id.clone(), prior).is_some() {
                return Err(SensitivityError::Duplicate {
                    kind: "system prior",
                    label: row.system_id,
                });
            }
        }
        Ok(Self { priors })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SensitivityError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SensitivityError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, system: impl Into<String>, prior: PriorConfig) {
        self.priors.insert(system.into(), prior);
    }

    pub fn get(&self, system: &str) -> Option<&PriorConfig> {
        self.priors.get(system)
    }

    pub fn resolve(&self, system: &str, fallback: &PriorConfig) -> PriorConfig {
        self.priors.get(system).unwrap_or(fallback).clone()
    }
}

/// Which prior a sweep column uses.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorColumn {
    Preset(PriorPreset),
    /// Each system's own prior, falling back to the given one.
    PerSystem { priors: SystemPriors, fallback: PriorConfig },
}

impl PriorColumn {
    pub fn label(&self) -> &str {
        match self {
            PriorColumn::Preset(p) => &p.label,
            PriorColumn::PerSystem { .. } => PER_SYSTEM_LABEL,
        }
    }

    fn prior_for(&self, system: &str) -> PriorConfig {
        match self {
            PriorColumn::Preset(p) => p.clone(),
            PriorColumn::PerSystem { priors, fallback } => priors.resolve(system, fallback),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub system: String,
    pub stance: String,
    /// Column label; for the per-system column the prior actually used is
    /// in `summary.provenance.prior`.
    pub prior: String,
    pub prior_mean: f64,
    pub variant: String,
    pub summary: PosteriorSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Cells in system, stance, prior order.
    pub cells: Vec<SweepCell>,
    pub systems: Vec<String>,
    pub stances: Vec<String>,
    pub priors: Vec<String>,
    pub variant: String,
}

impl SweepResult {
    pub fn cell(&self, system: &str, stance: &str, prior: &str) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.system == system && c.stance == stance && c.prior == prior)
    }
}

fn unique<'a>(kind: &'static str, labels: impl Iterator<Item = &'a str>) -> Result<Vec<String>, SensitivityError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(SensitivityError::Duplicate {
                kind,
                label: l.to_string(),
            });
        }
        out.push(l.to_string());
    }
    Ok(out)
}

/// Evaluate every (system, stance, prior) cell. All cells share the master
/// seed, so a given run index sees the same indicator realization in every
/// cell of a system and differences come from the varied factor alone.
pub fn prior_sweep(
    panels: &[IndicatorPanel],
    trees: &[CompiledTree],
    presets: &[PriorPreset],
    config: &RunConfig,
) -> Result<SweepResult, SensitivityError> {
    let columns: Vec<PriorColumn> = presets.iter().cloned().map(PriorColumn::Preset).collect();
    sweep_columns(panels, trees, &columns, config, BASE_VARIANT)
}

/// As [`prior_sweep`] with arbitrary prior columns and a variant label.
pub fn sweep_columns(
    panels: &[IndicatorPanel],
    trees: &[CompiledTree],
    columns: &[PriorColumn],
    config: &RunConfig,
    variant: &str,
) -> Result<SweepResult, SensitivityError> {
    if panels.is_empty() {
        return Err(SensitivityError::Empty("systems"));
    }
    if trees.is_empty() {
        return Err(SensitivityError::Empty("stances"));
    }
    if columns.is_empty() {
        return Err(SensitivityError::Empty("priors"));
    }
    let systems = unique("system", panels.iter().map(|p| p.system_id.as_str()))?;
    let stances = unique("stance", trees.iter().map(|t| t.name()))?;
    let priors = unique("prior", columns.iter().map(|c| c.label()))?;

    let tasks: Vec<(usize, usize, usize)> = (0..panels.len())
        .flat_map(|s| (0..trees.len()).flat_map(move |t| (0..columns.len()).map(move |p| (s, t, p))))
        .collect();
    let cells: Vec<Result<SweepCell, SensitivityError>> = tasks
        .par_iter()
        .map(|&(s, t, p)| {
            let panel = &panels[s];
            let prior = columns[p].prior_for(&panel.system_id);
            let mut summary = run_stance(&trees[t], panel, &prior, config)?;
            summary.provenance.variant = variant.to_string();
            Ok(SweepCell {
                system: systems[s].clone(),
                stance: stances[t].clone(),
                prior: priors[p].clone(),
                prior_mean: prior.mean(),
                variant: variant.to_string(),
                summary,
            })
        })
        .collect();
    Ok(SweepResult {
        cells: cells.into_iter().collect::<Result<_, _>>()?,
        systems,
        stances,
        priors,
        variant: variant.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    pub stance: String,
    pub prior: String,
    /// Systems from highest to lowest median; ties keep input order.
    pub order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFlag {
    pub stance: String,
    pub prior: String,
    pub systems: (String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalReport {
    pub reference_prior: String,
    pub rankings: Vec<Ranking>,
    /// Pairs whose strict order under this prior reverses the strict order
    /// under the reference prior.
    pub violations: Vec<PairFlag>,
    /// Pairs with equal medians under this prior.
    pub ties: Vec<PairFlag>,
}

impl OrdinalReport {
    pub fn is_stable(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compare system orderings under each prior with the ordering under the
/// first prior, stance by stance.
pub fn ordinal_stability(result: &SweepResult) -> Result<OrdinalReport, SensitivityError> {
    if result.systems.len() < 2 || result.priors.len() < 2 {
        return Err(SensitivityError::InsufficientGrid {
            systems: result.systems.len(),
            priors: result.priors.len(),
        });
    }
    let reference = &result.priors[0];
    let median = |sys: &str, stance: &str, prior: &str| {
        result
            .cell(sys, stance, prior)
            .map(|c| c.summary.median)
            .expect("complete grid")
    };
    let mut report = OrdinalReport {
        reference_prior: reference.clone(),
        rankings: Vec::new(),
        violations: Vec::new(),
        ties: Vec::new(),
    };
    for stance in &result.stances {
        for prior in &result.priors {
            let mut order = result.systems.clone();
            order.sort_by(|a, b| median(b, stance, prior).total_cmp(&median(a, stance, prior)));
            report.rankings.push(Ranking {
                stance: stance.clone(),
                prior: prior.clone(),
                order,
            });
            for (i, a) in result.systems.iter().enumerate() {
                for b in &result.systems[i + 1..] {
                    let here = median(a, stance, prior).total_cmp(&median(b, stance, prior));
                    let flag = || PairFlag {
                        stance: stance.clone(),
                        prior: prior.clone(),
                        systems: (a.clone(), b.clone()),
                    };
                    if here.is_eq() {
                        report.ties.push(flag());
                        continue;
                    }
                    let there = median(a, stance, reference).total_cmp(&median(b, stance, reference));
                    if there.is_ne() && there != here {
                        report.violations.push(flag());
                    }
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateDirection {
    Confirming,
    Disconfirming,
    Neutral,
}

impl UpdateDirection {
    pub fn from_values(median: f64, prior_mean: f64, tau: f64) -> Self {
        if median > prior_mean + tau {
            UpdateDirection::Confirming
        } else if median < prior_mean - tau {
            UpdateDirection::Disconfirming
        } else {
            UpdateDirection::Neutral
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UpdateDirection::Confirming => "confirming",
            UpdateDirection::Disconfirming => "disconfirming",
            UpdateDirection::Neutral => "neutral",
        }
    }
}

pub fn direction_of_update(summary: &PosteriorSummary, prior: &PriorPreset) -> UpdateDirection {
    UpdateDirection::from_values(summary.median, prior.mean(), DEFAULT_TAU)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantComparison {
    pub system: String,
    pub stance: String,
    pub prior: String,
    pub prior_mean: f64,
    pub base_median: f64,
    pub variant_median: f64,
    pub base_direction: UpdateDirection,
    pub variant_direction: UpdateDirection,
}

impl VariantComparison {
    pub fn same_direction(&self) -> bool {
        self.base_direction == self.variant_direction
    }

    /// The variant moved less far from the prior than the base model.
    pub fn shrunk(&self) -> bool {
        (self.variant_median - self.prior_mean).abs() < (self.base_median - self.prior_mean).abs()
    }
}

/// Pair up matching cells of two sweeps over the same grid.
pub fn compare_variants(base: &SweepResult, variant: &SweepResult) -> Vec<VariantComparison> {
    base.cells
        .iter()
        .filter_map(|b| {
            let v = variant.cell(&b.system, &b.stance, &b.prior)?;
            Some(VariantComparison {
                system: b.system.clone(),
                stance: b.stance.clone(),
                prior: b.prior.clone(),
                prior_mean: b.prior_mean,
                base_median: b.summary.median,
                variant_median: v.summary.median,
                base_direction: UpdateDirection::from_values(b.summary.median, b.prior_mean, DEFAULT_TAU),
                variant_direction: UpdateDirection::from_values(v.summary.median, v.prior_mean, DEFAULT_TAU),
            })
        })
        .collect()
}
