//! Project files and the operations behind the command-line tool.
//!
//! A project is a TOML file. Relative paths resolve against the file's
//! directory; omitted catalog, stances and ratings fall back to the bundled
//! data.
//!
//! ```toml
//! seed = 20251015
//! surveys = ["surveys.csv"]
//! overrides = "overrides.csv"          # optional
//! ratings = "ratings.csv"              # optional
//! system_priors = "system_priors.csv"  # optional
//! catalog = "catalog.json"             # optional
//! stances = ["stances/gwt.json"]       # optional
//! concentration = 10.0                 # optional
//! out = "out"
//!
//! [run]
//! n_runs = 400
//! mode = "exact"        # or "sampled"
//! samples = 2000        # sampled mode: retained draws per chain
//! chains = 4
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::assessment::{
    aggregate_stances, run_stance, weights_from_ratings, AggregateSummary, AssessmentError,
    InferenceMode, PosteriorSummary, Ratings, RunConfig, StanceWeights, DEFAULT_RUNS,
};
use crate::bundled;
use crate::evidence::{self, aggregate_panel, EvidenceError, ExpertSurvey, IndicatorPanel, Overrides};
use crate::export::{self, ExportMeta};
use crate::inference::PriorConfig;
use crate::model::{Catalog, CompiledTree, ModelError, StanceSpec, DEFAULT_CONCENTRATION};
use crate::sensitivity::{
    self, compare_variants, ordinal_stability, sweep_columns, PriorColumn, SensitivityError,
    SystemPriors, COARSE_VARIANT,
};

pub const CONFIG_ENV: &str = "DCM_CONFIG";
pub const DEFAULT_PRIOR: &str = "baseline";
pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_CHAINS: usize = 4;

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error("{file}: {source}")]
    Model { file: String, source: ModelError },
    #[error("{file}: {source}")]
    Evidence { file: String, source: EvidenceError },
    #[error("{file}: {source}")]
    Input { file: String, source: Box<dyn std::error::Error + Send + Sync> },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Assessment(#[from] AssessmentError),
    #[error(transparent)]
    Sensitivity(#[from] SensitivityError),
    #[error("unknown {kind} `{label}`")]
    Unknown { kind: &'static str, label: String },
}

impl ProjectError {
    /// 1 for problems with the inputs, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProjectError::Assessment(_) | ProjectError::Sensitivity(_) => 2,
            ProjectError::Io { .. } => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> ProjectError {
    ProjectError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawRun {
    n_runs: Option<usize>,
    mode: Option<String>,
    samples: Option<usize>,
    chains: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    catalog: Option<String>,
    stances: Option<Vec<String>>,
    #[serde(default)]
    surveys: Vec<String>,
    overrides: Option<String>,
    ratings: Option<String>,
    system_priors: Option<String>,
    concentration: Option<f64>,
    out: Option<String>,
    run: Option<RawRun>,
}

/// A path as written in the config plus where it resolves to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputPath {
    pub label: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectConfig {
    pub config_path: PathBuf,
    pub seed: u64,
    pub catalog: Option<InputPath>,
    pub stances: Option<Vec<InputPath>>,
    pub surveys: Vec<InputPath>,
    pub overrides: Option<InputPath>,
    pub ratings: Option<InputPath>,
    pub system_priors: Option<InputPath>,
    pub concentration: f64,
    pub out: PathBuf,
    pub run: RunConfig,
}

impl ProjectConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProjectError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| ProjectError::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |label: &String| -> Result<InputPath, ProjectError> {
            let p = base.join(label);
            if !p.exists() {
                return Err(ProjectError::Config {
                    path: path.display().to_string(),
                    message: format!("referenced file `{label}` does not exist"),
                });
            }
            Ok(InputPath {
                label: label.clone(),
                path: p,
            })
        };
        let opt = |v: &Option<String>| v.as_ref().map(resolve).transpose();
        let bad = |message: String| ProjectError::Config {
            path: path.display().to_string(),
            message,
        };

        let run = raw.run.clone().unwrap_or(RawRun {
            n_runs: None,
            mode: None,
            samples: None,
            chains: None,
        });
        let mode = parse_mode(
            run.mode.as_deref().unwrap_or("exact"),
            run.samples.unwrap_or(DEFAULT_SAMPLES),
            run.chains.unwrap_or(DEFAULT_CHAINS),
        )
        .map_err(bad)?;
        let seed = raw.seed.unwrap_or(0);
        let run = RunConfig::new(run.n_runs.unwrap_or(DEFAULT_RUNS), mode, seed)
            .map_err(|e| bad(e.to_string()))?;

        Ok(Self {
            config_path: path.to_path_buf(),
            seed,
            catalog: opt(&raw.catalog)?,
            stances: raw
                .stances
                .as_ref()
                .map(|v| v.iter().map(resolve).collect())
                .transpose()?,
            surveys: raw.surveys.iter().map(resolve).collect::<Result<_, _>>()?,
            overrides: opt(&raw.overrides)?,
            ratings: opt(&raw.ratings)?,
            system_priors: opt(&raw.system_priors)?,
            concentration: raw.concentration.unwrap_or(DEFAULT_CONCENTRATION),
            out: base.join(raw.out.as_deref().unwrap_or("dcm-out")),
            run,
        })
    }
}

pub fn parse_mode(mode: &str, samples: usize, chains: usize) -> Result<InferenceMode, String> {
    match mode {
        "exact" => Ok(InferenceMode::Exact),
        "sampled" => Ok(InferenceMode::Sampled {
            n_samples: samples,
            n_chains: chains,
        }),
        other => Err(format!("unknown mode `{other}` (expected exact or sampled)")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedStance {
    /// File label, or `bundled:<file>`.
    pub source: String,
    /// File stem; accepted in place of the stance name.
    pub slug: String,
    pub spec: StanceSpec,
}

/// Fully parsed project inputs.
#[derive(Debug)]
pub struct Project {
    pub config: ProjectConfig,
    pub catalog: Catalog,
    pub stances: Vec<LoadedStance>,
    pub surveys: Vec<ExpertSurvey>,
    pub ratings: Ratings,
    pub system_priors: SystemPriors,
    meta_inputs: Vec<(String, Vec<u8>)>,
}

fn read(input: &InputPath) -> Result<String, ProjectError> {
    std::fs::read_to_string(&input.path).map_err(|e| io_err(&input.path, e))
}

fn stem(label: &str) -> String {
    Path::new(label)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| label.to_string())
}

/// Merge surveys from several files; the same expert, system and indicator
/// may appear only once overall.
fn merge_surveys(parts: Vec<(String, Vec<ExpertSurvey>)>) -> Result<Vec<ExpertSurvey>, ProjectError> {
    let mut merged: BTreeMap<(String, String), ExpertSurvey> = BTreeMap::new();
    for (file, surveys) in parts {
        for s in surveys {
            let slot = merged
                .entry((s.expert_id.clone(), s.system_id.clone()))
                .or_insert_with(|| ExpertSurvey::new(&s.expert_id, &s.system_id));
            for (ind, c) in s.responses {
                if slot.responses.insert(ind.clone(), c).is_some() {
                    return Err(ProjectError::Evidence {
                        file,
                        source: EvidenceError::DuplicateCell {
                            expert: s.expert_id,
                            system: s.system_id,
                            indicator: ind,
                        },
                    });
                }
            }
        }
    }
    Ok(merged.into_values().collect())
}

impl Project {
    pub fn load(config: ProjectConfig) -> Result<Self, ProjectError> {
        let mut inputs: Vec<(String, Vec<u8>)> = Vec::new();
        let config_text = std::fs::read(&config.config_path).map_err(|e| io_err(&config.config_path, e))?;
        inputs.push(("config".into(), config_text));

        let (catalog_label, catalog_text) = match &config.catalog {
            Some(p) => (p.label.clone(), read(p)?),
            None => ("bundled:catalog.json".into(), bundled::CATALOG_JSON.to_string()),
        };
        let catalog = Catalog::parse(&catalog_text).map_err(|source| ProjectError::Model {
            file: catalog_label.clone(),
            source,
        })?;
        inputs.push((catalog_label, catalog_text.into_bytes()));

        let stance_texts: Vec<(String, String, String)> = match &config.stances {
            Some(list) => list
                .iter()
                .map(|p| Ok((p.label.clone(), stem(&p.label), read(p)?)))
                .collect::<Result<_, ProjectError>>()?,
            None => bundled::STANCE_FILES
                .iter()
                .map(|(f, t)| (format!("bundled:{f}"), stem(f), t.to_string()))
                .collect(),
        };
        let mut stances = Vec::new();
        for (source, slug, text) in stance_texts {
            let spec = StanceSpec::parse(&text)
                .and_then(|s| catalog.stance_tree(&s).map(|_| s))
                .map_err(|e| ProjectError::Model {
                    file: source.clone(),
                    source: e,
                })?;
            if stances.iter().any(|s: &LoadedStance| s.spec.name == spec.name) {
                return Err(ProjectError::Invalid(format!("{source}: duplicate stance `{}`", spec.name)));
            }
            inputs.push((source.clone(), text.into_bytes()));
            stances.push(LoadedStance { source, slug, spec });
        }

        let mut parts = Vec::new();
        for p in &config.surveys {
            let text = read(p)?;
            let surveys = evidence::parse_surveys(&text).map_err(|source| ProjectError::Evidence {
                file: p.label.clone(),
                source,
            })?;
            inputs.push((p.label.clone(), text.into_bytes()));
            parts.push((p.label.clone(), surveys));
        }
        let mut surveys = merge_surveys(parts)?;
        if let Some(p) = &config.overrides {
            let text = read(p)?;
            let o = Overrides::parse(&text).map_err(|source| ProjectError::Evidence {
                file: p.label.clone(),
                source,
            })?;
            o.apply(&mut surveys);
            inputs.push((p.label.clone(), text.into_bytes()));
        }

        let (ratings_label, ratings_text) = match &config.ratings {
            Some(p) => (p.label.clone(), read(p)?),
            None => ("bundled:ratings.csv".into(), bundled::RATINGS_CSV.to_string()),
        };
        let ratings = Ratings::parse(&ratings_text).map_err(|e| ProjectError::Input {
            file: ratings_label.clone(),
            source: Box::new(e),
        })?;
        inputs.push((ratings_label, ratings_text.into_bytes()));

        let system_priors = match &config.system_priors {
            Some(p) => {
                let text = read(p)?;
                let sp = SystemPriors::parse(&text).map_err(|e| ProjectError::Input {
                    file: p.label.clone(),
                    source: Box::new(e),
                })?;
                inputs.push((p.label.clone(), text.into_bytes()));
                sp
            }
            None => SystemPriors::default(),
        };

        Ok(Self {
            config,
            catalog,
            stances,
            surveys,
            ratings,
            system_priors,
            meta_inputs: inputs,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ProjectError> {
        Self::load(ProjectConfig::load(path)?)
    }

    pub fn meta(&self, seed: u64) -> ExportMeta {
        self.meta_inputs
            .iter()
            .fold(ExportMeta::new(seed), |m, (label, bytes)| m.with_input(label, bytes))
    }

    pub fn systems(&self) -> Vec<String> {
        evidence::systems(&self.surveys)
    }

    pub fn panel(&self, system: &str) -> Result<IndicatorPanel, ProjectError> {
        aggregate_panel(&self.surveys, system).map_err(|_| ProjectError::Unknown {
            kind: "system",
            label: system.to_string(),
        })
    }

    /// Stances matching `filter` by name or file stem, in project order.
    /// An empty filter selects every stance.
    pub fn select_stances(&self, filter: &[String]) -> Result<Vec<&LoadedStance>, ProjectError> {
        if let Some(missing) = filter
            .iter()
            .find(|f| !self.stances.iter().any(|s| s.spec.name == **f || s.slug == **f))
        {
            return Err(ProjectError::Unknown {
                kind: "stance",
                label: missing.clone(),
            });
        }
        Ok(self
            .stances
            .iter()
            .filter(|s| filter.is_empty() || filter.iter().any(|f| *f == s.spec.name || *f == s.slug))
            .collect())
    }

    pub fn compile(&self, stance: &LoadedStance, coarse: bool) -> Result<CompiledTree, ProjectError> {
        let model_err = |source| ProjectError::Model {
            file: stance.source.clone(),
            source,
        };
        let tree = self.catalog.stance_tree(&stance.spec).map_err(model_err)?;
        let tree = if coarse { tree.coarse_grained() } else { tree };
        tree.compile(self.config.concentration).map_err(model_err)
    }

    /// A preset label, or the label of a prior in the system priors file.
    pub fn prior(&self, label: &str, system: &str) -> Result<PriorConfig, ProjectError> {
        if let Some(p) = sensitivity::preset(label) {
            return Ok(p);
        }
        match self.system_priors.get(system) {
            Some(p) if p.label == label => Ok(p.clone()),
            _ => Err(ProjectError::Unknown {
                kind: "prior",
                label: label.to_string(),
            }),
        }
    }
}

/// Per-invocation settings taken from the command line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOverrides {
    pub n_runs: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
}

impl RunOverrides {
    fn apply(&self, project: &Project) -> Result<(RunConfig, PathBuf), ProjectError> {
        let base = project.config.run;
        let mode = match &self.mode {
            None => base.mode,
            Some(m) => {
                let (samples, chains) = match base.mode {
                    InferenceMode::Sampled { n_samples, n_chains } => (n_samples, n_chains),
                    InferenceMode::Exact => (DEFAULT_SAMPLES, DEFAULT_CHAINS),
                };
                parse_mode(m, samples, chains).map_err(ProjectError::Invalid)?
            }
        };
        let run = RunConfig::new(
            self.n_runs.unwrap_or(base.n_runs),
            mode,
            self.seed.unwrap_or(base.seed),
        )?;
        let out = self.out.clone().unwrap_or_else(|| project.config.out.clone());
        Ok((run, out))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub file: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.file, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
    pub stances_checked: usize,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Warning)
    }

    pub fn is_ok(&self) -> bool {
        self.errors().next().is_none()
    }

    fn error(&mut self, file: &str, message: impl ToString) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Error,
            file: file.to_string(),
            message: message.to_string(),
        });
    }

    fn warning(&mut self, file: &str, message: impl ToString) {
        self.diagnostics.push(Diagnostic {
            severity: Severity::Warning,
            file: file.to_string(),
            message: message.to_string(),
        });
    }
}

/// Check every input file without stopping at the first problem. Nothing
/// is written.
pub fn cmd_validate(config: &ProjectConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let load = |p: &InputPath, report: &mut ValidationReport| match read(p) {
        Ok(t) => Some(t),
        Err(e) => {
            report.error(&p.label, e);
            None
        }
    };

    let (catalog_label, catalog_text) = match &config.catalog {
        Some(p) => (p.label.clone(), load(p, &mut report)),
        None => ("bundled:catalog.json".into(), Some(bundled::CATALOG_JSON.to_string())),
    };
    let catalog = catalog_text.and_then(|t| match Catalog::parse(&t) {
        Ok(c) => Some(c),
        Err(e) => {
            report.error(&catalog_label, e);
            None
        }
    });

    let stance_texts: Vec<(String, Option<String>)> = match &config.stances {
        Some(list) => list.iter().map(|p| (p.label.clone(), load(p, &mut report))).collect(),
        None => bundled::STANCE_FILES
            .iter()
            .map(|(f, t)| (format!("bundled:{f}"), Some(t.to_string())))
            .collect(),
    };
    let mut stances = Vec::new();
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    for (label, text) in stance_texts {
        let Some(text) = text else { continue };
        report.stances_checked += 1;
        let spec = match StanceSpec::parse(&text) {
            Ok(s) => s,
            Err(e) => {
                report.error(&label, e);
                continue;
            }
        };
        if let Some(prev) = names.insert(spec.name.clone(), label.clone()) {
            report.error(&label, format!("stance `{}` already defined in {prev}", spec.name));
        }
        if let Some(catalog) = &catalog {
            match catalog
                .stance_tree(&spec)
                .and_then(|t| t.compile(config.concentration))
            {
                Ok(_) => {}
                Err(e) => report.error(&label, e),
            }
        }
        stances.push(spec);
    }
    if let Some(catalog) = &catalog {
        for id in catalog.unreferenced_indicators(&stances) {
            report.warning(&catalog_label, format!("indicator `{id}` is not reachable from any stance"));
        }
    }

    let mut parts = Vec::new();
    for p in &config.surveys {
        let Some(text) = load(p, &mut report) else { continue };
        match evidence::parse_surveys(&text) {
            Ok(s) => parts.push((p.label.clone(), s)),
            Err(e) => report.error(&p.label, e),
        }
    }
    if let Some(catalog) = &catalog {
        for (label, surveys) in &parts {
            let mut unknown: Vec<&str> = surveys
                .iter()
                .flat_map(|s| s.responses.keys())
                .filter(|id| !catalog.indicators.iter().any(|i| i.id == **id))
                .map(String::as_str)
                .collect();
            unknown.sort_unstable();
            unknown.dedup();
            for id in unknown {
                report.warning(label, format!("indicator `{id}` is not in the catalog"));
            }
        }
    }
    if let Err(e) = merge_surveys(parts) {
        report.error("surveys", e);
    }
    if let Some(p) = &config.overrides {
        if let Some(text) = load(p, &mut report) {
            if let Err(e) = Overrides::parse(&text) {
                report.error(&p.label, e);
            }
        }
    }
    let (ratings_label, ratings_text) = match &config.ratings {
        Some(p) => (p.label.clone(), load(p, &mut report)),
        None => ("bundled:ratings.csv".into(), Some(bundled::RATINGS_CSV.to_string())),
    };
    if let Some(text) = ratings_text {
        match Ratings::parse(&text) {
            Ok(r) => {
                for s in &stances {
                    if !r.scores.contains_key(&s.name) {
                        report.warning(&ratings_label, format!("no ratings column for stance `{}`", s.name));
                    }
                }
                if let Err(e) = weights_from_ratings(&r.scores) {
                    report.warning(&ratings_label, e);
                }
            }
            Err(e) => report.error(&ratings_label, e),
        }
    }
    if let Some(p) = &config.system_priors {
        if let Some(text) = load(p, &mut report) {
            if let Err(e) = SystemPriors::parse(&text) {
                report.error(&p.label, e);
            }
        }
    }
    report
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), ProjectError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    written.push(path);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct AssessOutput {
    pub summaries: Vec<PosteriorSummary>,
    pub written: Vec<PathBuf>,
}

impl AssessOutput {
    pub fn unconverged(&self) -> usize {
        self.summaries.iter().map(|s| s.unconverged).sum()
    }
}

fn assess_stances(
    project: &Project,
    system: &str,
    stances: &[String],
    prior: &str,
    run: &RunConfig,
) -> Result<Vec<PosteriorSummary>, ProjectError> {
    let panel = project.panel(system)?;
    let prior = project.prior(prior, system)?;
    project
        .select_stances(stances)?
        .into_iter()
        .map(|s| Ok(run_stance(&project.compile(s, false)?, &panel, &prior, run)?))
        .collect()
}

/// Run the selected stances for one system. Writes `summary.csv` and the
/// run-level `runs.csv`.
pub fn cmd_assess(
    project: &Project,
    system: &str,
    stances: &[String],
    prior: &str,
    overrides: &RunOverrides,
) -> Result<AssessOutput, ProjectError> {
    let (run, out) = overrides.apply(project)?;
    let summaries = assess_stances(project, system, stances, prior, &run)?;
    let meta = project.meta(run.seed);
    let mut written = Vec::new();
    write(&out, "summary.csv", &export::summary_csv(&meta, &summaries), &mut written)?;
    write(&out, "runs.csv", &export::runs_csv(&meta, &summaries), &mut written)?;
    Ok(AssessOutput { summaries, written })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Weighting {
    Equal,
    /// Use the project's ratings table (bundled unless configured).
    Ratings,
    /// Use a specific ratings file.
    RatingsFile(PathBuf),
}

impl Weighting {
    pub fn parse(s: &str) -> Self {
        match s {
            "equal" => Weighting::Equal,
            "ratings" => Weighting::Ratings,
            path => Weighting::RatingsFile(PathBuf::from(path)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AggregateOutput {
    pub stances: Vec<PosteriorSummary>,
    pub aggregate: AggregateSummary,
    pub written: Vec<PathBuf>,
}

/// Run the selected stances and pool them. Writes `summary.csv` (per
/// stance), `aggregate.csv` and `weights.csv`.
pub fn cmd_aggregate(
    project: &Project,
    system: &str,
    stances: &[String],
    prior: &str,
    weighting: &Weighting,
    overrides: &RunOverrides,
) -> Result<AggregateOutput, ProjectError> {
    let (run, out) = overrides.apply(project)?;
    let summaries = assess_stances(project, system, stances, prior, &run)?;
    let names: Vec<&str> = summaries.iter().map(|s| s.provenance.stance.as_str()).collect();

    let mut meta = project.meta(run.seed);
    let weights = match weighting {
        Weighting::Equal => StanceWeights::equal(names.iter().copied())?,
        Weighting::Ratings | Weighting::RatingsFile(_) => {
            let ratings = match weighting {
                Weighting::RatingsFile(path) => {
                    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
                    meta = meta.with_input(path.display().to_string(), &bytes);
                    Ratings::load(path).map_err(|e| ProjectError::Input {
                        file: path.display().to_string(),
                        source: Box::new(e),
                    })?
                }
                _ => project.ratings.clone(),
            };
            let mut scores = BTreeMap::new();
            for n in &names {
                let s = ratings.scores.get(*n).ok_or_else(|| {
                    ProjectError::Invalid(format!("ratings table has no column for stance `{n}`"))
                })?;
                scores.insert(n.to_string(), s.clone());
            }
            weights_from_ratings(&scores)?
        }
    };
    let map: BTreeMap<String, PosteriorSummary> = summaries
        .iter()
        .map(|s| (s.provenance.stance.clone(), s.clone()))
        .collect();
    let aggregate = aggregate_stances(&map, &weights, None, run.seed)?;

    let mut written = Vec::new();
    write(&out, "summary.csv", &export::summary_csv(&meta, &summaries), &mut written)?;
    write(&out, "aggregate.csv", &export::aggregate_csv(&meta, &aggregate), &mut written)?;
    write(&out, "weights.csv", &export::weights_csv(&meta, &aggregate), &mut written)?;
    Ok(AggregateOutput {
        stances: summaries,
        aggregate,
        written,
    })
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub base: sensitivity::SweepResult,
    pub coarse: Option<sensitivity::SweepResult>,
    pub ordinal: Option<sensitivity::OrdinalReport>,
    pub written: Vec<PathBuf>,
}

impl SweepOutput {
    pub fn unconverged(&self) -> usize {
        self.base
            .cells
            .iter()
            .chain(self.coarse.iter().flat_map(|c| c.cells.iter()))
            .map(|c| c.summary.unconverged)
            .sum()
    }
}

/// Prior sweep over the selected systems, stances and priors. An empty
/// prior list means the five presets, plus the per-system column when a
/// system priors file is configured. Writes `sweep.csv`, `ordinal.csv`
/// (when the grid allows it) and, with `coarse`, `sweep_coarse.csv` and
/// `comparison.csv`.
pub fn cmd_sweep(
    project: &Project,
    systems: &[String],
    stances: &[String],
    priors: &[String],
    coarse: bool,
    overrides: &RunOverrides,
) -> Result<SweepOutput, ProjectError> {
    let (run, out) = overrides.apply(project)?;
    let systems = if systems.is_empty() { project.systems() } else { systems.to_vec() };
    let panels: Vec<IndicatorPanel> = systems.iter().map(|s| project.panel(s)).collect::<Result<_, _>>()?;
    let selected = project.select_stances(stances)?;

    let mut columns = Vec::new();
    if priors.is_empty() {
        columns.extend(sensitivity::presets().into_iter().map(PriorColumn::Preset));
        if project.config.system_priors.is_some() {
            columns.push(per_system(project));
        }
    } else {
        for label in priors {
            if label == sensitivity::PER_SYSTEM_LABEL {
                columns.push(per_system(project));
            } else {
                let p = sensitivity::preset(label).ok_or_else(|| ProjectError::Unknown {
                    kind: "prior",
                    label: label.clone(),
                })?;
                columns.push(PriorColumn::Preset(p));
            }
        }
    }

    let trees: Vec<CompiledTree> = selected
        .iter()
        .map(|s| project.compile(s, false))
        .collect::<Result<_, _>>()?;
    let base = sweep_columns(&panels, &trees, &columns, &run, crate::assessment::BASE_VARIANT)?;
    let meta = project.meta(run.seed);
    let mut written = Vec::new();
    write(&out, "sweep.csv", &export::sweep_csv(&meta, &base), &mut written)?;

    let ordinal = match ordinal_stability(&base) {
        Ok(r) => {
            write(&out, "ordinal.csv", &export::ordinal_csv(&meta, &r), &mut written)?;
            Some(r)
        }
        Err(SensitivityError::InsufficientGrid { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    let coarse = if coarse {
        let trees: Vec<CompiledTree> = selected
            .iter()
            .map(|s| project.compile(s, true))
            .collect::<Result<_, _>>()?;
        let variant = sweep_columns(&panels, &trees, &columns, &run, COARSE_VARIANT)?;
        write(&out, "sweep_coarse.csv", &export::sweep_csv(&meta, &variant), &mut written)?;
        let cmp = compare_variants(&base, &variant);
        write(&out, "comparison.csv", &export::comparison_csv(&meta, &cmp), &mut written)?;
        Some(variant)
    } else {
        None
    };
    Ok(SweepOutput {
        base,
        coarse,
        ordinal,
        written,
    })
}

fn per_system(project: &Project) -> PriorColumn {
    PriorColumn::PerSystem {
        priors: project.system_priors.clone(),
        fallback: sensitivity::preset(DEFAULT_PRIOR).expect("baseline preset"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parsing() {
        assert_eq!(parse_mode("exact", 1, 1), Ok(InferenceMode::Exact));
        assert!(parse_mode("fast", 1, 1).is_err());
    }

    #[test]
    fn weighting_parsing() {
        assert_eq!(Weighting::parse("equal"), Weighting::Equal);
        assert_eq!(Weighting::parse("r.csv"), Weighting::RatingsFile("r.csv".into()));
    }

    #[test]
    fn missing_files_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("p.toml");
        std::fs::write(&cfg, "surveys = [\"nope.csv\"]\n").unwrap();
        assert!(matches!(ProjectConfig::load(&cfg), Err(ProjectError::Config { .. })));
        std::fs::write(&cfg, "bogus = 1\n").unwrap();
        assert!(matches!(ProjectConfig::load(&cfg), Err(ProjectError::Config { .. })));
    }
}
