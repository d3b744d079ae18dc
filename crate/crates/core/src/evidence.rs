//! Expert credences per indicator, their aggregation into panels, and
//! random realization of binary indicator values.
//!
//! File formats (all CSV, `#` lines after the first are comments):
//!
//! ```text
//! # dcm-survey v1
//! expert_id,system_id,indicator,credence      blank credence = abstain
//!
//! # dcm-overrides v1
//! system_id,indicator,credence                replaces every expert's answer
//!
//! # dcm-panel v1
//! system_id,indicator,mean_credence,n_respondents
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::inference::{IndicatorAssignment, Observation};
use crate::stats::stable_mean;

pub const SURVEY_HEADER: &str = "# dcm-survey v1";
pub const OVERRIDES_HEADER: &str = "# dcm-overrides v1";
pub const PANEL_HEADER: &str = "# dcm-panel v1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvidenceError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("expected first line `{expected}`, found `{found}`")]
    BadHeader { expected: &'static str, found: String },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("line {line}: credence `{value}` is not a number in [0, 1]")]
    OutOfRange { line: u64, value: String },
    #[error("duplicate answer from `{expert}` on `{indicator}` for `{system}`")]
    DuplicateCell {
        expert: String,
        system: String,
        indicator: String,
    },
    #[error("duplicate override of `{indicator}` for `{system}`")]
    DuplicateOverride { system: String, indicator: String },
    #[error("no surveys for system `{0}`")]
    NoSurveys(String),
}

/// One expert's answers about one system. `None` records an explicit
/// abstention, which is different from a credence of zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertSurvey {
    pub expert_id: String,
    pub system_id: String,
    pub responses: BTreeMap<String, Option<f64>>,
}

impl ExpertSurvey {
    pub fn new(expert_id: impl Into<String>, system_id: impl Into<String>) -> Self {
        Self {
            expert_id: expert_id.into(),
            system_id: system_id.into(),
            responses: BTreeMap::new(),
        }
    }

    pub fn answer(mut self, indicator: impl Into<String>, credence: Option<f64>) -> Self {
        if let Some(c) = credence {
            assert!((0.0..=1.0).contains(&c), "credence {c} outside [0, 1]");
        }
        self.responses.insert(indicator.into(), credence);
        self
    }
}

fn read_file(path: &Path) -> Result<String, EvidenceError> {
    std::fs::read_to_string(path).map_err(|e| EvidenceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Check the version line and return a CSV reader over the remainder.
fn versioned_reader<'a>(
    text: &'a str,
    header: &'static str,
) -> Result<csv::Reader<&'a [u8]>, EvidenceError> {
    let first = text.lines().next().unwrap_or("").trim_end();
    if first != header {
        return Err(EvidenceError::BadHeader {
            expected: header,
            found: first.to_string(),
        });
    }
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes()))
}

fn columns<const N: usize>(
    reader: &mut csv::Reader<&[u8]>,
    names: [&'static str; N],
) -> Result<[usize; N], EvidenceError> {
    let headers = reader.headers().map_err(|e| EvidenceError::Csv {
        line: 2,
        message: e.to_string(),
    })?;
    let mut out = [0; N];
    for (slot, name) in out.iter_mut().zip(names) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or(EvidenceError::MissingColumn(name))?;
    }
    Ok(out)
}

fn parse_credence(raw: &str, line: u64) -> Result<Option<f64>, EvidenceError> {
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(c) if (0.0..=1.0).contains(&c) => Ok(Some(c)),
        _ => Err(EvidenceError::OutOfRange {
            line,
            value: raw.to_string(),
        }),
    }
}

fn records<'r, 'a>(
    reader: &'r mut csv::Reader<&'a [u8]>,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord), EvidenceError>> + use<'r, 'a> {
    reader.records().map(|r| {
        r.map(|rec| (rec.position().map_or(0, |p| p.line()), rec))
            .map_err(|e| EvidenceError::Csv {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
    })
}

/// Parse long-format survey rows. Surveys are returned sorted by
/// `(expert_id, system_id)`.
pub fn parse_surveys(text: &str) -> Result<Vec<ExpertSurvey>, EvidenceError> {
    let mut reader = versioned_reader(text, SURVEY_HEADER)?;
    let [ce, cs, ci, cc] = columns(&mut reader, ["expert_id", "system_id", "indicator", "credence"])?;
    let mut by_key: BTreeMap<(String, String), ExpertSurvey> = BTreeMap::new();
    for row in records(&mut reader) {
        let (line, rec) = row?;
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        let (expert, system, indicator) = (field(ce), field(cs), field(ci));
        let credence = parse_credence(rec.get(cc).unwrap_or(""), line)?;
        let survey = by_key
            .entry((expert.clone(), system.clone()))
            .or_insert_with(|| ExpertSurvey::new(&expert, &system));
        if survey.responses.insert(indicator.clone(), credence).is_some() {
            return Err(EvidenceError::DuplicateCell {
                expert,
                system,
                indicator,
            });
        }
    }
    Ok(by_key.into_values().collect())
}

pub fn load_surveys(path: impl AsRef<Path>) -> Result<Vec<ExpertSurvey>, EvidenceError> {
    parse_surveys(&read_file(path.as_ref())?)
}

/// Indicator values specified directly rather than elicited.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    values: BTreeMap<(String, String), f64>,
}

impl Overrides {
    pub fn parse(text: &str) -> Result<Self, EvidenceError> {
        let mut reader = versioned_reader(text, OVERRIDES_HEADER)?;
        let [cs, ci, cc] = columns(&mut reader, ["system_id", "indicator", "credence"])?;
        let mut values = BTreeMap::new();
        for row in records(&mut reader) {
            let (line, rec) = row?;
            let system = rec.get(cs).unwrap_or("").to_string();
            let indicator = rec.get(ci).unwrap_or("").to_string();
            let raw = rec.get(cc).unwrap_or("");
            let credence = parse_credence(raw, line)?.ok_or(EvidenceError::OutOfRange {
                line,
                value: raw.to_string(),
            })?;
            if values.insert((system.clone(), indicator.clone()), credence).is_some() {
                return Err(EvidenceError::DuplicateOverride { system, indicator });
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvidenceError> {
        Self::parse(&read_file(path.as_ref())?)
    }

    pub fn set(&mut self, system: impl Into<String>, indicator: impl Into<String>, credence: f64) {
        self.values.insert((system.into(), indicator.into()), credence);
    }

    /// Overwrite the matching answer in every survey of the affected system.
    pub fn apply(&self, surveys: &mut [ExpertSurvey]) {
        for survey in surveys.iter_mut() {
            for ((system, indicator), &c) in &self.values {
                if *system == survey.system_id {
                    survey.responses.insert(indicator.clone(), Some(c));
                }
            }
        }
    }
}

/// Per-indicator mean credence for one system.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorPanel {
    pub system_id: String,
    /// `None` when every expert abstained.
    pub credences: BTreeMap<String, Option<f64>>,
    pub n_respondents: BTreeMap<String, usize>,
}

impl IndicatorPanel {
    /// A panel from known credences, each counted as one respondent.
    pub fn from_credences<I, K>(system_id: impl Into<String>, credences: I) -> Self
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        let mut panel = Self {
            system_id: system_id.into(),
            credences: BTreeMap::new(),
            n_respondents: BTreeMap::new(),
        };
        for (k, c) in credences {
            assert!((0.0..=1.0).contains(&c), "credence {c} outside [0, 1]");
            let k = k.into();
            panel.credences.insert(k.clone(), Some(c));
            panel.n_respondents.insert(k, 1);
        }
        panel
    }

    pub fn credence(&self, indicator: &str) -> Option<f64> {
        self.credences.get(indicator).copied().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.credences.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{PANEL_HEADER}\nsystem_id,indicator,mean_credence,n_respondents\n");
        for (id, c) in &self.credences {
            let c = c.map(|c| c.to_string()).unwrap_or_default();
            let n = self.n_respondents.get(id).copied().unwrap_or(0);
            out.push_str(&format!("{},{id},{c},{n}\n", self.system_id));
        }
        out
    }
}

/// Systems that appear in `surveys`, sorted.
pub fn systems(surveys: &[ExpertSurvey]) -> Vec<String> {
    let set: BTreeSet<&str> = surveys.iter().map(|s| s.system_id.as_str()).collect();
    set.into_iter().map(String::from).collect()
}

pub fn aggregate_panel(
    surveys: &[ExpertSurvey],
    system_id: &str,
) -> Result<IndicatorPanel, EvidenceError> {
    let mut answers: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut any = false;
    for survey in surveys.iter().filter(|s| s.system_id == system_id) {
        any = true;
        for (id, c) in &survey.responses {
            let slot = answers.entry(id.as_str()).or_default();
            if let Some(c) = c {
                slot.push(*c);
            }
        }
    }
    if !any {
        return Err(EvidenceError::NoSurveys(system_id.to_string()));
    }
    let mut panel = IndicatorPanel {
        system_id: system_id.to_string(),
        credences: BTreeMap::new(),
        n_respondents: BTreeMap::new(),
    };
    for (id, values) in answers {
        let mean = (!values.is_empty()).then(|| stable_mean(&values).clamp(0.0, 1.0));
        panel.credences.insert(id.to_string(), mean);
        panel.n_respondents.insert(id.to_string(), values.len());
    }
    Ok(panel)
}

/// One independent Bernoulli draw per answered indicator, in id order.
/// Unanswered indicators stay missing.
pub fn sample_assignment(panel: &IndicatorPanel, seed: u64) -> IndicatorAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = IndicatorAssignment::new();
    for (id, credence) in &panel.credences {
        let obs = match credence {
            Some(c) => Observation::from_bool(rng.random::<f64>() < *c),
            None => Observation::Missing,
        };
        out.set(id.clone(), obs);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BY_THREE: &str = "# dcm-survey v1
expert_id,system_id,indicator,credence
a,s,x,0.8
a,s,y,0.1
a,s,z,
b,s,x,0.6
b,s,y,0.3
b,s,z,
";

    #[test]
    fn loads_two_surveys() {
        let surveys = parse_surveys(TWO_BY_THREE).unwrap();
        assert_eq!(surveys.len(), 2);
        assert!(surveys.iter().all(|s| s.responses.len() == 3));
        assert_eq!(surveys[0].responses["z"], None);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = TWO_BY_THREE.replace("0.8", "1.3");
        assert!(matches!(parse_surveys(&bad), Err(EvidenceError::OutOfRange { line: 3, .. })));
        let dup = format!("{TWO_BY_THREE}a,s,x,0.5\n");
        assert!(matches!(parse_surveys(&dup), Err(EvidenceError::DuplicateCell { .. })));
        assert!(matches!(
            parse_surveys("expert_id,system_id,indicator,credence\n"),
            Err(EvidenceError::BadHeader { .. })
        ));
        let missing = "# dcm-survey v1\nexpert_id,system_id,credence\n";
        assert_eq!(parse_surveys(missing), Err(EvidenceError::MissingColumn("indicator")));
    }

    #[test]
    fn aggregates_means_and_missingness() {
        let surveys = parse_surveys(TWO_BY_THREE).unwrap();
        let panel = aggregate_panel(&surveys, "s").unwrap();
        assert!((panel.credence("x").unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(panel.credences["z"], None);
        assert_eq!(panel.n_respondents["z"], 0);
        assert_eq!(aggregate_panel(&surveys, "t"), Err(EvidenceError::NoSurveys("t".into())));
    }

    #[test]
    fn single_expert_panel_is_that_survey() {
        let s = ExpertSurvey::new("a", "s").answer("x", Some(0.25)).answer("y", None);
        let panel = aggregate_panel(&[s], "s").unwrap();
        assert_eq!(panel.credence("x"), Some(0.25));
        assert_eq!(panel.credences["y"], None);
    }

    #[test]
    fn overrides_replace_answers() {
        let mut surveys = parse_surveys(TWO_BY_THREE).unwrap();
        let o = Overrides::parse("# dcm-overrides v1\nsystem_id,indicator,credence\ns,z,1\n").unwrap();
        o.apply(&mut surveys);
        let panel = aggregate_panel(&surveys, "s").unwrap();
        assert_eq!(panel.credence("z"), Some(1.0));
        assert!(Overrides::parse("# dcm-overrides v1\nsystem_id,indicator,credence\ns,z,\n").is_err());
    }

    #[test]
    fn degenerate_draws() {
        let panel = IndicatorPanel::from_credences("s", [("one", 1.0), ("zero", 0.0)]);
        for seed in 0..200 {
            let a = sample_assignment(&panel, seed);
            assert_eq!(a.get("one"), Observation::Present);
            assert_eq!(a.get("zero"), Observation::Absent);
        }
    }

    #[test]
    fn panel_export_marks_missing() {
        let surveys = parse_surveys(TWO_BY_THREE).unwrap();
        let csv = aggregate_panel(&surveys, "s").unwrap().to_csv();
        assert!(csv.starts_with(PANEL_HEADER));
        assert!(csv.contains("s,z,,0\n"));
    }
}
